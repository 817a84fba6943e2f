/*
 * Copyright 2026 The scusim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace scusim {

const char* to_string(RegKind k) {
  switch (k) {
    case RegKind::EvtBuffer: return "EVT_BUFFER";
    case RegKind::EvtBufferClear: return "EVT_BUFFER_CLEAR";
    case RegKind::EvtMask: return "EVT_MASK";
    case RegKind::EvtMaskSet: return "EVT_MASK_SET";
    case RegKind::EvtMaskClear: return "EVT_MASK_CLEAR";
    case RegKind::IrqMask: return "IRQ_MASK";
    case RegKind::IrqMaskSet: return "IRQ_MASK_SET";
    case RegKind::IrqMaskClear: return "IRQ_MASK_CLEAR";
    case RegKind::EvtWait: return "EVT_WAIT";
    case RegKind::EvtWaitClear: return "EVT_WAIT_CLEAR";
    case RegKind::NotifierTarget: return "NOTIFIER_TARGET";
    case RegKind::FsmStatus: return "FSM_STATUS";
    case RegKind::NotifierTrigger: return "NOTIFIER_TRIG";
    case RegKind::NotifierTriggerWait: return "NOTIFIER_TRIG_WAIT";
    case RegKind::NotifierTriggerWaitClear: return "NOTIFIER_TRIG_WAIT_CLEAR";
    case RegKind::BarrierTrigger: return "BARRIER_TRIG";
    case RegKind::BarrierTriggerWait: return "BARRIER_TRIG_WAIT";
    case RegKind::BarrierTriggerWaitClear: return "BARRIER_TRIG_WAIT_CLEAR";
    case RegKind::BarrierStatus: return "BARRIER_STATUS";
    case RegKind::BarrierWorkerMask: return "BARRIER_WORKER_MASK";
    case RegKind::BarrierTargetMask: return "BARRIER_TARGET_MASK";
    case RegKind::MutexLock: return "MUTEX_LOCK";
    case RegKind::MutexState: return "MUTEX_STATE";
    case RegKind::FifoPop: return "FIFO_POP";
    case RegKind::FifoCount: return "FIFO_COUNT";
    case RegKind::FifoWaitPop: return "FIFO_WAIT_POP";
  }
  return "?";
}

bool ScuRegister::is_wait() const {
  switch (kind) {
    case RegKind::EvtWait:
    case RegKind::EvtWaitClear:
    case RegKind::NotifierTriggerWait:
    case RegKind::NotifierTriggerWaitClear:
    case RegKind::BarrierTriggerWait:
    case RegKind::BarrierTriggerWaitClear:
    case RegKind::MutexLock:
    case RegKind::FifoWaitPop:
      return true;
    default:
      return false;
  }
}

bool ScuRegister::clears_on_grant() const {
  switch (kind) {
    case RegKind::EvtWaitClear:
    case RegKind::NotifierTriggerWaitClear:
    case RegKind::BarrierTriggerWaitClear:
    case RegKind::MutexLock:
    case RegKind::FifoWaitPop:
      return true;
    default:
      return false;
  }
}

const ScuRegister* AddressMap::decode(std::uint32_t offset) const {
  auto it = std::lower_bound(registers.begin(), registers.end(), offset,
                             [](const ScuRegister& r, std::uint32_t o) { return r.offset < o; });
  if (it == registers.end() || it->offset != offset) return nullptr;
  return &*it;
}

std::uint32_t AddressMap::offset_of(RegKind kind, unsigned instance) const {
  for (const auto& r : registers)
    if (r.kind == kind && r.instance == instance) return r.offset;
  throw Error(ErrorCode::InvalidArgument, std::string("register ") + to_string(kind) + "[" +
                                              std::to_string(instance) + "] is not mapped");
}

std::string AddressMap::register_table() const {
  std::ostringstream os;
  os << "# SCU register map (per-core alias at 0x" << std::hex << scu_alias_base
     << ", global windows at 0x" << scu_global_base << " + core*0x" << scu_alias_size
     << std::dec << ")\n";
  os << std::left << std::setw(8) << "offset" << std::setw(30) << "name" << std::setw(7)
     << "access"
     << "side effects\n";
  for (const auto& r : registers) {
    std::ostringstream off;
    off << "0x" << std::hex << std::setw(3) << std::setfill('0') << std::right << r.offset;
    os << std::left << std::setw(8) << off.str() << std::setw(30) << r.name << std::setw(7)
       << r.access << r.effect << "\n";
  }
  return os.str();
}

namespace {

ClusterConfig resolve_defaults(ClusterConfig c) {
  if (!c.n_banks) c.n_banks = 2 * c.n_cores;
  if (!c.n_barriers) c.n_barriers = std::max(1u, c.n_cores / 2);
  return c;
}

void add(std::vector<ScuRegister>& regs, std::uint32_t off, RegKind k, unsigned inst,
         std::string name, std::string access, std::string effect) {
  regs.push_back({off, k, inst, std::move(name), std::move(access), std::move(effect)});
}

}  // namespace

AddressMap derive_address_map(const ClusterConfig& c) {
  AddressMap m;
  m.tcdm_size = c.tcdm_size;
  m.n_global_windows = c.n_cores;
  auto& r = m.registers;
  add(r, 0x000, RegKind::EvtBuffer, 0, "EVT_BUFFER", "R", "read event buffer");
  add(r, 0x004, RegKind::EvtBufferClear, 0, "EVT_BUFFER_CLEAR", "W", "clear buffer bits set in wdata");
  add(r, 0x008, RegKind::EvtMask, 0, "EVT_MASK", "RW", "event (wake) mask");
  add(r, 0x00C, RegKind::EvtMaskSet, 0, "EVT_MASK_SET", "W", "mask |= wdata");
  add(r, 0x010, RegKind::EvtMaskClear, 0, "EVT_MASK_CLEAR", "W", "mask &= ~wdata");
  add(r, 0x014, RegKind::IrqMask, 0, "IRQ_MASK", "RW", "interrupt mask");
  add(r, 0x018, RegKind::IrqMaskSet, 0, "IRQ_MASK_SET", "W", "irq mask |= wdata");
  add(r, 0x01C, RegKind::IrqMaskClear, 0, "IRQ_MASK_CLEAR", "W", "irq mask &= ~wdata");
  add(r, 0x020, RegKind::EvtWait, 0, "EVT_WAIT", "R",
      "sleep until buffer & mask != 0; returns masked buffer");
  add(r, 0x024, RegKind::EvtWaitClear, 0, "EVT_WAIT_CLEAR", "R",
      "as EVT_WAIT, then clears the consumed bits");
  add(r, 0x028, RegKind::NotifierTarget, 0, "NOTIFIER_TARGET", "RW",
      "target mask for read-triggered notifier events");
  add(r, 0x02C, RegKind::FsmStatus, 0, "FSM_STATUS", "R", "0 active, 1 sleep, 2 irq-handling");
  for (unsigned i = 0; i < kNotifierEvents; ++i) {
    auto n = std::to_string(i);
    add(r, 0x040 + 4 * i, RegKind::NotifierTrigger, i, "NOTIFIER" + n + "_TRIG", "RW",
        "W: notify cores in wdata (0 = all); R: notify cores in NOTIFIER_TARGET");
    add(r, 0x060 + 4 * i, RegKind::NotifierTriggerWait, i, "NOTIFIER" + n + "_TRIG_WAIT", "R",
        "read-trigger notifier, then EVT_WAIT");
    add(r, 0x080 + 4 * i, RegKind::NotifierTriggerWaitClear, i,
        "NOTIFIER" + n + "_TRIG_WAIT_CLEAR", "R", "read-trigger notifier, then EVT_WAIT_CLEAR");
  }
  for (unsigned b = 0; b < *c.n_barriers; ++b) {
    auto n = std::to_string(b);
    std::uint32_t base = 0x100 + 0x20 * b;
    add(r, base + 0x00, RegKind::BarrierTrigger, b, "BARRIER" + n + "_TRIG", "RW",
        "arrive without waiting (R returns status)");
    add(r, base + 0x04, RegKind::BarrierTriggerWait, b, "BARRIER" + n + "_TRIG_WAIT", "R",
        "arrive, sleep until barrier event");
    add(r, base + 0x08, RegKind::BarrierTriggerWaitClear, b, "BARRIER" + n + "_TRIG_WAIT_CLEAR",
        "R", "arrive, sleep until barrier event, clear it");
    add(r, base + 0x0C, RegKind::BarrierStatus, b, "BARRIER" + n + "_STATUS", "R",
        "arrival bits");
    add(r, base + 0x10, RegKind::BarrierWorkerMask, b, "BARRIER" + n + "_WORKER_MASK", "RW",
        "cores that must arrive");
    add(r, base + 0x14, RegKind::BarrierTargetMask, b, "BARRIER" + n + "_TARGET_MASK", "RW",
        "cores released on firing");
  }
  for (unsigned x = 0; x < c.n_mutexes; ++x) {
    auto n = std::to_string(x);
    std::uint32_t base = 0x300 + 0x8 * x;
    add(r, base + 0x0, RegKind::MutexLock, x, "MUTEX" + n + "_LOCK", "RW",
        "R: try-lock, sleep until elected, returns message; W: unlock passing wdata");
    add(r, base + 0x4, RegKind::MutexState, x, "MUTEX" + n + "_STATE", "R",
        "bit31 locked, bits 0..7 owner, bits 8..15 queue length");
  }
  add(r, 0x380, RegKind::FifoPop, 0, "FIFO_POP", "R", "pop oldest event id (0xFFFFFFFF if empty)");
  add(r, 0x384, RegKind::FifoCount, 0, "FIFO_COUNT", "R", "number of queued ids");
  add(r, 0x388, RegKind::FifoWaitPop, 0, "FIFO_WAIT_POP", "R",
      "sleep until FIFO non-empty, then pop");
  std::sort(r.begin(), r.end(),
            [](const ScuRegister& a, const ScuRegister& b) { return a.offset < b.offset; });
  return m;
}

std::vector<std::string> config_violations(const ClusterConfig& raw) {
  std::vector<std::string> v;
  ClusterConfig c = resolve_defaults(raw);
  if (c.n_cores < 1 || c.n_cores > kMaxCores)
    v.push_back("n_cores out of range: " + std::to_string(c.n_cores) + " not in [1,16]");
  if (*c.n_banks < c.n_cores)
    v.push_back("n_banks must be >= n_cores (banking factor >= 1)");
  if (*c.n_barriers < 1 || *c.n_barriers > kMaxBarriers)
    v.push_back("n_barriers out of range [1,16]");
  if (c.n_mutexes < 1 || c.n_mutexes > kMaxMutexes) v.push_back("n_mutexes out of range [1,8]");
  if (c.n_event_lines != kEventLines) v.push_back("n_event_lines must be 32");
  if (c.n_ext_events < 1 || c.n_ext_events > 256) v.push_back("n_ext_events must lie in [1,256]");
  if (c.fifo_depth < 1) v.push_back("fifo_depth must be >= 1");
  if (c.mem_latency < 1) v.push_back("mem_latency must be >= 1");
  if (c.tas_latency < c.mem_latency) v.push_back("tas_latency must be >= mem_latency");
  if (c.periph_latency < 1) v.push_back("periph_latency must be >= 1");
  if (c.tcdm_size == 0 || c.tcdm_size % 4 != 0 || c.tcdm_size > (1u << 20))
    v.push_back("tcdm_size must be a non-zero multiple of 4 no larger than 1 MiB");
  if (!(c.clock_freq > 0.0)) v.push_back("clock_freq must be positive");
  // Event lines: notifier 0..7, barrier 8, mutex 9, fifo 10 are fixed and
  // disjoint; nothing to check beyond the fixed line count.
  static_assert(kNotifierLineFirst + kNotifierEvents <= kBarrierLine);
  static_assert(kBarrierLine < kMutexLine && kMutexLine < kFifoLine &&
                kFifoLine < kExternalLineFirst && kExternalLineFirst < kEventLines);
  try {
    c.power.check();
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  return v;
}

ValidatedConfig validate(const ClusterConfig& raw) {
  auto v = config_violations(raw);
  if (!v.empty()) throw Error(ErrorCode::Config, v.front());
  ClusterConfig c = resolve_defaults(raw);
  AddressMap m = derive_address_map(c);
  return ValidatedConfig(std::move(c), std::move(m));
}

ValidatedConfig ValidatedConfig::with_power(const PowerParams& p) const {
  p.check();
  ClusterConfig c = cfg_;
  c.power = p;
  return ValidatedConfig(std::move(c), map_);
}

namespace {

using nlohmann::json;

json power_to_json(const PowerParams& p) {
  json j;
  j["gated_residual_fraction"] = p.gated_residual_fraction;
  for (auto c : all_components()) {
    j[to_string(c)] = {{"active", p[c].active}, {"idle", p[c].idle}, {"leakage", p[c].leakage}};
  }
  return j;
}

void power_from_json(const json& j, PowerParams& p) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "power must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "gated_residual_fraction") {
      p.gated_residual_fraction = it.value().get<double>();
      continue;
    }
    bool found = false;
    for (auto c : all_components()) {
      if (it.key() != to_string(c)) continue;
      found = true;
      for (auto f = it.value().begin(); f != it.value().end(); ++f) {
        if (f.key() == "active") p[c].active = f.value().get<double>();
        else if (f.key() == "idle") p[c].idle = f.value().get<double>();
        else if (f.key() == "leakage") p[c].leakage = f.value().get<double>();
        else throw Error(ErrorCode::Parse, "unknown power field " + it.key() + "." + f.key());
      }
    }
    if (!found) throw Error(ErrorCode::Parse, "unknown power component " + it.key());
  }
}

unsigned as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw Error(ErrorCode::Parse, key + " must be a non-negative integer");
  return v.get<unsigned>();
}

}  // namespace

ClusterConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Parse, "config root must be an object");
  ClusterConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "n_cores") c.n_cores = as_count(v, k);
      else if (k == "n_banks") c.n_banks = as_count(v, k);
      else if (k == "n_barriers") c.n_barriers = as_count(v, k);
      else if (k == "n_mutexes") c.n_mutexes = as_count(v, k);
      else if (k == "n_event_lines") c.n_event_lines = as_count(v, k);
      else if (k == "n_ext_events") c.n_ext_events = as_count(v, k);
      else if (k == "fifo_depth") c.fifo_depth = as_count(v, k);
      else if (k == "tas_latency") c.tas_latency = as_count(v, k);
      else if (k == "mem_latency") c.mem_latency = as_count(v, k);
      else if (k == "periph_latency") c.periph_latency = as_count(v, k);
      else if (k == "branch_penalty") c.branch_penalty = as_count(v, k);
      else if (k == "jump_penalty") c.jump_penalty = as_count(v, k);
      else if (k == "load_use_penalty") c.load_use_penalty = as_count(v, k);
      else if (k == "tcdm_size") c.tcdm_size = as_count(v, k);
      else if (k == "clock_freq") c.clock_freq = v.get<double>();
      else if (k == "power") power_from_json(v, c.power);
      else throw Error(ErrorCode::Parse, "unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad config value: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ClusterConfig& raw) {
  ClusterConfig c = resolve_defaults(raw);
  json j;
  j["n_cores"] = c.n_cores;
  j["n_banks"] = *c.n_banks;
  j["n_barriers"] = *c.n_barriers;
  j["n_mutexes"] = c.n_mutexes;
  j["n_event_lines"] = c.n_event_lines;
  j["n_ext_events"] = c.n_ext_events;
  j["fifo_depth"] = c.fifo_depth;
  j["tas_latency"] = c.tas_latency;
  j["mem_latency"] = c.mem_latency;
  j["periph_latency"] = c.periph_latency;
  j["branch_penalty"] = c.branch_penalty;
  j["jump_penalty"] = c.jump_penalty;
  j["load_use_penalty"] = c.load_use_penalty;
  j["tcdm_size"] = c.tcdm_size;
  j["clock_freq"] = c.clock_freq;
  j["power"] = power_to_json(c.power);
  return j.dump(2);
}

ClusterConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_override(ClusterConfig& c, std::string_view key, std::string_view value) {
  // Reuse the JSON path so overrides and files share validation.
  json j = json::parse(config_to_json(c));
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    throw Error(ErrorCode::Parse, "override value for " + std::string(key) + " is not a number");
  }
  std::string k(key);
  if (k.rfind("power.", 0) == 0) {
    auto rest = k.substr(6);
    auto dot = rest.find('.');
    if (dot == std::string::npos) j["power"][rest] = parsed;
    else j["power"][rest.substr(0, dot)][rest.substr(dot + 1)] = parsed;
  } else {
    if (!j.contains(k)) throw Error(ErrorCode::Parse, "unknown config key '" + k + "'");
    j[k] = parsed;
  }
  bool banks_default = !c.n_banks.has_value() && k != "n_banks";
  bool barriers_default = !c.n_barriers.has_value() && k != "n_barriers";
  if (banks_default) j.erase("n_banks");
  if (barriers_default) j.erase("n_barriers");
  c = config_from_json(j.dump());
}

}  // namespace scusim
