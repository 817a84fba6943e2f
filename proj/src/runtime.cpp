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

#include "runtime.hpp"

#include <algorithm>
#include <charconv>

#include "cluster.hpp"
#include "error.hpp"

namespace scusim {

const char* to_string(Family f) {
  switch (f) {
    case Family::SW: return "sw";
    case Family::TAS: return "tas";
    case Family::SCU: return "scu";
  }
  return "?";
}

const char* to_string(PrimitiveKind k) {
  return k == PrimitiveKind::Barrier ? "barrier" : "crit";
}

std::string PrimitiveVariant::name() const {
  std::string s = std::string(to_string(family)) + "-" + to_string(kind);
  if (kind == PrimitiveKind::CriticalSection) s += std::to_string(t_crit);
  return s;
}

PrimitiveVariant parse_variant(std::string_view name) {
  auto dash = name.find('-');
  if (dash == std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "variant must look like scu-barrier or sw-crit5");
  auto fam = name.substr(0, dash);
  auto rest = name.substr(dash + 1);
  PrimitiveVariant v;
  if (fam == "sw") v.family = Family::SW;
  else if (fam == "tas") v.family = Family::TAS;
  else if (fam == "scu") v.family = Family::SCU;
  else throw Error(ErrorCode::InvalidArgument, "unknown family '" + std::string(fam) + "'");
  if (rest == "barrier") {
    v.kind = PrimitiveKind::Barrier;
  } else if (rest.substr(0, 4) == "crit") {
    v.kind = PrimitiveKind::CriticalSection;
    auto num = rest.substr(4);
    if (!num.empty() && num[0] == ':') num = num.substr(1);
    if (num.empty()) {
      v.t_crit = 0;
    } else {
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v.t_crit);
      if (ec != std::errc() || p != num.data() + num.size())
        throw Error(ErrorCode::InvalidArgument, "bad critical-section length in '" +
                                                    std::string(name) + "'");
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown primitive '" + std::string(rest) + "'");
  }
  return v;
}

SyncLayout default_layout(const ValidatedConfig& cfg) {
  return SyncLayout{cfg.address_map().tcdm_base};
}

std::uint32_t team_mask(const std::vector<unsigned>& team) {
  std::uint32_t m = 0;
  for (auto c : team) m |= 1u << c;
  return m;
}

std::vector<unsigned> first_cores(unsigned n) {
  std::vector<unsigned> t(n);
  for (unsigned i = 0; i < n; ++i) t[i] = i;
  return t;
}

void check_team(const std::vector<unsigned>& team, const ValidatedConfig& cfg) {
  if (team.empty()) throw Error(ErrorCode::UnsupportedTeam, "team is empty");
  if (team.size() > cfg.n_cores())
    throw Error(ErrorCode::UnsupportedTeam, "team of " + std::to_string(team.size()) +
                                                " exceeds " + std::to_string(cfg.n_cores()) +
                                                " cores");
  std::vector<unsigned> sorted = team;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorCode::UnsupportedTeam, "team lists a core twice");
  if (sorted.back() >= cfg.n_cores())
    throw Error(ErrorCode::UnsupportedTeam, "team member " + std::to_string(sorted.back()) +
                                                " does not exist");
}

namespace {

using I = Instr;

std::int32_t off(const ValidatedConfig& cfg, RegKind k, unsigned inst = 0) {
  return static_cast<std::int32_t>(cfg.address_map().offset_of(k, inst));
}

std::string lbl(const char* base, unsigned uid) { return std::string(base) + "_" + std::to_string(uid); }

// Sleep on the wake notifier until it fires; r2 is clobbered.
void idle_wait(std::vector<Instr>& c, const ValidatedConfig& cfg, const std::string& loop) {
  c.push_back(I::label(loop));
  c.push_back(I::elw(2, rt::kScuBase, off(cfg, RegKind::EvtWaitClear)));
  c.push_back(I::alu(Op::And, 2, 2, rt::kNotifyBit));
  c.push_back(I::branch(Op::Beq, 2, 0, loop));
}

Sequence barrier(Family f, const ValidatedConfig& cfg, unsigned uid) {
  std::vector<Instr> c;
  if (f == Family::SCU) {
    c.push_back(I::elw(1, rt::kScuBase, off(cfg, RegKind::BarrierTriggerWaitClear, rt::kBarrier)));
    return {{true, "barrier", std::move(c)}};
  }
  const auto lock = lbl("lock", uid), got = lbl("got", uid), last = lbl("last", uid),
             wait = lbl("wait", uid), done = lbl("done", uid);
  const std::int32_t notify = off(cfg, RegKind::NotifierTrigger, rt::kWakeNotifier);
  c.push_back(I::alu_imm(Op::Xori, rt::kSense, rt::kSense, 1));
  if (f == Family::SW) {
    c.push_back(I::label(lock));
    c.push_back(I::tas(1, rt::kSyncBase, 0));
    c.push_back(I::branch(Op::Bne, 1, 0, lock));
  } else {
    c.push_back(I::tas(1, rt::kSyncBase, 0));
    c.push_back(I::branch(Op::Beq, 1, 0, got));
    idle_wait(c, cfg, lock);
    c.push_back(I::tas(1, rt::kSyncBase, 0));
    c.push_back(I::branch(Op::Bne, 1, 0, lock));
    c.push_back(I::label(got));
  }
  c.push_back(I::load(2, rt::kSyncBase, 4));
  c.push_back(I::alu_imm(Op::Addi, 2, 2, 1));
  c.push_back(I::branch(Op::Beq, 2, rt::kTeamSize, last));
  c.push_back(I::store(2, rt::kSyncBase, 4));
  c.push_back(I::store(0, rt::kSyncBase, 0));
  if (f == Family::TAS) c.push_back(I::store(rt::kPeers, rt::kScuBase, notify));
  c.push_back(I::label(wait));
  if (f == Family::TAS) c.push_back(I::elw(2, rt::kScuBase, off(cfg, RegKind::EvtWaitClear)));
  c.push_back(I::load(3, rt::kSyncBase, 8));
  c.push_back(I::branch(Op::Bne, 3, rt::kSense, wait));
  c.push_back(I::jump(done));
  c.push_back(I::label(last));
  c.push_back(I::store(0, rt::kSyncBase, 4));
  c.push_back(I::store(rt::kSense, rt::kSyncBase, 8));
  c.push_back(I::store(0, rt::kSyncBase, 0));
  if (f == Family::TAS) c.push_back(I::store(rt::kPeers, rt::kScuBase, notify));
  c.push_back(I::label(done));
  return {{true, "barrier", std::move(c)}};
}

Sequence critical(Family f, unsigned t_crit, const ValidatedConfig& cfg, unsigned uid) {
  std::vector<Instr> enter, leave;
  const std::int32_t mutex = off(cfg, RegKind::MutexLock, rt::kMutex);
  switch (f) {
    case Family::SCU:
      enter.push_back(I::elw(1, rt::kScuBase, mutex));
      leave.push_back(I::store(0, rt::kScuBase, mutex));
      break;
    case Family::SW: {
      auto retry = lbl("retry", uid);
      enter.push_back(I::label(retry));
      enter.push_back(I::tas(1, rt::kSyncBase, 0));
      enter.push_back(I::branch(Op::Bne, 1, 0, retry));
      leave.push_back(I::store(0, rt::kSyncBase, 0));
      break;
    }
    case Family::TAS: {
      auto idle = lbl("idle", uid), in = lbl("in", uid);
      enter.push_back(I::tas(1, rt::kSyncBase, 0));
      enter.push_back(I::branch(Op::Beq, 1, 0, in));
      idle_wait(enter, cfg, idle);
      enter.push_back(I::tas(1, rt::kSyncBase, 0));
      enter.push_back(I::branch(Op::Bne, 1, 0, idle));
      enter.push_back(I::label(in));
      leave.push_back(I::store(0, rt::kSyncBase, 0));
      leave.push_back(I::store(rt::kPeers, rt::kScuBase,
                               off(cfg, RegKind::NotifierTrigger, rt::kWakeNotifier)));
      break;
    }
  }
  Sequence s;
  s.push_back({true, "crit_enter", std::move(enter)});
  if (t_crit > 0) s.push_back({false, "", {I::compute(static_cast<std::int32_t>(t_crit))}});
  s.push_back({true, "crit_leave", std::move(leave)});
  return s;
}

}  // namespace

std::vector<Sequence> emit(const PrimitiveVariant& v, const std::vector<unsigned>& team,
                           const ValidatedConfig& cfg, unsigned uid) {
  check_team(team, cfg);
  Sequence s = v.kind == PrimitiveKind::Barrier ? barrier(v.family, cfg, uid)
                                                : critical(v.family, v.t_crit, cfg, uid);
  return std::vector<Sequence>(team.size(), s);
}

std::vector<Instr> mark_sync_region(const Sequence& seq) {
  std::vector<Instr> out;
  for (const auto& seg : seq) {
    if (seg.code.empty()) continue;
    if (seg.sync) out.push_back(Instr::sync_begin(seg.tag));
    out.insert(out.end(), seg.code.begin(), seg.code.end());
    if (seg.sync) out.push_back(Instr::sync_end());
  }
  return out;
}

std::vector<Instr> flatten(const Sequence& seq) {
  std::vector<Instr> out;
  for (const auto& seg : seq) out.insert(out.end(), seg.code.begin(), seg.code.end());
  return out;
}

std::size_t sync_instruction_count(const Sequence& seq) {
  std::size_t n = 0;
  for (const auto& seg : seq)
    if (seg.sync)
      for (const auto& in : seg.code)
        if (!is_pseudo(in.op)) ++n;
  return n;
}

std::vector<Instr> prologue(const ValidatedConfig& cfg) {
  const std::uint32_t mask =
      (1u << (kNotifierLineFirst + rt::kWakeNotifier)) | (1u << kBarrierLine) | (1u << kMutexLine);
  return {
      I::li(1, static_cast<std::int32_t>(mask)),
      I::store(1, rt::kScuBase, off(cfg, RegKind::EvtMaskSet)),
      I::elw(1, rt::kScuBase, off(cfg, RegKind::BarrierTriggerWaitClear, rt::kBarrier)),
  };
}

void setup_team(Cluster& cluster, const std::vector<unsigned>& team, const SyncLayout& layout) {
  const auto& cfg = cluster.config();
  check_team(team, cfg);
  const std::uint32_t tm = team_mask(team);
  for (auto k : team) {
    cluster.set_register(k, rt::kScuBase, cfg.address_map().scu_alias_base);
    cluster.set_register(k, rt::kSyncBase, layout.base);
    cluster.set_register(k, rt::kSense, 0);
    cluster.set_register(k, rt::kTeamSize, static_cast<std::uint32_t>(team.size()));
    cluster.set_register(k, rt::kNotifyBit, 1u << (kNotifierLineFirst + rt::kWakeNotifier));
    cluster.set_register(k, rt::kPeers, tm & ~(1u << k));
  }
  cluster.tcdm().poke(layout.lock(), 0);
  cluster.tcdm().poke(layout.count(), 0);
  cluster.tcdm().poke(layout.flag(), 0);
  auto& b = cluster.scu().barrier(rt::kBarrier);
  b.worker_mask = tm;
  b.target_mask = tm;
  b.status = 0;
}

std::string listing(const std::vector<Instr>& code) {
  std::string out;
  for (const auto& in : code) {
    if (in.op != Op::Label) out += "  ";
    out += format_instr(in);
    out += '\n';
  }
  return out;
}

}  // namespace scusim
