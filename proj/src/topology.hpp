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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "power.hpp"

namespace scusim {

inline constexpr unsigned kMaxCores = 16;
inline constexpr unsigned kEventLines = 32;
inline constexpr unsigned kNotifierEvents = 8;
inline constexpr unsigned kMaxBarriers = 16;
inline constexpr unsigned kMaxMutexes = 8;

// Event-line assignment inside every base unit.
inline constexpr unsigned kNotifierLineFirst = 0;  // lines 0..7
inline constexpr unsigned kBarrierLine = 8;
inline constexpr unsigned kMutexLine = 9;
inline constexpr unsigned kFifoLine = 10;
inline constexpr unsigned kExternalLineFirst = 11;  // 11..31

/// Static cluster description as read from a config file. Unset optionals take
/// their defaults during validation.
struct ClusterConfig {
  unsigned n_cores = 8;
  std::optional<unsigned> n_banks;     // default 2 * n_cores
  std::optional<unsigned> n_barriers;  // default max(1, n_cores / 2)
  unsigned n_mutexes = 1;
  unsigned n_event_lines = kEventLines;
  unsigned n_ext_events = 256;
  unsigned fifo_depth = 16;
  unsigned tas_latency = 3;
  unsigned mem_latency = 1;
  unsigned periph_latency = 2;
  unsigned branch_penalty = 0;    // bubble cycles after a taken conditional branch
  unsigned jump_penalty = 0;      // bubble cycles after an unconditional jump
  unsigned load_use_penalty = 0;  // stall when the next instruction reads a loaded register
  std::uint32_t tcdm_size = 64 * 1024;
  double clock_freq = 350e6;
  PowerParams power = PowerParams::defaults();
};

enum class RegKind {
  EvtBuffer,
  EvtBufferClear,
  EvtMask,
  EvtMaskSet,
  EvtMaskClear,
  IrqMask,
  IrqMaskSet,
  IrqMaskClear,
  EvtWait,
  EvtWaitClear,
  NotifierTarget,
  FsmStatus,
  NotifierTrigger,
  NotifierTriggerWait,
  NotifierTriggerWaitClear,
  BarrierTrigger,
  BarrierTriggerWait,
  BarrierTriggerWaitClear,
  BarrierStatus,
  BarrierWorkerMask,
  BarrierTargetMask,
  MutexLock,
  MutexState,
  FifoPop,
  FifoCount,
  FifoWaitPop,
};

const char* to_string(RegKind k);

struct ScuRegister {
  std::uint32_t offset = 0;
  RegKind kind = RegKind::EvtBuffer;
  unsigned instance = 0;  // notifier event / barrier / mutex index
  std::string name;
  std::string access;     // "R", "W", "RW"
  std::string effect;

  bool is_wait() const;
  bool clears_on_grant() const;
  bool operator==(const ScuRegister&) const = default;
};

/// Physical address layout. All SCU regions sit outside the TCDM range and
/// outside its TAS alias.
struct AddressMap {
  std::uint32_t tcdm_base = 0x1000'0000;
  std::uint32_t tcdm_size = 64 * 1024;
  unsigned tas_bit = 20;
  std::uint32_t scu_alias_base = 0x1020'0000;
  std::uint32_t scu_alias_size = 0x400;
  std::uint32_t scu_global_base = 0x1020'4000;  // + core * scu_alias_size
  unsigned n_global_windows = 0;
  std::vector<ScuRegister> registers;  // sorted by offset

  std::uint32_t tas_flag() const { return 1u << tas_bit; }
  bool in_tcdm(std::uint32_t addr) const {
    return addr >= tcdm_base && addr - tcdm_base < tcdm_size;
  }
  bool in_alias(std::uint32_t addr) const {
    return addr >= scu_alias_base && addr - scu_alias_base < scu_alias_size;
  }
  bool in_global(std::uint32_t addr) const {
    return addr >= scu_global_base &&
           addr - scu_global_base < scu_alias_size * n_global_windows;
  }

  const ScuRegister* decode(std::uint32_t offset) const;
  std::uint32_t offset_of(RegKind kind, unsigned instance = 0) const;

  // Text table of the register map (offset, name, access, side effect).
  std::string register_table() const;

  bool operator==(const AddressMap&) const = default;
};

/// Frozen configuration with every default resolved and the address map
/// derived. Only obtainable through validate().
class ValidatedConfig {
 public:
  unsigned n_cores() const { return cfg_.n_cores; }
  unsigned n_banks() const { return *cfg_.n_banks; }
  unsigned n_barriers() const { return *cfg_.n_barriers; }
  unsigned n_mutexes() const { return cfg_.n_mutexes; }
  unsigned n_event_lines() const { return cfg_.n_event_lines; }
  unsigned n_ext_events() const { return cfg_.n_ext_events; }
  unsigned fifo_depth() const { return cfg_.fifo_depth; }
  unsigned tas_latency() const { return cfg_.tas_latency; }
  unsigned mem_latency() const { return cfg_.mem_latency; }
  unsigned periph_latency() const { return cfg_.periph_latency; }
  unsigned branch_penalty() const { return cfg_.branch_penalty; }
  unsigned jump_penalty() const { return cfg_.jump_penalty; }
  unsigned load_use_penalty() const { return cfg_.load_use_penalty; }
  double clock_freq() const { return cfg_.clock_freq; }
  const PowerParams& power() const { return cfg_.power; }
  const AddressMap& address_map() const { return map_; }
  const ClusterConfig& raw() const { return cfg_; }

  // Same topology, different power parameters (power is not part of the
  // structural invariants beyond PowerParams::check()).
  ValidatedConfig with_power(const PowerParams& p) const;

 private:
  friend ValidatedConfig validate(const ClusterConfig&);
  ValidatedConfig(ClusterConfig c, AddressMap m) : cfg_(std::move(c)), map_(std::move(m)) {}

  ClusterConfig cfg_;
  AddressMap map_;
};

/// Resolves defaults, checks every invariant (first violation wins) and
/// derives the address map. Throws Error(Config).
ValidatedConfig validate(const ClusterConfig& config);

/// Lists all violated invariants without throwing; empty means valid.
std::vector<std::string> config_violations(const ClusterConfig& config);

AddressMap derive_address_map(const ClusterConfig& resolved);

// JSON-compatible config file I/O. Unknown keys are rejected.
ClusterConfig config_from_json(std::string_view json_text);
std::string config_to_json(const ClusterConfig& config);
ClusterConfig load_config_file(const std::string& path);

/// Applies a single "key=value" override (same names as the JSON keys; power
/// values use dotted paths such as power.core.active).
void apply_override(ClusterConfig& config, std::string_view key, std::string_view value);

}  // namespace scusim
