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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "interconnect.hpp"
#include "isa.hpp"
#include "power.hpp"
#include "scu.hpp"
#include "topology.hpp"

namespace scusim {

struct Marker {
  std::uint64_t cycle = 0;  // cycle in which the next real instruction was ready
  unsigned core = 0;
  Op kind = Op::SyncBegin;
  std::string tag;
};

// One wait transaction on the private link.
struct ElwRecord {
  unsigned core = 0;
  std::uint32_t pc = 0;
  std::uint32_t offset = 0;
  std::uint64_t issue = 0;
  std::optional<std::uint64_t> grant;
  bool immediate = false;
  bool interrupted = false;
};

// Half-open [begin, end) stretch of clock-enabled cycles.
using ClockInterval = std::pair<std::uint64_t, std::uint64_t>;

enum class RunStatus { Halted, Deadlock, CycleLimit };

const char* to_string(RunStatus s);

/// The cycle-level simulator: cores, TCDM interconnect, peripheral port and
/// SCU stepped in a fixed phase order each cycle (wake/IRQ resolution, core
/// issue, TCDM arbitration, port arbitration, accounting, event latching).
class Cluster {
 public:
  explicit Cluster(ValidatedConfig cfg);

  const ValidatedConfig& config() const { return cfg_; }
  unsigned n_cores() const { return cfg_.n_cores(); }

  void load_program(unsigned core, Program program);
  const Program& program(unsigned core) const { return programs_.at(core); }
  void set_register(unsigned core, unsigned reg, std::uint32_t value);

  Tcdm& tcdm() { return tcdm_; }
  const Tcdm& tcdm() const { return tcdm_; }
  Scu& scu() { return scu_; }
  const Scu& scu() const { return scu_; }

  // Stimuli applied at the start of the given cycle.
  void schedule_event_line(std::uint64_t cycle, unsigned core, unsigned line);
  void schedule_fifo_push(std::uint64_t cycle, std::uint8_t id);

  // Newline-delimited JSON records for every clocked core-cycle and marker.
  void set_trace(std::ostream* os) { trace_ = os; }

  void step();
  RunStatus run(std::uint64_t max_cycles);

  std::uint64_t cycle() const { return cycle_; }
  const CoreState& core(unsigned k) const { return cores_.at(k); }
  CycleKind last_kind(unsigned k) const { return last_kind_.at(k); }
  bool all_halted() const;
  std::optional<std::uint64_t> halt_cycle(unsigned k) const { return halt_cycle_.at(k); }

  const std::vector<Marker>& markers() const { return markers_; }
  const std::vector<ElwRecord>& elw_log() const { return elw_log_; }
  const std::vector<std::vector<ClockInterval>>& clock_timeline() const { return timeline_; }
  const PowerAccumulator& power() const { return power_; }
  const ActivityCounts& last_activity() const { return last_activity_; }

 private:
  void issue(unsigned k, std::uint64_t c, std::vector<MemRequest>& reqs);
  void memory_op(unsigned k, std::uint64_t c, const Instr& in, std::vector<MemRequest>& reqs);
  void retire_response(unsigned k);
  void take_irq(unsigned k, std::uint64_t c);
  void wake(unsigned k, std::uint64_t c);
  void mark(unsigned k, std::uint64_t c, const Instr& in);
  void account(std::uint64_t c);
  bool deadlocked() const;

  ValidatedConfig cfg_;
  Tcdm tcdm_;
  Scu scu_;
  std::vector<Program> programs_;
  std::vector<CoreState> cores_;
  std::uint64_t cycle_ = 0;

  std::vector<CycleKind> last_kind_;
  std::vector<std::uint8_t> port_req_;
  std::vector<std::uint8_t> tcdm_req_;
  std::vector<std::uint32_t> trace_pc_;
  std::vector<std::optional<std::uint64_t>> halt_cycle_;
  std::vector<std::optional<std::size_t>> open_elw_;
  unsigned port_rr_ = 0;

  std::multimap<std::uint64_t, std::pair<unsigned, unsigned>> line_stimuli_;
  std::multimap<std::uint64_t, std::uint8_t> fifo_stimuli_;

  std::vector<Marker> markers_;
  std::vector<ElwRecord> elw_log_;
  std::vector<std::vector<ClockInterval>> timeline_;
  int measure_open_ = 0;
  PowerAccumulator power_;
  ActivityCounts last_activity_;
  std::ostream* trace_ = nullptr;
};

}  // namespace scusim
