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
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "topology.hpp"

namespace scusim {

enum class FsmState : std::uint8_t { Active, Sleep, IrqHandling };

const char* to_string(FsmState s);

// An extension-triggering wait access whose grant is still withheld.
struct PendingWait {
  std::uint32_t offset = 0;
  RegKind kind = RegKind::EvtWait;
  unsigned instance = 0;
  bool triggered = false;
};

struct ScuBaseUnitState {
  std::uint32_t event_buffer = 0;
  std::uint32_t event_mask = 0;
  std::uint32_t irq_mask = 0;
  FsmState fsm = FsmState::Active;
  std::uint32_t notifier_target_reg = 0;
  std::optional<PendingWait> pending_elw;
  // Wait interrupted by a handler; resumed without re-triggering.
  std::optional<PendingWait> suspended_elw;
};

struct BarrierExtState {
  std::uint32_t status = 0;
  std::uint32_t worker_mask = 0;
  std::uint32_t target_mask = 0;
  std::uint64_t firings = 0;
};

struct MutexExtState {
  std::optional<unsigned> owner;
  std::deque<unsigned> wait_queue;
  std::uint32_t message = 0;
};

struct EventFifoState {
  std::deque<std::uint8_t> fifo;
  bool line_asserted = false;
  std::uint64_t overflows = 0;
};

struct TriggerRecord {
  std::uint64_t cycle = 0;
  unsigned core = 0;
  RegKind kind = RegKind::EvtWait;
  unsigned instance = 0;
};

struct ScuAccessResult {
  bool granted = true;  // false: grant withheld until wait_ready()
  std::uint32_t rdata = 0;
};

/// Base units, extensions and the event-line fabric. Extension outputs are
/// registered: a trigger in cycle t drives its event lines in t+1, which the
/// event buffers latch at the end of t+1.
class Scu {
 public:
  explicit Scu(const ValidatedConfig& cfg);

  /// Register access through core `core`'s private link (`via_port` false) or
  /// through the peripheral port addressing base unit `core` (`via_port`
  /// true). Wait offsets reached through the port trigger and return
  /// immediately.
  ScuAccessResult access(std::uint64_t cycle, unsigned core, std::uint32_t offset, bool write,
                         std::uint32_t wdata, bool via_port);

  // True when the pending wait of `core` may be granted this cycle.
  bool wait_ready(unsigned core) const;
  // Grants the pending wait: returns the response word and applies clears.
  std::uint32_t grant(unsigned core);

  bool irq_pending(unsigned core) const;
  // Takes the lowest pending interrupt line, clears its buffer bit and parks
  // any pending wait. Returns the line.
  unsigned take_irq(unsigned core);
  void irq_return(unsigned core);

  void set_fsm(unsigned core, FsmState s) { units_.at(core).fsm = s; }

  // Asserts event lines for the current cycle (latched at its end).
  void assert_lines(unsigned core, std::uint32_t lines);
  // External event for the FIFO. Returns false on overflow.
  bool push_external(std::uint8_t id);

  // Latches this cycle's lines into the buffers and advances registered
  // outputs.
  void end_cycle();

  const ScuBaseUnitState& unit(unsigned core) const { return units_.at(core); }
  ScuBaseUnitState& unit(unsigned core) { return units_.at(core); }
  const BarrierExtState& barrier(unsigned b) const { return barriers_.at(b); }
  BarrierExtState& barrier(unsigned b) { return barriers_.at(b); }
  const MutexExtState& mutex(unsigned m) const { return mutexes_.at(m); }
  const EventFifoState& event_fifo() const { return fifo_; }

  std::uint32_t lines_now(unsigned core) const { return lines_now_.at(core); }
  // Whether base unit `core` saw any access or line activity this cycle.
  bool unit_active(unsigned core) const { return activity_.at(core) != 0; }

  std::uint64_t stray_arrivals() const { return stray_arrivals_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void set_trigger_log(bool on) { log_triggers_ = on; }
  const std::vector<TriggerRecord>& trigger_log() const { return trigger_log_; }

 private:
  std::uint32_t all_cores() const { return n_cores_ >= 32 ? ~0u : (1u << n_cores_) - 1; }
  std::uint32_t wait_bits(const PendingWait& w, const ScuBaseUnitState& u) const;
  void trigger(std::uint64_t cycle, unsigned core, const ScuRegister& r, std::uint32_t wdata,
               bool write);
  void notify(unsigned event, std::uint32_t targets);
  void barrier_arrive(std::uint64_t cycle, unsigned b, unsigned core);
  void mutex_unlock(unsigned m, unsigned core, std::uint32_t message);
  std::uint32_t read_register(unsigned core, const ScuRegister& r);
  void write_register(unsigned core, const ScuRegister& r, std::uint32_t wdata);

  AddressMap map_;
  unsigned n_cores_;
  unsigned fifo_depth_;
  std::vector<ScuBaseUnitState> units_;
  std::vector<BarrierExtState> barriers_;
  std::vector<MutexExtState> mutexes_;
  EventFifoState fifo_;
  std::vector<std::uint32_t> lines_now_;
  std::vector<std::uint32_t> lines_next_;
  std::vector<std::uint8_t> activity_;
  std::uint64_t now_ = 0;
  std::uint64_t stray_arrivals_ = 0;
  std::vector<std::string> warnings_;
  bool log_triggers_ = false;
  std::vector<TriggerRecord> trigger_log_;
};

}  // namespace scusim
