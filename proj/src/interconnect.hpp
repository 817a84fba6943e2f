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
#include <optional>
#include <span>
#include <vector>

#include "topology.hpp"

namespace scusim {

enum class MemKind : std::uint8_t { Read, Write, TasRead };

const char* to_string(MemKind k);

struct MemRequest {
  unsigned core_id = 0;
  std::uint32_t address = 0;  // absolute TCDM byte address, TAS bit already stripped
  MemKind kind = MemKind::Read;
  std::uint32_t wdata = 0;
};

struct MemGrant {
  unsigned core_id = 0;
  unsigned bank = 0;
  MemKind kind = MemKind::Read;
  std::uint32_t rdata = 0;
};

struct BankState {
  unsigned rr_pointer = 0;
  // Last cycle in which the bank is still busy writing back a TAS result.
  std::optional<std::uint64_t> tas_busy_until;
  std::optional<std::uint32_t> pending_tas_writeback;
};

/// Word-interleaved multi-banked scratchpad behind the logarithmic
/// interconnect. Each bank grants one request per cycle, round-robin across
/// requesting cores; a granted TAS read blocks its bank while the -1 value is
/// written back.
class Tcdm {
 public:
  explicit Tcdm(const ValidatedConfig& cfg);

  unsigned n_banks() const { return static_cast<unsigned>(banks_.size()); }
  unsigned bank_of(std::uint32_t address) const;

  /// Arbitrates all requests presented in `cycle` (at most one per core).
  /// Granted requests take effect immediately; the rest must be presented
  /// again next cycle.
  std::vector<MemGrant> arbitrate(std::uint64_t cycle, std::span<const MemRequest> requests);

  std::uint32_t peek(std::uint32_t address) const;
  void poke(std::uint32_t address, std::uint32_t value);

  const BankState& bank(unsigned b) const { return banks_.at(b); }
  // Bank-cycles with a grant or a TAS writeback in the most recent cycle.
  const std::vector<std::uint8_t>& bank_activity() const { return activity_; }

  void dump_hex(std::ostream& os) const;

 private:
  std::size_t index(std::uint32_t address) const;

  std::uint32_t base_;
  unsigned n_cores_;
  unsigned tas_latency_;
  std::vector<std::uint32_t> words_;
  std::vector<BankState> banks_;
  std::vector<std::uint8_t> activity_;
};

}  // namespace scusim
