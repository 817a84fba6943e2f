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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isa.hpp"
#include "topology.hpp"

namespace scusim {

class Cluster;

enum class Family : std::uint8_t { SW, TAS, SCU };
enum class PrimitiveKind : std::uint8_t { Barrier, CriticalSection };

const char* to_string(Family f);
const char* to_string(PrimitiveKind k);

struct PrimitiveVariant {
  Family family = Family::SCU;
  PrimitiveKind kind = PrimitiveKind::Barrier;
  unsigned t_crit = 0;  // critical-section body length in cycles

  // "scu-barrier", "tas-crit5", "sw-crit10", ...
  std::string name() const;
  bool operator==(const PrimitiveVariant&) const = default;
};

PrimitiveVariant parse_variant(std::string_view name);

// Register conventions shared by every emitted sequence. r1..r3 are scratch.
namespace rt {
inline constexpr unsigned kScuBase = 4;    // per-core SCU alias base
inline constexpr unsigned kSyncBase = 5;   // TCDM synchronization variables
inline constexpr unsigned kSense = 6;      // local barrier sense
inline constexpr unsigned kTeamSize = 7;
inline constexpr unsigned kNotifyBit = 8;  // event-buffer bit of the wake notifier
inline constexpr unsigned kPeers = 9;      // team mask without the core itself
inline constexpr unsigned kWakeNotifier = 7;
inline constexpr unsigned kBarrier = 0;
inline constexpr unsigned kMutex = 0;
}  // namespace rt

// TCDM words used by the SW and TAS families: lock, arrival count and release
// flag occupy consecutive words and therefore distinct banks.
struct SyncLayout {
  std::uint32_t base = 0;
  std::uint32_t lock() const { return base; }
  std::uint32_t count() const { return base + 4; }
  std::uint32_t flag() const { return base + 8; }
  // First free word after the synchronization variables.
  std::uint32_t scratch() const { return base + 0x40; }
};

SyncLayout default_layout(const ValidatedConfig& cfg);

struct Segment {
  bool sync = false;
  std::string tag;
  std::vector<Instr> code;
};
using Sequence = std::vector<Segment>;

/// Per-core instruction sequences for one instance of the primitive. `uid`
/// makes labels unique when instances are unrolled. Throws UnsupportedTeam.
std::vector<Sequence> emit(const PrimitiveVariant& variant, const std::vector<unsigned>& team,
                           const ValidatedConfig& cfg, unsigned uid = 0);

/// Wraps every synchronization segment (including any address preamble it
/// holds) in begin/end markers.
std::vector<Instr> mark_sync_region(const Sequence& seq);
std::vector<Instr> flatten(const Sequence& seq);

// Number of real instructions in the synchronization segments.
std::size_t sync_instruction_count(const Sequence& seq);

/// Sets the event mask, then aligns the team with a hardware barrier.
std::vector<Instr> prologue(const ValidatedConfig& cfg);

std::uint32_t team_mask(const std::vector<unsigned>& team);
void check_team(const std::vector<unsigned>& team, const ValidatedConfig& cfg);
std::vector<unsigned> first_cores(unsigned n);

/// Preloads the convention registers, clears the synchronization variables
/// and configures barrier 0 for the team.
void setup_team(Cluster& cluster, const std::vector<unsigned>& team, const SyncLayout& layout);

std::string listing(const std::vector<Instr>& code);

}  // namespace scusim
