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
#include <string>
#include <string_view>
#include <vector>

#include "cluster.hpp"

namespace scusim {

struct SyncPeriod {
  unsigned core_id = 0;
  std::uint64_t begin_cycle = 0;  // inclusive
  std::uint64_t end_cycle = 0;    // inclusive
  std::uint64_t active_cycles_within = 0;
  std::string primitive_kind;

  std::uint64_t length() const { return end_cycle - begin_cycle + 1; }
};

// Optional restriction of the analysis to a cycle window [begin, end).
struct CycleWindow {
  std::uint64_t begin = 0;
  std::uint64_t end = UINT64_MAX;
};

/// Turns sync markers into per-core periods. A period covers the cycles from
/// the one in which its first instruction issued to the one in which its last
/// instruction retired. Throws MalformedTrace on unbalanced markers.
std::vector<std::vector<SyncPeriod>> extract_periods(
    const std::vector<Marker>& markers,
    const std::vector<std::vector<ClockInterval>>& timeline, unsigned n_cores);

// Clock-enabled cycles of one core inside [begin, end).
std::uint64_t active_in(const std::vector<ClockInterval>& timeline, std::uint64_t begin,
                        std::uint64_t end);

struct CoreSyncSummary {
  std::uint64_t execution_cycles = 0;
  std::uint64_t active_cycles = 0;
  std::uint64_t gated_cycles = 0;
  std::uint64_t sync_total = 0;
  std::uint64_t sync_active = 0;
  std::uint64_t periods = 0;
  double sync_total_pct = 0.0;
  double sync_active_pct = 0.0;
};

struct SyncSummary {
  std::vector<CoreSyncSummary> cores;
  double avg_sync_total = 0.0;
  double avg_sync_active = 0.0;
  double avg_sync_total_pct = 0.0;
  double avg_sync_active_pct = 0.0;
};

/// Per-core totals and percentages relative to execution cycles, averaged
/// over `cores` (all cores when empty).
SyncSummary summarize(const std::vector<std::vector<SyncPeriod>>& periods,
                      const std::vector<std::vector<ClockInterval>>& timeline,
                      const CycleWindow& window, const std::vector<unsigned>& cores = {});

void write_periods_csv(std::ostream& os, const std::vector<std::vector<SyncPeriod>>& periods);

/// Rebuilds markers and clock timelines from an NDJSON trace produced by
/// Cluster::set_trace. Throws MalformedTrace.
struct ParsedTrace {
  std::vector<Marker> markers;
  std::vector<std::vector<ClockInterval>> timeline;
  unsigned n_cores = 0;
};
ParsedTrace parse_trace(std::string_view ndjson);

}  // namespace scusim
