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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "power.hpp"
#include "profiler.hpp"

namespace scusim {

class Cluster;

struct CoreReport {
  unsigned core = 0;
  std::uint64_t active_cycles = 0;
  std::uint64_t gated_cycles = 0;
  std::uint64_t sync_total_cycles = 0;
  std::uint64_t sync_active_cycles = 0;
};

struct RunReport {
  std::string label;
  unsigned n_cores = 0;
  std::uint64_t total_cycles = 0;
  std::vector<CoreReport> cores;
  std::array<double, kComponentCount> component_energy_nj{};
  double total_energy_nj = 0.0;
  double avg_power_mw = 0.0;
  double clock_freq = 0.0;
  double t_ideal = 0.0;
  double e_ideal_nj = 0.0;
  double overhead_cycles_rel = 0.0;
  double overhead_energy_rel = 0.0;
  std::uint64_t fifo_overflows = 0;
  std::uint64_t stray_arrivals = 0;
  std::vector<std::string> warnings;

  // Means over the cores listed in `team` (all cores if empty).
  double mean_sync_total(const std::vector<unsigned>& team = {}) const;
  double mean_sync_active(const std::vector<unsigned>& team = {}) const;

  // Fills the two overhead fields from t_ideal / e_ideal_nj.
  void set_ideal(double t_ideal_cycles, double e_ideal);
};

/// Snapshot of a finished run. With `use_window` the report covers the
/// measurement window only (cycles and energy); otherwise the whole run.
RunReport make_report(const Cluster& cluster, bool use_window, std::string label = {});

nlohmann::json to_json(const RunReport& r);
// Inverse of to_json; throws Error(Parse) on missing fields.
RunReport report_from_json(const nlohmann::json& j);
std::string csv_header();
std::string csv_row(const RunReport& r);

}  // namespace scusim
