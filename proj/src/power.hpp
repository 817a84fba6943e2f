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
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scusim {

enum class Component : std::size_t { Core, ClockTree, TcdmBank, Interconnect, Scu };
inline constexpr std::size_t kComponentCount = 5;

enum class UnitState : std::size_t { Active, Idle, Gated };
inline constexpr std::size_t kUnitStateCount = 3;

const char* to_string(Component c);
std::array<Component, kComponentCount> all_components();

/// Per-unit energy of one cycle in each state, in picojoules. `leakage` is what
/// a gated (or otherwise unclocked) unit burns; `idle` is clocked without
/// activity; `active` is clocked with activity.
struct ComponentEnergy {
  double active = 0.0;
  double idle = 0.0;
  double leakage = 0.0;

  bool operator==(const ComponentEnergy&) const = default;
};

struct PowerParams {
  std::array<ComponentEnergy, kComponentCount> energy{};
  // Share of a gated core's clock-tree active energy that still toggles in the
  // ungated trunk.
  double gated_residual_fraction = 0.1;

  ComponentEnergy& operator[](Component c) { return energy[static_cast<std::size_t>(c)]; }
  const ComponentEnergy& operator[](Component c) const {
    return energy[static_cast<std::size_t>(c)];
  }

  // Pre-calibration values: an 8-core cluster with all cores executing draws
  // roughly 20 mW at 350 MHz.
  static PowerParams defaults();

  // Throws Error(Config) when leakage <= idle <= active or non-negativity fails.
  void check() const;

  PowerParams scaled(double factor) const;

  bool operator==(const PowerParams&) const = default;
};

/// Unit-cycles spent in each state, per component. Counts are doubles because
/// per-instance averages and ideal-subtracted cells are fractional.
struct ActivityCounts {
  std::array<std::array<double, kUnitStateCount>, kComponentCount> n{};

  double& at(Component c, UnitState s) {
    return n[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
  }
  double at(Component c, UnitState s) const {
    return n[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
  }

  ActivityCounts& operator+=(const ActivityCounts& o);
  ActivityCounts& operator-=(const ActivityCounts& o);
  ActivityCounts scaled(double factor) const;

  double energy_pj(const PowerParams& p) const;
  double component_energy_pj(Component c, const PowerParams& p) const;
};

/// Per-cycle accumulator. The simulator reports one activity sample per cycle
/// and the accumulator only integrates while its window is open, the same way
/// a benchmark timer gates activity recording.
class PowerAccumulator {
 public:
  void set_window(bool open) { window_open_ = open; }
  bool window_open() const { return window_open_; }

  void accumulate(const ActivityCounts& cycle_activity) {
    total_ += cycle_activity;
    if (window_open_) {
      window_ += cycle_activity;
      ++window_cycles_;
    }
  }

  const ActivityCounts& total() const { return total_; }
  const ActivityCounts& window() const { return window_; }
  std::uint64_t window_cycles() const { return window_cycles_; }

 private:
  bool window_open_ = false;
  ActivityCounts total_;
  ActivityCounts window_;
  std::uint64_t window_cycles_ = 0;
};

// Calibration file: a small TOML-like text with one section per component.
std::string format_calibration(const PowerParams& p, std::string_view comment = {});
PowerParams parse_calibration(std::string_view text);
PowerParams load_calibration_file(const std::string& path);

struct CalibrationCell {
  std::string name;
  ActivityCounts counts;  // per-instance activity, ideal already subtracted
  double target_nj = 0.0;
};

struct CalibrationResult {
  PowerParams params;
  std::vector<double> fitted_nj;
  std::vector<double> residual_rel;  // (fitted - target) / target, 0 for zero targets
  double rms_rel = 0.0;
  double max_abs_rel = 0.0;
  bool ill_conditioned = false;
};

struct CalibrationOptions {
  double gated_residual_fraction = 0.1;
  double ridge = 1e-6;             // relative to the mean squared column norm
  double ill_conditioned_rms = 0.15;
};

/// Weighted non-negative least squares fit of the per-state energies. The
/// energies are reparameterised as leakage + idle increment + active
/// increment, all non-negative, so the fitted parameters always satisfy
/// leakage <= idle <= active. Rows are weighted by 1/target (relative error).
CalibrationResult calibrate(std::span<const CalibrationCell> cells,
                            const CalibrationOptions& options = {});

/// Lawson-Hanson NNLS on a dense row-major system: min ||A x - b|| s.t. x >= 0.
std::vector<double> nnls(const std::vector<double>& a_rowmajor, std::size_t rows,
                         std::size_t cols, const std::vector<double>& b);

}  // namespace scusim
