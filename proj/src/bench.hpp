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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cluster.hpp"
#include "power.hpp"
#include "report.hpp"
#include "runtime.hpp"

namespace scusim {

// Loop structure of a measurement: `warmup` unmeasured instances followed by
// outer x inner measured ones, fully unrolled.
struct Reps {
  unsigned outer = 8;
  unsigned inner = 32;
  unsigned warmup = 32;
  unsigned measured() const { return outer * inner; }
};

struct PrimitiveCost {
  PrimitiveVariant variant;
  unsigned n_cores = 0;
  double raw_cycles = 0.0;  // per instance
  double raw_energy_nj = 0.0;
  double ideal_cycles = 0.0;
  double ideal_energy_nj = 0.0;
  double cycles = 0.0;  // raw - ideal
  double energy_nj = 0.0;
  ActivityCounts raw_counts;    // per instance
  ActivityCounts ideal_counts;  // per instance
  ActivityCounts cost_counts() const;
};

/// Per-cycle activity of a cluster with `n_active` cores executing a
/// 512-instruction nop block and the others gated.
ActivityCounts compute_rate(const ValidatedConfig& cfg, unsigned n_active);

/// Average cost of one primitive instance on the first `n_cores` cores.
PrimitiveCost measure_primitive_cost(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                                     unsigned n_cores, const Reps& reps = {});

// One row of the primitive-cost table.
struct ReferenceCell {
  PrimitiveVariant variant;
  unsigned n_cores = 0;
  double cycles = 0.0;
  double energy_nj = 0.0;
};

/// Reads the reference table file (JSON with a "cells" array).
std::vector<ReferenceCell> load_reference(const std::string& path);
std::vector<ReferenceCell> parse_reference(const std::string& json_text);

// Published minimum SFR of a barrier at a given energy overhead.
struct MinSfrAnchor {
  PrimitiveVariant variant;
  unsigned n_cores = 0;
  double threshold = 0.0;
  std::uint32_t min_sfr = 0;
};

/// The optional "min_sfr_anchors" array of the reference file.
std::vector<MinSfrAnchor> parse_anchors(const std::string& json_text);
std::vector<MinSfrAnchor> load_anchors(const std::string& path);

// Barrier, crit-5, crit-10 for each family, on 2, 4 and 8 cores.
std::vector<std::pair<PrimitiveVariant, unsigned>> table1_cells();
std::vector<PrimitiveCost> table1(const ValidatedConfig& cfg, const Reps& reps = {},
                                  const std::vector<unsigned>& core_counts = {2, 4, 8});
// With a reference table, each row also carries the reference cell and the
// relative deltas (blank when the reference lacks the cell).
std::string table1_csv(const std::vector<PrimitiveCost>& rows,
                       const std::vector<ReferenceCell>* reference = nullptr);
const ReferenceCell* find_reference(const std::vector<ReferenceCell>& reference,
                                    const PrimitiveVariant& v, unsigned n_cores);

/// Calibration against reference energies; counts are simulated with `cfg`.
std::vector<CalibrationCell> calibration_cells(const ValidatedConfig& cfg,
                                               const std::vector<ReferenceCell>& reference,
                                               const Reps& reps = {});

/// One row per anchor: at the minimum SFR the primitive energy equals
/// threshold * min_sfr cycles of n-core compute, so the reference energy
/// divided by threshold * min_sfr is the per-cycle compute energy.
std::vector<CalibrationCell> anchor_cells(const ValidatedConfig& cfg,
                                          const std::vector<ReferenceCell>& reference,
                                          const std::vector<MinSfrAnchor>& anchors);

enum class Metric { Cycles, Energy };
const char* to_string(Metric m);
Metric parse_metric(const std::string& s);

struct SweepSpec {
  PrimitiveVariant primitive;
  std::vector<unsigned> core_counts{2, 4, 8};
  std::vector<std::uint32_t> sfr_cycles{10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
  Reps reps;
  double imbalance_beta = 0.0;
  std::uint64_t seed = 1;
  double overhead_threshold = 0.10;

  // Throws InvalidArgument on empty/unsorted/zero SFR lists or bad counts.
  void check(const ValidatedConfig& cfg) const;
};

struct SweepPoint {
  PrimitiveVariant variant;
  unsigned n_cores = 0;
  std::uint32_t sfr = 0;
  double cycles = 0.0;  // per instance, SFR included
  double energy_nj = 0.0;
  double ideal_cycles = 0.0;
  double ideal_energy_nj = 0.0;
  double rel_cycle_overhead = 0.0;
  double rel_energy_overhead = 0.0;
  double overhead(Metric m) const {
    return m == Metric::Cycles ? rel_cycle_overhead : rel_energy_overhead;
  }
};

/// One point of the overhead curve: every instance is an SFR-long compute
/// block followed by the primitive.
SweepPoint sweep_point(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                       unsigned n_cores, std::uint32_t sfr, const Reps& reps = {},
                       double beta = 0.0, std::uint64_t seed = 1);

std::vector<SweepPoint> sweep_overhead(const ValidatedConfig& cfg, const SweepSpec& spec);
std::string sweep_csv(const std::vector<SweepPoint>& points);

struct MinSfrResult {
  std::uint32_t min_sfr = 0;
  std::uint32_t below = 0;  // largest evaluated SFR above the threshold (0 if none)
  std::uint32_t above = 0;  // == min_sfr
  double overhead_below = 0.0;
  double overhead_at = 0.0;
  unsigned evaluations = 0;
};

struct MinSfrOptions {
  std::vector<std::uint32_t> grid{1,   2,   4,   8,    16,   32,   64,   128,
                                  256, 512, 1024, 2048, 4096, 8192, 16384};
  Reps reps;
};

/// Smallest SFR whose relative overhead is within `threshold`: the grid
/// brackets the crossing and an integer bisection narrows it down. Throws
/// NotReached when even the largest grid point exceeds the threshold.
MinSfrResult min_sfr(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                     unsigned n_cores, double threshold, Metric metric,
                     const MinSfrOptions& options = {});
nlohmann::json to_json(const MinSfrResult& r);

struct ImbalanceSpec {
  Family family = Family::SCU;
  unsigned n_cores = 8;
  std::uint32_t sfr = 1000;
  double beta = 1.0;
  std::uint64_t seed = 1;
  unsigned iterations = 64;
  unsigned warmup = 4;
};

/// Barrier-separated compute blocks whose per-core length is SFR plus a
/// seeded uniform extra on [0, beta*SFR]. The report covers the measured
/// iterations. `periods`, if given, receives every synchronization period of
/// the run.
RunReport run_imbalanced_kernel(const ValidatedConfig& cfg, const ImbalanceSpec& spec,
                                std::vector<std::vector<SyncPeriod>>* periods = nullptr);

// Extra compute cycles per (iteration, core), drawn in iteration-major order.
std::vector<std::vector<std::uint32_t>> imbalance_draws(std::uint32_t sfr, double beta,
                                                        std::uint64_t seed, unsigned iterations,
                                                        unsigned n_cores);

// Lower-level building block shared by the experiments above.
struct InstanceRun {
  std::unique_ptr<Cluster> cluster;
  double cycles_per_instance = 0.0;  // measurement span over all team cores
  ActivityCounts counts_per_instance;
  double energy_per_instance_nj = 0.0;
  RunStatus status = RunStatus::Halted;
};

// `sfr(instance, core)` gives the compute block preceding each instance; 0
// omits it. Throws Deadlock or NotReached if the run does not finish.
InstanceRun run_instances(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                          const std::vector<unsigned>& team, unsigned warmup, unsigned measured,
                          const std::function<std::uint32_t(unsigned, unsigned)>& sfr);

}  // namespace scusim
