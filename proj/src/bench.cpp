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

#include "bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "error.hpp"

namespace scusim {

namespace {

constexpr std::int32_t kNopBlock = 512;

double nj(const ActivityCounts& a, const ValidatedConfig& cfg) {
  return a.energy_pj(cfg.power()) * 1e-3;
}

std::uint64_t cycle_budget(unsigned team, unsigned instances, std::uint64_t work) {
  return 10'000 + work + static_cast<std::uint64_t>(instances) * (400ull * team + 200);
}

}  // namespace

ActivityCounts PrimitiveCost::cost_counts() const {
  ActivityCounts c = raw_counts;
  c -= ideal_counts;
  return c;
}

InstanceRun run_instances(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                          const std::vector<unsigned>& team, unsigned warmup, unsigned measured,
                          const std::function<std::uint32_t(unsigned, unsigned)>& sfr) {
  if (measured == 0) throw Error(ErrorCode::InvalidArgument, "need at least one measured instance");
  check_team(team, cfg);
  InstanceRun out;
  out.cluster = std::make_unique<Cluster>(cfg);
  Cluster& cl = *out.cluster;
  const unsigned total = warmup + measured;
  std::vector<std::vector<Instr>> code(team.size(), prologue(cfg));
  std::uint64_t work = 0;
  for (unsigned i = 0; i < total; ++i) {
    auto seqs = emit(variant, team, cfg, i);
    std::uint32_t longest = 0;
    for (std::size_t t = 0; t < team.size(); ++t) {
      auto& c = code[t];
      if (i == warmup) c.push_back(Instr::measure_begin());
      std::uint32_t s = sfr(i, team[t]);
      longest = std::max(longest, s);
      if (s > 0) c.push_back(Instr::compute(static_cast<std::int32_t>(s)));
      auto body = mark_sync_region(seqs[t]);
      c.insert(c.end(), body.begin(), body.end());
    }
    work += longest + static_cast<std::uint64_t>(team.size()) * variant.t_crit;
  }
  for (std::size_t t = 0; t < team.size(); ++t) {
    code[t].push_back(Instr::measure_end());
    code[t].push_back(Instr::halt());
    cl.load_program(team[t], Program(std::move(code[t])));
  }
  setup_team(cl, team, default_layout(cfg));
  out.status = cl.run(cycle_budget(static_cast<unsigned>(team.size()), total, work));
  if (out.status == RunStatus::Deadlock)
    throw Error(ErrorCode::Deadlock, variant.name() + " deadlocked at cycle " +
                                         std::to_string(cl.cycle()));
  if (out.status == RunStatus::CycleLimit)
    throw Error(ErrorCode::NotReached, variant.name() + " did not finish within " +
                                           std::to_string(cl.cycle()) + " cycles");

  std::uint64_t first = UINT64_MAX, last = 0;
  for (const auto& m : cl.markers()) {
    if (m.kind == Op::MeasureBegin) first = std::min(first, m.cycle);
    if (m.kind == Op::MeasureEnd) last = std::max(last, m.cycle);
  }
  out.cycles_per_instance = static_cast<double>(last - first) / measured;
  out.counts_per_instance = cl.power().window().scaled(1.0 / measured);
  out.energy_per_instance_nj = nj(out.counts_per_instance, cfg);
  return out;
}

ActivityCounts compute_rate(const ValidatedConfig& cfg, unsigned n_active) {
  auto team = first_cores(n_active);
  check_team(team, cfg);
  Cluster cl(cfg);
  for (auto k : team)
    cl.load_program(k, Program({Instr::measure_begin(), Instr::compute(kNopBlock),
                                Instr::measure_end(), Instr::halt()}));
  cl.run(10 * kNopBlock);
  const auto n = cl.power().window_cycles();
  if (n == 0) throw Error(ErrorCode::NotReached, "reference block produced no window");
  return cl.power().window().scaled(1.0 / static_cast<double>(n));
}

PrimitiveCost measure_primitive_cost(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                                     unsigned n_cores, const Reps& reps) {
  auto team = first_cores(n_cores);
  auto run = run_instances(cfg, variant, team, reps.warmup, reps.measured(),
                           [](unsigned, unsigned) { return 0u; });
  PrimitiveCost c;
  c.variant = variant;
  c.n_cores = n_cores;
  c.raw_cycles = run.cycles_per_instance;
  c.raw_counts = run.counts_per_instance;
  c.raw_energy_nj = run.energy_per_instance_nj;
  if (variant.kind == PrimitiveKind::CriticalSection && variant.t_crit > 0) {
    c.ideal_cycles = static_cast<double>(n_cores) * variant.t_crit;
    c.ideal_counts = compute_rate(cfg, 1).scaled(c.ideal_cycles);
    c.ideal_energy_nj = nj(c.ideal_counts, cfg);
  }
  c.cycles = c.raw_cycles - c.ideal_cycles;
  c.energy_nj = c.raw_energy_nj - c.ideal_energy_nj;
  return c;
}

std::vector<ReferenceCell> parse_reference(const std::string& text) {
  std::vector<ReferenceCell> out;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& c : j.at("cells")) {
      ReferenceCell r;
      r.variant = parse_variant(c.at("variant").get<std::string>());
      r.n_cores = c.at("n_cores").get<unsigned>();
      r.cycles = c.at("cycles").get<double>();
      r.energy_nj = c.at("energy_nj").get<double>();
      out.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("reference table: ") + e.what());
  }
  return out;
}

std::vector<ReferenceCell> load_reference(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_reference(ss.str());
}

std::vector<MinSfrAnchor> parse_anchors(const std::string& text) {
  std::vector<MinSfrAnchor> out;
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.contains("min_sfr_anchors")) return out;
    for (const auto& a : j.at("min_sfr_anchors")) {
      MinSfrAnchor m;
      m.variant = parse_variant(a.at("variant").get<std::string>());
      m.n_cores = a.at("n_cores").get<unsigned>();
      m.threshold = a.at("threshold").get<double>();
      m.min_sfr = a.at("min_sfr").get<std::uint32_t>();
      if (a.value("metric", std::string("energy")) != "energy")
        throw Error(ErrorCode::Parse, "min_sfr anchors must use the energy metric");
      if (m.threshold <= 0 || m.min_sfr == 0)
        throw Error(ErrorCode::Parse, "min_sfr anchor needs positive threshold and SFR");
      out.push_back(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("reference anchors: ") + e.what());
  }
  return out;
}

std::vector<MinSfrAnchor> load_anchors(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_anchors(ss.str());
}

std::vector<std::pair<PrimitiveVariant, unsigned>> table1_cells() {
  std::vector<std::pair<PrimitiveVariant, unsigned>> cells;
  const PrimitiveVariant kinds[] = {{Family::SCU, PrimitiveKind::Barrier, 0},
                                    {Family::SCU, PrimitiveKind::CriticalSection, 5},
                                    {Family::SCU, PrimitiveKind::CriticalSection, 10}};
  for (auto k : kinds)
    for (auto f : {Family::SCU, Family::TAS, Family::SW})
      for (unsigned n : {2u, 4u, 8u}) {
        auto v = k;
        v.family = f;
        cells.emplace_back(v, n);
      }
  return cells;
}

std::vector<PrimitiveCost> table1(const ValidatedConfig& cfg, const Reps& reps,
                                  const std::vector<unsigned>& core_counts) {
  for (auto n : core_counts)
    if (n < 1 || n > cfg.n_cores())
      throw Error(ErrorCode::InvalidArgument, "core count " + std::to_string(n) +
                                                  " outside 1.." + std::to_string(cfg.n_cores()));
  std::vector<PrimitiveCost> rows;
  const PrimitiveVariant kinds[] = {{Family::SCU, PrimitiveKind::Barrier, 0},
                                    {Family::SCU, PrimitiveKind::CriticalSection, 5},
                                    {Family::SCU, PrimitiveKind::CriticalSection, 10}};
  for (auto k : kinds)
    for (auto f : {Family::SCU, Family::TAS, Family::SW})
      for (unsigned n : core_counts) {
        auto v = k;
        v.family = f;
        rows.push_back(measure_primitive_cost(cfg, v, n, reps));
      }
  return rows;
}

const ReferenceCell* find_reference(const std::vector<ReferenceCell>& reference,
                                    const PrimitiveVariant& v, unsigned n_cores) {
  for (const auto& c : reference)
    if (c.variant == v && c.n_cores == n_cores) return &c;
  return nullptr;
}

std::string table1_csv(const std::vector<PrimitiveCost>& rows,
                       const std::vector<ReferenceCell>* reference) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "variant,family,kind,t_crit,n_cores,cycles,energy_nj,raw_cycles,raw_energy_nj,"
        "ideal_cycles,ideal_energy_nj";
  if (reference) os << ",ref_cycles,ref_energy_nj,delta_cycles_rel,delta_energy_rel";
  os << '\n';
  for (const auto& r : rows) {
    os << r.variant.name() << ',' << to_string(r.variant.family) << ','
       << to_string(r.variant.kind) << ',' << r.variant.t_crit << ',' << r.n_cores << ','
       << r.cycles << ',' << r.energy_nj << ',' << r.raw_cycles << ',' << r.raw_energy_nj << ','
       << r.ideal_cycles << ',' << r.ideal_energy_nj;
    if (reference) {
      if (const auto* c = find_reference(*reference, r.variant, r.n_cores))
        os << ',' << c->cycles << ',' << c->energy_nj << ',' << (r.cycles - c->cycles) / c->cycles
           << ',' << (r.energy_nj - c->energy_nj) / c->energy_nj;
      else
        os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

std::vector<CalibrationCell> calibration_cells(const ValidatedConfig& cfg,
                                               const std::vector<ReferenceCell>& reference,
                                               const Reps& reps) {
  std::vector<CalibrationCell> cells;
  for (const auto& r : reference) {
    if (r.n_cores > cfg.n_cores()) continue;
    auto cost = measure_primitive_cost(cfg, r.variant, r.n_cores, reps);
    cells.push_back({r.variant.name() + "@" + std::to_string(r.n_cores), cost.cost_counts(),
                     r.energy_nj});
  }
  return cells;
}

std::vector<CalibrationCell> anchor_cells(const ValidatedConfig& cfg,
                                          const std::vector<ReferenceCell>& reference,
                                          const std::vector<MinSfrAnchor>& anchors) {
  std::vector<CalibrationCell> cells;
  for (const auto& a : anchors) {
    if (a.n_cores > cfg.n_cores()) continue;
    const auto* r = find_reference(reference, a.variant, a.n_cores);
    if (!r) throw Error(ErrorCode::Parse, "anchor " + a.variant.name() + " has no reference cell");
    cells.push_back({"compute@" + std::to_string(a.n_cores) + "/" + a.variant.name(),
                     compute_rate(cfg, a.n_cores), r->energy_nj / (a.threshold * a.min_sfr)});
  }
  return cells;
}

const char* to_string(Metric m) { return m == Metric::Cycles ? "cycles" : "energy"; }

Metric parse_metric(const std::string& s) {
  if (s == "cycles") return Metric::Cycles;
  if (s == "energy") return Metric::Energy;
  throw Error(ErrorCode::InvalidArgument, "metric must be cycles or energy");
}

void SweepSpec::check(const ValidatedConfig& cfg) const {
  if (sfr_cycles.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs SFR sizes");
  for (std::size_t i = 0; i < sfr_cycles.size(); ++i) {
    if (sfr_cycles[i] == 0) throw Error(ErrorCode::InvalidArgument, "SFR sizes must be positive");
    if (i && sfr_cycles[i] <= sfr_cycles[i - 1])
      throw Error(ErrorCode::InvalidArgument, "SFR sizes must be strictly increasing");
  }
  if (core_counts.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs core counts");
  for (auto n : core_counts)
    if (n < 1 || n > cfg.n_cores())
      throw Error(ErrorCode::InvalidArgument, "core count " + std::to_string(n) + " out of range");
  if (reps.outer < 1 || reps.inner < 1) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
  if (imbalance_beta < 0) throw Error(ErrorCode::InvalidArgument, "imbalance beta must be >= 0");
}

std::vector<std::vector<std::uint32_t>> imbalance_draws(std::uint32_t sfr, double beta,
                                                        std::uint64_t seed, unsigned iterations,
                                                        unsigned n_cores) {
  std::mt19937_64 gen(seed);
  const auto hi = static_cast<std::uint64_t>(std::floor(beta * sfr));
  std::vector<std::vector<std::uint32_t>> d(iterations, std::vector<std::uint32_t>(n_cores, 0));
  if (hi == 0) return d;
  for (auto& row : d)
    for (auto& x : row) x = static_cast<std::uint32_t>(gen() % (hi + 1));
  return d;
}

SweepPoint sweep_point(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                       unsigned n_cores, std::uint32_t sfr, const Reps& reps, double beta,
                       std::uint64_t seed) {
  auto team = first_cores(n_cores);
  const unsigned total = reps.warmup + reps.measured();
  auto draws = imbalance_draws(sfr, beta, seed, total, n_cores);
  double extra = 0.0;
  for (unsigned i = reps.warmup; i < total; ++i)
    for (auto x : draws[i]) extra += x;
  extra /= static_cast<double>(reps.measured()) * n_cores;
  auto run = run_instances(cfg, variant, team, reps.warmup, reps.measured(),
                           [&](unsigned i, unsigned k) { return sfr + draws[i][k]; });

  SweepPoint p;
  p.variant = variant;
  p.n_cores = n_cores;
  p.sfr = sfr;
  p.cycles = run.cycles_per_instance;
  p.energy_nj = run.energy_per_instance_nj;
  const double work = sfr + extra;
  const double e_n = nj(compute_rate(cfg, n_cores), cfg);
  if (variant.kind == PrimitiveKind::CriticalSection) {
    const double serial = static_cast<double>(n_cores) * variant.t_crit;
    p.ideal_cycles = std::max(work + variant.t_crit, serial);
    // Ideal schedule: cluster background for ideal_cycles plus each core busy
    // for its work and its body.
    const double e_1 = nj(compute_rate(cfg, 1), cfg);
    const double busy = static_cast<double>(n_cores) * (work + variant.t_crit);
    if (n_cores == 1) {
      p.ideal_energy_nj = p.ideal_cycles * e_1;
    } else {
      const double per_core = (e_n - e_1) / static_cast<double>(n_cores - 1);
      p.ideal_energy_nj = p.ideal_cycles * (e_1 - per_core) + busy * per_core;
    }
  } else {
    p.ideal_cycles = work;
    p.ideal_energy_nj = work * e_n;
  }
  p.rel_cycle_overhead = (p.cycles - p.ideal_cycles) / p.ideal_cycles;
  p.rel_energy_overhead = (p.energy_nj - p.ideal_energy_nj) / p.ideal_energy_nj;
  return p;
}

std::vector<SweepPoint> sweep_overhead(const ValidatedConfig& cfg, const SweepSpec& spec) {
  spec.check(cfg);
  std::vector<SweepPoint> out;
  for (auto n : spec.core_counts)
    for (auto s : spec.sfr_cycles)
      out.push_back(
          sweep_point(cfg, spec.primitive, n, s, spec.reps, spec.imbalance_beta, spec.seed));
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "variant,family,kind,t_crit,n_cores,sfr,cycles,energy_nj,ideal_cycles,ideal_energy_nj,"
        "rel_cycle_overhead,rel_energy_overhead\n";
  for (const auto& p : points)
    os << p.variant.name() << ',' << to_string(p.variant.family) << ','
       << to_string(p.variant.kind) << ',' << p.variant.t_crit << ',' << p.n_cores << ','
       << p.sfr << ',' << p.cycles << ',' << p.energy_nj << ',' << p.ideal_cycles << ','
       << p.ideal_energy_nj << ',' << p.rel_cycle_overhead << ',' << p.rel_energy_overhead
       << '\n';
  return os.str();
}

MinSfrResult min_sfr(const ValidatedConfig& cfg, const PrimitiveVariant& variant,
                     unsigned n_cores, double threshold, Metric metric,
                     const MinSfrOptions& options) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  auto grid = options.grid;
  if (grid.empty() || grid.front() == 0)
    throw Error(ErrorCode::InvalidArgument, "SFR grid must hold positive sizes");
  std::sort(grid.begin(), grid.end());
  MinSfrResult r;
  std::map<std::uint32_t, double> seen;
  auto overhead = [&](std::uint32_t s) {
    auto it = seen.find(s);
    if (it != seen.end()) return it->second;
    ++r.evaluations;
    double v = sweep_point(cfg, variant, n_cores, s, options.reps).overhead(metric);
    seen.emplace(s, v);
    return v;
  };
  std::size_t j = 0;
  while (j < grid.size() && overhead(grid[j]) > threshold) ++j;
  if (j == grid.size())
    throw Error(ErrorCode::NotReached,
                variant.name() + " stays above " + std::to_string(threshold) +
                    " overhead up to SFR " + std::to_string(grid.back()));
  std::uint32_t hi = grid[j];
  std::uint32_t lo = j ? grid[j - 1] : 0;
  while (lo && hi - lo > 1) {
    std::uint32_t mid = lo + (hi - lo) / 2;
    if (overhead(mid) <= threshold) hi = mid;
    else lo = mid;
  }
  r.min_sfr = hi;
  r.above = hi;
  r.below = lo;
  r.overhead_at = seen.at(hi);
  r.overhead_below = lo ? seen.at(lo) : 0.0;
  return r;
}

nlohmann::json to_json(const MinSfrResult& r) {
  return {{"min_sfr", r.min_sfr},
          {"bracket", {r.below, r.above}},
          {"overhead_below", r.overhead_below},
          {"overhead_at", r.overhead_at},
          {"evaluations", r.evaluations}};
}

RunReport run_imbalanced_kernel(const ValidatedConfig& cfg, const ImbalanceSpec& spec,
                                std::vector<std::vector<SyncPeriod>>* periods) {
  if (spec.iterations == 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  if (spec.beta < 0) throw Error(ErrorCode::InvalidArgument, "beta must be >= 0");
  auto team = first_cores(spec.n_cores);
  const unsigned total = spec.warmup + spec.iterations;
  auto draws = imbalance_draws(spec.sfr, spec.beta, spec.seed, total, spec.n_cores);
  PrimitiveVariant v{spec.family, PrimitiveKind::Barrier, 0};
  auto run = run_instances(cfg, v, team, spec.warmup, spec.iterations,
                           [&](unsigned i, unsigned k) { return spec.sfr + draws[i][k]; });
  std::ostringstream label;
  label << "imbalance-" << to_string(spec.family) << "-n" << spec.n_cores << "-sfr" << spec.sfr
        << "-beta" << spec.beta << "-seed" << spec.seed;
  auto rep = make_report(*run.cluster, true, label.str());
  double t_ideal = 0.0;
  for (unsigned i = spec.warmup; i < total; ++i)
    t_ideal += spec.sfr + *std::max_element(draws[i].begin(), draws[i].end());
  rep.set_ideal(t_ideal, t_ideal * nj(compute_rate(cfg, spec.n_cores), cfg));
  if (periods)
    *periods = extract_periods(run.cluster->markers(), run.cluster->clock_timeline(),
                               run.cluster->n_cores());
  return rep;
}

}  // namespace scusim
