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

#include <doctest.h>

#include <cmath>
#include <random>

#include "bench.hpp"
#include "error.hpp"
#include "power.hpp"
#include "support.hpp"

using namespace scusim;
using I = Instr;

namespace {

// Least squares on the columns in `subset` by Gaussian elimination on the
// normal equations; nullopt if singular.
std::optional<std::vector<double>> restricted_ls(const std::vector<double>& a, std::size_t m,
                                                 std::size_t n, const std::vector<double>& b,
                                                 unsigned subset) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < n; ++j)
    if (subset >> j & 1) cols.push_back(j);
  const std::size_t k = cols.size();
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < m; ++i) g[r][c] += a[i * n + cols[r]] * a[i * n + cols[c]];
    for (std::size_t i = 0; i < m; ++i) g[r][k] += a[i * n + cols[r]] * b[i];
  }
  for (std::size_t p = 0; p < k; ++p) {
    std::size_t piv = p;
    for (std::size_t r = p + 1; r < k; ++r)
      if (std::abs(g[r][p]) > std::abs(g[piv][p])) piv = r;
    if (std::abs(g[piv][p]) < 1e-12) return std::nullopt;
    std::swap(g[p], g[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == p) continue;
      double f = g[r][p] / g[p][p];
      for (std::size_t c = p; c <= k; ++c) g[r][c] -= f * g[p][c];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = 0; r < k; ++r) x[cols[r]] = g[r][k] / g[r][r];
  return x;
}

double residual(const std::vector<double>& a, std::size_t m, std::size_t n,
                const std::vector<double>& b, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = -b[i];
    for (std::size_t j = 0; j < n; ++j) r += a[i * n + j] * x[j];
    s += r * r;
  }
  return s;
}

ActivityCounts random_counts(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 200.0);
  ActivityCounts k;
  for (auto c : all_components())
    for (auto s : {UnitState::Active, UnitState::Idle, UnitState::Gated}) k.at(c, s) = u(rng);
  return k;
}

}  // namespace

TEST_CASE("parameter ordering is enforced") {
  auto p = PowerParams::defaults();
  CHECK_NOTHROW(p.check());
  p[Component::Scu].leakage = p[Component::Scu].idle + 1.0;
  CHECK_THROWS_AS(p.check(), Error);
  p = PowerParams::defaults();
  p.gated_residual_fraction = 1.5;
  CHECK_THROWS_AS(p.check(), Error);
  p = PowerParams::defaults();
  p[Component::Core].leakage = -0.1;
  CHECK_THROWS_AS(p.check(), Error);
}

TEST_CASE("default power of a busy eight-core cluster") {
  auto cfg = test::config(8);
  double pj_per_cycle = compute_rate(cfg, 8).energy_pj(cfg.power());
  double mw = pj_per_cycle * 1e-12 * cfg.clock_freq() * 1e3;
  CHECK(mw > 15.0);
  CHECK(mw < 25.0);
}

TEST_CASE("gated core burns leakage plus the clock residual") {
  auto cfg = test::config(1);
  const auto& p = cfg.power();
  Cluster cl(cfg);
  test::preload_alias(cl);
  cl.schedule_event_line(100, 0, 20);
  cl.load_program(0, test::with_halt({I::li(1, 1 << 20),
                                      I::store(1, 4, test::off(cfg, RegKind::EvtMaskSet)),
                                      I::elw(2, 4, test::off(cfg, RegKind::EvtWaitClear))}));
  cl.run(500);
  const auto& t = cl.power().total();
  const double k = static_cast<double>(cl.core(0).gated_cycles);
  CHECK(k > 90);
  CHECK(t.at(Component::Core, UnitState::Gated) == k);
  CHECK(t.at(Component::ClockTree, UnitState::Gated) == k);
  ActivityCounts gated_only;
  gated_only.at(Component::Core, UnitState::Gated) = k;
  gated_only.at(Component::ClockTree, UnitState::Gated) = k;
  CHECK(gated_only.component_energy_pj(Component::Core, p) ==
        doctest::Approx(k * p[Component::Core].leakage));
  CHECK(gated_only.component_energy_pj(Component::ClockTree, p) ==
        doctest::Approx(k * (p[Component::ClockTree].leakage +
                             p.gated_residual_fraction * p[Component::ClockTree].active)));
}

TEST_CASE("per-cycle composition of eight cores running nops") {
  auto cfg = test::config(8);
  const auto& p = cfg.power();
  Cluster cl(cfg);
  for (unsigned k = 0; k < 8; ++k) cl.load_program(k, test::with_halt({I::nop(), I::nop()}));
  cl.step();
  const auto& a = cl.last_activity();
  CHECK(a.at(Component::Core, UnitState::Active) == 8);
  CHECK(a.at(Component::TcdmBank, UnitState::Idle) == 16);
  const double want = 8 * p[Component::Core].active + 16 * p[Component::TcdmBank].idle +
                      8 * p[Component::Interconnect].idle + 8 * p[Component::Scu].idle +
                      8 * p[Component::ClockTree].active;
  CHECK(a.energy_pj(p) == doctest::Approx(want));
}

TEST_CASE("scaling the parameters scales every energy") {
  std::mt19937_64 rng(3);
  auto p = PowerParams::defaults();
  for (double lambda : {0.5, 2.0, 7.25}) {
    auto q = p.scaled(lambda);
    CHECK_NOTHROW(q.check());
    for (int i = 0; i < 20; ++i) {
      auto a = random_counts(rng);
      auto b = random_counts(rng);
      CHECK(a.energy_pj(q) == doctest::Approx(lambda * a.energy_pj(p)));
      CHECK(a.energy_pj(q) / b.energy_pj(q) == doctest::Approx(a.energy_pj(p) / b.energy_pj(p)));
    }
  }
}

TEST_CASE("adding gated cycles only adds leakage") {
  auto p = PowerParams::defaults();
  std::mt19937_64 rng(5);
  auto a = random_counts(rng);
  auto b = a;
  b.at(Component::Core, UnitState::Gated) += 50;
  b.at(Component::ClockTree, UnitState::Gated) += 50;
  for (auto c : all_components()) {
    double grow = b.component_energy_pj(c, p) - a.component_energy_pj(c, p);
    double bound = 50 * p[c].leakage +
                   (c == Component::ClockTree ? 50 * p.gated_residual_fraction * p[c].active : 0.0);
    CHECK(grow >= 0.0);
    CHECK(grow <= bound + 1e-9);
  }
}

TEST_CASE("counts arithmetic") {
  std::mt19937_64 rng(9);
  auto a = random_counts(rng);
  auto b = random_counts(rng);
  auto s = a;
  s += b;
  s -= b;
  for (auto c : all_components())
    CHECK(s.at(c, UnitState::Idle) == doctest::Approx(a.at(c, UnitState::Idle)));
  CHECK(a.scaled(2.0).at(Component::Scu, UnitState::Active) ==
        doctest::Approx(2 * a.at(Component::Scu, UnitState::Active)));
}

TEST_CASE("accumulator window") {
  PowerAccumulator acc;
  ActivityCounts one;
  one.at(Component::Core, UnitState::Active) = 1;
  acc.accumulate(one);
  acc.set_window(true);
  acc.accumulate(one);
  acc.accumulate(one);
  acc.set_window(false);
  acc.accumulate(one);
  CHECK(acc.total().at(Component::Core, UnitState::Active) == 4);
  CHECK(acc.window().at(Component::Core, UnitState::Active) == 2);
  CHECK(acc.window_cycles() == 2);
}

TEST_CASE("calibration file round trip") {
  auto p = PowerParams::defaults().scaled(1.37);
  p.gated_residual_fraction = 0.25;
  auto text = format_calibration(p, "fitted\nsecond line");
  CHECK(text.find("# second line") != std::string::npos);
  CHECK(parse_calibration(text) == p);
}

TEST_CASE("calibration file errors") {
  CHECK_THROWS_AS(parse_calibration("format = 1\n[core]\nactive = abc\n"), Error);
  CHECK_THROWS_AS(parse_calibration("format = 1\n[warp_drive]\nactive = 1\n"), Error);
  CHECK_THROWS_AS(parse_calibration("format = 1\n[core]\nactive = 1\nidle = 2\nleakage = 0\n"),
                  Error);
  CHECK_THROWS_AS(load_calibration_file("/nonexistent/calibration.toml"), Error);
}

TEST_CASE("shipped calibration file parses") {
  auto p = load_calibration_file(std::string(SCUSIM_DATA_DIR) + "/calibration.toml");
  CHECK_NOTHROW(p.check());
}

TEST_CASE("nnls matches brute force over active sets") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 8, n = 4;
    std::vector<double> a(m * n), b(m);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    auto x = nnls(a, m, n, b);
    REQUIRE(x.size() == n);
    for (double v : x) CHECK(v >= 0.0);
    double best = residual(a, m, n, b, std::vector<double>(n, 0.0));
    for (unsigned s = 1; s < (1u << n); ++s) {
      auto cand = restricted_ls(a, m, n, b, s);
      if (!cand) continue;
      bool feasible = true;
      for (double v : *cand) feasible = feasible && v >= -1e-12;
      if (feasible) best = std::min(best, residual(a, m, n, b, *cand));
    }
    CHECK(residual(a, m, n, b, x) == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("calibration recovers consistent targets") {
  std::mt19937_64 rng(21);
  auto truth = PowerParams::defaults().scaled(0.8);
  std::vector<CalibrationCell> cells;
  for (int i = 0; i < 30; ++i) {
    auto k = random_counts(rng);
    cells.push_back({"c" + std::to_string(i), k, k.energy_pj(truth) * 1e-3});
  }
  auto r = calibrate(cells);
  CHECK(r.rms_rel < 1e-3);
  CHECK_FALSE(r.ill_conditioned);
  CHECK_NOTHROW(r.params.check());
  REQUIRE(r.fitted_nj.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    CHECK(r.fitted_nj[i] == doctest::Approx(cells[i].target_nj).epsilon(1e-3));
}

TEST_CASE("all-zero targets give all-zero parameters") {
  std::mt19937_64 rng(2);
  std::vector<CalibrationCell> cells;
  for (int i = 0; i < 6; ++i) cells.push_back({"z", random_counts(rng), 0.0});
  auto r = calibrate(cells);
  for (auto c : all_components()) {
    CHECK(r.params[c].active == 0.0);
    CHECK(r.params[c].idle == 0.0);
    CHECK(r.params[c].leakage == 0.0);
  }
  CHECK(r.rms_rel == 0.0);
  CHECK_THROWS_AS(calibrate({}), Error);
}

TEST_CASE("inconsistent targets are flagged") {
  ActivityCounts k;
  k.at(Component::Core, UnitState::Active) = 10;
  std::vector<CalibrationCell> cells{{"a", k, 1.0}, {"b", k, 3.0}};
  auto r = calibrate(cells);
  CHECK(r.ill_conditioned);
  CHECK(r.max_abs_rel > 0.15);
}
