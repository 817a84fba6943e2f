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

#include "power.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace scusim {

const char* to_string(Component c) {
  switch (c) {
    case Component::Core: return "core";
    case Component::ClockTree: return "clock_tree";
    case Component::TcdmBank: return "tcdm_bank";
    case Component::Interconnect: return "interconnect";
    case Component::Scu: return "scu";
  }
  return "?";
}

std::array<Component, kComponentCount> all_components() {
  return {Component::Core, Component::ClockTree, Component::TcdmBank, Component::Interconnect,
          Component::Scu};
}

PowerParams PowerParams::defaults() {
  PowerParams p;
  p[Component::Core] = {5.0, 2.0, 0.4};
  p[Component::ClockTree] = {1.2, 1.0, 0.1};
  p[Component::TcdmBank] = {1.0, 0.3, 0.1};
  p[Component::Interconnect] = {0.8, 0.1, 0.05};
  p[Component::Scu] = {0.6, 0.05, 0.02};
  p.gated_residual_fraction = 0.1;
  return p;
}

void PowerParams::check() const {
  for (auto c : all_components()) {
    const auto& e = (*this)[c];
    if (!(e.leakage >= 0.0) || !(e.idle >= e.leakage) || !(e.active >= e.idle)) {
      throw Error(ErrorCode::Config, std::string("power parameters for ") + to_string(c) +
                                         " violate 0 <= leakage <= idle <= active");
    }
  }
  if (!(gated_residual_fraction >= 0.0 && gated_residual_fraction <= 1.0)) {
    throw Error(ErrorCode::Config, "gated_residual_fraction must lie in [0,1]");
  }
}

PowerParams PowerParams::scaled(double factor) const {
  PowerParams p = *this;
  for (auto& e : p.energy) {
    e.active *= factor;
    e.idle *= factor;
    e.leakage *= factor;
  }
  return p;
}

ActivityCounts& ActivityCounts::operator+=(const ActivityCounts& o) {
  for (std::size_t c = 0; c < kComponentCount; ++c)
    for (std::size_t s = 0; s < kUnitStateCount; ++s) n[c][s] += o.n[c][s];
  return *this;
}

ActivityCounts& ActivityCounts::operator-=(const ActivityCounts& o) {
  for (std::size_t c = 0; c < kComponentCount; ++c)
    for (std::size_t s = 0; s < kUnitStateCount; ++s) n[c][s] -= o.n[c][s];
  return *this;
}

ActivityCounts ActivityCounts::scaled(double factor) const {
  ActivityCounts r = *this;
  for (auto& row : r.n)
    for (auto& v : row) v *= factor;
  return r;
}

double ActivityCounts::component_energy_pj(Component c, const PowerParams& p) const {
  const auto& e = p[c];
  double pj = at(c, UnitState::Active) * e.active + at(c, UnitState::Idle) * e.idle +
              at(c, UnitState::Gated) * e.leakage;
  if (c == Component::ClockTree) {
    pj += p.gated_residual_fraction * at(c, UnitState::Gated) * e.active;
  }
  return pj;
}

double ActivityCounts::energy_pj(const PowerParams& p) const {
  double sum = 0.0;
  for (auto c : all_components()) sum += component_energy_pj(c, p);
  return sum;
}

std::string format_calibration(const PowerParams& p, std::string_view comment) {
  std::ostringstream os;
  os << "# scusim power calibration (energies in pJ per unit-cycle)\n";
  if (!comment.empty()) {
    std::istringstream lines{std::string(comment)};
    for (std::string line; std::getline(lines, line);) os << "# " << line << "\n";
  }
  os << "format = 1\n";
  os << std::setprecision(17);
  os << "gated_residual_fraction = " << p.gated_residual_fraction << "\n";
  for (auto c : all_components()) {
    const auto& e = p[c];
    os << "\n[" << to_string(c) << "]\n";
    os << "active = " << e.active << "\n";
    os << "idle = " << e.idle << "\n";
    os << "leakage = " << e.leakage << "\n";
  }
  return os.str();
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& v, int line_no) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse,
                "calibration line " + std::to_string(line_no) + ": not a number: '" + v + "'");
  }
}

}  // namespace

PowerParams parse_calibration(std::string_view text) {
  PowerParams p = PowerParams::defaults();
  std::array<int, kComponentCount> seen{};
  int section = -1;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    auto hash = raw.find('#');
    std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorCode::Parse, "calibration line " + std::to_string(line_no) +
                                          ": unterminated section header");
      std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      section = -1;
      for (auto c : all_components())
        if (name == to_string(c)) section = static_cast<int>(c);
      if (section < 0)
        throw Error(ErrorCode::Parse, "calibration line " + std::to_string(line_no) +
                                          ": unknown component '" + name + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse,
                  "calibration line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    double value = parse_number(trim(std::string_view(line).substr(eq + 1)), line_no);
    if (section < 0) {
      if (key == "format") {
        if (value != 1.0) throw Error(ErrorCode::Parse, "unsupported calibration format");
      } else if (key == "gated_residual_fraction") {
        p.gated_residual_fraction = value;
      } else {
        throw Error(ErrorCode::Parse, "calibration line " + std::to_string(line_no) +
                                          ": unknown key '" + key + "'");
      }
      continue;
    }
    auto& e = p.energy[static_cast<std::size_t>(section)];
    if (key == "active") e.active = value;
    else if (key == "idle") e.idle = value;
    else if (key == "leakage") e.leakage = value;
    else
      throw Error(ErrorCode::Parse, "calibration line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    seen[static_cast<std::size_t>(section)] |= key == "active" ? 1 : key == "idle" ? 2 : 4;
  }
  for (auto c : all_components()) {
    if (seen[static_cast<std::size_t>(c)] != 7)
      throw Error(ErrorCode::Parse,
                  std::string("calibration is missing values for ") + to_string(c));
  }
  p.check();
  return p;
}

PowerParams load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open calibration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

std::vector<double> nnls(const std::vector<double>& a_rowmajor, std::size_t rows,
                         std::size_t cols, const std::vector<double>& b) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (a_rowmajor.size() != rows * cols || b.size() != rows)
    throw Error(ErrorCode::InvalidArgument, "nnls: dimension mismatch");
  Eigen::Map<const Mat> a(a_rowmajor.data(), static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols));
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(rows));

  const auto n = static_cast<Eigen::Index>(cols);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(cols, false);
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) *
                     std::max(1.0, bv.cwiseAbs().maxCoeff()) * static_cast<double>(rows + cols);

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    s = Eigen::VectorXd::Zero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    Eigen::VectorXd z = sub.colPivHouseholderQr().solve(bv);
    for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = z(static_cast<Eigen::Index>(k));
  };

  const int max_outer = static_cast<int>(3 * cols + 10);
  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd w = a.transpose() * (bv - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd s;
    for (int inner = 0; inner < max_outer; ++inner) {
      solve_passive(s);
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) {
          double denom = x(j) - s(j);
          if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
          else alpha = 0.0;
        }
      }
      if (!std::isfinite(alpha)) break;
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    x = s.cwiseMax(0.0);
  }
  return {x.data(), x.data() + n};
}

CalibrationResult calibrate(std::span<const CalibrationCell> cells,
                            const CalibrationOptions& options) {
  if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "calibrate: no cells");
  const double r = options.gated_residual_fraction;
  constexpr std::size_t kVars = 3 * kComponentCount;  // leak, d_idle, d_active per component

  double mean_target = 0.0;
  for (const auto& cell : cells) mean_target += std::abs(cell.target_nj);
  mean_target /= static_cast<double>(cells.size());

  // Column j of a cell row is the energy (nJ) contributed by a unit value of
  // reparameterised variable j.
  auto row_of = [&](const ActivityCounts& k) {
    std::array<double, kVars> row{};
    for (auto c : all_components()) {
      double na = k.at(c, UnitState::Active);
      double ni = k.at(c, UnitState::Idle);
      double ng = k.at(c, UnitState::Gated);
      double extra = c == Component::ClockTree ? r * ng : 0.0;
      auto base = 3 * static_cast<std::size_t>(c);
      row[base + 0] = (na + ni + ng + extra) * 1e-3;
      row[base + 1] = (na + ni + extra) * 1e-3;
      row[base + 2] = (na + extra) * 1e-3;
    }
    return row;
  };

  const std::size_t rows = cells.size() + kVars;
  std::vector<double> a(rows * kVars, 0.0);
  std::vector<double> b(rows, 0.0);
  double col_norm2 = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    double wgt = cells[i].target_nj > 0.0 ? 1.0 / cells[i].target_nj
                 : mean_target > 0.0      ? 1.0 / mean_target
                                          : 1.0;
    auto row = row_of(cells[i].counts);
    for (std::size_t j = 0; j < kVars; ++j) {
      a[i * kVars + j] = row[j] * wgt;
      col_norm2 += a[i * kVars + j] * a[i * kVars + j];
    }
    b[i] = cells[i].target_nj * wgt;
  }
  double ridge = std::sqrt(options.ridge * col_norm2 / static_cast<double>(kVars));
  for (std::size_t j = 0; j < kVars; ++j) a[(cells.size() + j) * kVars + j] = ridge;

  auto x = nnls(a, rows, kVars, b);

  CalibrationResult result;
  result.params.gated_residual_fraction = r;
  for (auto c : all_components()) {
    auto base = 3 * static_cast<std::size_t>(c);
    double leak = x[base], idle = x[base] + x[base + 1], active = idle + x[base + 2];
    result.params[c] = {active, idle, leak};
  }
  double sum2 = 0.0;
  for (const auto& cell : cells) {
    double fit = cell.counts.energy_pj(result.params) * 1e-3;
    result.fitted_nj.push_back(fit);
    double rel = cell.target_nj != 0.0 ? (fit - cell.target_nj) / cell.target_nj : 0.0;
    result.residual_rel.push_back(rel);
    sum2 += rel * rel;
    result.max_abs_rel = std::max(result.max_abs_rel, std::abs(rel));
  }
  result.rms_rel = std::sqrt(sum2 / static_cast<double>(cells.size()));
  result.ill_conditioned = result.rms_rel > options.ill_conditioned_rms;
  return result;
}

}  // namespace scusim
