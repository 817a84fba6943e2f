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

#include "report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "cluster.hpp"
#include "error.hpp"

namespace scusim {

namespace {

double mean_of(const RunReport& r, const std::vector<unsigned>& team,
               std::uint64_t CoreReport::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : r.cores) {
    if (!team.empty() && std::find(team.begin(), team.end(), c.core) == team.end()) continue;
    sum += static_cast<double>(c.*field);
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

CycleWindow measure_window(const Cluster& cl) {
  std::optional<std::uint64_t> b, e;
  for (const auto& m : cl.markers()) {
    if (m.kind == Op::MeasureBegin) b = b ? std::min(*b, m.cycle) : m.cycle;
    if (m.kind == Op::MeasureEnd) e = e ? std::max(*e, m.cycle) : m.cycle;
  }
  if (!b) return {0, cl.cycle()};
  return {*b, e ? *e : cl.cycle()};
}

}  // namespace

double RunReport::mean_sync_total(const std::vector<unsigned>& team) const {
  return mean_of(*this, team, &CoreReport::sync_total_cycles);
}

double RunReport::mean_sync_active(const std::vector<unsigned>& team) const {
  return mean_of(*this, team, &CoreReport::sync_active_cycles);
}

void RunReport::set_ideal(double t, double e) {
  t_ideal = t;
  e_ideal_nj = e;
  overhead_cycles_rel = t > 0 ? (static_cast<double>(total_cycles) - t) / t : 0.0;
  overhead_energy_rel = e > 0 ? (total_energy_nj - e) / e : 0.0;
}

RunReport make_report(const Cluster& cl, bool use_window, std::string label) {
  RunReport r;
  r.label = std::move(label);
  r.n_cores = cl.n_cores();
  r.clock_freq = cl.config().clock_freq();
  CycleWindow w = use_window ? measure_window(cl) : CycleWindow{0, cl.cycle()};
  r.total_cycles = w.end - w.begin;
  const auto& acts = use_window ? cl.power().window() : cl.power().total();
  const auto& params = cl.config().power();
  for (auto c : all_components()) {
    double nj = acts.component_energy_pj(c, params) * 1e-3;
    r.component_energy_nj[static_cast<std::size_t>(c)] = nj;
    r.total_energy_nj += nj;
  }
  if (r.total_cycles)
    r.avg_power_mw = r.total_energy_nj * 1e-9 / static_cast<double>(r.total_cycles) *
                     r.clock_freq * 1e3;
  auto periods = extract_periods(cl.markers(), cl.clock_timeline(), cl.n_cores());
  auto s = summarize(periods, cl.clock_timeline(), w);
  for (unsigned k = 0; k < cl.n_cores(); ++k) {
    const auto& c = s.cores[k];
    r.cores.push_back({k, c.active_cycles, c.gated_cycles, c.sync_total, c.sync_active});
  }
  r.fifo_overflows = cl.scu().event_fifo().overflows;
  r.stray_arrivals = cl.scu().stray_arrivals();
  r.warnings = cl.scu().warnings();
  return r;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["n_cores"] = r.n_cores;
  j["total_cycles"] = r.total_cycles;
  auto cores = nlohmann::json::array();
  for (const auto& c : r.cores)
    cores.push_back({{"core", c.core},
                     {"active_cycles", c.active_cycles},
                     {"gated_cycles", c.gated_cycles},
                     {"sync_total_cycles", c.sync_total_cycles},
                     {"sync_active_cycles", c.sync_active_cycles}});
  j["cores"] = cores;
  nlohmann::json e;
  for (auto c : all_components()) e[to_string(c)] = r.component_energy_nj[static_cast<std::size_t>(c)];
  j["energy_nj"] = e;
  j["total_energy_nj"] = r.total_energy_nj;
  j["avg_power_mw"] = r.avg_power_mw;
  j["clock_freq"] = r.clock_freq;
  j["t_ideal"] = r.t_ideal;
  j["e_ideal_nj"] = r.e_ideal_nj;
  j["overhead_cycles_rel"] = r.overhead_cycles_rel;
  j["overhead_energy_rel"] = r.overhead_energy_rel;
  j["fifo_overflows"] = r.fifo_overflows;
  j["stray_arrivals"] = r.stray_arrivals;
  j["warnings"] = r.warnings;
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    r.label = j.at("label").get<std::string>();
    r.n_cores = j.at("n_cores").get<unsigned>();
    r.total_cycles = j.at("total_cycles").get<std::uint64_t>();
    for (const auto& c : j.at("cores"))
      r.cores.push_back({c.at("core").get<unsigned>(), c.at("active_cycles").get<std::uint64_t>(),
                         c.at("gated_cycles").get<std::uint64_t>(),
                         c.at("sync_total_cycles").get<std::uint64_t>(),
                         c.at("sync_active_cycles").get<std::uint64_t>()});
    for (auto c : all_components())
      r.component_energy_nj[static_cast<std::size_t>(c)] =
          j.at("energy_nj").at(to_string(c)).get<double>();
    r.total_energy_nj = j.at("total_energy_nj").get<double>();
    r.avg_power_mw = j.at("avg_power_mw").get<double>();
    r.clock_freq = j.at("clock_freq").get<double>();
    r.t_ideal = j.at("t_ideal").get<double>();
    r.e_ideal_nj = j.at("e_ideal_nj").get<double>();
    r.overhead_cycles_rel = j.at("overhead_cycles_rel").get<double>();
    r.overhead_energy_rel = j.at("overhead_energy_rel").get<double>();
    r.fifo_overflows = j.at("fifo_overflows").get<std::uint64_t>();
    r.stray_arrivals = j.at("stray_arrivals").get<std::uint64_t>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("run report: ") + e.what());
  }
  return r;
}

std::string csv_header() {
  std::string h = "label,n_cores,total_cycles,mean_active,mean_gated,mean_sync_total,mean_sync_active";
  for (auto c : all_components()) h += std::string(",energy_") + to_string(c) + "_nj";
  h += ",total_energy_nj,avg_power_mw,t_ideal,e_ideal_nj,overhead_cycles_rel,overhead_energy_rel";
  return h;
}

std::string csv_row(const RunReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << r.label << ',' << r.n_cores << ',' << r.total_cycles << ','
     << mean_of(r, {}, &CoreReport::active_cycles) << ','
     << mean_of(r, {}, &CoreReport::gated_cycles) << ',' << r.mean_sync_total() << ','
     << r.mean_sync_active();
  for (double v : r.component_energy_nj) os << ',' << v;
  os << ',' << r.total_energy_nj << ',' << r.avg_power_mw << ',' << r.t_ideal << ','
     << r.e_ideal_nj << ',' << r.overhead_cycles_rel << ',' << r.overhead_energy_rel;
  return os.str();
}

}  // namespace scusim
