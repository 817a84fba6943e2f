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

#include "profiler.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace scusim {

std::uint64_t active_in(const std::vector<ClockInterval>& timeline, std::uint64_t begin,
                        std::uint64_t end) {
  if (end <= begin) return 0;
  auto it = std::upper_bound(timeline.begin(), timeline.end(), begin,
                             [](std::uint64_t v, const ClockInterval& iv) { return v < iv.second; });
  std::uint64_t n = 0;
  for (; it != timeline.end() && it->first < end; ++it)
    n += std::min(end, it->second) - std::max(begin, it->first);
  return n;
}

std::vector<std::vector<SyncPeriod>> extract_periods(
    const std::vector<Marker>& markers,
    const std::vector<std::vector<ClockInterval>>& timeline, unsigned n_cores) {
  std::vector<std::vector<SyncPeriod>> out(n_cores);
  std::vector<std::optional<Marker>> open(n_cores);
  for (const auto& m : markers) {
    if (m.kind != Op::SyncBegin && m.kind != Op::SyncEnd) continue;
    if (m.core >= n_cores) throw Error(ErrorCode::MalformedTrace, "marker for unknown core");
    auto& o = open[m.core];
    if (m.kind == Op::SyncBegin) {
      if (o)
        throw Error(ErrorCode::MalformedTrace,
                    "nested sync_begin on core " + std::to_string(m.core) + " at cycle " +
                        std::to_string(m.cycle));
      o = m;
      continue;
    }
    if (!o)
      throw Error(ErrorCode::MalformedTrace, "sync_end without begin on core " +
                                                 std::to_string(m.core) + " at cycle " +
                                                 std::to_string(m.cycle));
    if (m.cycle <= o->cycle) {
      // Empty region: nothing executed between the markers.
      o.reset();
      continue;
    }
    SyncPeriod p;
    p.core_id = m.core;
    p.begin_cycle = o->cycle;
    p.end_cycle = m.cycle - 1;
    p.primitive_kind = o->tag;
    const auto& tl = m.core < timeline.size() ? timeline[m.core] : std::vector<ClockInterval>{};
    p.active_cycles_within = active_in(tl, p.begin_cycle, p.end_cycle + 1);
    out[m.core].push_back(std::move(p));
    o.reset();
  }
  for (unsigned k = 0; k < n_cores; ++k)
    if (open[k])
      throw Error(ErrorCode::MalformedTrace,
                  "unterminated sync region on core " + std::to_string(k));
  return out;
}

SyncSummary summarize(const std::vector<std::vector<SyncPeriod>>& periods,
                      const std::vector<std::vector<ClockInterval>>& timeline,
                      const CycleWindow& window, const std::vector<unsigned>& cores) {
  SyncSummary s;
  std::uint64_t end = window.end;
  if (end == UINT64_MAX) {
    end = window.begin;
    for (const auto& tl : timeline)
      if (!tl.empty()) end = std::max(end, tl.back().second);
  }
  const std::uint64_t exec = end > window.begin ? end - window.begin : 0;
  for (unsigned k = 0; k < periods.size(); ++k) {
    CoreSyncSummary c;
    c.execution_cycles = exec;
    if (k < timeline.size()) c.active_cycles = active_in(timeline[k], window.begin, end);
    c.gated_cycles = exec - c.active_cycles;
    for (const auto& p : periods[k]) {
      std::uint64_t b = std::max(p.begin_cycle, window.begin);
      std::uint64_t e = std::min(p.end_cycle + 1, end);
      if (e <= b) continue;
      ++c.periods;
      c.sync_total += e - b;
      c.sync_active += k < timeline.size() ? active_in(timeline[k], b, e) : 0;
    }
    if (exec) {
      c.sync_total_pct = 100.0 * static_cast<double>(c.sync_total) / static_cast<double>(exec);
      c.sync_active_pct = 100.0 * static_cast<double>(c.sync_active) / static_cast<double>(exec);
    }
    s.cores.push_back(c);
  }
  std::vector<unsigned> sel = cores;
  if (sel.empty())
    for (unsigned k = 0; k < periods.size(); ++k) sel.push_back(k);
  if (!sel.empty()) {
    for (auto k : sel) {
      const auto& c = s.cores.at(k);
      s.avg_sync_total += static_cast<double>(c.sync_total);
      s.avg_sync_active += static_cast<double>(c.sync_active);
      s.avg_sync_total_pct += c.sync_total_pct;
      s.avg_sync_active_pct += c.sync_active_pct;
    }
    const double n = static_cast<double>(sel.size());
    s.avg_sync_total /= n;
    s.avg_sync_active /= n;
    s.avg_sync_total_pct /= n;
    s.avg_sync_active_pct /= n;
  }
  return s;
}

void write_periods_csv(std::ostream& os, const std::vector<std::vector<SyncPeriod>>& periods) {
  os << "core,begin_cycle,end_cycle,length,active_cycles,primitive\n";
  for (const auto& per_core : periods)
    for (const auto& p : per_core)
      os << p.core_id << ',' << p.begin_cycle << ',' << p.end_cycle << ',' << p.length() << ','
         << p.active_cycles_within << ',' << p.primitive_kind << '\n';
}

ParsedTrace parse_trace(std::string_view ndjson) {
  ParsedTrace t;
  std::istringstream is{std::string(ndjson)};
  std::string line;
  std::size_t lineno = 0;
  auto grow = [&](unsigned core) {
    if (core >= kMaxCores) throw Error(ErrorCode::MalformedTrace, "core index out of range");
    if (core >= t.n_cores) {
      t.n_cores = core + 1;
      t.timeline.resize(t.n_cores);
    }
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      std::uint64_t cycle = j.at("cycle").get<std::uint64_t>();
      unsigned core = j.at("core").get<unsigned>();
      grow(core);
      if (j.contains("marker")) {
        auto name = j.at("marker").get<std::string>();
        Op op;
        if (name == ".sync_begin") op = Op::SyncBegin;
        else if (name == ".sync_end") op = Op::SyncEnd;
        else if (name == ".measure_begin") op = Op::MeasureBegin;
        else if (name == ".measure_end") op = Op::MeasureEnd;
        else throw Error(ErrorCode::MalformedTrace, "unknown marker " + name);
        t.markers.push_back({cycle, core, op, j.value("tag", std::string())});
      } else {
        auto& tl = t.timeline[core];
        if (!tl.empty() && tl.back().second == cycle) ++tl.back().second;
        else if (!tl.empty() && cycle < tl.back().second)
          throw Error(ErrorCode::MalformedTrace, "trace cycles go backwards");
        else tl.emplace_back(cycle, cycle + 1);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedTrace,
                  "line " + std::to_string(lineno) + ": " + std::string(e.what()));
    }
  }
  return t;
}

}  // namespace scusim
