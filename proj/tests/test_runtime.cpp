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

#include <functional>
#include <set>

#include "error.hpp"
#include "interconnect.hpp"
#include "support.hpp"

using namespace scusim;
using I = Instr;

namespace {

const char* kVariants[] = {"sw-barrier", "tas-barrier", "scu-barrier", "sw-crit5",  "tas-crit5",
                           "scu-crit5",  "sw-crit10",   "tas-crit10",  "scu-crit10"};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("variant names round trip") {
  for (auto v : kVariants) CHECK(parse_variant(v).name() == v);
  auto v = parse_variant("tas-crit7");
  CHECK(v.family == Family::TAS);
  CHECK(v.kind == PrimitiveKind::CriticalSection);
  CHECK(v.t_crit == 7);
  CHECK(parse_variant("scu-crit").t_crit == 0);
  for (auto bad : {"scu", "foo-barrier", "sw-lock", "sw-critx"})
    CHECK(code_of([&] { parse_variant(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("team checks") {
  auto cfg = test::config(4);
  auto v = parse_variant("scu-barrier");
  CHECK(code_of([&] { emit(v, {}, cfg); }) == ErrorCode::UnsupportedTeam);
  CHECK(code_of([&] { emit(v, {0, 0}, cfg); }) == ErrorCode::UnsupportedTeam);
  CHECK(code_of([&] { emit(v, {0, 4}, cfg); }) == ErrorCode::UnsupportedTeam);
  CHECK(code_of([&] { emit(v, test::iota(5), cfg); }) == ErrorCode::UnsupportedTeam);
  CHECK(emit(v, {1, 3}, cfg).size() == 2);
  CHECK(team_mask({1, 3}) == 0b1010);
}

TEST_CASE("scu barrier is a single wait") {
  auto cfg = test::config(8);
  for (unsigned n : {1u, 2u, 8u}) {
    auto seqs = emit(parse_variant("scu-barrier"), test::iota(n), cfg);
    for (const auto& s : seqs) {
      CHECK(sync_instruction_count(s) == 1);
      auto code = mark_sync_region(s);
      REQUIRE(code.size() == 3);
      CHECK(code[0].op == Op::SyncBegin);
      CHECK(code[1].op == Op::Elw);
      CHECK(code[1].imm ==
            static_cast<std::int32_t>(test::off(cfg, RegKind::BarrierTriggerWaitClear)));
      CHECK(code[2].op == Op::SyncEnd);
    }
  }
}

TEST_CASE("scu critical section") {
  auto cfg = test::config(8);
  auto s = emit(parse_variant("scu-crit5"), test::iota(2), cfg)[0];
  CHECK(sync_instruction_count(s) == 2);
  auto flat = flatten(s);
  REQUIRE(flat.size() == 3);
  CHECK(flat[0].op == Op::Elw);
  CHECK(flat[1].op == Op::Compute);
  CHECK(flat[1].imm == 5);
  CHECK(flat[2].op == Op::Store);
  CHECK(flatten(emit(parse_variant("scu-crit0"), test::iota(2), cfg)[0]).size() == 2);
}

TEST_CASE("empty sequence has no markers") {
  CHECK(mark_sync_region(Sequence{}).empty());
  Sequence plain{{false, "", {I::compute(4)}}};
  CHECK(mark_sync_region(plain).size() == 1);
}

TEST_CASE("retry loops stay inside the markers") {
  auto cfg = test::config(8);
  for (auto name : kVariants) {
    auto seq = emit(parse_variant(name), test::iota(4), cfg)[0];
    Program p(mark_sync_region(seq));
    int depth = 0;
    std::vector<int> region(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i].op == Op::SyncBegin) ++depth;
      region[i] = depth;
      if (p[i].op == Op::SyncEnd) --depth;
    }
    CHECK(depth == 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!is_pseudo(p[i].op) && p[i].op != Op::Compute) CHECK_MESSAGE(region[i] == 1, name);
      if (is_branch(p[i].op) && p[i].op != Op::Jump) {
        CHECK(region[p[i].target] == 1);
      }
    }
  }
}

TEST_CASE("unrolled instances have unique labels") {
  auto cfg = test::config(4);
  for (auto name : kVariants) {
    std::vector<Instr> code;
    for (unsigned uid = 0; uid < 4; ++uid)
      for (const auto& in : mark_sync_region(emit(parse_variant(name), test::iota(4), cfg, uid)[2]))
        code.push_back(in);
    CHECK_NOTHROW(Program{code});
  }
}

TEST_CASE("sync words sit in distinct banks") {
  auto cfg = test::config(8);
  Tcdm t(cfg);
  auto l = default_layout(cfg);
  std::set<unsigned> banks{t.bank_of(l.lock()), t.bank_of(l.count()), t.bank_of(l.flag())};
  CHECK(banks.size() == 3);
  CHECK(l.scratch() > l.flag());
}

TEST_CASE("team setup") {
  auto cfg = test::config(8);
  Cluster cl(cfg);
  cl.tcdm().poke(default_layout(cfg).count(), 9);
  setup_team(cl, {0, 2, 5}, default_layout(cfg));
  CHECK(cl.core(2).reg(rt::kTeamSize) == 3);
  CHECK(cl.core(2).reg(rt::kPeers) == 0b100001);
  CHECK(cl.core(5).reg(rt::kScuBase) == cfg.address_map().scu_alias_base);
  CHECK(cl.core(5).reg(rt::kNotifyBit) == 1u << rt::kWakeNotifier);
  CHECK(cl.tcdm().peek(default_layout(cfg).count()) == 0);
  CHECK(cl.scu().barrier(0).worker_mask == 0b100101);
  CHECK(cl.scu().barrier(0).target_mask == 0b100101);
}

TEST_CASE("prologue enables the runtime event lines") {
  auto cfg = test::config(2);
  Cluster cl(cfg);
  setup_team(cl, test::iota(2), default_layout(cfg));
  for (unsigned k = 0; k < 2; ++k) cl.load_program(k, test::with_halt(prologue(cfg)));
  CHECK(cl.run(100) == RunStatus::Halted);
  const std::uint32_t want = (1u << rt::kWakeNotifier) | (1u << kBarrierLine) | (1u << kMutexLine);
  CHECK(cl.scu().unit(0).event_mask == want);
  CHECK(cl.scu().barrier(0).firings == 1);
}

TEST_CASE("listing helper") {
  auto text = listing({I::label("a"), I::li(1, 3), I::jump("a")});
  CHECK(text == "a:\n  li r1, 0x3\n  j a\n");
}
