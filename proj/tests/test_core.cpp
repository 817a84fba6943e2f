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

#include "error.hpp"
#include "support.hpp"

using namespace scusim;
using I = Instr;

TEST_CASE("straight-line compute retires one per cycle") {
  auto cfg = test::config(1);
  for (unsigned k : {1u, 5u, 40u}) {
    Cluster cl(cfg);
    std::vector<Instr> code(k, I::compute(1));
    cl.load_program(0, test::with_halt(code));
    CHECK(cl.run(1000) == RunStatus::Halted);
    CHECK(cl.core(0).retired == k + 1);
    CHECK(cl.core(0).active_cycles == k + 1);
    CHECK(cl.core(0).stalled_cycles == 0);
    CHECK(*cl.halt_cycle(0) == k + 1);
  }
}

TEST_CASE("multi-cycle compute") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  cl.load_program(0, test::with_halt({I::compute(17), I::nop()}));
  cl.run(100);
  CHECK(*cl.halt_cycle(0) == 19);
  CHECK(cl.core(0).retired == 19);
}

TEST_CASE("alu and branches") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  auto p = assemble(R"(
    li r1, 0x0
    li r2, 0x5
  loop:
    addi r1, r1, 0x1
    bne r1, r2, loop
    sub r3, r2, r1
    xori r4, r2, 0x3
    andi r5, r2, 0x4
    or r6, r4, r5
    li r0, 0x9
    halt
  )");
  cl.load_program(0, p);
  cl.run(100);
  const auto& s = cl.core(0);
  CHECK(s.reg(1) == 5);
  CHECK(s.reg(3) == 0);
  CHECK(s.reg(4) == 6);
  CHECK(s.reg(5) == 4);
  CHECK(s.reg(6) == 6);
  CHECK(s.reg(0) == 0);
}

TEST_CASE("branch and jump penalties") {
  ClusterConfig c;
  c.n_cores = 1;
  c.branch_penalty = 2;
  c.jump_penalty = 1;
  auto cfg = validate(c);
  Cluster cl(cfg);
  cl.load_program(0, assemble("li r1, 0x1\nbeq r1, r1, a\nnop\na:\nj b\nnop\nb:\nhalt\n"));
  cl.run(100);
  // li, beq + 2 bubbles, j + 1 bubble, halt
  CHECK(*cl.halt_cycle(0) == 7);
  CHECK(cl.core(0).stalled_cycles == 3);
  CHECK(cl.core(0).retired == 4);
}

TEST_CASE("load-use stall") {
  ClusterConfig c;
  c.n_cores = 1;
  c.load_use_penalty = 1;
  auto cfg = validate(c);
  auto run = [&](const char* text) {
    Cluster cl(cfg);
    cl.set_register(0, 5, cfg.address_map().tcdm_base);
    cl.load_program(0, assemble(text));
    cl.run(100);
    return *cl.halt_cycle(0);
  };
  CHECK(run("lw r1, 0x0(r5)\naddi r2, r1, 0x1\nhalt\n") == 4);
  CHECK(run("lw r1, 0x0(r5)\naddi r2, r3, 0x1\nhalt\n") == 3);
}

TEST_CASE("loads and stores") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  cl.set_register(0, 5, cfg.address_map().tcdm_base);
  cl.load_program(0, assemble("li r1, 0x2a\nsw r1, 0x8(r5)\nlw r2, 0x8(r5)\nhalt\n"));
  cl.run(100);
  CHECK(cl.core(0).reg(2) == 0x2a);
  CHECK(cl.tcdm().peek(cfg.address_map().tcdm_base + 8) == 0x2a);
}

TEST_CASE("test-and-set through the address bit") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  const auto a = cfg.address_map().tcdm_base + 16;
  cl.set_register(0, 5, a | cfg.address_map().tas_flag());
  cl.load_program(0, assemble("lw r1, 0x0(r5)\nlw r2, 0x0(r5)\nhalt\n"));
  cl.run(100);
  CHECK(cl.core(0).reg(1) == 0);
  CHECK(cl.core(0).reg(2) == 0xFFFFFFFFu);
  // two tas loads, each 3 cycles
  CHECK(*cl.halt_cycle(0) == 7);
}

TEST_CASE("faults") {
  auto cfg = test::config(1);
  SUBCASE("misaligned") {
    Cluster cl(cfg);
    cl.set_register(0, 5, cfg.address_map().tcdm_base + 2);
    cl.load_program(0, assemble("lw r1, 0x0(r5)\nhalt\n"));
    CHECK_THROWS_AS(cl.run(10), Error);
  }
  SUBCASE("unmapped") {
    Cluster cl(cfg);
    cl.set_register(0, 5, 0x4);
    cl.load_program(0, assemble("lw r1, 0x0(r5)\nhalt\n"));
    try {
      cl.run(10);
      FAIL("no fault");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AddressFault);
    }
  }
  SUBCASE("iret outside handler") {
    Cluster cl(cfg);
    cl.load_program(0, assemble("iret\n"));
    try {
      cl.run(10);
      FAIL("no fault");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IllegalInstr);
    }
  }
}

TEST_CASE("unresolved label") {
  try {
    Program p({I::jump("nowhere")});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllegalInstr);
  }
  CHECK_THROWS_AS(assemble("frobnicate r1\n"), Error);
  CHECK_THROWS_AS(assemble("addi r1, r2\n"), Error);
}

TEST_CASE("empty program") {
  auto cfg = test::config(2);
  Cluster cl(cfg);
  cl.load_program(1, test::with_halt({I::compute(3)}));
  CHECK(cl.run(100) == RunStatus::Halted);
  CHECK(cl.core(0).retired == 0);
  CHECK(cl.core(0).busy);
  CHECK(cl.core(0).active_cycles == 0);
}

TEST_CASE("listing round trip") {
  auto cfg = test::config(4);
  for (auto v : {"sw-barrier", "tas-barrier", "scu-barrier", "sw-crit5", "tas-crit10",
                 "scu-crit5"}) {
    auto seqs = emit(parse_variant(v), test::iota(4), cfg, 3);
    auto code = mark_sync_region(seqs[1]);
    Program p(code);
    auto again = assemble(p.listing());
    CHECK(again.listing() == p.listing());
    CHECK(again.code() == p.code());
  }
}

TEST_CASE("wait with the event already pending") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  test::preload_alias(cl);
  const auto m = test::off(cfg, RegKind::EvtMaskSet);
  const auto w = test::off(cfg, RegKind::EvtWaitClear);
  cl.schedule_event_line(0, 0, 20);
  cl.load_program(0, test::with_halt({I::li(1, 1 << 20), I::store(1, 4, m), I::compute(3),
                                      I::elw(2, 4, w)}));
  cl.run(100);
  REQUIRE(cl.elw_log().size() == 1);
  const auto& r = cl.elw_log()[0];
  CHECK(r.immediate);
  CHECK(*r.grant == r.issue);
  CHECK(cl.core(0).gated_cycles == 0);
  CHECK(cl.core(0).reg(2) == (1u << 20));
  CHECK(cl.scu().unit(0).event_buffer == 0);
}

TEST_CASE("wait without a pending event sleeps and costs six active cycles") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  test::preload_alias(cl);
  const auto m = test::off(cfg, RegKind::EvtMaskSet);
  const auto w = test::off(cfg, RegKind::EvtWaitClear);
  cl.schedule_event_line(50, 0, 20);
  cl.load_program(0, test::with_halt({I::li(1, 1 << 20), I::store(1, 4, m), I::elw(2, 4, w)}));
  CHECK(cl.run(200) == RunStatus::Halted);
  REQUIRE(cl.elw_log().size() == 1);
  const auto& r = cl.elw_log()[0];
  CHECK_FALSE(r.immediate);
  CHECK(*r.grant == 51);
  // li + sw + 6 for the wait + halt
  CHECK(cl.core(0).active_cycles == 9);
  CHECK(cl.core(0).gated_cycles > 40);
  CHECK(cl.core(0).active_cycles + cl.core(0).gated_cycles == cl.cycle());
}

TEST_CASE("sleep forever is reported as deadlock") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  test::preload_alias(cl);
  cl.load_program(0, test::with_halt({I::elw(2, 4, test::off(cfg, RegKind::EvtWait))}));
  CHECK(cl.run(1000) == RunStatus::Deadlock);
}

TEST_CASE("cycle limit") {
  auto cfg = test::config(1);
  Cluster cl(cfg);
  cl.load_program(0, assemble("a:\nj a\n"));
  CHECK(cl.run(50) == RunStatus::CycleLimit);
  CHECK(cl.cycle() == 50);
}
