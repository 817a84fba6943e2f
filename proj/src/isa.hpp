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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scusim {

inline constexpr unsigned kNumRegs = 16;

enum class Op : std::uint8_t {
  Nop,
  Compute,  // imm = cycles, retires one op per cycle
  Li,       // rd = imm
  Addi,
  Xori,
  Andi,
  Add,
  Sub,
  And,
  Or,
  Xor,
  Load,     // rd = mem[rs1 + imm]
  Store,    // mem[rs1 + imm] = rs2
  TasLoad,  // rd = tas(rs1 + imm), address gets the TAS attribute
  Elw,      // rd = scu[rs1 + imm], may sleep
  Beq,
  Bne,
  Blt,
  Bge,
  Jump,
  Iret,
  Halt,
  // zero-cost annotations
  Label,
  SyncBegin,
  SyncEnd,
  MeasureBegin,
  MeasureEnd,
};

const char* to_string(Op op);
bool is_pseudo(Op op);
bool is_branch(Op op);

struct Instr {
  Op op = Op::Nop;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::int32_t imm = 0;
  std::string sym;  // label name, branch target, or sync tag
  int target = -1;  // resolved branch target index

  bool operator==(const Instr&) const = default;

  static Instr make(Op op, unsigned rd = 0, unsigned rs1 = 0, unsigned rs2 = 0,
                    std::int32_t imm = 0, std::string sym = {}) {
    Instr in;
    in.op = op;
    in.rd = u8(rd);
    in.rs1 = u8(rs1);
    in.rs2 = u8(rs2);
    in.imm = imm;
    in.sym = std::move(sym);
    return in;
  }
  static Instr nop() { return make(Op::Nop); }
  static Instr compute(std::int32_t n) { return make(Op::Compute, 0, 0, 0, n); }
  static Instr li(unsigned rd, std::int32_t v) { return make(Op::Li, rd, 0, 0, v); }
  static Instr alu_imm(Op op, unsigned rd, unsigned rs1, std::int32_t v) {
    return make(op, rd, rs1, 0, v);
  }
  static Instr alu(Op op, unsigned rd, unsigned rs1, unsigned rs2) {
    return make(op, rd, rs1, rs2);
  }
  static Instr load(unsigned rd, unsigned base, std::int32_t off) {
    return make(Op::Load, rd, base, 0, off);
  }
  static Instr store(unsigned src, unsigned base, std::int32_t off) {
    return make(Op::Store, 0, base, src, off);
  }
  static Instr tas(unsigned rd, unsigned base, std::int32_t off) {
    return make(Op::TasLoad, rd, base, 0, off);
  }
  static Instr elw(unsigned rd, unsigned base, std::int32_t off) {
    return make(Op::Elw, rd, base, 0, off);
  }
  static Instr branch(Op op, unsigned rs1, unsigned rs2, std::string target) {
    return make(op, 0, rs1, rs2, 0, std::move(target));
  }
  static Instr jump(std::string target) { return make(Op::Jump, 0, 0, 0, 0, std::move(target)); }
  static Instr iret() { return make(Op::Iret); }
  static Instr halt() { return make(Op::Halt); }
  static Instr label(std::string name) { return make(Op::Label, 0, 0, 0, 0, std::move(name)); }
  static Instr sync_begin(std::string tag) {
    return make(Op::SyncBegin, 0, 0, 0, 0, std::move(tag));
  }
  static Instr sync_end() { return make(Op::SyncEnd); }
  static Instr measure_begin() { return make(Op::MeasureBegin); }
  static Instr measure_end() { return make(Op::MeasureEnd); }

 private:
  static std::uint8_t u8(unsigned r) { return static_cast<std::uint8_t>(r); }
};

/// Instruction sequence with resolved labels. Labels stay in the stream as
/// zero-cost entries so listings round-trip.
class Program {
 public:
  Program() = default;
  explicit Program(std::vector<Instr> code);  // resolves labels, throws IllegalInstr

  const std::vector<Instr>& code() const { return code_; }
  std::size_t size() const { return code_.size(); }
  bool empty() const { return code_.empty(); }
  const Instr& operator[](std::size_t i) const { return code_[i]; }
  int label_index(std::string_view name) const;  // -1 if absent
  int irq_entry() const { return label_index("__irq"); }

  // Number of non-pseudo instructions.
  std::size_t instruction_count() const;

  std::string listing() const;

 private:
  std::vector<Instr> code_;
  std::unordered_map<std::string, int> labels_;
};

std::string format_instr(const Instr& in);

/// Parses the listing syntax produced by Program::listing(): one instruction
/// per line, `name:` labels, `#` comments, `.sync_begin tag`, `.sync_end`,
/// `.measure_begin`, `.measure_end`.
Program assemble(std::string_view text);

// True if executing `in` reads register `r` (r0 never counts).
bool reads_register(const Instr& in, unsigned r);

}  // namespace scusim
