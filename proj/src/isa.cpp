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

#include "isa.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "error.hpp"

namespace scusim {

namespace {

struct Mnemonic {
  Op op;
  const char* name;
};

constexpr Mnemonic kMnemonics[] = {
    {Op::Nop, "nop"},           {Op::Compute, "compute"},
    {Op::Li, "li"},             {Op::Addi, "addi"},
    {Op::Xori, "xori"},         {Op::Andi, "andi"},
    {Op::Add, "add"},           {Op::Sub, "sub"},
    {Op::And, "and"},           {Op::Or, "or"},
    {Op::Xor, "xor"},           {Op::Load, "lw"},
    {Op::Store, "sw"},          {Op::TasLoad, "tas"},
    {Op::Elw, "elw"},           {Op::Beq, "beq"},
    {Op::Bne, "bne"},           {Op::Blt, "blt"},
    {Op::Bge, "bge"},           {Op::Jump, "j"},
    {Op::Iret, "iret"},         {Op::Halt, "halt"},
    {Op::Label, "label"},       {Op::SyncBegin, ".sync_begin"},
    {Op::SyncEnd, ".sync_end"}, {Op::MeasureBegin, ".measure_begin"},
    {Op::MeasureEnd, ".measure_end"},
};

std::string hex(std::int32_t v) {
  std::ostringstream os;
  if (v < 0) os << "-0x" << std::hex << -static_cast<std::int64_t>(v);
  else os << "0x" << std::hex << v;
  return os.str();
}

std::string reg(unsigned r) { return "r" + std::to_string(r); }

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

std::int32_t parse_imm(const std::string& s, std::size_t line) {
  std::string t = s;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  int base = 10;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    base = 16;
    t = t.substr(2);
  }
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v, base);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    parse_fail(line, "bad immediate '" + s + "'");
  if (neg) v = -v;
  if (v < INT32_MIN || v > static_cast<std::int64_t>(UINT32_MAX))
    parse_fail(line, "immediate out of range '" + s + "'");
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(v & 0xFFFFFFFF));
}

unsigned parse_reg(const std::string& s, std::size_t line) {
  if (s.size() < 2 || s[0] != 'r') parse_fail(line, "expected register, got '" + s + "'");
  unsigned r = 0;
  auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), r);
  if (ec != std::errc() || p != s.data() + s.size() || r >= kNumRegs)
    parse_fail(line, "bad register '" + s + "'");
  return r;
}

// "imm(rN)"
void parse_mem(const std::string& s, std::size_t line, std::int32_t& imm, unsigned& base) {
  auto open = s.find('(');
  auto close = s.find(')');
  if (open == std::string::npos || close != s.size() - 1)
    parse_fail(line, "expected offset(reg), got '" + s + "'");
  auto off = trim(s.substr(0, open));
  imm = off.empty() ? 0 : parse_imm(off, line);
  base = parse_reg(trim(s.substr(open + 1, close - open - 1)), line);
}

}  // namespace

const char* to_string(Op op) {
  for (const auto& m : kMnemonics)
    if (m.op == op) return m.name;
  return "?";
}

bool is_pseudo(Op op) {
  return op == Op::Label || op == Op::SyncBegin || op == Op::SyncEnd ||
         op == Op::MeasureBegin || op == Op::MeasureEnd;
}

bool is_branch(Op op) {
  return op == Op::Beq || op == Op::Bne || op == Op::Blt || op == Op::Bge || op == Op::Jump;
}

bool reads_register(const Instr& in, unsigned r) {
  if (r == 0) return false;
  switch (in.op) {
    case Op::Addi:
    case Op::Xori:
    case Op::Andi:
    case Op::Load:
    case Op::TasLoad:
    case Op::Elw:
      return in.rs1 == r;
    case Op::Add:
    case Op::Sub:
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Store:
    case Op::Beq:
    case Op::Bne:
    case Op::Blt:
    case Op::Bge:
      return in.rs1 == r || in.rs2 == r;
    default:
      return false;
  }
}

Program::Program(std::vector<Instr> code) : code_(std::move(code)) {
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const auto& in = code_[i];
    if (in.op != Op::Label) continue;
    if (in.sym.empty()) throw Error(ErrorCode::IllegalInstr, "empty label name");
    if (!labels_.emplace(in.sym, static_cast<int>(i)).second)
      throw Error(ErrorCode::IllegalInstr, "duplicate label '" + in.sym + "'");
  }
  for (auto& in : code_) {
    if (in.rd >= kNumRegs || in.rs1 >= kNumRegs || in.rs2 >= kNumRegs)
      throw Error(ErrorCode::IllegalInstr, std::string("register index out of range in ") +
                                               to_string(in.op));
    if (in.op == Op::Compute && in.imm < 1)
      throw Error(ErrorCode::IllegalInstr, "compute needs at least one cycle");
    if (is_branch(in.op)) {
      auto it = labels_.find(in.sym);
      if (it == labels_.end())
        throw Error(ErrorCode::IllegalInstr, "unresolved label '" + in.sym + "'");
      in.target = it->second;
    }
  }
}

int Program::label_index(std::string_view name) const {
  auto it = labels_.find(std::string(name));
  return it == labels_.end() ? -1 : it->second;
}

std::size_t Program::instruction_count() const {
  std::size_t n = 0;
  for (const auto& in : code_)
    if (!is_pseudo(in.op)) ++n;
  return n;
}

std::string format_instr(const Instr& in) {
  switch (in.op) {
    case Op::Nop:
    case Op::Iret:
    case Op::Halt:
    case Op::SyncEnd:
    case Op::MeasureBegin:
    case Op::MeasureEnd:
      return to_string(in.op);
    case Op::Compute:
      return "compute " + std::to_string(in.imm);
    case Op::Li:
      return "li " + reg(in.rd) + ", " + hex(in.imm);
    case Op::Addi:
    case Op::Xori:
    case Op::Andi:
      return std::string(to_string(in.op)) + " " + reg(in.rd) + ", " + reg(in.rs1) + ", " +
             hex(in.imm);
    case Op::Add:
    case Op::Sub:
    case Op::And:
    case Op::Or:
    case Op::Xor:
      return std::string(to_string(in.op)) + " " + reg(in.rd) + ", " + reg(in.rs1) + ", " +
             reg(in.rs2);
    case Op::Load:
    case Op::TasLoad:
    case Op::Elw:
      return std::string(to_string(in.op)) + " " + reg(in.rd) + ", " + hex(in.imm) + "(" +
             reg(in.rs1) + ")";
    case Op::Store:
      return "sw " + reg(in.rs2) + ", " + hex(in.imm) + "(" + reg(in.rs1) + ")";
    case Op::Beq:
    case Op::Bne:
    case Op::Blt:
    case Op::Bge:
      return std::string(to_string(in.op)) + " " + reg(in.rs1) + ", " + reg(in.rs2) + ", " +
             in.sym;
    case Op::Jump:
      return "j " + in.sym;
    case Op::Label:
      return in.sym + ":";
    case Op::SyncBegin:
      return ".sync_begin " + in.sym;
  }
  return "?";
}

std::string Program::listing() const {
  std::string out;
  for (const auto& in : code_) {
    if (in.op != Op::Label) out += "  ";
    out += format_instr(in);
    out += '\n';
  }
  return out;
}

Program assemble(std::string_view text) {
  std::vector<Instr> code;
  std::istringstream is{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.back() == ':') {
      code.push_back(Instr::label(trim(line.substr(0, line.size() - 1))));
      continue;
    }
    auto sp = line.find_first_of(" \t");
    std::string mn = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp));
    auto ops = split_operands(rest);
    auto want = [&](std::size_t n) {
      if (ops.size() != n)
        parse_fail(lineno, mn + " expects " + std::to_string(n) + " operand(s)");
    };
    const Mnemonic* m = nullptr;
    for (const auto& k : kMnemonics)
      if (mn == k.name && k.op != Op::Label) m = &k;
    if (!m) parse_fail(lineno, "unknown mnemonic '" + mn + "'");
    Instr in = Instr::make(m->op);
    switch (m->op) {
      case Op::Nop:
      case Op::Iret:
      case Op::Halt:
      case Op::SyncEnd:
      case Op::MeasureBegin:
      case Op::MeasureEnd:
        want(0);
        break;
      case Op::SyncBegin:
        want(1);
        in.sym = ops[0];
        break;
      case Op::Compute:
        want(1);
        in.imm = parse_imm(ops[0], lineno);
        break;
      case Op::Li:
        want(2);
        in.rd = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        in.imm = parse_imm(ops[1], lineno);
        break;
      case Op::Addi:
      case Op::Xori:
      case Op::Andi:
        want(3);
        in.rd = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        in.rs1 = static_cast<std::uint8_t>(parse_reg(ops[1], lineno));
        in.imm = parse_imm(ops[2], lineno);
        break;
      case Op::Add:
      case Op::Sub:
      case Op::And:
      case Op::Or:
      case Op::Xor:
        want(3);
        in.rd = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        in.rs1 = static_cast<std::uint8_t>(parse_reg(ops[1], lineno));
        in.rs2 = static_cast<std::uint8_t>(parse_reg(ops[2], lineno));
        break;
      case Op::Load:
      case Op::TasLoad:
      case Op::Elw: {
        want(2);
        in.rd = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        unsigned base = 0;
        parse_mem(ops[1], lineno, in.imm, base);
        in.rs1 = static_cast<std::uint8_t>(base);
        break;
      }
      case Op::Store: {
        want(2);
        in.rs2 = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        unsigned base = 0;
        parse_mem(ops[1], lineno, in.imm, base);
        in.rs1 = static_cast<std::uint8_t>(base);
        break;
      }
      case Op::Beq:
      case Op::Bne:
      case Op::Blt:
      case Op::Bge:
        want(3);
        in.rs1 = static_cast<std::uint8_t>(parse_reg(ops[0], lineno));
        in.rs2 = static_cast<std::uint8_t>(parse_reg(ops[1], lineno));
        in.sym = ops[2];
        break;
      case Op::Jump:
        want(1);
        in.sym = ops[0];
        break;
      case Op::Label:
        break;
    }
    code.push_back(std::move(in));
  }
  return Program(std::move(code));
}

}  // namespace scusim
