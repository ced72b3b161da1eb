#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsc/value.hpp"

namespace hsc {

using RegId = uint32_t;
inline constexpr RegId kPc = 0;

// Register assignment indexed by RegId; slot 0 is pc.
using RegFile = std::vector<Value>;

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Lt, Eq, And, Or, Xor };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Const, Reg, Un, Bin, Ite };
  Kind kind = Kind::Const;
  Value value;
  RegId reg = 0;
  UnOp uop = UnOp::Neg;
  BinOp bop = BinOp::Add;
  ExprPtr a, b, c;

  bool is_const() const { return kind == Kind::Const; }
};

ExprPtr e_const(Value v);
ExprPtr e_reg(RegId r);
ExprPtr e_un(UnOp op, ExprPtr a);
ExprPtr e_bin(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr e_ite(ExprPtr c, ExprPtr t, ExprPtr f);

bool same_expr(const ExprPtr& x, const ExprPtr& y);

// Appends every register read by e (with repetition).
void expr_regs(const ExprPtr& e, std::vector<RegId>& out);

struct Instr {
  enum class Kind { Skip, Assign, CondAssign, Load, Store, Jmp, Beqz, Barrier };
  Kind kind = Kind::Skip;
  RegId x = 0;
  ExprPtr e;      // assigned value, address, or jump target
  ExprPtr guard;  // CondAssign only: assigns e when guard is 0
  Value target;   // Beqz only

  friend bool operator==(const Instr& l, const Instr& r);
};

struct Program {
  std::vector<Instr> code;
  std::vector<std::string> regs{"pc"};
  uint64_t modulus = uint64_t{1} << 16;

  // p(l): the instruction at address l, or nullptr for bottom.
  const Instr* at(Value l) const {
    if (l.is_bot() || l.nat() >= code.size()) return nullptr;
    return &code[l.nat()];
  }
  size_t num_regs() const { return regs.size(); }
  // Interns a register name.
  RegId reg(std::string_view name);
  // Returns the id or throws std::out_of_range.
  RegId find_reg(std::string_view name) const;
  const std::string& reg_name(RegId r) const { return regs.at(r); }
};

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(int l, int c, const std::string& msg);
};

Program parse_program(std::string_view text);
Program load_program_file(const std::string& path);

std::string print_expr(const Program& p, const ExprPtr& e);
std::string print_instr(const Program& p, const Instr& i);
std::string print_program(const Program& p);

// Partial evaluation: bottom anywhere below yields bottom.
Value eval_partial(const ExprPtr& e, const RegFile& a, uint64_t modulus);
// Total evaluation; throws std::logic_error when a bottom is read.
Value eval_total(const ExprPtr& e, const RegFile& a, uint64_t modulus);

struct Violation {
  uint64_t addr;
  std::string what;
};

std::vector<Violation> check_well_formed(const Program& p);

}  // namespace hsc
