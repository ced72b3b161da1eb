#include "hsc/isa.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace hsc {

ExprPtr e_const(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Const;
  e->value = v;
  return e;
}

ExprPtr e_reg(RegId r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Reg;
  e->reg = r;
  return e;
}

ExprPtr e_un(UnOp op, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Un;
  e->uop = op;
  e->a = std::move(a);
  return e;
}

ExprPtr e_bin(BinOp op, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bin;
  e->bop = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr e_ite(ExprPtr c, ExprPtr t, ExprPtr f) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Ite;
  e->a = std::move(c);
  e->b = std::move(t);
  e->c = std::move(f);
  return e;
}

bool same_expr(const ExprPtr& x, const ExprPtr& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind) return false;
  switch (x->kind) {
    case Expr::Kind::Const: return x->value == y->value;
    case Expr::Kind::Reg: return x->reg == y->reg;
    case Expr::Kind::Un: return x->uop == y->uop && same_expr(x->a, y->a);
    case Expr::Kind::Bin:
      return x->bop == y->bop && same_expr(x->a, y->a) && same_expr(x->b, y->b);
    case Expr::Kind::Ite:
      return same_expr(x->a, y->a) && same_expr(x->b, y->b) && same_expr(x->c, y->c);
  }
  return false;
}

void expr_regs(const ExprPtr& e, std::vector<RegId>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::Reg) out.push_back(e->reg);
  expr_regs(e->a, out);
  expr_regs(e->b, out);
  expr_regs(e->c, out);
}

bool operator==(const Instr& l, const Instr& r) {
  return l.kind == r.kind && l.x == r.x && same_expr(l.e, r.e) &&
         same_expr(l.guard, r.guard) && l.target == r.target;
}

RegId Program::reg(std::string_view name) {
  for (RegId i = 0; i < regs.size(); ++i)
    if (regs[i] == name) return i;
  regs.emplace_back(name);
  return static_cast<RegId>(regs.size() - 1);
}

RegId Program::find_reg(std::string_view name) const {
  for (RegId i = 0; i < regs.size(); ++i)
    if (regs[i] == name) return i;
  throw std::out_of_range("unknown register '" + std::string(name) + "'");
}

ParseError::ParseError(int l, int c, const std::string& msg)
    : std::runtime_error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " +
                         msg),
      line(l),
      column(c) {}

// ---------------------------------------------------------------------------
// Evaluation

static Value apply_un(UnOp op, uint64_t a, uint64_t mod) {
  switch (op) {
    case UnOp::Neg: return (mod - a % mod) % mod;
    case UnOp::Not: return a == 0 ? 1 : 0;
  }
  return Value::bot();
}

static Value apply_bin(BinOp op, uint64_t a, uint64_t b, uint64_t mod) {
  switch (op) {
    case BinOp::Add: return (a + b) % mod;
    case BinOp::Sub: return (a + mod - b % mod) % mod;
    case BinOp::Mul: return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % mod);
    case BinOp::Lt: return a < b ? 1 : 0;
    case BinOp::Eq: return a == b ? 1 : 0;
    case BinOp::And: return (a & b) % mod;
    case BinOp::Or: return (a | b) % mod;
    case BinOp::Xor: return (a ^ b) % mod;
  }
  return Value::bot();
}

Value eval_partial(const ExprPtr& e, const RegFile& a, uint64_t mod) {
  switch (e->kind) {
    case Expr::Kind::Const: return e->value;
    case Expr::Kind::Reg: return e->reg < a.size() ? a[e->reg] : Value::bot();
    case Expr::Kind::Un: {
      Value x = eval_partial(e->a, a, mod);
      return x.is_bot() ? x : apply_un(e->uop, x.nat(), mod);
    }
    case Expr::Kind::Bin: {
      Value x = eval_partial(e->a, a, mod);
      if (x.is_bot()) return x;
      Value y = eval_partial(e->b, a, mod);
      if (y.is_bot()) return y;
      return apply_bin(e->bop, x.nat(), y.nat(), mod);
    }
    case Expr::Kind::Ite: {
      Value c = eval_partial(e->a, a, mod);
      Value t = eval_partial(e->b, a, mod);
      Value f = eval_partial(e->c, a, mod);
      if (c.is_bot() || t.is_bot() || f.is_bot()) return Value::bot();
      return c.nat() != 0 ? t : f;
    }
  }
  return Value::bot();
}

Value eval_total(const ExprPtr& e, const RegFile& a, uint64_t mod) {
  Value v = eval_partial(e, a, mod);
  if (v.is_bot()) throw std::logic_error("total evaluation read an undefined value");
  return v;
}

// ---------------------------------------------------------------------------
// Well-formedness

std::vector<Violation> check_well_formed(const Program& p) {
  std::vector<Violation> out;
  for (uint64_t l = 0; l < p.code.size(); ++l) {
    const Instr& i = p.code[l];
    bool writes = i.kind == Instr::Kind::Assign || i.kind == Instr::Kind::CondAssign ||
                  i.kind == Instr::Kind::Load;
    if (writes && i.x == kPc) out.push_back({l, "assignment to pc"});
    if (i.kind == Instr::Kind::Beqz && i.target == Value(l + 1))
      out.push_back({l, "branch target is the fall-through address"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

static int prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::Xor: return 2;
    case BinOp::And: return 3;
    case BinOp::Eq: return 4;
    case BinOp::Lt: return 5;
    case BinOp::Add:
    case BinOp::Sub: return 6;
    case BinOp::Mul: return 7;
  }
  return 0;
}

static const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Lt: return "<";
    case BinOp::Eq: return "==";
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    case BinOp::Xor: return "^";
  }
  return "?";
}

static void print_rec(const Program& p, const ExprPtr& e, int ctx, std::string& out) {
  switch (e->kind) {
    case Expr::Kind::Const: out += e->value.str(); return;
    case Expr::Kind::Reg: out += p.reg_name(e->reg); return;
    case Expr::Kind::Un:
      out += e->uop == UnOp::Neg ? "-" : "!";
      print_rec(p, e->a, 8, out);
      return;
    case Expr::Kind::Ite:
      out += "ite(";
      print_rec(p, e->a, 0, out);
      out += ", ";
      print_rec(p, e->b, 0, out);
      out += ", ";
      print_rec(p, e->c, 0, out);
      out += ")";
      return;
    case Expr::Kind::Bin: {
      int q = prec(e->bop);
      bool paren = q < ctx;
      if (paren) out += "(";
      print_rec(p, e->a, q, out);
      out += " ";
      out += op_text(e->bop);
      out += " ";
      print_rec(p, e->b, q + 1, out);
      if (paren) out += ")";
      return;
    }
  }
}

std::string print_expr(const Program& p, const ExprPtr& e) {
  std::string out;
  print_rec(p, e, 0, out);
  return out;
}

std::string print_instr(const Program& p, const Instr& i) {
  const std::string& x = p.reg_name(i.x);
  switch (i.kind) {
    case Instr::Kind::Skip: return "skip";
    case Instr::Kind::Barrier: return "spbarr";
    case Instr::Kind::Assign: return x + " <- " + print_expr(p, i.e);
    case Instr::Kind::CondAssign:
      return x + " <- " + print_expr(p, i.guard) + " ? " + print_expr(p, i.e);
    case Instr::Kind::Load: return "load " + x + ", " + print_expr(p, i.e);
    case Instr::Kind::Store: return "store " + x + ", " + print_expr(p, i.e);
    case Instr::Kind::Jmp: return "jmp " + print_expr(p, i.e);
    case Instr::Kind::Beqz: return "beqz " + x + ", " + i.target.str();
  }
  return "?";
}

std::string print_program(const Program& p) {
  std::string out;
  for (const Instr& i : p.code) out += print_instr(p, i) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Ident, Num, Punct, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  int col;
};

struct PendingRef {
  size_t instr;
  std::string label;
  int line, col;
};

class LineParser {
public:
  LineParser(std::string_view line, int lineno, Program& p,
             const std::map<std::string, uint64_t>& labels)
      : p_(p), labels_(labels), lineno_(lineno) {
    lex(line);
  }

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(lineno_, t.col, msg);
  }

  bool is_punct(const char* s, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == s;
  }

  void expect_punct(const char* s) {
    if (!is_punct(s)) fail(peek(), std::string("expected '") + s + "'");
    ++pos_;
  }

  Token expect_ident() {
    if (peek().kind != Tok::Ident) fail(peek(), "expected identifier");
    return next();
  }

  ExprPtr expr() { return binary(1); }

  std::vector<PendingRef>* refs = nullptr;

private:
  void lex(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
      char c = s[i];
      int col = static_cast<int>(i) + 1;
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                                s[j] == '\''))
          ++j;
        toks_.push_back({Tok::Ident, std::string(s.substr(i, j - i)), col});
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        toks_.push_back({Tok::Num, std::string(s.substr(i, j - i)), col});
        i = j;
        continue;
      }
      if (s.substr(i, 2) == "<-") {
        toks_.push_back({Tok::Arrow, "<-", col});
        i += 2;
        continue;
      }
      if (s.substr(i, 3) == "\xE2\x86\x90") {  // U+2190
        toks_.push_back({Tok::Arrow, "<-", col});
        i += 3;
        continue;
      }
      if (s.substr(i, 3) == "\xE2\x8A\xA5") {  // U+22A5
        toks_.push_back({Tok::Ident, "end", col});
        i += 3;
        continue;
      }
      if (s.substr(i, 2) == "==") {
        toks_.push_back({Tok::Punct, "==", col});
        i += 2;
        continue;
      }
      if (std::string_view("+-*<=&|^!(),?:~").find(c) != std::string_view::npos) {
        toks_.push_back({Tok::Punct, std::string(1, c == '=' ? '=' : c), col});
        if (c == '=') toks_.back().text = "==";
        if (c == '~') toks_.back().text = "!";
        ++i;
        continue;
      }
      throw ParseError(lineno_, col, std::string("unexpected character '") + c + "'");
    }
    toks_.push_back({Tok::End, "", static_cast<int>(s.size()) + 1});
  }

  static int bin_prec(const Token& t, BinOp& op) {
    if (t.kind == Tok::Arrow) {
      op = BinOp::Lt;
      return 5;
    }
    if (t.kind != Tok::Punct) return 0;
    static const std::pair<const char*, BinOp> table[] = {
        {"|", BinOp::Or}, {"^", BinOp::Xor}, {"&", BinOp::And}, {"==", BinOp::Eq},
        {"<", BinOp::Lt}, {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}};
    for (auto& [s, o] : table)
      if (t.text == s) {
        op = o;
        return prec(o);
      }
    return 0;
  }

  ExprPtr binary(int min_prec) {
    ExprPtr lhs = unary();
    for (;;) {
      BinOp op;
      int q = bin_prec(peek(), op);
      if (q == 0 || q < min_prec) return lhs;
      Token t = next();
      ExprPtr rhs;
      if (t.kind == Tok::Arrow) {
        // "a<-b" inside an expression reads as a < -b.
        rhs = continue_binary(e_un(UnOp::Neg, unary()), q + 1);
      } else {
        rhs = binary(q + 1);
      }
      lhs = e_bin(op, lhs, rhs);
    }
  }

  ExprPtr continue_binary(ExprPtr lhs, int min_prec) {
    for (;;) {
      BinOp op;
      int q = bin_prec(peek(), op);
      if (q == 0 || q < min_prec) return lhs;
      next();
      lhs = e_bin(op, lhs, binary(q + 1));
    }
  }

  ExprPtr unary() {
    if (is_punct("-")) {
      next();
      return e_un(UnOp::Neg, unary());
    }
    if (is_punct("!")) {
      next();
      return e_un(UnOp::Not, unary());
    }
    return primary();
  }

  ExprPtr primary() {
    Token t = next();
    if (t.kind == Tok::Num) {
      try {
        return e_const(std::stoull(t.text) % p_.modulus);
      } catch (const std::out_of_range&) {
        fail(t, "number out of range");
      }
    }
    if (t.kind == Tok::Punct && t.text == "(") {
      ExprPtr e = expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "end") return e_const(Value::bot());
      if (t.text == "ite" && is_punct("(")) {
        next();
        ExprPtr c = expr();
        expect_punct(",");
        ExprPtr a = expr();
        expect_punct(",");
        ExprPtr b = expr();
        expect_punct(")");
        return e_ite(c, a, b);
      }
      if (labels_.count(t.text)) return e_const(labels_.at(t.text));
      if (is_keyword(t.text)) fail(t, "keyword '" + t.text + "' used as register");
      return e_reg(p_.reg(t.text));
    }
    fail(t, t.kind == Tok::End ? "unexpected end of line" : "unexpected '" + t.text + "'");
  }

public:
  static bool is_keyword(const std::string& s) {
    return s == "skip" || s == "spbarr" || s == "load" || s == "store" || s == "jmp" ||
           s == "beqz" || s == "end" || s == "ite";
  }

private:
  Program& p_;
  const std::map<std::string, uint64_t>& labels_;
  int lineno_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view l = text.substr(start, nl - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    start = nl + 1;
  }
  return lines;
}

}  // namespace

Program parse_program(std::string_view text) {
  Program p;
  std::vector<std::string_view> lines = split_lines(text);
  std::map<std::string, uint64_t> labels;

  // First pass: label addresses, so forward references resolve.
  {
    uint64_t addr = 0;
    std::map<std::string, uint64_t> none;
    Program scratch;
    for (size_t n = 0; n < lines.size(); ++n) {
      LineParser lp(lines[n], static_cast<int>(n) + 1, scratch, none);
      while (lp.peek().kind == Tok::Ident && lp.is_punct(":", 1)) {
        Token t = lp.next();
        lp.next();
        if (LineParser::is_keyword(t.text)) lp.fail(t, "keyword used as label");
        if (!labels.emplace(t.text, addr).second) lp.fail(t, "duplicate label '" + t.text + "'");
      }
      if (!lp.at_end()) ++addr;
    }
  }

  for (size_t n = 0; n < lines.size(); ++n) {
    LineParser lp(lines[n], static_cast<int>(n) + 1, p, labels);
    while (lp.peek().kind == Tok::Ident && lp.is_punct(":", 1)) {
      lp.next();
      lp.next();
    }
    if (lp.at_end()) continue;
    Instr in;
    Token head = lp.peek();
    if (head.kind != Tok::Ident) lp.fail(head, "expected instruction");
    if (head.text == "skip" || head.text == "spbarr") {
      lp.next();
      in.kind = head.text == "skip" ? Instr::Kind::Skip : Instr::Kind::Barrier;
    } else if ((head.text == "load" || head.text == "store") && lp.peek(1).kind == Tok::Ident) {
      lp.next();
      in.kind = head.text == "load" ? Instr::Kind::Load : Instr::Kind::Store;
      Token x = lp.expect_ident();
      if (LineParser::is_keyword(x.text)) lp.fail(x, "keyword used as register");
      in.x = p.reg(x.text);
      lp.expect_punct(",");
      in.e = lp.expr();
    } else if (head.text == "jmp" && lp.peek(1).kind != Tok::Arrow) {
      lp.next();
      in.kind = Instr::Kind::Jmp;
      in.e = lp.expr();
    } else if (head.text == "beqz" && lp.peek(1).kind == Tok::Ident) {
      lp.next();
      in.kind = Instr::Kind::Beqz;
      Token x = lp.expect_ident();
      if (LineParser::is_keyword(x.text)) lp.fail(x, "keyword used as register");
      in.x = p.reg(x.text);
      lp.expect_punct(",");
      Token t = lp.next();
      if (t.kind == Tok::Num) {
        in.target = std::stoull(t.text);
      } else if (t.kind == Tok::Ident && t.text == "end") {
        in.target = Value::bot();
      } else if (t.kind == Tok::Ident) {
        auto it = labels.find(t.text);
        if (it == labels.end()) lp.fail(t, "unknown label '" + t.text + "'");
        in.target = it->second;
      } else {
        lp.fail(t, "expected branch target");
      }
    } else if (lp.peek(1).kind == Tok::Arrow) {
      Token x = lp.next();
      if (LineParser::is_keyword(x.text)) lp.fail(x, "keyword used as register");
      lp.next();
      in.x = p.reg(x.text);
      ExprPtr first = lp.expr();
      if (lp.is_punct("?")) {
        lp.next();
        in.kind = Instr::Kind::CondAssign;
        in.guard = first;
        in.e = lp.expr();
      } else {
        in.kind = Instr::Kind::Assign;
        in.e = first;
      }
    } else {
      lp.fail(head, "unknown instruction '" + head.text + "'");
    }
    if (!lp.at_end()) lp.fail(lp.peek(), "trailing input '" + lp.peek().text + "'");
    p.code.push_back(std::move(in));
  }
  return p;
}

Program load_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open program file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

}  // namespace hsc
