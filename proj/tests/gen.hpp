#pragma once

// Random reorder buffers for the projection and scheduler property tests.

#include <random>

#include "hsc/uarch.hpp"

namespace hsc::testgen {

inline ExprPtr random_expr(std::mt19937_64& rng, bool resolved) {
  if (resolved) return e_const(Value(rng() % 64));
  ExprPtr r = e_reg(1 + rng() % 3);
  return rng() % 2 ? r : e_bin(BinOp::Add, r, e_const(Value(rng() % 8)));
}

inline Cmd random_cmd(std::mt19937_64& rng) {
  Cmd c;
  switch (rng() % 7) {
    case 0: c.kind = Cmd::Kind::Skip; break;
    case 1: c.kind = Cmd::Kind::Barrier; break;
    case 2:
      c.kind = Cmd::Kind::Load;
      c.x = 1 + rng() % 3;
      c.e = random_expr(rng, rng() % 2);
      break;
    case 3:
      c.kind = Cmd::Kind::Store;
      c.x = 1 + rng() % 3;
      c.e = random_expr(rng, rng() % 2);
      c.src = random_expr(rng, rng() % 2);
      break;
    case 4:  // predicted branch
      c.kind = Cmd::Kind::Assign;
      c.x = kPc;
      c.e = e_const(Value(rng() % 8));
      c.tag = rng() % 8;
      break;
    case 5:  // marked fall-through
      c.kind = Cmd::Kind::Assign;
      c.x = kPc;
      c.e = e_const(Value(rng() % 8));
      c.marked = true;
      break;
    default:
      c.kind = Cmd::Kind::Assign;
      c.x = 1 + rng() % 3;
      c.e = random_expr(rng, rng() % 2);
  }
  return c;
}

inline Buffer random_buffer(std::mt19937_64& rng, size_t max_len) {
  Buffer b(rng() % (max_len + 1));
  for (Cmd& c : b) c = random_cmd(rng);
  return b;
}

// Same shape, every resolved value replaced by a fresh one.
inline Buffer remix_values(std::mt19937_64& rng, const Buffer& b) {
  Buffer out = b;
  auto remix = [&](ExprPtr& e) {
    if (e && e->is_const() && e->value.is_nat()) e = e_const(Value(rng() % 64));
  };
  for (Cmd& c : out) {
    remix(c.e);
    remix(c.src);
  }
  return out;
}

}  // namespace hsc::testgen
