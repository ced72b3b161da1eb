#include <gtest/gtest.h>

#include <random>

#include "hsc/analysis.hpp"
#include "hsc/arch.hpp"

using namespace hsc;

namespace {

const char* kSpectreV1 = R"(x <- y < size_A
beqz x, end
load z, A + y
z <- z * 64
load w, B + z
)";

}  // namespace

TEST(Arch, InitialStateIsAllZero) {
  Program p = parse_program("x <- 1\n");
  ArchState s = initial_state(p);
  for (const Value& v : s.regs) EXPECT_EQ(v, Value(0));
  EXPECT_FALSE(s.final());
}

TEST(Arch, SkipAdvancesPc) {
  Program p = parse_program("skip\nskip\n");
  ArchState s = initial_state(p);
  ArchState t = arch_step(p, s);
  EXPECT_EQ(t.regs[kPc], Value(1));
  t.regs[kPc] = Value(0);
  EXPECT_EQ(t, s);
}

TEST(Arch, BeqzTaken) {
  Program p = parse_program("beqz x, 5\n");
  ArchState t = arch_step(p, initial_state(p));
  EXPECT_EQ(t.regs[kPc], Value(5));
}

TEST(Arch, BeqzNotTaken) {
  Program p = parse_program("beqz x, 5\n");
  ArchState s = initial_state(p);
  s.regs[p.find_reg("x")] = Value(1);
  EXPECT_EQ(arch_step(p, s).regs[kPc], Value(1));
}

TEST(Arch, StoreWritesMemory) {
  Program p = parse_program("store x, 3 + 4\n");
  ArchState s = initial_state(p);
  s.regs[p.find_reg("x")] = Value(3);
  ArchState t = arch_step(p, s);
  EXPECT_EQ(t.mem.get(7), 3u);
  EXPECT_EQ(t.regs[kPc], Value(1));
}

TEST(Arch, ConditionalUpdate) {
  Program p = parse_program("x <- g ? 9\n");
  ArchState s = initial_state(p);
  EXPECT_EQ(arch_step(p, s).regs[p.find_reg("x")], Value(9));  // guard 0: assign
  s.regs[p.find_reg("g")] = Value(1);
  EXPECT_EQ(arch_step(p, s).regs[p.find_reg("x")], Value(0));  // guard non-zero: keep
}

TEST(Arch, JmpAndTerminate) {
  Program p = parse_program("jmp 2\nskip\n");
  ArchState t = arch_step(p, initial_state(p));
  EXPECT_EQ(t.regs[kPc], Value(2));
  EXPECT_TRUE(arch_step(p, t).final());  // p(2) = bottom
}

TEST(Arch, EmptyProgramTerminatesInOneStep) {
  Program p = parse_program("");
  RunResult r = arch_run(p, initial_state(p));
  EXPECT_EQ(r.steps, 1u);
  EXPECT_TRUE(r.state.final());
}

// Hand execution: y=1 < size_A=2, so x=1, the branch falls through,
// z = A[1] = 0, z = 0, w = B[0] = mem[12] = 7.
TEST(Arch, SpectreV1InBoundsRun) {
  Program p = parse_program(kSpectreV1);
  ArchState s = initial_state(p);
  s.regs[p.find_reg("y")] = Value(1);
  s.regs[p.find_reg("size_A")] = Value(2);
  s.regs[p.find_reg("A")] = Value(8);
  s.regs[p.find_reg("B")] = Value(12);
  s.mem.set(12, 7);
  s.mem.set(9, 0);
  RunResult r = arch_run(p, s);
  EXPECT_EQ(r.steps, 6u);  // five instructions + Terminate
  EXPECT_EQ(r.state.regs[p.find_reg("w")], Value(7));
  EXPECT_EQ(r.state.regs[p.find_reg("x")], Value(1));
  EXPECT_EQ(r.state.regs[p.find_reg("z")], Value(0));
  EXPECT_TRUE(r.state.final());
}

TEST(Arch, FuelExhausted) {
  Program p = parse_program("L: jmp L\n");
  EXPECT_THROW(arch_run(p, initial_state(p), 100), FuelExhausted);
}

TEST(Arch, StuckOnBottomRead) {
  Program p = parse_program("x <- y + 1\n");
  ArchState s = initial_state(p);
  s.regs[p.find_reg("y")] = Value::bot();
  EXPECT_THROW(arch_step(p, s), StuckError);
}

TEST(Arch, StateLiteralRoundTrip) {
  Program p = parse_program("load x, 4\n");
  ArchState s = parse_state(p, "reg x=3\nmem 4=9  # A[0]\nreg pc=0\n");
  EXPECT_EQ(s.regs[p.find_reg("x")], Value(3));
  EXPECT_EQ(s.mem.get(4), 9u);
  EXPECT_EQ(parse_state(p, print_state(p, s)), s);
  EXPECT_THROW(parse_state(p, "reg nope=1\n"), std::runtime_error);
}

// arch_step is a function, and it respects the frame conditions.
TEST(ArchProperty, DeterminismAndFrame) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    Program p = random_program(rng, 8);
    ArchState s = initial_state(p);
    for (uint64_t a = 0; a < 3; ++a) s.mem.set(a, rng() % 4);
    while (!s.final()) {
      const Instr* i = p.at(s.regs[kPc]);
      ArchState t1 = arch_step(p, s), t2 = arch_step(p, s);
      ASSERT_EQ(t1, t2);
      if (!i || i->kind != Instr::Kind::Store) ASSERT_EQ(t1.mem, s.mem);
      bool writes = i && (i->kind == Instr::Kind::Assign || i->kind == Instr::Kind::CondAssign ||
                          i->kind == Instr::Kind::Load);
      if (!writes)
        for (RegId r = 1; r < s.regs.size(); ++r) ASSERT_EQ(t1.regs[r], s.regs[r]);
      s = t1;
    }
  }
}
