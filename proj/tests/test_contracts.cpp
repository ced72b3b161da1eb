#include <gtest/gtest.h>

#include <random>

#include "hsc/analysis.hpp"
#include "hsc/contracts.hpp"

using namespace hsc;

namespace {

const char* kSpectreV1 = R"(x <- y < size_A
beqz x, end
load z, A + y
z <- z * 64
load w, B + z
)";

// A = 8, B = 12, size_A = 2.
ArchState v1_state(Program& p, uint64_t y) {
  ArchState s = initial_state(p);
  s.regs[p.find_reg("y")] = Value(y);
  s.regs[p.find_reg("size_A")] = Value(2);
  s.regs[p.find_reg("A")] = Value(8);
  s.regs[p.find_reg("B")] = Value(12);
  return s;
}

std::vector<std::string> lines(const ContractTrace& t) {
  std::vector<std::string> out;
  for (const Observation& o : t) out.push_back(format_observation(o));
  return out;
}

using Lines = std::vector<std::string>;

}  // namespace

TEST(Contracts, ParseNames) {
  for (const char* n : {"seq-ct", "seq-arch", "spec-ct", "spec-pc-ct", "spec-arch", "top"})
    EXPECT_EQ(ContractId::parse(n).name(), n);
  EXPECT_EQ(ContractId::parse("bot"), ContractId::bot());
  EXPECT_THROW(ContractId::parse("seq-pc-ct"), std::invalid_argument);
  EXPECT_THROW(ContractId::parse("fast"), std::invalid_argument);
}

// The branch observation is the post-step pc; 0-based addressing makes it 2.
TEST(Contracts, SeqCtSpectreV1InBounds) {
  Program p = parse_program(kSpectreV1);
  ArchState s = v1_state(p, 1);
  s.mem.set(9, 3);
  EXPECT_EQ(lines(trace_seq(p, s, Observer::Ct)),
            (Lines{"pc 2", "load 9", "load " + std::to_string(12 + 3 * 64)}));
}

TEST(Contracts, SeqArchSpectreV1InBounds) {
  Program p = parse_program(kSpectreV1);
  ArchState s = v1_state(p, 1);
  s.mem.set(9, 3);
  s.mem.set(12 + 192, 5);
  EXPECT_EQ(lines(trace_seq(p, s, Observer::Arch)), (Lines{"pc 2", "loadv 9 3", "loadv 204 5"}));
}

TEST(Contracts, SkipHasEmptyTrace) {
  Program p = parse_program("skip\n");
  EXPECT_TRUE(trace_seq(p, initial_state(p), Observer::Ct).empty());
  EXPECT_TRUE(trace_spec(p, initial_state(p), Observer::Ct, 6).empty());
}

TEST(Contracts, StoreAndJmpObservations) {
  Program p = parse_program("store x, 5\njmp 3\nskip\n");
  EXPECT_EQ(lines(trace_seq(p, initial_state(p), Observer::Ct)), (Lines{"store 5", "pc 3"}));
}

// y = 3 >= size_A: the branch is taken architecturally. The mispredicted
// path loads A[3] = mem[11] and B[A[3]*64], runs off the end and rolls back
// to the correct pc (bottom).
TEST(Contracts, SpecCtSpectreV1OutOfBounds) {
  Program p = parse_program(kSpectreV1);
  ArchState s = v1_state(p, 3);
  s.mem.set(11, 1);
  EXPECT_EQ(lines(trace_spec(p, s, Observer::Ct, 10)),
            (Lines{"pc 2", "load 11", "load 76", "pc end"}));
  EXPECT_EQ(lines(trace_spec(p, s, Observer::PcCt, 10)), (Lines{"pc 2", "pc end"}));
  EXPECT_EQ(lines(trace_spec(p, s, Observer::Arch, 10)),
            (Lines{"pc 2", "loadv 11 1", "loadv 76 0", "pc end"}));
  // Architecturally nothing is loaded.
  EXPECT_EQ(lines(trace_seq(p, s, Observer::Ct)), (Lines{"pc end"}));
}

// The window bounds the mispredicted path: with w = 2 only the first load is seen.
TEST(Contracts, SpecWindowBoundsSpeculation) {
  Program p = parse_program(kSpectreV1);
  ArchState s = v1_state(p, 3);
  EXPECT_EQ(lines(trace_spec(p, s, Observer::Ct, 2)), (Lines{"pc 2", "load 11", "pc end"}));
}

TEST(Contracts, BarrierEndsSpeculation) {
  Program p = parse_program("beqz x, end\nspbarr\nload y, 7\n");
  ArchState s = initial_state(p);  // x = 0: taken
  EXPECT_EQ(lines(trace_spec(p, s, Observer::Ct, 10)), (Lines{"pc 1", "pc end"}));
}

// In-bounds: the mispredicted path is the exit, so it rolls back immediately.
TEST(Contracts, SpecCtSpectreV1InBounds) {
  Program p = parse_program(kSpectreV1);
  ArchState s = v1_state(p, 1);
  EXPECT_EQ(lines(trace_spec(p, s, Observer::Ct, 10)),
            (Lines{"pc end", "pc 2", "load 9", "load 12"}));
}

TEST(Contracts, StraightLineSpecEqualsSeq) {
  Program p = parse_program("load x, 3\nstore x, x + 1\ny <- x * 2\nload z, y\n");
  ArchState s = initial_state(p);
  s.mem.set(3, 2);
  for (Observer o : {Observer::Ct, Observer::Arch})
    EXPECT_EQ(trace_spec(p, s, o, 6), trace_seq(p, s, o));
}

TEST(Contracts, TopAndBot) {
  Program p = parse_program("skip\n");
  ArchState s = initial_state(p);
  EXPECT_TRUE(trace_degenerate(p, s, ContractId::Mode::Top).empty());
  ContractTrace b = trace_degenerate(p, s, ContractId::Mode::Bot);
  EXPECT_EQ(b.size(), 2u);  // one snapshot per architectural step
  EXPECT_EQ(b[0].kind, Observation::Kind::State);
  EXPECT_NE(b[0], b[1]);
}

TEST(Contracts, BotDistinguishesExactlyDistinctStates) {
  Program p = parse_program("load x, 0\nskip\n");
  std::vector<ArchState> states;
  for (uint64_t v = 0; v < 3; ++v)
    for (uint64_t u = 0; u < 2; ++u) {
      ArchState s = initial_state(p);
      s.mem.set(0, v);
      s.mem.set(9, u);
      states.push_back(s);
    }
  for (size_t i = 0; i < states.size(); ++i)
    for (size_t j = 0; j < states.size(); ++j)
      EXPECT_EQ(trace_degenerate(p, states[i], ContractId::Mode::Bot) ==
                    trace_degenerate(p, states[j], ContractId::Mode::Bot),
                i == j);
}

TEST(Contracts, StrongerSeqCtOverSeqArch) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    Program p = random_program(rng);
    auto states = random_program_domain().enumerate(p);
    EXPECT_FALSE(contract_stronger_test(p, states, ContractId::seq(Observer::Ct),
                                        ContractId::seq(Observer::Arch), 6));
  }
}

// Varying the in-bounds loaded value keeps ct traces equal but changes arch traces.
TEST(Contracts, SeqArchNotStrongerThanSeqCt) {
  Program p = parse_program(kSpectreV1);
  std::vector<ArchState> states;
  for (uint64_t v = 0; v < 2; ++v) {
    ArchState s = v1_state(p, 1);
    s.mem.set(12, v);
    states.push_back(s);
  }
  auto w = contract_stronger_test(p, states, ContractId::seq(Observer::Arch),
                                  ContractId::seq(Observer::Ct), 6);
  ASSERT_TRUE(w.has_value());
  EXPECT_NE(w->c1_a, w->c1_b);
}

TEST(Contracts, TopStrongerThanAnything) {
  Program p = parse_program(kSpectreV1);
  std::vector<ArchState> states;
  for (uint64_t y = 0; y < 4; ++y) states.push_back(v1_state(p, y));
  for (const char* c : {"seq-ct", "seq-arch", "spec-ct", "spec-pc-ct", "spec-arch", "bot"})
    EXPECT_FALSE(contract_stronger_test(p, states, ContractId::top(), ContractId::parse(c), 6));
}

// Observer monotonicity on identical runs.
TEST(ContractsProperty, ObserverFilters) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    Program p = random_program(rng);
    for (const ArchState& s : random_program_domain().enumerate(p)) {
      ContractTrace ct = trace_spec(p, s, Observer::Ct, 6);
      ContractTrace pc = trace_spec(p, s, Observer::PcCt, 6);
      ContractTrace ar = trace_spec(p, s, Observer::Arch, 6);
      // pc-ct is a subsequence of ct.
      size_t j = 0;
      for (size_t i = 0; i < ct.size() && j < pc.size(); ++i)
        if (ct[i] == pc[j]) ++j;
      ASSERT_EQ(j, pc.size());
      // ct is the value erasure of arch.
      ASSERT_EQ(ct.size(), ar.size());
      for (size_t i = 0; i < ct.size(); ++i) {
        Observation e = ar[i];
        if (e.kind == Observation::Kind::LoadVal) e = {Observation::Kind::Load, e.addr, {}, {}};
        ASSERT_EQ(e, ct[i]);
      }
      if (k % 10 == 0) break;
    }
  }
}

// Traces are deterministic functions of the initial state.
TEST(ContractsProperty, Determinism) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    Program p = random_program(rng);
    ArchState s = initial_state(p);
    s.mem.set(1, rng() % 4);
    for (const char* c : {"seq-ct", "seq-arch", "spec-ct", "spec-pc-ct", "spec-arch", "bot"})
      ASSERT_EQ(contract_trace(p, s, ContractId::parse(c), 5),
                contract_trace(p, s, ContractId::parse(c), 5));
  }
}
