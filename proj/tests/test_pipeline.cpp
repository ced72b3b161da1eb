#include <gtest/gtest.h>

#include <random>

#include "hsc/analysis.hpp"
#include "hsc/corpus.hpp"
#include "hsc/pipeline.hpp"

using namespace hsc;

namespace {

HwConfig config(const std::string& text) { return HwConfig::parse(text); }

// Warm the instruction cache at the given addresses.
void warm(HwState& h, std::initializer_list<uint64_t> addrs) {
  for (uint64_t a : addrs) h.cs.update(a);
}

std::string proj(const Program& p, const HwState& h, const HwConfig& cfg) {
  return print_projection(p, view_projection(h, cfg));
}

}  // namespace

TEST(Pipeline, ConfigParse) {
  HwConfig c = config("buffer_size = 6\ncache=direct:4:2\npredictor=twobit\n"
                      "scheduler=ooo-eager  # comment\ncountermeasure=tt\nwindow=8\n");
  EXPECT_EQ(c.buffer_size, 6u);
  EXPECT_EQ(c.str(),
            "buffer_size=6 cache=direct:4:2 predictor=twobit scheduler=ooo-eager "
            "countermeasure=tt window=8");
  EXPECT_EQ(config("countermeasure=seq\n").effective_scheduler(), SchedulerKind::Seq);
  EXPECT_THROW(config("buffer_size=1\n"), std::invalid_argument);
  EXPECT_THROW(config("colour=red\n"), std::invalid_argument);
  EXPECT_THROW(config("window\n"), std::invalid_argument);
}

TEST(Pipeline, FetchBranchHit) {
  Program p = parse_program("beqz x, 5\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0});
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Progress);
  EXPECT_EQ(proj(p, h, cfg), "[pc<-R@0]");
  EXPECT_EQ(h.buf[0].e->value, Value(1));  // fall-through prediction
  EXPECT_EQ(h.cs.str(), "[0]");
}

TEST(Pipeline, FetchMissThenHit) {
  Program p = parse_program("skip\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Progress);
  EXPECT_TRUE(h.buf.empty());
  EXPECT_TRUE(h.cs.access(0));
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Progress);
  EXPECT_EQ(proj(p, h, cfg), "[skip pc<-'R]");
}

TEST(Pipeline, FetchOther) {
  Program p = parse_program("load z, A + y\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0});
  fetch_step(p, h, cfg);
  ASSERT_EQ(h.buf.size(), 2u);
  EXPECT_EQ(h.buf[0].kind, Cmd::Kind::Load);
  EXPECT_TRUE(same_expr(h.buf[0].e, p.code[0].e));
  EXPECT_TRUE(h.buf[1].marked);
  EXPECT_EQ(h.buf[1].e->value, Value(1));
}

TEST(Pipeline, FetchCapacity) {
  Program p = parse_program("skip\nskip\nskip\n");
  HwConfig cfg = config("buffer_size=3\n");
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0, 1, 2});
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Progress);
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Stuck);  // needs two free slots
  EXPECT_EQ(h.buf.size(), 2u);
}

TEST(Pipeline, FetchStuckOnUnknownPc) {
  Program p = parse_program("jmp x\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0});
  fetch_step(p, h, cfg);
  EXPECT_EQ(proj(p, h, cfg), "[pc<-UR]");
  EXPECT_EQ(fetch_step(p, h, cfg), StageResult::Stuck);
}

TEST(Pipeline, ExecuteLoadHitAndMiss) {
  Program p = parse_program("load z, 9\n");
  HwConfig cfg;
  ArchState s = initial_state(p);
  s.mem.set(9, 4);
  HwState h = hw_initial(s, cfg);
  warm(h, {0});
  fetch_step(p, h, cfg);
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Progress);  // miss: cache only
  EXPECT_EQ(h.buf[0].kind, Cmd::Kind::Load);
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Progress);  // hit
  EXPECT_EQ(h.buf[0].kind, Cmd::Kind::Assign);
  EXPECT_EQ(h.buf[0].e->value, Value(4));
}

TEST(Pipeline, ExecuteAssignment) {
  Program p = parse_program("x <- 2 + 3\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0});
  fetch_step(p, h, cfg);
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Progress);
  EXPECT_EQ(h.buf[0].e->value, Value(5));
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Stuck);  // already resolved
  EXPECT_EQ(execute_step(p, h, 7, cfg), StageResult::Stuck);  // out of range
}

TEST(Pipeline, ExecuteBranchRollback) {
  Program p = parse_program("beqz x, 5\nskip\n");
  HwConfig cfg = config("predictor=twobit\n");
  ArchState s = initial_state(p);
  s.regs[p.find_reg("x")] = Value(1);  // not taken
  HwState h = hw_initial(s, cfg);
  h.bp.update(0, Value(5), Value(5));
  h.bp.update(0, Value(5), Value(5));  // now predicts taken
  warm(h, {0, 5});
  fetch_step(p, h, cfg);
  EXPECT_EQ(h.buf[0].e->value, Value(5));
  fetch_step(p, h, cfg);  // p(5) is bottom: the end marker
  ASSERT_EQ(h.buf.size(), 2u);
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Progress);
  ASSERT_EQ(h.buf.size(), 1u);  // suffix squashed
  EXPECT_FALSE(h.buf[0].tag);
  EXPECT_EQ(h.buf[0].e->value, Value(1));
  EXPECT_EQ(h.bp.counter(0), 1);  // trained towards not taken
}

TEST(Pipeline, ExecuteBranchCommit) {
  Program p = parse_program("beqz x, 5\nskip\n");
  HwConfig cfg;
  ArchState s = initial_state(p);
  s.regs[p.find_reg("x")] = Value(1);
  HwState h = hw_initial(s, cfg);
  warm(h, {0, 1});
  fetch_step(p, h, cfg);
  fetch_step(p, h, cfg);
  EXPECT_EQ(execute_step(p, h, 1, cfg), StageResult::Progress);
  EXPECT_EQ(proj(p, h, cfg), "[pc<-R skip pc<-'R]");
}

TEST(Pipeline, LoadBlockedByStoreAndBarrier) {
  Program p = parse_program("store x, 3\nload y, 4\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0, 1, 4});
  fetch_step(p, h, cfg);
  fetch_step(p, h, cfg);
  EXPECT_EQ(execute_step(p, h, 3, cfg), StageResult::Stuck);
  Program q = parse_program("spbarr\nx <- 1\n");
  HwState g = hw_initial(initial_state(q), cfg);
  warm(g, {0, 1});
  fetch_step(q, g, cfg);
  fetch_step(q, g, cfg);
  EXPECT_EQ(execute_step(q, g, 3, cfg), StageResult::Stuck);
  EXPECT_EQ(execute_step(q, g, 1, cfg), StageResult::Nop);
}

TEST(Pipeline, RetireAssignmentAndStore) {
  Program p = parse_program("x <- 5\nstore x, 7\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0, 1});
  fetch_step(p, h, cfg);
  execute_step(p, h, 1, cfg);
  EXPECT_EQ(retire_step(p, h, cfg), StageResult::Progress);
  EXPECT_EQ(h.arch.regs[p.find_reg("x")], Value(5));
  EXPECT_EQ(retire_step(p, h, cfg), StageResult::Progress);  // marked pc
  EXPECT_EQ(h.arch.regs[kPc], Value(1));
  fetch_step(p, h, cfg);
  EXPECT_EQ(retire_step(p, h, cfg), StageResult::Stuck);  // store unresolved
  execute_step(p, h, 1, cfg);
  EXPECT_EQ(retire_step(p, h, cfg), StageResult::Progress);
  EXPECT_EQ(h.arch.mem.get(7), 5u);
  EXPECT_TRUE(h.cs.access(7));
}

TEST(Pipeline, RetireTaggedIsStuck) {
  Program p = parse_program("beqz x, 5\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  warm(h, {0});
  fetch_step(p, h, cfg);
  EXPECT_EQ(retire_step(p, h, cfg), StageResult::Stuck);
}

TEST(Pipeline, InitialView) {
  Program p = parse_program("skip\n");
  HwConfig cfg;
  HwState h = hw_initial(initial_state(p), cfg);
  EXPECT_EQ(adversary_view(p, h, cfg), "buf=[] cs=[] bp=fallthrough sc=ooo:0");
}

// Sequential scheduler on skip: miss, fetch, retire skip, retire pc, then the end marker.
TEST(Pipeline, SequentialRunOnSkip) {
  Program p = parse_program("skip\n");
  HwConfig cfg = config("countermeasure=seq\n");
  HwRun r = hw_run(p, initial_state(p), cfg);
  std::vector<std::string> dirs;
  for (const Directive& d : r.dirs) dirs.push_back(d.str());
  EXPECT_EQ(dirs, (std::vector<std::string>{"fetch", "fetch", "retire", "retire", "fetch",
                                            "fetch", "retire"}));
  EXPECT_TRUE(r.final.final());
  EXPECT_EQ(r.final.arch, arch_run(p, initial_state(p)).state);
}

TEST(Pipeline, TraceFormat) {
  Program p = parse_program("skip\n");
  HwConfig cfg = config("countermeasure=seq\n");
  std::string t = format_hw_trace(hw_run(p, initial_state(p), cfg));
  EXPECT_EQ(t.substr(0, t.find('\n')), "step 0 dir=init view=buf=[] cs=[] bp=fallthrough sc=seq");
  EXPECT_NE(t.find("step 1 dir=fetch view=buf=[] cs=[0]"), std::string::npos);
}

// A mispredicted branch rolls back at some step: the buffer shrinks by more than one.
TEST(Pipeline, OooRollbackOnSpectreV1) {
  const CorpusEntry* e = find_corpus("P1");
  Program p = parse_program(e->source);
  HwConfig cfg;
  ArchState s = initial_state(p);
  s.mem.set(0, 3);  // out of bounds: taken, but predicted fall-through
  HwRun r = hw_run(p, s, cfg);
  bool rolled = false;
  HwState h = hw_initial(s, cfg);
  size_t prev = 0;
  while (!h.final()) {
    hw_step(p, h, cfg);
    if (h.buf.size() + 1 < prev) rolled = true;
    prev = h.buf.size();
  }
  EXPECT_TRUE(rolled);
  EXPECT_EQ(h.arch, r.final.arch);
  EXPECT_EQ(r.final.arch, arch_run(p, s).state);
}

TEST(Pipeline, LoadDelayWithholdsSpeculativeLoad) {
  Program p = parse_program("beqz x, 3\nload y, 9\n");
  HwConfig cfg = config("countermeasure=loaddelay\n");
  ArchState s = initial_state(p);
  s.regs[p.find_reg("x")] = Value(1);
  HwState h = hw_initial(s, cfg);
  warm(h, {0, 1});
  fetch_step(p, h, cfg);
  fetch_step(p, h, cfg);
  EXPECT_EQ(execute_step(p, h, 2, cfg), StageResult::Delayed);
  HwConfig none;
  HwState g = h;
  EXPECT_EQ(execute_step(p, g, 2, none), StageResult::Progress);
}

TEST(Pipeline, DifferentCacheDifferentView) {
  Program p = parse_program("skip\n");
  HwConfig cfg;
  HwState a = hw_initial(initial_state(p), cfg), b = a;
  b.cs.update(3);
  EXPECT_NE(adversary_view(p, a, cfg), adversary_view(p, b, cfg));
}

TEST(Pipeline, ResolvedValueInvisible) {
  Program p = parse_program("x <- y + 1\n");
  HwConfig cfg;
  ArchState s = initial_state(p), t = s;
  t.regs[p.find_reg("y")] = Value(7);
  HwState a = hw_initial(s, cfg), b = hw_initial(t, cfg);
  for (HwState* h : {&a, &b}) {
    warm(*h, {0});
    fetch_step(p, *h, cfg);
    execute_step(p, *h, 1, cfg);
  }
  EXPECT_NE(a.buf[0].e->value, b.buf[0].e->value);
  EXPECT_EQ(adversary_view(p, a, cfg), adversary_view(p, b, cfg));
}

TEST(Pipeline, FuelExhausted) {
  Program p = parse_program("L: jmp L\n");
  HwConfig cfg = config("fuel=500\n");
  EXPECT_THROW(hw_run(p, initial_state(p), cfg), FuelExhausted);
}

// Hardware runs are deterministic, keep the buffer bound, and agree with the ISA.
TEST(PipelineProperty, CorrectnessAndDeterminism) {
  std::mt19937_64 rng(41);
  const char* cfgs[] = {"", "cache=direct:4:2\npredictor=backward\nscheduler=ooo-eager\n",
                        "cache=lru:2:2\npredictor=twobit\n", "countermeasure=seq\n",
                        "countermeasure=loaddelay\n", "countermeasure=tt\n",
                        "countermeasure=nda-strict\n", "countermeasure=nda-permissive\n"};
  for (int k = 0; k < 60; ++k) {
    Program p = random_program(rng);
    auto states = random_program_domain().enumerate(p);
    const ArchState& s = states[rng() % states.size()];
    for (const char* c : cfgs) {
      HwConfig cfg = config(c);
      HwRun r1 = hw_run(p, s, cfg);
      HwRun r2 = hw_run(p, s, cfg);
      ASSERT_EQ(r1.views, r2.views);
      ASSERT_EQ(r1.final.arch, arch_run(p, s).state) << print_program(p) << c;
      HwState h = hw_initial(s, cfg);
      while (!h.final()) {
        hw_step(p, h, cfg);
        ASSERT_LE(h.buf.size(), cfg.buffer_size);
        ASSERT_EQ(h.labels.size(), h.buf.size());
      }
    }
  }
}
