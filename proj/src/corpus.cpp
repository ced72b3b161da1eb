#include "hsc/corpus.hpp"

namespace hsc {

namespace {

const char* kBoundsDomain = R"(values 4
vary 0      # y
vary 5      # A[1], in bounds
vary 6      # A[2], out of bounds
)";

// A[i] is low inside the bounds, high outside.
const char* kBoundsPolicy = R"(low 0..5
)";

std::vector<CorpusEntry> build() {
  std::vector<CorpusEntry> c;
  c.push_back({"P1", "if (y < size_A) { x = A[y]; temp &= B[x*64]; }", R"(      load y, 0
      c <- y < 2
      beqz c, end
      load x, 4 + y
      x <- x * 64
      load t, 8 + x
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P1f", "P1 with a barrier after the branch", R"(      load y, 0
      c <- y < 2
      beqz c, end
      spbarr
      load x, 4 + y
      x <- x * 64
      load t, 8 + x
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P1'", "if (y < size_A) { x = A[y]; if (x) temp &= B[0]; }", R"(      load y, 0
      c <- y < 2
      beqz c, end
      load x, 4 + y
      beqz x, end
      load t, 8
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P1'f", "P1' with barriers after both branches", R"(      load y, 0
      c <- y < 2
      beqz c, end
      spbarr
      load x, 4 + y
      beqz x, end
      spbarr
      load t, 8
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P2", "x = A[y]; if (y < size_A) temp &= B[x*64];", R"(      load y, 0
      load x, 4 + y
      c <- y < 2
      beqz c, end
      x <- x * 64
      load t, 8 + x
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P2f", "P2 with a barrier after the branch", R"(      load y, 0
      load x, 4 + y
      c <- y < 2
      beqz c, end
      spbarr
      x <- x * 64
      load t, 8 + x
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P2'", "x = A[y]; if (y < size_A) if (x) temp &= B[0];", R"(      load y, 0
      load x, 4 + y
      c <- y < 2
      beqz c, end
      beqz x, end
      load t, 8
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"P2'f", "P2' with barriers after both branches", R"(      load y, 0
      load x, 4 + y
      c <- y < 2
      beqz c, end
      spbarr
      beqz x, end
      spbarr
      load t, 8
      temp <- temp & t
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"ex2", "x = A[10]; y = not(A[20] | 1); if (y) if (x) skip", R"(      load x, 10
      load t, 20
      y <- !(t | 1)
      beqz y, end
      beqz x, end
      skip
)",
               "vary 10 in 0..1\nvary 20 in 0..3\n", "low 20\n"});
  c.push_back({"ex3", "load z, A+y; x <- y < size_A; beqz x, end; z <- z*64; load w, B+z",
               R"(      load y, 0
      load z, 4 + y
      x <- y < 2
      beqz x, end
      z <- z * 64
      load w, 8 + z
)",
               kBoundsDomain, kBoundsPolicy});
  c.push_back({"skip", "a single skip", "skip\n", "vary 0 in 0..1\n", "low 0\n"});
  c.push_back({"loop", "for (i = 0; i < n; i++) s += A[i]", R"(      load n, 0
      i <- 0
loop: c <- i < n
      beqz c, end
      load t, 4 + i
      s <- s + t
      i <- i + 1
      jmp loop
)",
               kBoundsDomain, kBoundsPolicy});
  return c;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> c = build();
  return c;
}

const CorpusEntry* find_corpus(const std::string& name) {
  for (const CorpusEntry& e : corpus())
    if (e.name == name) return &e;
  return nullptr;
}

NamedProgram corpus_program(const CorpusEntry& e) {
  return {e.name, parse_program(e.source), StateDomain::parse(e.domain)};
}

std::vector<NamedProgram> corpus_programs() {
  std::vector<NamedProgram> out;
  for (const CorpusEntry& e : corpus()) out.push_back(corpus_program(e));
  return out;
}

}  // namespace hsc
