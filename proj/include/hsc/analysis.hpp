#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsc/contracts.hpp"
#include "hsc/pipeline.hpp"

namespace hsc {

// Low address ranges; everything else is high. Registers are always low.
struct Policy {
  std::vector<std::pair<uint64_t, uint64_t>> low;  // inclusive ranges

  bool is_low(uint64_t addr) const;
  // `low <a>` or `low <a>..<b>` lines.
  static Policy parse(const std::string& text);
  static Policy load_file(const std::string& path);
};

struct StateDomain {
  std::vector<std::pair<uint64_t, std::vector<uint64_t>>> vary;
  std::map<uint64_t, uint64_t> fixed;
  uint64_t values = 4;

  // `vary <addr> [in <lo>..<hi>]`, `fix <addr> = <v>`, `values <V>` lines.
  static StateDomain parse(const std::string& text);
  static StateDomain load_file(const std::string& path);

  uint64_t size() const;
  // All initial states, the first `vary` line being the most significant digit.
  std::vector<ArchState> enumerate(const Program& p) const;
};

inline constexpr uint64_t kMaxPairs = uint64_t{1} << 24;

struct DomainTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool low_equivalent(const ArchState& a, const ArchState& b, const Policy& pi);

using TraceLines = std::vector<std::string>;

TraceLines contract_lines(const ContractTrace& t);

struct Counterexample {
  ArchState a, b;
  size_t pos = 0;  // first differing trace entry (0-based)
  TraceLines ta, tb;
};

struct Verdict {
  bool pass = true;
  std::optional<Counterexample> cex;
};

// Index of the first differing entry; nullopt when equal.
std::optional<size_t> first_divergence(const TraceLines& a, const TraceLines& b);

// Def. of satisfaction: equal contract traces imply equal hardware traces.
Verdict check_contract_satisfaction(const Program& p, const ContractId& c, const HwConfig& cfg,
                                    const StateDomain& dom);

// Non-interference: low-equivalent states give equal traces.
Verdict check_ni(const Program& p, const Policy& pi, const ContractId& c, const StateDomain& dom,
                 uint64_t w);
Verdict check_ni_hw(const Program& p, const Policy& pi, const HwConfig& cfg,
                    const StateDomain& dom);

// wSNI: equal seq-arch traces imply equal traces under c.
Verdict check_wsni(const Program& p, const ContractId& c, const StateDomain& dom, uint64_t w);
// SNI: low-equivalent states with equal seq-ct traces have equal traces under c.
Verdict check_sni(const Program& p, const Policy& pi, const ContractId& c, const StateDomain& dom,
                  uint64_t w);

enum class Cell { YStronger, YWsni, YSni, YNi, N };
std::string cell_name(Cell c);

struct Row {
  bool vanilla = false;
  std::vector<ContractId> contracts;
  std::vector<Cell> cells;
  std::vector<std::optional<Counterexample>> cex;

  std::string str() const;  // "seq-ct=Y,⊒ seq-arch=..."
};

// Columns: seq-ct, seq-arch, spec-ct, spec-pc-ct.
std::vector<ContractId> table_columns();
Row classify_sandboxing(const Program& p, const Policy& pi, const StateDomain& dom, uint64_t w);
Row classify_constant_time(const Program& p, const Policy& pi, const StateDomain& dom, uint64_t w);

struct LatticeEdge {
  ContractId stronger, weaker;  // stronger ⊒ weaker
};

std::vector<LatticeEdge> lattice_edges();

struct NamedProgram {
  std::string name;
  Program prog;
  StateDomain dom;
};

struct EdgeResult {
  LatticeEdge edge;
  size_t checked = 0;
  std::optional<std::string> witness_program;
  std::optional<Counterexample> witness;
};

std::vector<EdgeResult> check_lattice(const std::vector<NamedProgram>& corpus,
                                      const std::vector<LatticeEdge>& edges, uint64_t w);

// Random terminating well-formed program with forward-only control flow.
Program random_program(std::mt19937_64& rng, size_t n = 8);
StateDomain random_program_domain();

}  // namespace hsc
