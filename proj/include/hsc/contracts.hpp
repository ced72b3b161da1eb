#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsc/arch.hpp"

namespace hsc {

struct Observation {
  enum class Kind { Load, Store, Pc, LoadVal, State };
  Kind kind = Kind::Pc;
  Value addr;  // address, or target pc for Pc
  Value val;   // loaded value for LoadVal
  std::string blob;  // canonical state for State

  friend bool operator==(const Observation&, const Observation&) = default;
};

using ContractTrace = std::vector<Observation>;

// One trace record: `load <n>`, `store <n>`, `pc <l|end>`, `loadv <n> <v>`, `state <blob>`.
std::string format_observation(const Observation& o);

enum class Observer { Ct, Arch, PcCt };

struct ContractId {
  enum class Mode { Seq, Spec, Top, Bot };
  Mode mode = Mode::Seq;
  Observer obs = Observer::Ct;

  static ContractId seq(Observer o) { return {Mode::Seq, o}; }
  static ContractId spec(Observer o) { return {Mode::Spec, o}; }
  static ContractId top() { return {Mode::Top, Observer::Ct}; }
  static ContractId bot() { return {Mode::Bot, Observer::Ct}; }

  // Accepts seq-ct, seq-arch, spec-ct, spec-pc-ct, spec-arch, top, bot, bot-inf.
  static ContractId parse(const std::string& name);
  std::string name() const;

  friend bool operator==(const ContractId&, const ContractId&) = default;
};

// Sequential contract: architectural run, ct or arch observer.
ContractTrace trace_seq(const Program& p, const ArchState& s0, Observer obs,
                        uint64_t fuel = kDefaultFuel);

// Always-mispredict speculative contract with window w.
ContractTrace trace_spec(const Program& p, const ArchState& s0, Observer obs, uint64_t w,
                         uint64_t fuel = kDefaultFuel);

// top: empty; bot: the full state before every architectural step.
ContractTrace trace_degenerate(const Program& p, const ArchState& s0, ContractId::Mode which,
                               uint64_t fuel = kDefaultFuel);

ContractTrace contract_trace(const Program& p, const ArchState& s0, const ContractId& c,
                             uint64_t w, uint64_t fuel = kDefaultFuel);

// Canonical one-line encoding of an architectural state.
std::string state_blob(const Program& p, const ArchState& s);

struct StrengthWitness {
  size_t a, b;  // indexes into the state list
  ContractTrace c1_a, c1_b;
};

// Empirical check of c1 ⊒ c2 over a state list: every pair with equal c2 traces
// must have equal c1 traces. Returns the first violating pair, if any.
std::optional<StrengthWitness> contract_stronger_test(const Program& p,
                                                      const std::vector<ArchState>& states,
                                                      const ContractId& c1, const ContractId& c2,
                                                      uint64_t w, uint64_t fuel = kDefaultFuel);

}  // namespace hsc
