#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "hsc/isa.hpp"

namespace hsc {

// Total memory with default 0. Zero cells are never stored, so equality is
// plain map equality.
class Memory {
public:
  uint64_t get(uint64_t addr) const {
    auto it = cells_.find(addr);
    return it == cells_.end() ? 0 : it->second;
  }
  void set(uint64_t addr, uint64_t v) {
    if (v == 0)
      cells_.erase(addr);
    else
      cells_[addr] = v;
  }
  const std::map<uint64_t, uint64_t>& cells() const { return cells_; }
  friend bool operator==(const Memory&, const Memory&) = default;

private:
  std::map<uint64_t, uint64_t> cells_;
};

struct ArchState {
  Memory mem;
  RegFile regs;

  bool final() const { return regs.at(kPc).is_bot(); }
  friend bool operator==(const ArchState&, const ArchState&) = default;
};

// All registers (pc included) 0, memory as given.
ArchState initial_state(const Program& p, Memory mem = {});

struct StuckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FuelExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// What a single architectural step did; contracts build observations from it.
struct StepEvent {
  enum class Kind { None, Load, Store, Branch, Jump } kind = Kind::None;
  Value addr;   // load/store address
  Value value;  // loaded value
  Value next_pc;
};

ArchState arch_step(const Program& p, const ArchState& s, StepEvent* ev = nullptr);

struct RunResult {
  ArchState state;
  uint64_t steps;
};

inline constexpr uint64_t kDefaultFuel = 1'000'000;

RunResult arch_run(const Program& p, ArchState s, uint64_t fuel = kDefaultFuel);

// State literals: `reg <name>=<value>` and `mem <addr>=<value>` lines, `#` comments.
ArchState parse_state(const Program& p, const std::string& text);
ArchState load_state_file(const Program& p, const std::string& path);
std::string print_state(const Program& p, const ArchState& s);

}  // namespace hsc
