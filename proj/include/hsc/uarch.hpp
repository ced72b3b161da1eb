#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsc/isa.hpp"

namespace hsc {

// A reorder-buffer command <i>_T. Only pc assignments made by branch
// prediction carry a tag (the branch address).
struct Cmd {
  enum class Kind { Assign, Load, Store, Skip, Barrier };
  Kind kind = Kind::Skip;
  RegId x = 0;
  ExprPtr e;    // Assign: value; Load/Store: address
  ExprPtr src;  // Store: stored operand
  bool marked = false;  // fall-through pc update <pc <-' l+1>
  std::optional<uint64_t> tag;

  bool resolved() const;
  bool is_pc_assign() const { return kind == Kind::Assign && x == kPc; }
};

using Buffer = std::vector<Cmd>;

// Command issued for a non-control instruction at fetch.
Cmd command_for(const Instr& i);

// Entry of the data-independent projection: expressions become R/UR.
struct ProjEntry {
  Cmd::Kind kind = Cmd::Kind::Skip;
  RegId x = 0;
  bool marked = false;
  std::optional<uint64_t> tag;
  bool r_e = true;    // Assign value / Load, Store address resolved
  bool r_src = true;  // Store operand resolved
  uint64_t label = 0;  // bit k set = buffer index k (1-based); 0 outside tt/NDA

  friend bool operator==(const ProjEntry&, const ProjEntry&) = default;
};

using Projection = std::vector<ProjEntry>;

Projection buf_project(const Buffer& buf, const std::vector<uint64_t>* labels = nullptr);
std::string print_projection(const Program& p, const Projection& pr);
std::string print_label(uint64_t label);

// apply(buf[0..k), a): register file as seen after the first k commands.
RegFile apply_buffer(const Buffer& buf, size_t k, const RegFile& a);
inline RegFile apply_buffer(const Buffer& buf, const RegFile& a) {
  return apply_buffer(buf, buf.size(), a);
}

// ---------------------------------------------------------------------------
// Cache: tracks which lines are present, never data.

struct CacheConfig {
  enum class Kind { Lru, Direct };
  Kind kind = Kind::Lru;
  uint32_t capacity = 8;  // LRU lines
  uint32_t sets = 4;      // direct-mapped sets
  uint32_t line = 1;      // addresses per line

  static CacheConfig parse(const std::string& spec);  // lru:<cap>[:<line>] | direct:<sets>:<line>
  std::string str() const;
  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

class Cache {
public:
  Cache() = default;
  explicit Cache(CacheConfig cfg);

  bool access(uint64_t addr) const;  // true on Hit
  void update(uint64_t addr);
  std::string str() const;
  const CacheConfig& config() const { return cfg_; }

  friend bool operator==(const Cache&, const Cache&) = default;

private:
  CacheConfig cfg_;
  std::vector<uint64_t> lines_;  // LRU: most recent first; direct: line+1 per set, 0 empty
};

// ---------------------------------------------------------------------------
// Branch predictor.

enum class PredictorKind { Fallthrough, Backward, TwoBit };

PredictorKind parse_predictor(const std::string& s);
std::string predictor_name(PredictorKind k);

class Predictor {
public:
  Predictor() = default;
  explicit Predictor(PredictorKind k) : kind_(k) {}

  // Prediction for the branch at l with target `target`; always target or l+1.
  Value predict(uint64_t l, Value target) const;
  void update(uint64_t l, Value target, Value outcome);
  uint8_t counter(uint64_t l) const;
  PredictorKind kind() const { return kind_; }
  std::string str() const;

  friend bool operator==(const Predictor&, const Predictor&) = default;

private:
  PredictorKind kind_ = PredictorKind::Fallthrough;
  std::map<uint64_t, uint8_t> ctr_;  // 2-bit counters; absent = 0
};

// ---------------------------------------------------------------------------
// Scheduler.

struct Directive {
  enum class Kind { Fetch, Execute, Retire };
  Kind kind = Kind::Fetch;
  uint32_t i = 0;  // 1-based buffer index for Execute

  static Directive fetch() { return {Kind::Fetch, 0}; }
  static Directive execute(uint32_t i) { return {Kind::Execute, i}; }
  static Directive retire() { return {Kind::Retire, 0}; }
  std::string str() const;
  friend bool operator==(const Directive&, const Directive&) = default;
};

enum class SchedulerKind { Seq, Ooo, OooEager };

SchedulerKind parse_scheduler(const std::string& s);
std::string scheduler_name(SchedulerKind k);

// exec predicate of the sequential scheduler: does the entry still need an execute?
bool needs_exec(const ProjEntry& e);

class Scheduler {
public:
  Scheduler() = default;
  Scheduler(SchedulerKind k, size_t buffer_size) : kind_(k), mu_w_(buffer_size) {}

  Directive next() const;
  // Consumes only the projection of the new buffer.
  void update(const Projection& pr);

  // Directives the out-of-order policies choose among, in priority order.
  std::vector<Directive> candidates() const;

  SchedulerKind kind() const { return kind_; }
  const Projection& last() const { return last_; }
  uint32_t cursor() const { return cursor_; }
  std::string str() const;

  friend bool operator==(const Scheduler&, const Scheduler&) = default;

private:
  SchedulerKind kind_ = SchedulerKind::Seq;
  size_t mu_w_ = 4;
  Projection last_;
  uint32_t cursor_ = 0;
};

}  // namespace hsc
