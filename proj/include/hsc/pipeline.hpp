#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsc/arch.hpp"
#include "hsc/countermeasures.hpp"
#include "hsc/uarch.hpp"

namespace hsc {

struct HwConfig {
  size_t buffer_size = 4;
  CacheConfig cache;
  PredictorKind predictor = PredictorKind::Fallthrough;
  SchedulerKind scheduler = SchedulerKind::Ooo;
  Countermeasure cm = Countermeasure::None;
  bool mask_literal = false;
  bool expose_labels = true;
  uint64_t window = 6;  // contract window used alongside this config
  uint64_t fuel = 100'000;

  // The seq countermeasure forces the sequential scheduler.
  SchedulerKind effective_scheduler() const {
    return cm == Countermeasure::Seq ? SchedulerKind::Seq : scheduler;
  }
  bool labelled() const { return is_labelled(cm); }
  std::string str() const;

  // `key = value` lines: buffer_size, cache, predictor, scheduler, countermeasure,
  // window, fuel, mask_literal, expose_labels.
  static HwConfig parse(const std::string& text);
  static HwConfig load_file(const std::string& path);
};

struct HwState {
  ArchState arch;
  Buffer buf;
  Labels labels;  // parallel to buf; all empty outside tt/NDA
  Cache cs;
  Predictor bp;
  Scheduler sc;

  bool final() const { return buf.empty() && arch.final(); }
};

HwState hw_initial(const ArchState& s0, const HwConfig& cfg);

enum class StageResult {
  Progress,  // some component changed
  Nop,       // a rule applied but changed nothing (execute on skip/spbarr)
  Stuck,     // no rule applies
  Delayed    // the countermeasure withheld the directive
};

// Single stages on the unlabelled buffer; labels are kept in sync.
StageResult fetch_step(const Program& p, HwState& h, const HwConfig& cfg);
StageResult execute_step(const Program& p, HwState& h, uint32_t i, const HwConfig& cfg);
StageResult retire_step(const Program& p, HwState& h, const HwConfig& cfg);

struct StepInfo {
  Directive d;
  StageResult r;
};

// d = next(sc); run the stage through the countermeasure; sc' = update(sc, proj(buf')).
StepInfo hw_step(const Program& p, HwState& h, const HwConfig& cfg);

Projection view_projection(const HwState& h, const HwConfig& cfg);

// <proj(buf), cs, bp, sc>, canonically serialized.
std::string adversary_view(const Program& p, const HwState& h, const HwConfig& cfg);

struct DeadlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HwRun {
  std::vector<std::string> views;  // initial state first
  std::vector<Directive> dirs;
  HwState final;
  uint64_t steps = 0;
};

HwRun hw_run(const Program& p, const ArchState& s0, const HwConfig& cfg);

// `step <k> dir=<d> view=<blob>` lines; step 0 is the initial view.
std::string format_hw_trace(const HwRun& r);

}  // namespace hsc
