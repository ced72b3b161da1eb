#include "hsc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hsc {

// ---------------------------------------------------------------------------
// Config

std::string HwConfig::str() const {
  return "buffer_size=" + std::to_string(buffer_size) + " cache=" + cache.str() +
         " predictor=" + predictor_name(predictor) +
         " scheduler=" + scheduler_name(effective_scheduler()) +
         " countermeasure=" + countermeasure_name(cm) + " window=" + std::to_string(window);
}

static std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

static uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    uint64_t n = std::stoull(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad number '" + v + "' for " + key);
}

static bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "' for " + key);
}

HwConfig HwConfig::parse(const std::string& text) {
  HwConfig c;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key == "buffer_size") {
      c.buffer_size = to_u64(val, key);
      if (c.buffer_size < 2 || c.buffer_size > 62)
        throw std::invalid_argument("config: buffer_size must be in 2..62");
    } else if (key == "cache") {
      c.cache = CacheConfig::parse(val);
    } else if (key == "predictor") {
      c.predictor = parse_predictor(val);
    } else if (key == "scheduler") {
      c.scheduler = parse_scheduler(val);
    } else if (key == "countermeasure") {
      c.cm = parse_countermeasure(val);
    } else if (key == "window") {
      c.window = to_u64(val, key);
    } else if (key == "fuel") {
      c.fuel = to_u64(val, key);
    } else if (key == "mask_literal") {
      c.mask_literal = to_bool(val, key);
    } else if (key == "expose_labels") {
      c.expose_labels = to_bool(val, key);
    } else {
      throw std::invalid_argument("config line " + std::to_string(n) + ": unknown key '" + key +
                                  "'");
    }
  }
  return c;
}

HwConfig HwConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

HwState hw_initial(const ArchState& s0, const HwConfig& cfg) {
  HwState h;
  h.arch = s0;
  h.cs = Cache(cfg.cache);
  h.bp = Predictor(cfg.predictor);
  h.sc = Scheduler(cfg.effective_scheduler(), cfg.buffer_size);
  return h;
}

// ---------------------------------------------------------------------------
// Stage outcomes, computed on a (possibly masked) view of the buffer and then
// applied to the real buffer and its labels.

namespace {

struct Outcome {
  enum class Kind { Stuck, Nop, CacheOnly, Append, Replace, Commit, Rollback, Retire };
  Kind kind = Kind::Stuck;
  uint32_t i = 0;  // 1-based
  std::optional<uint64_t> cache_addr;
  std::vector<Cmd> cmds;  // Append: new commands; Replace/Rollback: cmds[0]
  Value outcome;          // Commit/Rollback: resolved branch target
};

Outcome stuck() { return {}; }

Cmd pc_assign(Value v, bool marked, std::optional<uint64_t> tag = std::nullopt) {
  Cmd c;
  c.kind = Cmd::Kind::Assign;
  c.x = kPc;
  c.e = e_const(v);
  c.marked = marked;
  c.tag = tag;
  return c;
}

Outcome fetch_outcome(const Program& p, const Buffer& view, const HwState& h,
                      const HwConfig& cfg) {
  Value pc = apply_buffer(view, h.arch.regs)[kPc];
  if (pc.is_bot()) return stuck();
  uint64_t l = pc.nat();
  Outcome o;
  o.cache_addr = l;
  if (!h.cs.access(l)) {
    o.kind = Outcome::Kind::CacheOnly;
    return o;
  }
  const size_t n = view.size(), w = cfg.buffer_size;
  const Instr* in = p.at(pc);
  o.kind = Outcome::Kind::Append;
  if (!in) {
    if (n >= w) return stuck();
    o.cmds.push_back(pc_assign(Value::bot(), true));
  } else if (in->kind == Instr::Kind::Beqz) {
    if (n >= w) return stuck();
    o.cmds.push_back(pc_assign(h.bp.predict(l, in->target), false, l));
  } else if (in->kind == Instr::Kind::Jmp) {
    if (n >= w) return stuck();
    Cmd c = pc_assign(Value(0), false);
    c.e = in->e;
    o.cmds.push_back(c);
  } else {
    if (n + 1 >= w) return stuck();
    o.cmds.push_back(command_for(*in));
    o.cmds.push_back(pc_assign(l + 1, true));
  }
  return o;
}

Outcome execute_outcome(const Program& p, const Buffer& view, const HwState& h, uint32_t i) {
  if (i == 0 || i > view.size()) return stuck();
  for (uint32_t k = 0; k + 1 < i; ++k)
    if (view[k].kind == Cmd::Kind::Barrier) return stuck();
  const Cmd& c = view[i - 1];
  const uint64_t mod = p.modulus;
  Outcome o;
  o.i = i;
  switch (c.kind) {
    case Cmd::Kind::Skip:
    case Cmd::Kind::Barrier: o.kind = Outcome::Kind::Nop; return o;
    case Cmd::Kind::Load: {
      for (uint32_t k = 0; k + 1 < i; ++k)
        if (view[k].kind == Cmd::Kind::Store) return stuck();
      RegFile a = apply_buffer(view, i - 1, h.arch.regs);
      Value n = eval_partial(c.e, a, mod);
      if (n.is_bot()) return stuck();
      o.cache_addr = n.nat();
      if (!h.cs.access(n.nat())) {
        o.kind = Outcome::Kind::CacheOnly;
        return o;
      }
      Cmd r;
      r.kind = Cmd::Kind::Assign;
      r.x = c.x;
      r.e = e_const(h.arch.mem.get(n.nat()));
      r.tag = c.tag;
      o.kind = Outcome::Kind::Replace;
      o.cmds.push_back(r);
      return o;
    }
    case Cmd::Kind::Assign: {
      RegFile a = apply_buffer(view, i - 1, h.arch.regs);
      if (c.tag) {
        const Instr* br = p.at(*c.tag);
        if (!br || br->kind != Instr::Kind::Beqz) return stuck();
        Value g = a[br->x];
        if (g.is_bot()) return stuck();
        o.outcome = g.nat() == 0 ? br->target : Value(*c.tag + 1);
        if (c.e->is_const() && c.e->value == o.outcome) {
          o.kind = Outcome::Kind::Commit;
        } else {
          o.kind = Outcome::Kind::Rollback;
          o.cmds.push_back(pc_assign(o.outcome, false));
        }
        return o;
      }
      if (c.e->is_const()) return stuck();
      Value v = eval_partial(c.e, a, mod);
      if (v.is_bot()) return stuck();
      Cmd r = c;
      r.e = e_const(v);
      o.kind = Outcome::Kind::Replace;
      o.cmds.push_back(r);
      return o;
    }
    case Cmd::Kind::Store: {
      if (c.e->is_const() && c.src->is_const()) return stuck();
      RegFile a = apply_buffer(view, i - 1, h.arch.regs);
      Value v = eval_partial(c.src, a, mod), n = eval_partial(c.e, a, mod);
      if (v.is_bot() || n.is_bot()) return stuck();
      Cmd r = c;
      r.src = e_const(v);
      r.e = e_const(n);
      o.kind = Outcome::Kind::Replace;
      o.cmds.push_back(r);
      return o;
    }
  }
  return stuck();
}

Outcome retire_outcome(const Buffer& buf) {
  if (buf.empty()) return stuck();
  const Cmd& c = buf[0];
  if (c.tag || !c.resolved()) return stuck();
  Outcome o;
  o.kind = Outcome::Kind::Retire;
  if (c.kind == Cmd::Kind::Store) o.cache_addr = c.e->value.nat();
  return o;
}

StageResult commit(const Program& p, HwState& h, const HwConfig& cfg, const Outcome& o) {
  if (o.cache_addr && o.kind != Outcome::Kind::Stuck) h.cs.update(*o.cache_addr);
  const bool lab = cfg.labelled();
  switch (o.kind) {
    case Outcome::Kind::Stuck: return StageResult::Stuck;
    case Outcome::Kind::Nop: return StageResult::Nop;
    case Outcome::Kind::CacheOnly: return StageResult::Progress;
    case Outcome::Kind::Append: {
      Labels fresh = lab ? fetch_labels(cfg.cm, h.buf, h.labels, o.cmds) : Labels(o.cmds.size(), 0);
      h.buf.insert(h.buf.end(), o.cmds.begin(), o.cmds.end());
      h.labels.insert(h.labels.end(), fresh.begin(), fresh.end());
      return StageResult::Progress;
    }
    case Outcome::Kind::Replace:
      h.buf[o.i - 1] = o.cmds[0];
      return StageResult::Progress;
    case Outcome::Kind::Commit: {
      Cmd& c = h.buf[o.i - 1];
      uint64_t l = *c.tag;
      h.bp.update(l, p.at(l)->target, o.outcome);
      c.tag.reset();
      h.labels[o.i - 1] = 0;
      strip_label(h.labels, o.i);
      return StageResult::Progress;
    }
    case Outcome::Kind::Rollback: {
      uint64_t l = *h.buf[o.i - 1].tag;
      h.bp.update(l, p.at(l)->target, o.outcome);
      h.buf.resize(o.i);
      h.labels.resize(o.i);
      h.buf[o.i - 1] = o.cmds[0];
      h.labels[o.i - 1] = 0;
      return StageResult::Progress;
    }
    case Outcome::Kind::Retire: {
      const Cmd& c = h.buf[0];
      if (c.kind == Cmd::Kind::Assign) h.arch.regs[c.x] = c.e->value;
      if (c.kind == Cmd::Kind::Store) h.arch.mem.set(c.e->value.nat(), c.src->value.nat());
      h.buf.erase(h.buf.begin());
      h.labels.erase(h.labels.begin());
      decrement_labels(h.labels);
      return StageResult::Progress;
    }
  }
  return StageResult::Stuck;
}

bool any_label(const Labels& labels, bool literal) {
  for (uint64_t l : labels)
    if (literal ? l == 0 : l != 0) return true;
  return false;
}

// The buffer the stage sees for directive d under the configured countermeasure.
const Buffer& stage_view(const HwState& h, const HwConfig& cfg, const Directive& d,
                         Buffer& scratch) {
  if (!cfg.labelled() || !any_label(h.labels, cfg.mask_literal)) return h.buf;
  if (cfg.cm == Countermeasure::Tt)
    scratch = tt_unlabel(h.buf, h.labels, d, cfg.mask_literal);
  else
    scratch = nda_unlabel(h.buf, h.labels, cfg.mask_literal);
  return scratch;
}

}  // namespace

StageResult fetch_step(const Program& p, HwState& h, const HwConfig& cfg) {
  Buffer scratch;
  const Buffer& view = stage_view(h, cfg, Directive::fetch(), scratch);
  return commit(p, h, cfg, fetch_outcome(p, view, h, cfg));
}

StageResult execute_step(const Program& p, HwState& h, uint32_t i, const HwConfig& cfg) {
  if (cfg.cm == Countermeasure::LoadDelay && !loaddelay_allows(h.buf, Directive::execute(i)))
    return StageResult::Delayed;
  Buffer scratch;
  const Buffer& view = stage_view(h, cfg, Directive::execute(i), scratch);
  Outcome o = execute_outcome(p, view, h, i);
  if (o.kind == Outcome::Kind::Stuck && &view != &h.buf &&
      execute_outcome(p, h.buf, h, i).kind != Outcome::Kind::Stuck)
    return StageResult::Delayed;  // only the masking holds it back
  return commit(p, h, cfg, o);
}

StageResult retire_step(const Program& p, HwState& h, const HwConfig& cfg) {
  return commit(p, h, cfg, retire_outcome(h.buf));
}

Projection view_projection(const HwState& h, const HwConfig& cfg) {
  return buf_project(h.buf, cfg.labelled() && cfg.expose_labels ? &h.labels : nullptr);
}

StepInfo hw_step(const Program& p, HwState& h, const HwConfig& cfg) {
  Directive d = h.sc.next();
  StageResult r = StageResult::Stuck;
  switch (d.kind) {
    case Directive::Kind::Fetch: r = fetch_step(p, h, cfg); break;
    case Directive::Kind::Execute: r = execute_step(p, h, d.i, cfg); break;
    case Directive::Kind::Retire: r = retire_step(p, h, cfg); break;
  }
  h.sc.update(view_projection(h, cfg));
  return {d, r};
}

std::string adversary_view(const Program& p, const HwState& h, const HwConfig& cfg) {
  return "buf=" + print_projection(p, view_projection(h, cfg)) + " cs=" + h.cs.str() +
         " bp=" + h.bp.str() + " sc=" + h.sc.str();
}

HwRun hw_run(const Program& p, const ArchState& s0, const HwConfig& cfg) {
  HwRun run;
  run.final = hw_initial(s0, cfg);
  HwState& h = run.final;
  h.labels.clear();
  run.views.push_back(adversary_view(p, h, cfg));
  const uint64_t idle_limit = 2 * (cfg.buffer_size + 3) + 2;
  uint64_t idle = 0;
  while (!h.final()) {
    if (run.steps >= cfg.fuel)
      throw FuelExhausted("hardware run exceeded " + std::to_string(cfg.fuel) + " steps");
    StepInfo si = hw_step(p, h, cfg);
    ++run.steps;
    run.dirs.push_back(si.d);
    run.views.push_back(adversary_view(p, h, cfg));
    idle = si.r == StageResult::Progress ? 0 : idle + 1;
    if (idle > idle_limit)
      throw DeadlockError("hardware run made no progress for " + std::to_string(idle) +
                          " steps (last directive " + si.d.str() + ")");
  }
  return run;
}

std::string format_hw_trace(const HwRun& r) {
  std::string out;
  for (size_t k = 0; k < r.views.size(); ++k) {
    out += "step " + std::to_string(k) + " dir=" + (k ? r.dirs[k - 1].str() : "init") +
           " view=" + r.views[k] + "\n";
  }
  return out;
}

}  // namespace hsc
