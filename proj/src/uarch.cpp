#include "hsc/uarch.hpp"

#include <algorithm>
#include <stdexcept>

namespace hsc {

bool Cmd::resolved() const {
  switch (kind) {
    case Kind::Assign: return e->is_const();
    case Kind::Load: return false;
    case Kind::Store: return e->is_const() && src->is_const();
    case Kind::Skip:
    case Kind::Barrier: return true;
  }
  return true;
}

Cmd command_for(const Instr& i) {
  Cmd c;
  switch (i.kind) {
    case Instr::Kind::Skip: c.kind = Cmd::Kind::Skip; break;
    case Instr::Kind::Barrier: c.kind = Cmd::Kind::Barrier; break;
    case Instr::Kind::Assign:
      c.kind = Cmd::Kind::Assign;
      c.x = i.x;
      c.e = i.e;
      break;
    case Instr::Kind::CondAssign:
      // x <- g ? e behaves as x <- ite(g, x, e).
      c.kind = Cmd::Kind::Assign;
      c.x = i.x;
      c.e = e_ite(i.guard, e_reg(i.x), i.e);
      break;
    case Instr::Kind::Load:
      c.kind = Cmd::Kind::Load;
      c.x = i.x;
      c.e = i.e;
      break;
    case Instr::Kind::Store:
      c.kind = Cmd::Kind::Store;
      c.x = i.x;
      c.e = i.e;
      c.src = e_reg(i.x);
      break;
    case Instr::Kind::Jmp:
    case Instr::Kind::Beqz: throw std::logic_error("control instructions have no plain command");
  }
  return c;
}

Projection buf_project(const Buffer& buf, const std::vector<uint64_t>* labels) {
  Projection pr;
  pr.reserve(buf.size());
  for (size_t k = 0; k < buf.size(); ++k) {
    const Cmd& c = buf[k];
    ProjEntry e;
    e.kind = c.kind;
    e.x = c.x;
    e.marked = c.marked;
    e.tag = c.tag;
    if (c.kind == Cmd::Kind::Assign || c.kind == Cmd::Kind::Load || c.kind == Cmd::Kind::Store)
      e.r_e = c.e->is_const();
    if (c.kind == Cmd::Kind::Store) e.r_src = c.src->is_const();
    if (labels) e.label = (*labels)[k];
    pr.push_back(e);
  }
  return pr;
}

std::string print_label(uint64_t label) {
  std::string out = "{";
  bool first = true;
  for (int k = 0; k < 64; ++k)
    if (label >> k & 1) {
      if (!first) out += ',';
      first = false;
      out += std::to_string(k);
    }
  return out + "}";
}

std::string print_projection(const Program& p, const Projection& pr) {
  std::string out = "[";
  for (size_t k = 0; k < pr.size(); ++k) {
    const ProjEntry& e = pr[k];
    if (k) out += " ";
    auto rr = [](bool r) { return r ? "R" : "UR"; };
    switch (e.kind) {
      case Cmd::Kind::Assign:
        out += p.reg_name(e.x) + (e.marked ? "<-'" : "<-") + rr(e.r_e);
        break;
      case Cmd::Kind::Load: out += "load " + p.reg_name(e.x) + "," + rr(e.r_e); break;
      case Cmd::Kind::Store: out += std::string("store ") + rr(e.r_src) + "," + rr(e.r_e); break;
      case Cmd::Kind::Skip: out += "skip"; break;
      case Cmd::Kind::Barrier: out += "spbarr"; break;
    }
    if (e.tag) out += "@" + std::to_string(*e.tag);
    if (e.label) out += print_label(e.label);
  }
  return out + "]";
}

RegFile apply_buffer(const Buffer& buf, size_t k, const RegFile& a) {
  RegFile out = a;
  for (size_t j = 0; j < k && j < buf.size(); ++j) {
    const Cmd& c = buf[j];
    switch (c.kind) {
      case Cmd::Kind::Assign: out[c.x] = c.e->is_const() ? c.e->value : Value::bot(); break;
      case Cmd::Kind::Load: out[c.x] = Value::bot(); break;
      case Cmd::Kind::Barrier: std::fill(out.begin(), out.end(), Value::bot()); return out;
      case Cmd::Kind::Store:
      case Cmd::Kind::Skip: break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

static uint32_t parse_u32(const std::string& s, const std::string& ctx) {
  try {
    size_t used = 0;
    unsigned long v = std::stoul(s, &used);
    if (used != s.size() || v == 0 || v > 1u << 20) throw std::invalid_argument(s);
    return static_cast<uint32_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "' in " + ctx);
  }
}

static std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t k = s.find(sep, start);
    out.push_back(s.substr(start, k - start));
    if (k == std::string::npos) return out;
    start = k + 1;
  }
}

CacheConfig CacheConfig::parse(const std::string& spec) {
  auto parts = split(spec, ':');
  CacheConfig c;
  if (parts[0] == "lru" && (parts.size() == 2 || parts.size() == 3)) {
    c.kind = Kind::Lru;
    c.capacity = parse_u32(parts[1], "cache '" + spec + "'");
    if (parts.size() == 3) c.line = parse_u32(parts[2], "cache '" + spec + "'");
  } else if (parts[0] == "direct" && parts.size() == 3) {
    c.kind = Kind::Direct;
    c.sets = parse_u32(parts[1], "cache '" + spec + "'");
    c.line = parse_u32(parts[2], "cache '" + spec + "'");
  } else {
    throw std::invalid_argument("bad cache '" + spec + "' (want lru:<cap> or direct:<sets>:<line>)");
  }
  if (c.line & (c.line - 1)) throw std::invalid_argument("cache line size must be a power of two");
  return c;
}

std::string CacheConfig::str() const {
  if (kind == Kind::Lru)
    return "lru:" + std::to_string(capacity) + (line != 1 ? ":" + std::to_string(line) : "");
  return "direct:" + std::to_string(sets) + ":" + std::to_string(line);
}

Cache::Cache(CacheConfig cfg) : cfg_(cfg) {
  if (cfg_.kind == CacheConfig::Kind::Direct) lines_.assign(cfg_.sets, 0);
}

bool Cache::access(uint64_t addr) const {
  uint64_t ln = addr / cfg_.line;
  if (cfg_.kind == CacheConfig::Kind::Lru)
    return std::find(lines_.begin(), lines_.end(), ln) != lines_.end();
  return lines_[ln % cfg_.sets] == ln + 1;
}

void Cache::update(uint64_t addr) {
  uint64_t ln = addr / cfg_.line;
  if (cfg_.kind == CacheConfig::Kind::Lru) {
    auto it = std::find(lines_.begin(), lines_.end(), ln);
    if (it != lines_.end()) lines_.erase(it);
    lines_.insert(lines_.begin(), ln);
    if (lines_.size() > cfg_.capacity) lines_.pop_back();
  } else {
    lines_[ln % cfg_.sets] = ln + 1;
  }
}

std::string Cache::str() const {
  std::string out = "[";
  bool first = true;
  for (size_t k = 0; k < lines_.size(); ++k) {
    if (cfg_.kind == CacheConfig::Kind::Direct && lines_[k] == 0) continue;
    if (!first) out += ',';
    first = false;
    if (cfg_.kind == CacheConfig::Kind::Lru)
      out += std::to_string(lines_[k]);
    else
      out += std::to_string(k) + ":" + std::to_string(lines_[k] - 1);
  }
  return out + "]";
}

// ---------------------------------------------------------------------------

PredictorKind parse_predictor(const std::string& s) {
  if (s == "fallthrough") return PredictorKind::Fallthrough;
  if (s == "backward") return PredictorKind::Backward;
  if (s == "twobit") return PredictorKind::TwoBit;
  throw std::invalid_argument("unknown predictor '" + s + "'");
}

std::string predictor_name(PredictorKind k) {
  switch (k) {
    case PredictorKind::Fallthrough: return "fallthrough";
    case PredictorKind::Backward: return "backward";
    case PredictorKind::TwoBit: return "twobit";
  }
  return "?";
}

Value Predictor::predict(uint64_t l, Value target) const {
  switch (kind_) {
    case PredictorKind::Fallthrough: return l + 1;
    case PredictorKind::Backward: return target.is_nat() && target.nat() <= l ? target : Value(l + 1);
    case PredictorKind::TwoBit: return counter(l) >= 2 ? target : Value(l + 1);
  }
  return l + 1;
}

void Predictor::update(uint64_t l, Value target, Value outcome) {
  if (kind_ != PredictorKind::TwoBit) return;
  uint8_t c = counter(l);
  c = outcome == target ? std::min<uint8_t>(3, c + 1) : (c ? c - 1 : 0);
  if (c)
    ctr_[l] = c;
  else
    ctr_.erase(l);
}

uint8_t Predictor::counter(uint64_t l) const {
  auto it = ctr_.find(l);
  return it == ctr_.end() ? 0 : it->second;
}

std::string Predictor::str() const {
  std::string out = predictor_name(kind_);
  if (kind_ != PredictorKind::TwoBit) return out;
  out += "[";
  bool first = true;
  for (auto& [l, c] : ctr_) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(l) + ":" + std::to_string(c);
  }
  return out + "]";
}

// ---------------------------------------------------------------------------

std::string Directive::str() const {
  switch (kind) {
    case Kind::Fetch: return "fetch";
    case Kind::Execute: return "exec " + std::to_string(i);
    case Kind::Retire: return "retire";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& s) {
  if (s == "seq") return SchedulerKind::Seq;
  if (s == "ooo") return SchedulerKind::Ooo;
  if (s == "ooo-eager") return SchedulerKind::OooEager;
  throw std::invalid_argument("unknown scheduler '" + s + "'");
}

std::string scheduler_name(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::Seq: return "seq";
    case SchedulerKind::Ooo: return "ooo";
    case SchedulerKind::OooEager: return "ooo-eager";
  }
  return "?";
}

bool needs_exec(const ProjEntry& e) {
  switch (e.kind) {
    case Cmd::Kind::Skip:
    case Cmd::Kind::Barrier: return false;
    case Cmd::Kind::Assign: return !e.r_e || e.tag.has_value();
    case Cmd::Kind::Load: return true;
    case Cmd::Kind::Store: return !e.r_e || !e.r_src;
  }
  return false;
}

std::vector<Directive> Scheduler::candidates() const {
  std::vector<Directive> out;
  const Projection& pr = last_;
  if (pr.empty()) return {Directive::fetch()};
  if (!pr[0].tag && !needs_exec(pr[0])) out.push_back(Directive::retire());

  bool eager = kind_ == SchedulerKind::OooEager;
  bool store_seen = false, barrier_seen = false;
  for (size_t k = 0; k < pr.size(); ++k) {
    const ProjEntry& e = pr[k];
    bool blocked = barrier_seen || (e.kind == Cmd::Kind::Load && store_seen);
    bool branch = e.tag.has_value();
    if (!blocked && needs_exec(e) && (eager || !branch))
      out.push_back(Directive::execute(static_cast<uint32_t>(k + 1)));
    store_seen |= e.kind == Cmd::Kind::Store;
    barrier_seen |= e.kind == Cmd::Kind::Barrier;
  }

  // Fetch needs room and a known next pc.
  bool pc_known = true;
  for (size_t k = pr.size(); k-- > 0;)
    if (pr[k].kind == Cmd::Kind::Assign && pr[k].x == kPc) {
      pc_known = pr[k].r_e;
      break;
    }
  if (pr.size() < mu_w_ && !barrier_seen && pc_known) out.push_back(Directive::fetch());

  if (!eager)
    for (size_t k = pr.size(); k-- > 0;)
      if (pr[k].tag) out.push_back(Directive::execute(static_cast<uint32_t>(k + 1)));

  if (out.empty()) out.push_back(Directive::retire());
  return out;
}

Directive Scheduler::next() const {
  if (kind_ == SchedulerKind::Seq) {
    if (last_.empty()) return Directive::fetch();
    return needs_exec(last_[0]) ? Directive::execute(1) : Directive::retire();
  }
  std::vector<Directive> c = candidates();
  // Each candidate is issued twice in a row, so a cache miss is retried at once.
  return c[(cursor_ / 2) % c.size()];
}

void Scheduler::update(const Projection& pr) {
  if (pr == last_) {
    // Keep the cursor canonical: only its position in the issue cycle matters.
    cursor_ = kind_ == SchedulerKind::Seq ? 0 : (cursor_ + 1) % (2 * candidates().size());
  } else {
    last_ = pr;
    cursor_ = 0;
  }
}

std::string Scheduler::str() const {
  if (kind_ == SchedulerKind::Seq) return "seq";
  return scheduler_name(kind_) + ":" + std::to_string(cursor_);
}

}  // namespace hsc
