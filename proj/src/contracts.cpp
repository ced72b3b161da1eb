#include "hsc/contracts.hpp"

#include <map>
#include <stdexcept>

namespace hsc {

std::string format_observation(const Observation& o) {
  switch (o.kind) {
    case Observation::Kind::Load: return "load " + o.addr.str();
    case Observation::Kind::Store: return "store " + o.addr.str();
    case Observation::Kind::Pc: return "pc " + o.addr.str();
    case Observation::Kind::LoadVal: return "loadv " + o.addr.str() + " " + o.val.str();
    case Observation::Kind::State: return "state " + o.blob;
  }
  return "?";
}

ContractId ContractId::parse(const std::string& n) {
  if (n == "seq-ct") return seq(Observer::Ct);
  if (n == "seq-arch") return seq(Observer::Arch);
  if (n == "spec-ct") return spec(Observer::Ct);
  if (n == "spec-pc-ct") return spec(Observer::PcCt);
  if (n == "spec-arch") return spec(Observer::Arch);
  if (n == "top") return top();
  if (n == "bot" || n == "bot-inf") return bot();
  throw std::invalid_argument("unknown contract '" + n + "'");
}

std::string ContractId::name() const {
  switch (mode) {
    case Mode::Top: return "top";
    case Mode::Bot: return "bot-inf";
    case Mode::Seq: return obs == Observer::Arch ? "seq-arch" : "seq-ct";
    case Mode::Spec:
      return obs == Observer::Arch ? "spec-arch" : obs == Observer::PcCt ? "spec-pc-ct" : "spec-ct";
  }
  return "?";
}

std::string state_blob(const Program& p, const ArchState& s) {
  std::string out;
  for (RegId r = 0; r < s.regs.size(); ++r) {
    if (r) out += ',';
    out += p.reg_name(r) + "=" + s.regs[r].str();
  }
  out += ';';
  bool first = true;
  for (auto& [a, v] : s.mem.cells()) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(a) + "=" + std::to_string(v);
  }
  return out;
}

// Observation of one step under the sequential observers; nullopt when silent.
static std::optional<Observation> seq_obs(const StepEvent& e, Observer obs) {
  switch (e.kind) {
    case StepEvent::Kind::None: return std::nullopt;
    case StepEvent::Kind::Load:
      if (obs == Observer::Arch) return Observation{Observation::Kind::LoadVal, e.addr, e.value, {}};
      return Observation{Observation::Kind::Load, e.addr, {}, {}};
    case StepEvent::Kind::Store: return Observation{Observation::Kind::Store, e.addr, {}, {}};
    case StepEvent::Kind::Branch:
    case StepEvent::Kind::Jump: return Observation{Observation::Kind::Pc, e.next_pc, {}, {}};
  }
  return std::nullopt;
}

static void out_of_fuel(uint64_t fuel) {
  throw FuelExhausted("contract run exceeded " + std::to_string(fuel) + " steps");
}

ContractTrace trace_seq(const Program& p, const ArchState& s0, Observer obs, uint64_t fuel) {
  if (obs == Observer::PcCt) throw std::invalid_argument("seq-pc-ct is not a contract");
  ContractTrace t;
  ArchState s = s0;
  uint64_t steps = 0;
  StepEvent ev;
  while (!s.final()) {
    if (steps++ >= fuel) out_of_fuel(fuel);
    s = arch_step(p, s, &ev);
    if (auto o = seq_obs(ev, obs)) t.push_back(*o);
  }
  return t;
}

namespace {
struct Frame {
  ArchState s;
  bool inf;
  uint64_t w;
};
}  // namespace

ContractTrace trace_spec(const Program& p, const ArchState& s0, Observer obs, uint64_t w,
                         uint64_t fuel) {
  if (w == 0) throw std::invalid_argument("speculative window must be at least 1");
  ContractTrace t;
  std::vector<Frame> stack;
  stack.push_back({s0, true, 0});
  uint64_t steps = 0;
  StepEvent ev;
  for (;;) {
    Frame& top = stack.back();
    if (top.inf && top.s.final()) break;
    if (!top.inf && (top.w == 0 || top.s.final())) {
      // Rollback; a terminated speculative frame has nothing left to run.
      stack.pop_back();
      t.push_back({Observation::Kind::Pc, stack.back().s.regs[kPc], {}, {}});
      continue;
    }
    if (steps++ >= fuel) out_of_fuel(fuel);
    const Instr* in = p.at(top.s.regs[kPc]);
    if (!top.inf) --top.w;
    if (in && in->kind == Instr::Kind::Beqz) {
      ArchState correct = arch_step(p, top.s, &ev);
      uint64_t l = top.s.regs[kPc].nat();
      Value mis = ev.next_pc == in->target ? Value(l + 1) : in->target;
      t.push_back({Observation::Kind::Pc, mis, {}, {}});
      ArchState wrong = top.s;
      wrong.regs[kPc] = mis;
      uint64_t wm = top.inf ? w : top.w;
      top.s = std::move(correct);
      stack.push_back({std::move(wrong), false, wm});
      continue;
    }
    top.s = arch_step(p, top.s, &ev);
    if (in && in->kind == Instr::Kind::Barrier && !top.inf) top.w = 0;
    std::optional<Observation> o = seq_obs(ev, obs == Observer::Arch ? Observer::Arch : Observer::Ct);
    if (!o) continue;
    if (obs == Observer::PcCt && !top.inf &&
        (o->kind == Observation::Kind::Load || o->kind == Observation::Kind::Store))
      continue;
    t.push_back(*o);
  }
  return t;
}

ContractTrace trace_degenerate(const Program& p, const ArchState& s0, ContractId::Mode which,
                               uint64_t fuel) {
  ContractTrace t;
  ArchState s = s0;
  uint64_t steps = 0;
  while (!s.final()) {
    if (steps++ >= fuel) out_of_fuel(fuel);
    if (which == ContractId::Mode::Bot)
      t.push_back({Observation::Kind::State, {}, {}, state_blob(p, s)});
    s = arch_step(p, s);
  }
  return t;
}

ContractTrace contract_trace(const Program& p, const ArchState& s0, const ContractId& c,
                             uint64_t w, uint64_t fuel) {
  switch (c.mode) {
    case ContractId::Mode::Seq: return trace_seq(p, s0, c.obs, fuel);
    case ContractId::Mode::Spec: return trace_spec(p, s0, c.obs, w, fuel);
    default: return trace_degenerate(p, s0, c.mode, fuel);
  }
}

static std::string trace_key(const ContractTrace& t) {
  std::string k;
  for (const Observation& o : t) {
    k += format_observation(o);
    k += '\n';
  }
  return k;
}

std::optional<StrengthWitness> contract_stronger_test(const Program& p,
                                                      const std::vector<ArchState>& states,
                                                      const ContractId& c1, const ContractId& c2,
                                                      uint64_t w, uint64_t fuel) {
  std::map<std::string, size_t> rep;  // c2 trace -> first state with it
  std::vector<ContractTrace> t1(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    t1[i] = contract_trace(p, states[i], c1, w, fuel);
    auto [it, fresh] = rep.emplace(trace_key(contract_trace(p, states[i], c2, w, fuel)), i);
    if (!fresh && t1[it->second] != t1[i])
      return StrengthWitness{it->second, i, t1[it->second], t1[i]};
  }
  return std::nullopt;
}

}  // namespace hsc
