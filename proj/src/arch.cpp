#include "hsc/arch.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hsc {

ArchState initial_state(const Program& p, Memory mem) {
  ArchState s;
  s.mem = std::move(mem);
  s.regs.assign(p.num_regs(), Value(0));
  return s;
}

static uint64_t defined(Value v, uint64_t pc) {
  if (v.is_bot())
    throw StuckError("undefined value at address " + std::to_string(pc));
  return v.nat();
}

ArchState arch_step(const Program& p, const ArchState& s, StepEvent* ev) {
  if (s.final()) throw std::logic_error("arch_step on a final state");
  ArchState t = s;
  uint64_t pc = s.regs[kPc].nat();
  const Instr* in = p.at(pc);
  StepEvent local;
  StepEvent& e = ev ? *ev : local;
  e = StepEvent{};
  if (!in) {
    t.regs[kPc] = Value::bot();
    return t;
  }
  const uint64_t mod = p.modulus;
  Value next = pc + 1;
  switch (in->kind) {
    case Instr::Kind::Skip:
    case Instr::Kind::Barrier: break;
    case Instr::Kind::Assign:
      t.regs[in->x] = defined(eval_partial(in->e, s.regs, mod), pc);
      break;
    case Instr::Kind::CondAssign:
      if (defined(eval_partial(in->guard, s.regs, mod), pc) == 0)
        t.regs[in->x] = defined(eval_partial(in->e, s.regs, mod), pc);
      break;
    case Instr::Kind::Load: {
      uint64_t n = defined(eval_partial(in->e, s.regs, mod), pc);
      uint64_t v = s.mem.get(n);
      t.regs[in->x] = v;
      e.kind = StepEvent::Kind::Load;
      e.addr = n;
      e.value = v;
      break;
    }
    case Instr::Kind::Store: {
      uint64_t n = defined(eval_partial(in->e, s.regs, mod), pc);
      t.mem.set(n, defined(s.regs[in->x], pc));
      e.kind = StepEvent::Kind::Store;
      e.addr = n;
      break;
    }
    case Instr::Kind::Beqz:
      next = defined(s.regs[in->x], pc) == 0 ? in->target : Value(pc + 1);
      e.kind = StepEvent::Kind::Branch;
      break;
    case Instr::Kind::Jmp:
      // A constant `end` target terminates; a register read of bottom is stuck.
      next = eval_partial(in->e, s.regs, mod);
      if (next.is_bot() && !in->e->is_const()) defined(next, pc);
      e.kind = StepEvent::Kind::Jump;
      break;
  }
  // Assignments to pc are ill-formed; the pc update below wins for them.
  t.regs[kPc] = next;
  e.next_pc = next;
  return t;
}

RunResult arch_run(const Program& p, ArchState s, uint64_t fuel) {
  uint64_t steps = 0;
  while (!s.final()) {
    if (steps >= fuel)
      throw FuelExhausted("architectural run exceeded " + std::to_string(fuel) + " steps");
    s = arch_step(p, s);
    ++steps;
  }
  return {std::move(s), steps};
}

static uint64_t parse_u64(const std::string& s, int line) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("state line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

ArchState parse_state(const Program& p, const std::string& text) {
  ArchState s = initial_state(p);
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string kind, rest;
    if (!(ls >> kind)) continue;
    std::getline(ls, rest);
    rest.erase(std::remove_if(rest.begin(), rest.end(), ::isspace), rest.end());
    auto eq = rest.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("state line " + std::to_string(n) + ": expected '<key>=<value>'");
    std::string key = rest.substr(0, eq), val = rest.substr(eq + 1);
    if (kind == "reg") {
      RegId r;
      try {
        r = p.find_reg(key);
      } catch (const std::out_of_range& e) {
        throw std::runtime_error("state line " + std::to_string(n) + ": " + e.what());
      }
      s.regs[r] = val == "end" ? Value::bot() : Value(parse_u64(val, n) % p.modulus);
    } else if (kind == "mem") {
      s.mem.set(parse_u64(key, n), parse_u64(val, n) % p.modulus);
    } else {
      throw std::runtime_error("state line " + std::to_string(n) + ": unknown entry '" + kind +
                               "'");
    }
  }
  return s;
}

ArchState load_state_file(const Program& p, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open state file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_state(p, ss.str());
}

std::string print_state(const Program& p, const ArchState& s) {
  std::string out;
  for (RegId r = 0; r < s.regs.size(); ++r)
    out += "reg " + p.reg_name(r) + "=" + s.regs[r].str() + "\n";
  for (auto& [a, v] : s.mem.cells()) out += "mem " + std::to_string(a) + "=" + std::to_string(v) + "\n";
  return out;
}

}  // namespace hsc
