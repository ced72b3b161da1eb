#include "hsc/analysis.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace hsc {

// ---------------------------------------------------------------------------
// Policy and domain files

static std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static uint64_t num(const std::string& s, const std::string& ctx) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(ctx + ": bad number '" + s + "'");
}

static std::pair<uint64_t, uint64_t> range(const std::string& s, const std::string& ctx) {
  auto dots = s.find("..");
  if (dots == std::string::npos) {
    uint64_t v = num(s, ctx);
    return {v, v};
  }
  uint64_t lo = num(s.substr(0, dots), ctx), hi = num(s.substr(dots + 2), ctx);
  if (lo > hi) throw std::invalid_argument(ctx + ": empty range '" + s + "'");
  return {lo, hi};
}

static std::vector<std::vector<std::string>> tokenize_lines(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    out.push_back(std::move(toks));
  }
  return out;
}

bool Policy::is_low(uint64_t addr) const {
  for (auto [lo, hi] : low)
    if (addr >= lo && addr <= hi) return true;
  return false;
}

Policy Policy::parse(const std::string& text) {
  Policy p;
  int n = 0;
  for (auto& toks : tokenize_lines(text)) {
    ++n;
    if (toks.empty()) continue;
    std::string ctx = "policy line " + std::to_string(n);
    if (toks.size() != 2 || toks[0] != "low")
      throw std::invalid_argument(ctx + ": expected 'low <addr-range>'");
    p.low.push_back(range(toks[1], ctx));
  }
  return p;
}

Policy Policy::load_file(const std::string& path) { return parse(read_file(path, "policy")); }

StateDomain StateDomain::parse(const std::string& text) {
  StateDomain d;
  std::vector<std::pair<uint64_t, std::optional<std::pair<uint64_t, uint64_t>>>> vary;
  int n = 0;
  for (auto& t : tokenize_lines(text)) {
    ++n;
    if (t.empty()) continue;
    std::string ctx = "domain line " + std::to_string(n);
    if (t[0] == "values" && t.size() == 2) {
      d.values = num(t[1], ctx);
      if (d.values == 0) throw std::invalid_argument(ctx + ": values must be positive");
    } else if (t[0] == "vary" && t.size() == 2) {
      vary.push_back({num(t[1], ctx), std::nullopt});
    } else if (t[0] == "vary" && t.size() == 4 && t[2] == "in") {
      vary.push_back({num(t[1], ctx), range(t[3], ctx)});
    } else if (t[0] == "fix" && t.size() == 4 && t[2] == "=") {
      d.fixed[num(t[1], ctx)] = num(t[3], ctx);
    } else if (t[0] == "fix" && t.size() == 2 && t[1].find('=') != std::string::npos) {
      auto eq = t[1].find('=');
      d.fixed[num(t[1].substr(0, eq), ctx)] = num(t[1].substr(eq + 1), ctx);
    } else {
      throw std::invalid_argument(ctx + ": expected 'vary', 'fix' or 'values'");
    }
  }
  for (auto& [addr, r] : vary) {
    auto [lo, hi] = r ? *r : std::pair<uint64_t, uint64_t>{0, d.values - 1};
    if (hi - lo >= kMaxPairs) throw DomainTooLarge("domain: value range too large");
    std::vector<uint64_t> vals;
    for (uint64_t v = lo; v <= hi; ++v) vals.push_back(v);
    d.vary.push_back({addr, std::move(vals)});
  }
  return d;
}

StateDomain StateDomain::load_file(const std::string& path) {
  return parse(read_file(path, "domain"));
}

uint64_t StateDomain::size() const {
  uint64_t n = 1;
  for (auto& [a, vals] : vary) {
    if (vals.empty()) return 0;
    if (n > kMaxPairs / vals.size()) return kMaxPairs + 1;
    n *= vals.size();
  }
  return n;
}

std::vector<ArchState> StateDomain::enumerate(const Program& p) const {
  uint64_t n = size();
  if (n > 4096 || n * n > kMaxPairs)
    throw DomainTooLarge("domain has " + std::to_string(n) + " states; at most 4096 (2^24 pairs)");
  std::vector<ArchState> out;
  out.reserve(n);
  std::vector<size_t> digit(vary.size(), 0);
  for (uint64_t k = 0; k < n; ++k) {
    Memory m;
    for (auto& [a, v] : fixed) m.set(a, v % p.modulus);
    for (size_t j = 0; j < vary.size(); ++j) m.set(vary[j].first, vary[j].second[digit[j]] % p.modulus);
    out.push_back(initial_state(p, std::move(m)));
    for (size_t j = vary.size(); j-- > 0;) {
      if (++digit[j] < vary[j].second.size()) break;
      digit[j] = 0;
    }
  }
  return out;
}

bool low_equivalent(const ArchState& a, const ArchState& b, const Policy& pi) {
  if (a.regs != b.regs) return false;
  for (auto& [addr, v] : a.mem.cells())
    if (pi.is_low(addr) && b.mem.get(addr) != v) return false;
  for (auto& [addr, v] : b.mem.cells())
    if (pi.is_low(addr) && a.mem.get(addr) != v) return false;
  return true;
}

static std::string low_key(const ArchState& s, const Policy& pi) {
  std::string k;
  for (auto& [addr, v] : s.mem.cells())
    if (pi.is_low(addr)) k += std::to_string(addr) + "=" + std::to_string(v) + ",";
  return k;
}

// ---------------------------------------------------------------------------
// Grouped pair checks

TraceLines contract_lines(const ContractTrace& t) {
  TraceLines out;
  out.reserve(t.size());
  for (const Observation& o : t) out.push_back(format_observation(o));
  return out;
}

static std::string join(const TraceLines& t) {
  std::string k;
  for (const std::string& s : t) {
    k += s;
    k += '\n';
  }
  return k;
}

std::optional<size_t> first_divergence(const TraceLines& a, const TraceLines& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t k = 0; k < n; ++k)
    if (a[k] != b[k]) return k;
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

// States sharing a key must share a value. The earliest state of each key is
// its representative; the first later state that disagrees is reported.
static Verdict grouped(const std::vector<ArchState>& states,
                       const std::function<std::optional<std::string>(size_t)>& key,
                       const std::function<TraceLines(size_t)>& value) {
  std::unordered_map<std::string, size_t> rep;
  std::vector<std::optional<TraceLines>> vals(states.size());
  auto get = [&](size_t i) -> const TraceLines& {
    if (!vals[i]) vals[i] = value(i);
    return *vals[i];
  };
  for (size_t i = 0; i < states.size(); ++i) {
    std::optional<std::string> k = key(i);
    if (!k) continue;
    auto [it, fresh] = rep.emplace(std::move(*k), i);
    if (fresh) continue;
    size_t r = it->second;
    if (auto pos = first_divergence(get(r), get(i))) {
      Verdict v;
      v.pass = false;
      v.cex = Counterexample{states[r], states[i], *pos, get(r), get(i)};
      return v;
    }
  }
  return {};
}

static TraceLines hw_lines(const Program& p, const ArchState& s, const HwConfig& cfg) {
  return hw_run(p, s, cfg).views;
}

Verdict check_contract_satisfaction(const Program& p, const ContractId& c, const HwConfig& cfg,
                                    const StateDomain& dom) {
  auto states = dom.enumerate(p);
  return grouped(
      states,
      [&](size_t i) { return join(contract_lines(contract_trace(p, states[i], c, cfg.window))); },
      [&](size_t i) { return hw_lines(p, states[i], cfg); });
}

Verdict check_ni(const Program& p, const Policy& pi, const ContractId& c, const StateDomain& dom,
                 uint64_t w) {
  auto states = dom.enumerate(p);
  return grouped(
      states, [&](size_t i) { return low_key(states[i], pi); },
      [&](size_t i) { return contract_lines(contract_trace(p, states[i], c, w)); });
}

Verdict check_ni_hw(const Program& p, const Policy& pi, const HwConfig& cfg,
                    const StateDomain& dom) {
  auto states = dom.enumerate(p);
  return grouped(
      states, [&](size_t i) { return low_key(states[i], pi); },
      [&](size_t i) { return hw_lines(p, states[i], cfg); });
}

Verdict check_wsni(const Program& p, const ContractId& c, const StateDomain& dom, uint64_t w) {
  auto states = dom.enumerate(p);
  return grouped(
      states,
      [&](size_t i) { return join(contract_lines(trace_seq(p, states[i], Observer::Arch))); },
      [&](size_t i) { return contract_lines(contract_trace(p, states[i], c, w)); });
}

Verdict check_sni(const Program& p, const Policy& pi, const ContractId& c, const StateDomain& dom,
                  uint64_t w) {
  auto states = dom.enumerate(p);
  return grouped(
      states,
      [&](size_t i) {
        return low_key(states[i], pi) + "|" +
               join(contract_lines(trace_seq(p, states[i], Observer::Ct)));
      },
      [&](size_t i) { return contract_lines(contract_trace(p, states[i], c, w)); });
}

// ---------------------------------------------------------------------------
// Classification

std::string cell_name(Cell c) {
  switch (c) {
    case Cell::YStronger: return "Y,⊒";
    case Cell::YWsni: return "Y,wSNI";
    case Cell::YSni: return "Y,SNI";
    case Cell::YNi: return "Y,NI";
    case Cell::N: return "N";
  }
  return "?";
}

std::string Row::str() const {
  std::string out;
  for (size_t k = 0; k < contracts.size(); ++k) {
    if (k) out += ' ';
    out += contracts[k].name() + "=" + cell_name(cells[k]);
  }
  return out;
}

std::vector<ContractId> table_columns() {
  return {ContractId::seq(Observer::Ct), ContractId::seq(Observer::Arch),
          ContractId::spec(Observer::Ct), ContractId::spec(Observer::PcCt)};
}

static void add(Row& r, const ContractId& c, Cell yes, const Verdict& v) {
  r.contracts.push_back(c);
  r.cells.push_back(v.pass ? yes : Cell::N);
  r.cex.push_back(v.cex);
}

Row classify_sandboxing(const Program& p, const Policy& pi, const StateDomain& dom, uint64_t w) {
  Row r;
  r.vanilla = check_ni(p, pi, ContractId::seq(Observer::Arch), dom, w).pass;
  for (const ContractId& c : table_columns()) {
    if (!r.vanilla) {
      add(r, c, Cell::YNi, check_ni(p, pi, c, dom, w));
    } else if (c.mode == ContractId::Mode::Seq) {
      // seq-ct ⊒ seq-arch and seq-arch ⊒ seq-arch.
      add(r, c, Cell::YStronger, {});
    } else {
      add(r, c, Cell::YWsni, check_wsni(p, c, dom, w));
    }
  }
  return r;
}

Row classify_constant_time(const Program& p, const Policy& pi, const StateDomain& dom, uint64_t w) {
  Row r;
  r.vanilla = check_ni(p, pi, ContractId::seq(Observer::Ct), dom, w).pass;
  for (const ContractId& c : table_columns()) {
    if (!r.vanilla || c.mode == ContractId::Mode::Seq) {
      if (r.vanilla && c.obs == Observer::Ct)
        add(r, c, Cell::YStronger, {});
      else
        add(r, c, Cell::YNi, check_ni(p, pi, c, dom, w));
    } else {
      add(r, c, Cell::YSni, check_sni(p, pi, c, dom, w));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lattice

std::vector<LatticeEdge> lattice_edges() {
  auto C = [](const char* n) { return ContractId::parse(n); };
  return {{C("top"), C("seq-ct")},           {C("seq-ct"), C("spec-pc-ct")},
          {C("seq-ct"), C("seq-arch")},      {C("seq-arch"), C("spec-arch")},
          {C("spec-pc-ct"), C("spec-ct")},   {C("spec-ct"), C("spec-arch")},
          {C("spec-arch"), C("bot")}};
}

std::vector<EdgeResult> check_lattice(const std::vector<NamedProgram>& corpus,
                                      const std::vector<LatticeEdge>& edges, uint64_t w) {
  std::vector<EdgeResult> out;
  for (const LatticeEdge& e : edges) {
    EdgeResult r;
    r.edge = e;
    for (const NamedProgram& np : corpus) {
      auto states = np.dom.enumerate(np.prog);
      ++r.checked;
      if (auto wit = contract_stronger_test(np.prog, states, e.stronger, e.weaker, w)) {
        r.witness_program = np.name;
        r.witness = Counterexample{states[wit->a], states[wit->b], 0, contract_lines(wit->c1_a),
                                   contract_lines(wit->c1_b)};
        r.witness->pos = first_divergence(r.witness->ta, r.witness->tb).value_or(0);
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random programs

static ExprPtr random_expr(std::mt19937_64& rng, Program& p, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 1);
  switch (pick(rng)) {
    case 0: return e_const(std::uniform_int_distribution<uint64_t>(0, 7)(rng));
    case 1: return e_reg(p.reg("r" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng))));
    case 2: {
      static const BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Lt,
                                  BinOp::Eq,  BinOp::And, BinOp::Or,  BinOp::Xor};
      BinOp op = ops[std::uniform_int_distribution<int>(0, 7)(rng)];
      ExprPtr a = random_expr(rng, p, depth - 1);
      return e_bin(op, a, random_expr(rng, p, depth - 1));
    }
    case 3: {
      UnOp op = std::uniform_int_distribution<int>(0, 1)(rng) ? UnOp::Not : UnOp::Neg;
      return e_un(op, random_expr(rng, p, depth - 1));
    }
    case 4: {
      ExprPtr c = random_expr(rng, p, depth - 1);
      ExprPtr t = random_expr(rng, p, depth - 1);
      return e_ite(c, t, random_expr(rng, p, depth - 1));
    }
    default: return e_reg(p.reg("r" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng))));
  }
}

// Addresses stay near the varying cells so loads actually observe them.
static ExprPtr random_addr(std::mt19937_64& rng, Program& p) {
  if (std::uniform_int_distribution<int>(0, 2)(rng) == 0)
    return e_const(std::uniform_int_distribution<uint64_t>(0, 7)(rng));
  ExprPtr r = e_reg(p.reg("r" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng))));
  return e_bin(BinOp::Add, e_bin(BinOp::And, r, e_const(7)),
               e_const(std::uniform_int_distribution<uint64_t>(0, 3)(rng)));
}

Program random_program(std::mt19937_64& rng, size_t n) {
  Program p;
  for (int k = 0; k < 4; ++k) p.reg("r" + std::to_string(k));
  auto reg = [&] {
    return p.reg("r" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng)));
  };
  for (size_t l = 0; l < n; ++l) {
    Instr in;
    int kind = std::uniform_int_distribution<int>(0, 99)(rng);
    if (kind < 22) {
      in.kind = Instr::Kind::Load;
      in.x = reg();
      in.e = random_addr(rng, p);
    } else if (kind < 44) {
      in.kind = Instr::Kind::Assign;
      in.x = reg();
      in.e = random_expr(rng, p, 2);
    } else if (kind < 66 && l + 2 <= n) {
      in.kind = Instr::Kind::Beqz;
      in.x = reg();
      uint64_t t = std::uniform_int_distribution<uint64_t>(l + 2, n + 1)(rng);
      in.target = t == n + 1 ? Value::bot() : Value(t);
    } else if (kind < 74) {
      in.kind = Instr::Kind::Store;
      in.x = reg();
      in.e = random_addr(rng, p);
    } else if (kind < 81) {
      in.kind = Instr::Kind::CondAssign;
      in.x = reg();
      in.guard = random_expr(rng, p, 1);
      in.e = random_expr(rng, p, 1);
    } else if (kind < 86) {
      in.kind = Instr::Kind::Jmp;
      in.e = e_const(std::uniform_int_distribution<uint64_t>(l + 1, n)(rng));
    } else if (kind < 93) {
      in.kind = Instr::Kind::Barrier;
    } else {
      in.kind = Instr::Kind::Skip;
    }
    p.code.push_back(std::move(in));
  }
  return p;
}

StateDomain random_program_domain() {
  return StateDomain::parse("vary 0 in 0..3\nvary 1 in 0..3\nvary 2 in 0..3\n");
}

}  // namespace hsc
