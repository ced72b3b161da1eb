// Command-line front end: runs, traces, hardware dumps, security checks,
// table classification and lattice reports over μAsm programs.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "hsc/analysis.hpp"
#include "hsc/corpus.hpp"

using namespace hsc;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string format = "plain";
  std::string contract;
  std::string countermeasure;
  std::string config;
  std::string policy;
  std::string domain;
  std::string state;
  std::string cex_prefix;
  uint64_t window = 0;
  uint64_t fuel = 0;
  bool mask_literal = false;
  std::vector<std::string> programs;
};

struct Loaded {
  std::string name;
  Program prog;
  const CorpusEntry* entry = nullptr;
};

class Out {
public:
  explicit Out(bool json) : json_(json) {}
  bool is_json() const { return json_; }
  void line(const std::string& s) { std::cout << s << '\n'; }
  void record(const json& j) { std::cout << j.dump() << '\n'; }

private:
  bool json_;
};

Loaded load_program(const std::string& arg) {
  if (std::filesystem::exists(arg)) return {arg, load_program_file(arg), nullptr};
  if (const CorpusEntry* e = find_corpus(arg)) return {arg, parse_program(e->source), e};
  throw std::runtime_error("no program file or corpus entry named '" + arg + "'");
}

void require_well_formed(const Loaded& l) {
  auto v = check_well_formed(l.prog);
  if (v.empty()) return;
  throw std::runtime_error(l.name + ": address " + std::to_string(v[0].addr) + ": " + v[0].what);
}

StateDomain domain_for(const Options& o, const Loaded& l) {
  if (!o.domain.empty()) return StateDomain::load_file(o.domain);
  if (l.entry) return StateDomain::parse(l.entry->domain);
  throw std::runtime_error(l.name + ": --domain is required for programs outside the corpus");
}

Policy policy_for(const Options& o, const Loaded& l) {
  if (!o.policy.empty()) return Policy::load_file(o.policy);
  if (l.entry) return Policy::parse(l.entry->policy);
  throw std::runtime_error(l.name + ": --policy is required for programs outside the corpus");
}

ArchState state_for(const Options& o, const Program& p) {
  return o.state.empty() ? initial_state(p) : load_state_file(p, o.state);
}

HwConfig config_for(const Options& o) {
  HwConfig c = o.config.empty() ? HwConfig{} : HwConfig::load_file(o.config);
  if (!o.countermeasure.empty()) c.cm = parse_countermeasure(o.countermeasure);
  if (o.window) c.window = o.window;
  if (o.fuel) c.fuel = o.fuel;
  if (o.mask_literal) c.mask_literal = true;
  return c;
}

uint64_t window_for(const Options& o) {
  if (o.window) return o.window;
  if (!o.config.empty()) return HwConfig::load_file(o.config).window;
  return HwConfig{}.window;
}

ContractId contract_for(const Options& o) {
  if (o.contract.empty()) throw std::runtime_error("--contract is required");
  return ContractId::parse(o.contract);
}

json state_json(const Program& p, const ArchState& s) {
  json regs = json::object(), mem = json::object();
  for (RegId r = 0; r < s.regs.size(); ++r) regs[p.reg_name(r)] = s.regs[r].str();
  for (auto& [a, v] : s.mem.cells()) mem[std::to_string(a)] = v;
  return {{"regs", regs}, {"mem", mem}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

// Prints a verdict; returns the exit code.
int report(Out& out, const Options& o, const Program& p, const std::string& what,
           const Verdict& v) {
  if (out.is_json()) {
    json j = {{"check", what}, {"result", v.pass ? "pass" : "counterexample"}};
    if (v.cex) {
      j["position"] = v.cex->pos;
      j["state_a"] = state_json(p, v.cex->a);
      j["state_b"] = state_json(p, v.cex->b);
      j["trace_a"] = v.cex->ta;
      j["trace_b"] = v.cex->tb;
    }
    out.record(j);
  } else {
    out.line((v.pass ? "PASS " : "FAIL ") + what);
    if (v.cex) {
      const Counterexample& c = *v.cex;
      out.line("divergence at trace entry " + std::to_string(c.pos));
      auto at = [](const TraceLines& t, size_t k) { return k < t.size() ? t[k] : "<end>"; };
      out.line("  a: " + at(c.ta, c.pos));
      out.line("  b: " + at(c.tb, c.pos));
      for (const char* side : {"a", "b"}) {
        const ArchState& s = side[0] == 'a' ? c.a : c.b;
        std::string text = print_state(p, s);
        out.line(std::string("state ") + side + ":");
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);) out.line("  " + l);
      }
    }
  }
  if (v.cex && !o.cex_prefix.empty()) {
    write_text(o.cex_prefix + ".a.state", print_state(p, v.cex->a));
    write_text(o.cex_prefix + ".b.state", print_state(p, v.cex->b));
  }
  return v.pass ? 0 : 1;
}

int cmd_run(Out& out, const Options& o) {
  Loaded l = load_program(o.programs.at(0));
  RunResult r = arch_run(l.prog, state_for(o, l.prog), o.fuel ? o.fuel : kDefaultFuel);
  if (out.is_json()) {
    out.record({{"steps", r.steps}, {"final", state_json(l.prog, r.state)}});
  } else {
    std::cout << print_state(l.prog, r.state);
    out.line("steps " + std::to_string(r.steps));
  }
  return 0;
}

int cmd_trace(Out& out, const Options& o) {
  Loaded l = load_program(o.programs.at(0));
  require_well_formed(l);
  ContractTrace t = contract_trace(l.prog, state_for(o, l.prog), contract_for(o), window_for(o),
                                   o.fuel ? o.fuel : kDefaultFuel);
  for (const Observation& ob : t) {
    if (out.is_json())
      out.record({{"obs", format_observation(ob)}});
    else
      out.line(format_observation(ob));
  }
  return 0;
}

int cmd_hwrun(Out& out, const Options& o) {
  Loaded l = load_program(o.programs.at(0));
  require_well_formed(l);
  HwConfig cfg = config_for(o);
  HwRun r = hw_run(l.prog, state_for(o, l.prog), cfg);
  if (out.is_json()) {
    for (size_t k = 0; k < r.views.size(); ++k)
      out.record({{"step", k}, {"dir", k ? r.dirs[k - 1].str() : "init"}, {"view", r.views[k]}});
    out.record({{"final", state_json(l.prog, r.final.arch)}});
  } else {
    std::cout << format_hw_trace(r);
  }
  return 0;
}

int cmd_check(Out& out, const Options& o, const std::string& kind) {
  int rc = 0;
  for (const std::string& name : o.programs) {
    Loaded l = load_program(name);
    require_well_formed(l);
    StateDomain dom = domain_for(o, l);
    Verdict v;
    std::string what = "check " + kind + " " + l.name;
    if (kind == "sat") {
      HwConfig cfg = config_for(o);
      ContractId c = contract_for(o);
      if (c.mode == ContractId::Mode::Spec && cfg.window <= cfg.buffer_size + 1)
        std::cerr << "warning: window " << cfg.window << " does not exceed buffer_size + 1\n";
      v = check_contract_satisfaction(l.prog, c, cfg, dom);
      what += " contract=" + c.name() + " " + cfg.str();
    } else if (kind == "ni") {
      Policy pi = policy_for(o, l);
      if (!o.contract.empty()) {
        ContractId c = contract_for(o);
        v = check_ni(l.prog, pi, c, dom, window_for(o));
        what += " contract=" + c.name();
      } else {
        HwConfig cfg = config_for(o);
        v = check_ni_hw(l.prog, pi, cfg, dom);
        what += " hardware " + cfg.str();
      }
    } else if (kind == "sni") {
      ContractId c = contract_for(o);
      v = check_sni(l.prog, policy_for(o, l), c, dom, window_for(o));
      what += " contract=" + c.name();
    } else {
      ContractId c = contract_for(o);
      v = check_wsni(l.prog, c, dom, window_for(o));
      what += " contract=" + c.name();
    }
    rc = std::max(rc, report(out, o, l.prog, what, v));
  }
  return rc;
}

int cmd_classify(Out& out, const Options& o, const std::string& kind) {
  for (const std::string& name : o.programs) {
    Loaded l = load_program(name);
    require_well_formed(l);
    StateDomain dom = domain_for(o, l);
    Policy pi = policy_for(o, l);
    uint64_t w = window_for(o);
    Row r = kind == "sandbox" ? classify_sandboxing(l.prog, pi, dom, w)
                              : classify_constant_time(l.prog, pi, dom, w);
    if (out.is_json()) {
      json cells = json::object();
      for (size_t k = 0; k < r.cells.size(); ++k) cells[r.contracts[k].name()] = cell_name(r.cells[k]);
      out.record({{"program", l.name}, {"vanilla", r.vanilla}, {"cells", cells}});
    } else {
      out.line(l.name + " vanilla=" + (r.vanilla ? "yes" : "no") + " " + r.str());
    }
  }
  return 0;
}

int cmd_lattice(Out& out, const Options& o, size_t random, uint64_t seed, bool reverse) {
  std::vector<NamedProgram> progs;
  if (o.programs.empty()) {
    progs = corpus_programs();
  } else {
    for (const std::string& name : o.programs) {
      Loaded l = load_program(name);
      require_well_formed(l);
      progs.push_back({l.name, l.prog, domain_for(o, l)});
    }
  }
  std::mt19937_64 rng(seed);
  for (size_t k = 0; k < random; ++k)
    progs.push_back({"random#" + std::to_string(k), random_program(rng), random_program_domain()});
  std::vector<LatticeEdge> edges = lattice_edges();
  if (reverse) edges = {{ContractId::parse("spec-ct"), ContractId::parse("seq-ct")}};
  int rc = 0;
  for (const EdgeResult& r : check_lattice(progs, edges, window_for(o))) {
    std::string edge = r.edge.stronger.name() + " ⊒ " + r.edge.weaker.name();
    if (r.witness) rc = 1;
    if (out.is_json()) {
      json j = {{"edge", edge}, {"result", r.witness ? "refuted" : "pass"}, {"programs", r.checked}};
      if (r.witness) {
        j["program"] = *r.witness_program;
        j["trace_a"] = r.witness->ta;
        j["trace_b"] = r.witness->tb;
      }
      out.record(j);
    } else if (r.witness) {
      out.line("REFUTED " + edge + " on " + *r.witness_program + " at trace entry " +
               std::to_string(r.witness->pos));
    } else {
      out.line("PASS " + edge + " (" + std::to_string(r.checked) + " programs)");
    }
  }
  return rc;
}

int cmd_corpus(Out& out, const Options& o) {
  if (o.programs.empty()) {
    for (const CorpusEntry& e : corpus()) {
      if (out.is_json())
        out.record({{"name", e.name}, {"summary", e.summary}});
      else
        out.line(e.name + "  " + e.summary);
    }
    return 0;
  }
  for (const std::string& name : o.programs) {
    const CorpusEntry* e = find_corpus(name);
    if (!e) throw std::runtime_error("no corpus entry named '" + name + "'");
    if (out.is_json()) {
      out.record({{"name", e->name}, {"source", e->source}, {"domain", e->domain}, {"policy", e->policy}});
    } else {
      out.line("# " + e->name + ": " + e->summary);
      std::cout << e->source;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-software contract workbench for μAsm programs"};
  app.require_subcommand(1);
  Options o;
  size_t random = 0;
  uint64_t seed = 1;
  bool reverse = false;

  auto common = [&](CLI::App* s) {
    s->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"plain", "json-lines"}));
    s->add_option("--fuel", o.fuel, "Step bound");
    s->add_option("--window", o.window, "Speculative window of spec contracts");
  };

  auto* run = app.add_subcommand("run", "Run the architectural semantics");
  common(run);
  run->add_option("program", o.programs, "Program file or corpus name")->required()->expected(1);
  run->add_option("--state", o.state, "Initial state file");

  auto* trace = app.add_subcommand("trace", "Print a contract trace");
  common(trace);
  trace->add_option("program", o.programs)->required()->expected(1);
  trace->add_option("--contract", o.contract)->required();
  trace->add_option("--state", o.state);

  auto* hwrun = app.add_subcommand("hwrun", "Dump the hardware trace");
  common(hwrun);
  hwrun->add_option("program", o.programs)->required()->expected(1);
  hwrun->add_option("--config", o.config, "Microarchitecture config file");
  hwrun->add_option("--countermeasure", o.countermeasure);
  hwrun->add_option("--state", o.state);
  hwrun->add_flag("--mask-literal", o.mask_literal, "Mask empty labels (printed tt rule)");

  auto* check = app.add_subcommand("check", "Decide a security property over a domain");
  check->require_subcommand(1);
  std::string check_kind;
  for (const char* k : {"sat", "ni", "sni", "wsni"}) {
    auto* s = check->add_subcommand(k);
    common(s);
    s->add_option("programs", o.programs)->required();
    s->add_option("--contract", o.contract);
    s->add_option("--countermeasure", o.countermeasure);
    s->add_option("--config", o.config);
    s->add_option("--policy", o.policy);
    s->add_option("--domain", o.domain);
    s->add_option("--cex-prefix", o.cex_prefix, "Write counterexample states to <prefix>.{a,b}.state");
    s->add_flag("--mask-literal", o.mask_literal);
    s->callback([&check_kind, k] { check_kind = k; });
  }

  auto* classify = app.add_subcommand("classify", "Sandboxing / constant-time table rows");
  classify->require_subcommand(1);
  std::string classify_kind;
  for (const char* k : {"sandbox", "ct"}) {
    auto* s = classify->add_subcommand(k);
    common(s);
    s->add_option("programs", o.programs)->required();
    s->add_option("--policy", o.policy);
    s->add_option("--domain", o.domain);
    s->callback([&classify_kind, k] { classify_kind = k; });
  }

  auto* lattice = app.add_subcommand("lattice", "Check the contract lattice edges");
  common(lattice);
  lattice->add_option("programs", o.programs, "Programs (default: whole corpus)");
  lattice->add_option("--domain", o.domain);
  lattice->add_option("--random", random, "Additional random 8-instruction programs");
  lattice->add_option("--seed", seed, "Seed for random programs");
  lattice->add_flag("--reverse", reverse, "Check spec-ct ⊒ seq-ct instead (expected to fail)");

  auto* corp = app.add_subcommand("corpus", "List or print shipped programs");
  common(corp);
  corp->add_option("names", o.programs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Out out(o.format == "json-lines");
  try {
    if (*run) return cmd_run(out, o);
    if (*trace) return cmd_trace(out, o);
    if (*hwrun) return cmd_hwrun(out, o);
    if (*check) return cmd_check(out, o, check_kind);
    if (*classify) return cmd_classify(out, o, classify_kind);
    if (*lattice) return cmd_lattice(out, o, random, seed, reverse);
    if (*corp) return cmd_corpus(out, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
