// Command-line front end. Reports go to standard output as JSON (or DOT /
// expression text where asked); diagnostics go to standard error.
// Exit codes: 0 success or property holds, 2 property fails or interference,
// 1 usage or I/O error.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dicirc/dicirc.hpp"

namespace {

using namespace dicirc;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFail = 2;
constexpr int kUsage = 1;

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    return c == '{';
  }
  return false;
}

TraceStructure structure_from(const json& j) {
  if (j.is_string()) return parse_structure(j.get<std::string>());
  return structure_from_json(j);
}

TraceStructure load_structure(const std::string& path, const std::string& expr) {
  if (!expr.empty()) return parse_structure(expr);
  std::string text = read_input(path);
  if (looks_like_json(text)) return structure_from_json(json::parse(text));
  return parse_structure(text);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct Common {
  std::string input = "-";
  std::string expr;
  std::string output;
  std::string format;
  bool verbose = false;
};

int cmd_parse(const Common& c) {
  std::string text = c.expr.empty() ? read_input(c.input) : c.expr;
  Output out(c.output);
  if (looks_like_json(text)) {
    auto r = structure_from_json(json::parse(text));
    out.stream() << to_json(r).dump() << '\n';
    return kOk;
  }
  SpecExpr e = parse(text);
  if (c.format == "text") out.stream() << print(e) << '\n';
  else out.stream() << to_json(elaborate(e)).dump() << '\n';
  return kOk;
}

int cmd_check_di(const Common& c, bool bounded) {
  auto r = load_structure(c.input, c.expr);
  RuleOptions opts;
  opts.bounded_r2_prime = bounded;
  auto report = check_di(r, opts);
  Output(c.output).stream() << to_json(report).dump(2) << '\n';
  if (c.verbose) std::cerr << (report.di ? "delay-insensitive" : "not delay-insensitive") << ", class " << class_name(report.cls) << '\n';
  return report.di ? kOk : kFail;
}

int cmd_classify(const Common& c) {
  std::string text = c.expr.empty() ? read_input(c.input) : c.expr;
  Output out(c.output);
  if (looks_like_json(text)) {
    json j = json::parse(text);
    if (j.contains("pull_up")) {
      Gate g = gate_from_json(j);
      auto shorts = check_no_short(g);
      json report = {{"no_short", shorts.holds}};
      json bad = json::array();
      for (const auto& a : shorts.shorts) bad.push_back(a);
      report["shorts"] = bad;
      if (shorts.holds) report["class"] = gate_class_name(classify_gate(g));
      out.stream() << report.dump(2) << '\n';
      return shorts.holds ? kOk : kFail;
    }
    auto report = check_di(structure_from_json(j));
    out.stream() << to_json(report).dump(2) << '\n';
    return report.cls == DiClass::None ? kFail : kOk;
  }
  auto report = check_di(parse_structure(text));
  out.stream() << to_json(report).dump(2) << '\n';
  return report.cls == DiClass::None ? kFail : kOk;
}

Decomposition load_manifest(const json& m) {
  Decomposition d;
  d.target = structure_from(m.at("target"));
  for (const auto& p : m.at("parts")) {
    if (p.is_object() && p.contains("spec")) {
      d.parts.push_back(structure_from(p.at("spec")));
      d.names.push_back(p.value("name", "part" + std::to_string(d.parts.size())));
    } else {
      d.parts.push_back(structure_from(p));
      d.names.push_back("part" + std::to_string(d.parts.size()));
    }
  }
  return d;
}

int cmd_decompose(const Common& c, bool strict) {
  json m = json::parse(read_input(c.input));
  Decomposition d = load_manifest(m);
  DecompositionOptions opts;
  opts.strict_forks = strict || m.value("strict_forks", false);
  auto report = check_decomposition(d, opts);
  json j = to_json(report);
  j["parts"] = d.names;
  Output(c.output).stream() << j.dump(2) << '\n';
  if (c.verbose && !report.holds) std::cerr << "condition (" << report.first_failure << ") fails\n";
  return report.holds ? kOk : kFail;
}

int cmd_simulate(const Common& c, std::uint64_t seed, std::uint64_t horizon, const std::string& on_interference,
                 const std::string& report_path, bool shuffle) {
  Network net = Network::from_json(json::parse(read_input(c.input)));
  SimOptions opts;
  opts.seed = seed;
  opts.max_events = horizon;
  opts.halt_on_interference = on_interference == "halt";
  opts.shuffle_ties = shuffle;
  SimTrace t = simulate(net, opts);
  write_jsonl(Output(c.output).stream(), t);
  if (!report_path.empty()) Output(report_path).stream() << summary_json(t).dump(2) << '\n';
  if (c.verbose) {
    std::cerr << t.events.size() << " events, " << t.interferences.size() << " interference reports\n";
    for (const auto& r : t.interferences)
      std::cerr << "  " << interference_kind_name(r.kind) << " at " << r.location << ": " << r.symbol << " (" << r.detail
                << ")\n";
  }
  return t.interferences.empty() ? kOk : kFail;
}

int cmd_graph(const Common& c, const std::string& constraints_path) {
  std::istringstream in(read_input(c.input));
  SimTrace t = read_jsonl(in);
  CausalGraph g = build(t);
  Output out(c.output);
  if (!constraints_path.empty()) {
    json jc = json::parse(read_input(constraints_path));
    std::vector<OrderConstraint> cs;
    auto key = [](const json& k) {
      return PointKey{k.at(0).get<std::string>(), k.at(1).get<std::string>(), k.at(2).get<std::size_t>()};
    };
    for (const auto& x : jc) cs.push_back({key(x.at("before")), key(x.at("after"))});
    auto v = check_order(g, cs);
    json viol = json::array();
    for (const auto& x : v.violations)
      viol.push_back({{"constraint", x.constraint}, {"node", x.node}, {"first", x.first}, {"second", x.second},
                      {"reason", x.reason}});
    out.stream() << json{{"holds", v.holds}, {"violations", viol}}.dump(2) << '\n';
    return v.holds ? kOk : kFail;
  }
  if (c.format == "json") out.stream() << to_json(g).dump(2) << '\n';
  else out.stream() << to_dot(g);
  return kOk;
}

json decomposition_manifest(const TokenRingAlloc& a) {
  json parts = json::array();
  for (std::size_t i = 0; i < a.parts.parts.size(); ++i) {
    std::string text;
    parts.push_back({{"name", a.parts.names[i]}, {"spec", to_json(a.parts.parts[i])}});
  }
  return {{"target", to_json(a.spec)}, {"parts", parts}};
}

int cmd_primitives(const Common& c, const std::string& name, std::size_t n) {
  Output out(c.output);
  if (name.empty() || name == "list") {
    json names = json::array();
    for (auto k : all_primitive_kinds()) names.push_back(primitive_name(k));
    for (const char* s : {"and-gate-events", "or-gate-events", "q-element", "q-element-skewed", "q-element-constraints",
                          "token-ring-alloc", "token-ring", "nand-gate", "latch-gate"})
      names.push_back(s);
    out.stream() << names.dump(2) << '\n';
    return kOk;
  }
  if (name == "and-gate-events" || name == "or-gate-events") {
    auto r = name == "and-gate-events" ? and_gate_events() : or_gate_events();
    out.stream() << to_json(r).dump() << '\n';
    return kOk;
  }
  if (name == "q-element") {
    out.stream() << q_element_network().to_json().dump(2) << '\n';
    return kOk;
  }
  if (name == "q-element-skewed") {
    out.stream() << q_element_skewed().to_json().dump(2) << '\n';
    return kOk;
  }
  if (name == "q-element-constraints") {
    json cs = json::array();
    for (const auto& k : q_element_constraints(n))
      cs.push_back({{"before", {k.before.node, k.before.label, k.before.occurrence}},
                    {"after", {k.after.node, k.after.label, k.after.occurrence}}});
    out.stream() << cs.dump(2) << '\n';
    return kOk;
  }
  if (name == "token-ring-alloc") {
    json m = decomposition_manifest(token_ring_alloc());
    // Readable form: the texts of the item and of its parts.
    const AllocNames s = alloc_names();
    m["target"] = alloc_text(s);
    m["parts"] = json::array({
        {{"name", "sequencer"}, {"spec", primitive_text(PrimitiveKind::Sequencer, {s.a1, s.rq1, s.b, s.p1, s.q1})}},
        {{"name", "iwire"}, {"spec", primitive_text(PrimitiveKind::IWire, {s.q1, s.rq1})}},
        {{"name", "wire_p0"}, {"spec", primitive_text(PrimitiveKind::Wire, {s.a0, s.p0})}},
        {{"name", "wire_q0"}, {"spec", primitive_text(PrimitiveKind::Wire, {s.a0, s.q0})}},
        {{"name", "merge"}, {"spec", primitive_text(PrimitiveKind::Merge, {s.q1, s.q0, s.q})}},
    });
    out.stream() << m.dump(2) << '\n';
    return kOk;
  }
  if (name == "token-ring") {
    out.stream() << token_ring(n).to_json().dump(2) << '\n';
    return kOk;
  }
  if (name == "nand-gate" || name == "latch-gate") {
    out.stream() << to_json(name == "nand-gate" ? nand_gate() : latch_gate()).dump(2) << '\n';
    return kOk;
  }
  PrimitiveKind k = primitive_from_name(name);
  if (c.format == "json") out.stream() << to_json(make(k)).dump() << '\n';
  else out.stream() << primitive_text(k) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-theory tools for delay-insensitive circuits"};
  app.require_subcommand(1);
  Common common;
  bool bounded = false, strict = false, shuffle = false;
  std::uint64_t seed = 0, horizon = 1000;
  std::size_t n = 1;
  std::string on_interference = "halt", report_path, constraints, name;

  auto add_common = [&](CLI::App* sub, bool with_expr) {
    sub->add_option("input", common.input, "input file, '-' for standard input");
    if (with_expr) sub->add_option("-e,--expr", common.expr, "expression given on the command line");
    sub->add_option("-o,--output", common.output, "output file (default standard output)");
    sub->add_flag("-v,--verbose", common.verbose, "summary on standard error");
  };

  auto* parse_cmd = app.add_subcommand("parse", "canonical JSON or expression text of a specification");
  add_common(parse_cmd, true);
  parse_cmd->add_option("--format", common.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* di_cmd = app.add_subcommand("check-di", "delay-insensitivity rules R0, R1, R2', R3'''");
  add_common(di_cmd, true);
  di_cmd->add_flag("--bounded", bounded, "decide R2' by bounded enumeration instead of exactly");
  di_cmd->add_option("--format", common.format)->check(CLI::IsMember({"json"}));

  auto* cls_cmd = app.add_subcommand("classify", "DI class of a specification, or class of a switch-network gate");
  add_common(cls_cmd, true);
  cls_cmd->add_option("--format", common.format)->check(CLI::IsMember({"json"}));

  auto* dec_cmd = app.add_subcommand("decompose", "check a decomposition manifest");
  add_common(dec_cmd, false);
  dec_cmd->add_flag("--strict-forks", strict, "require explicit FORK parts for multi-reader symbols");
  dec_cmd->add_option("--format", common.format)->check(CLI::IsMember({"json"}));

  auto* sim_cmd = app.add_subcommand("simulate", "simulate a netlist, trace as JSON lines");
  add_common(sim_cmd, false);
  sim_cmd->add_option("--seed", seed, "random seed")->required();
  sim_cmd->add_option("--horizon", horizon, "number of delivered events");
  sim_cmd->add_option("--on-interference", on_interference, "halt or log")->check(CLI::IsMember({"halt", "log"}));
  sim_cmd->add_option("--report", report_path, "write a JSON summary to this file");
  sim_cmd->add_flag("--shuffle-ties", shuffle, "random order among simultaneous actions");

  auto* graph_cmd = app.add_subcommand("graph", "space-time graph of a simulation trace");
  add_common(graph_cmd, false);
  graph_cmd->add_option("--format", common.format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
  graph_cmd->add_option("--check-order", constraints, "JSON list of ordering constraints to verify");

  auto* prim_cmd = app.add_subcommand("primitives", "emit a built-in specification, netlist or manifest");
  prim_cmd->add_option("name", name, "built-in name; omit to list them");
  prim_cmd->add_option("-n", n, "ring size or number of cycles");
  prim_cmd->add_option("-o,--output", common.output, "output file (default standard output)");
  prim_cmd->add_option("--format", common.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*parse_cmd) return cmd_parse(common);
    if (*di_cmd) return cmd_check_di(common, bounded);
    if (*cls_cmd) return cmd_classify(common);
    if (*dec_cmd) return cmd_decompose(common, strict);
    if (*sim_cmd) return cmd_simulate(common, seed, horizon, on_interference, report_path, shuffle);
    if (*graph_cmd) return cmd_graph(common, constraints);
    if (*prim_cmd) return cmd_primitives(common, name, n);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
