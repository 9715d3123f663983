#pragma once

// Command-line front end. Every subcommand is callable in-process through
// cli::main so that tests see exactly what the binary prints.

#include <hsl/baselines.hpp>
#include <hsl/optimizer.hpp>
#include <hsl/progress.hpp>
#include <hsl/runner.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsl::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kInvalidInput = 2 };

/// Invalid user input; maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Small parsers

/// "4", "4,8,16", "0..4" or a mix such as "1,3..5".
inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw InputError(what + ": '" + s + "' is not an integer");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int lo = to_int(item.substr(0, dots)), hi = to_int(item.substr(dots + 2));
    if (hi < lo) throw InputError(what + ": empty range '" + item + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw InputError(what + ": empty list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline int parse_single_int(const std::string& text, const std::string& what) {
  const auto v = parse_int_list(text, what);
  if (v.size() != 1) throw InputError(what + " takes a single value here");
  return v.front();
}

inline OracleMode parse_oracle_mode(const std::string& s) {
  if (s == "classical") return OracleMode::UseClassical;
  if (s == "pseudo") return OracleMode::UsePseudoClassical;
  throw InputError("oracle mode must be 'classical' or 'pseudo', got '" + s + "'");
}

inline std::string mode_name(OracleMode m) { return m == OracleMode::UseClassical ? "classical" : "pseudo"; }

// ---------------------------------------------------------------------------
// Scenario files

struct ScenarioConfig {
  std::string name = "scenario";
  int n = 4;
  int l0 = 0;
  std::string schedule;
  std::optional<std::string> baseline;
  int tau_c = 0;
  int tau_q = 0;
  std::uint64_t seed = 0;
  OracleMode mode = OracleMode::UseClassical;
  AnswerSet answers = AnswerSet::Finding;
  std::string answer_rule = "index";
  json initial;    // null means the default start state
  json unitaries;  // null means identities
  std::string output;
};

namespace detail {

inline int line_at_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first `"key":` in the text, 0 when absent.
inline int line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  for (std::size_t pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted, pos + 1)) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_at_offset(text, pos);
  }
  return 0;
}

inline InputError keyed_error(const std::string& text, const std::string& key, const std::string& msg) {
  const int line = line_of_key(text, key);
  return InputError(line > 0 ? fmt::format("config line {}: {}", line, msg) : fmt::format("config: {}", msg));
}

inline Complex parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("complex entries are numbers or [re, im] pairs");
}

inline Vector parse_vector(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of [re, im] pairs");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_complex(j[i]);
  return v;
}

inline Matrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = parse_vector(j[r]);
    if (row.size() != cols) throw std::invalid_argument("matrix rows have different lengths");
    m.row(r) = row.transpose();
  }
  return m;
}

inline std::vector<int> parse_int_array(const json& j, const char* what) {
  std::vector<int> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of integers");
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw std::invalid_argument(std::string(what) + " must be an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

inline double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

inline UnitarySpec parse_unitary(const json& j, int n) {
  const std::string type = j.is_string() ? j.get<std::string>() : j.is_object() ? j.value("type", "") : "";
  if (type == "identity") return IdentityOp{};
  if (type == "diffusion" || type == "grover") {
    Diffusion d;
    if (j.is_object()) {
      d.angle = number_or(j, "angle", std::numbers::pi);
      d.support = parse_int_array(j.value("support", json()), "support");
    }
    return d;
  }
  if (!j.is_object()) throw std::invalid_argument("unitary must be a name or an object with a \"type\"");
  if (type == "rotation") {
    if (!j.contains("a") || !j.contains("b")) throw std::invalid_argument("rotation needs indices a and b");
    return PhaseRotation{j.at("a").get<int>(), j.at("b").get<int>(), number_or(j, "angle", 0.0)};
  }
  if (type == "matrix") return ExplicitMatrix{parse_matrix(j.at("data"))};
  if (type == "controlled") {
    Controlled c;
    c.controls = parse_int_array(j.value("controls", json()), "controls");
    const json op = j.value("op", json("diffusion"));
    if (op.is_string() && op.get<std::string>() == "diffusion")
      c.index_op = diffusion_matrix(n, number_or(j, "angle", std::numbers::pi),
                                    parse_int_array(j.value("support", json()), "support"));
    else
      c.index_op = parse_matrix(op);
    return c;
  }
  throw std::invalid_argument("unknown unitary type '" + type + "'");
}

inline AnswerMap parse_answer_rule(const std::string& rule) {
  if (rule == "index") return answer_index();
  if (rule == "parity") return [](const Outcome& o) { return o.index % 2; };
  if (rule.rfind("bit:", 0) == 0) {
    int q = 0;
    try {
      q = std::stoi(rule.substr(4));
    } catch (const std::exception&) {
      throw std::invalid_argument("answer rule bit:<q> needs an integer qubit");
    }
    if (q < 0) throw std::invalid_argument("answer rule qubit must be nonnegative");
    return [q](const Outcome& o) { return q < o.workspace_qubits ? o.bit(q) : 0; };
  }
  throw std::invalid_argument("answer rule must be index, parity or bit:<q>");
}

}  // namespace detail

/// Parses scenario text. Errors carry the line of the offending key.
inline ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const int line = detail::line_at_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw InputError(fmt::format("config line {}: malformed JSON ({})", line, e.what()));
  }
  if (!j.is_object()) throw InputError("config line 1: top level must be an object");

  static const std::vector<std::string> known = {"name",    "n",      "l0",          "schedule", "baseline",
                                                 "tau_c",   "tau_q",  "seed",        "oracle_mode",
                                                 "answers", "answer", "initial",     "unitaries", "output"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw detail::keyed_error(text, key, "unknown key '" + key + "'");

  ScenarioConfig c;
  auto field = [&](const char* key, auto&& read) {
    if (!j.contains(key)) return;
    try {
      read(j.at(key));
    } catch (const std::exception& e) {
      throw detail::keyed_error(text, key, std::string(key) + ": " + e.what());
    }
  };
  auto integer = [](const json& v) {
    if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
    return v.get<long long>();
  };
  auto string = [](const json& v) {
    if (!v.is_string()) throw std::invalid_argument("expected a string");
    return v.get<std::string>();
  };
  field("name", [&](const json& v) { c.name = string(v); });
  field("n", [&](const json& v) { c.n = static_cast<int>(integer(v)); });
  field("l0", [&](const json& v) { c.l0 = static_cast<int>(integer(v)); });
  field("schedule", [&](const json& v) { c.schedule = string(v); });
  field("baseline", [&](const json& v) { c.baseline = string(v); });
  field("tau_c", [&](const json& v) { c.tau_c = static_cast<int>(integer(v)); });
  field("tau_q", [&](const json& v) { c.tau_q = static_cast<int>(integer(v)); });
  field("seed", [&](const json& v) {
    const auto s = integer(v);
    if (s < 0) throw std::invalid_argument("seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  });
  field("oracle_mode", [&](const json& v) {
    try {
      c.mode = parse_oracle_mode(string(v));
    } catch (const InputError& e) {
      throw std::invalid_argument(e.what());
    }
  });
  field("answers", [&](const json& v) {
    const auto s = string(v);
    if (s == "finding") c.answers = AnswerSet::Finding;
    else if (s == "detection") c.answers = AnswerSet::Detection;
    else throw std::invalid_argument("answers must be 'finding' or 'detection'");
  });
  field("answer", [&](const json& v) {
    c.answer_rule = string(v);
    detail::parse_answer_rule(c.answer_rule);
  });
  field("initial", [&](const json& v) { c.initial = v; });
  field("unitaries", [&](const json& v) {
    if (!v.is_array()) throw std::invalid_argument("expected an array");
    c.unitaries = v;
  });
  field("output", [&](const json& v) { c.output = string(v); });
  field("schedule", [&](const json& v) { Schedule::parse(string(v)); });
  return c;
}

/// Builds the algorithm a config describes. `text` (the config source, may
/// be empty) anchors error messages.
inline HybridAlgorithm build_algorithm(const ScenarioConfig& c, const std::string& text = "") {
  if (c.baseline) {
    try {
      const auto kind = BaselineKind::from_name(*c.baseline, c.tau_c, c.tau_q);
      auto alg = hsl::build(kind, c.n, c.seed);
      if (c.answers == AnswerSet::Detection) throw std::invalid_argument("baselines solve the finding version");
      return alg;
    } catch (const std::exception& e) {
      throw detail::keyed_error(text, "baseline", e.what());
    }
  }
  HybridAlgorithm alg;
  alg.n = c.n;
  alg.l0 = c.l0;
  alg.name = c.name;
  alg.answers = c.answers;
  try {
    RegisterShape{c.n, c.l0}.validate();
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, "n", e.what());
  }
  const RegisterShape start{c.n, c.l0};
  try {
    alg.schedule = Schedule::parse(c.schedule);
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, "schedule", e.what());
  }

  try {
    if (c.initial.is_null() || c.initial.is_string()) {
      const std::string kind = c.initial.is_null() ? (c.l0 == 0 ? "uniform" : "uniform_minus") : c.initial.get<std::string>();
      Vector ws = Vector::Zero(static_cast<Eigen::Index>(start.workspace_dim()));
      ws[0] = 1.0;
      if (kind == "uniform_minus") {
        if (c.l0 < 1) throw std::invalid_argument("uniform_minus needs l0 >= 1");
        ws = Vector::Zero(ws.size());
        ws[0] = 1.0 / std::sqrt(2.0);
        ws[static_cast<Eigen::Index>(start.qubit_mask(0))] = -1.0 / std::sqrt(2.0);
      }
      if (kind == "uniform" || kind == "uniform_minus") {
        alg.initial = StateVector::product(Vector::Constant(c.n, 1.0 / std::sqrt(static_cast<double>(c.n))), ws);
      } else if (kind.rfind("basis:", 0) == 0) {
        alg.initial = StateVector::basis(start, std::stoi(kind.substr(6)), 0);
      } else {
        throw std::invalid_argument("initial must be uniform, uniform_minus, basis:<i> or an amplitude array");
      }
    } else {
      alg.initial = StateVector(start, detail::parse_vector(c.initial));
    }
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, "initial", e.what());
  }

  try {
    if (c.unitaries.is_null()) {
      alg.unitaries.assign(alg.schedule.tau(), IdentityOp{});
    } else {
      for (std::size_t i = 0; i < c.unitaries.size(); ++i) {
        try {
          alg.unitaries.push_back(detail::parse_unitary(c.unitaries[i], c.n));
        } catch (const std::exception& e) {
          throw std::invalid_argument(fmt::format("entry {}: {}", i, e.what()));
        }
      }
    }
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, "unitaries", e.what());
  }

  try {
    alg.answer_map = detail::parse_answer_rule(c.answer_rule);
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, "answer", e.what());
  }
  if (c.answers == AnswerSet::Detection && c.answer_rule == "index")
    alg.answer_map = [](const Outcome& o) { return o.index % 2; };

  try {
    alg.validate();
  } catch (const std::exception& e) {
    throw detail::keyed_error(text, c.unitaries.is_null() ? "schedule" : "unitaries", e.what());
  }
  return alg;
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(const BoundCheck& c) {
  return json{{"name", c.name},   {"step", c.step}, {"achieved", c.achieved}, {"bound", c.bound},
              {"kind", c.upper ? "upper" : "lower"}, {"pass", c.pass}, {"vacuous", c.vacuous}};
}

inline json to_json(const TheoremBounds& b) {
  return json{{"query_cost", b.query_cost},
              {"theorem1_rhs", b.theorem1_rhs},
              {"theorem3_rhs", b.theorem3_rhs},
              {"claim1_H", b.claim1_H},
              {"theorem2", b.theorem2},
              {"theorem2_clamped", b.theorem2_clamped},
              {"theorem2_vacuous", b.theorem2_vacuous},
              {"lemma5_b", b.lemma5_b},
              {"lemma5_quantum_sum", b.lemma5_quantum_sum},
              {"claim6", b.claim6},
              {"a_final", b.a_final}};
}

inline json to_json(const ProgressTrace& p) {
  json steps = json::array();
  for (std::size_t t = 0; t < p.steps.size(); ++t) {
    const auto& m = p.steps[t];
    json s{{"t", t}, {"H", m.H}, {"A", m.A}, {"B", m.B}, {"a", p.a[t]}, {"b", p.b[t]}};
    s["w"] = p.witnesses[t] ? json(*p.witnesses[t]) : json();
    s["H_k"] = m.H_k;
    s["A_k"] = m.A_k;
    s["B_k"] = m.B_k;
    s["alpha_k"] = m.alpha_k;
    steps.push_back(std::move(s));
  }
  return json{{"recursion_consistent", p.recursion_consistent}, {"steps", std::move(steps)}};
}

inline json to_json(const AlgorithmReport& r) {
  json checks = json::array();
  for (const auto& c : r.report.checks) checks.push_back(to_json(c));
  json j{{"name", r.name},
         {"schedule", r.schedule},
         {"n", r.n},
         {"tau_c", r.tau_c},
         {"tau_q", r.tau_q},
         {"seed", r.seed},
         {"answers", r.answers == AnswerSet::Finding ? "finding" : "detection"},
         {"success_avg", r.success_avg},
         {"success_worst", r.success_worst},
         {"success_per_input", r.success_per_input}};
  j["success_avg_classical"] = r.success_avg_classical ? json(*r.success_avg_classical) : json();
  j["bounds"] = to_json(r.bounds);
  j["progress"] = to_json(r.progress);
  j["all_claims_pass"] = r.report.all_pass();
  j["checks"] = std::move(checks);
  return j;
}

inline json to_json(const OptResult& r) {
  return json{{"best_params", r.best_params}, {"best_success", r.best_success}, {"bound", r.bound},
              {"ratio", r.ratio},             {"evaluations", r.evaluations},    {"best_restart", r.best_restart}};
}

inline constexpr const char* kReportCsvHeader =
    "n,tau_c,tau_q,seed,success_avg,bound_thm_B,H_final,A_final,B_final,a_final,b_final,all_claims_pass";

inline std::string csv_number(double v) { return fmt::format("{:.12g}", v); }

/// One row in kReportCsvHeader order.
inline std::string csv_row(const AlgorithmReport& r, double success) {
  const auto& fin = r.progress.final_step();
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", r.n, r.tau_c, r.tau_q, r.seed, csv_number(success),
                     csv_number(r.bounds.theorem2), csv_number(fin.H), csv_number(fin.A), csv_number(fin.B),
                     csv_number(r.progress.a.back()), csv_number(r.progress.b.back()),
                     r.report.all_pass() ? "true" : "false");
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw InputError("failed writing '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Commands

struct CommonOptions {
  std::string config;
  std::string n;
  std::string tau_c;
  std::string tau_q;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string baseline;
  std::string oracle_mode;
  std::string out;
  std::string format = "csv";
};

/// Executes a scenario: success under the configured oracle mode plus the
/// full progress verification. Writes STEM.json and STEM.csv when an output
/// stem is given.
inline int cmd_run(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig c;
  std::string text;
  if (!o.config.empty()) {
    text = read_file(o.config);
    c = parse_config(text);
  }
  if (!o.n.empty()) c.n = parse_single_int(o.n, "--n");
  if (!o.tau_c.empty()) c.tau_c = parse_single_int(o.tau_c, "--tau-c");
  if (!o.tau_q.empty()) c.tau_q = parse_single_int(o.tau_q, "--tau-q");
  if (!o.baseline.empty()) c.baseline = o.baseline;
  if (!o.oracle_mode.empty()) c.mode = parse_oracle_mode(o.oracle_mode);
  if (o.seed != 0) c.seed = o.seed;
  if (!o.out.empty()) c.output = o.out;

  const HybridAlgorithm alg = build_algorithm(c, text);
  const AlgorithmReport report = verify_algorithm(alg, c.seed);

  std::vector<double> per_input;
  std::vector<double> pruned;
  const int inputs = alg.answers == AnswerSet::Finding ? alg.n : alg.n + 1;
  auto runs = parallel_map(static_cast<std::size_t>(inputs), [&](std::size_t i) {
    const int v = static_cast<int>(i);
    const auto x = alg.answers == AnswerSet::Finding ? InputString::marked(alg.n, v) : InputString::kappa(alg.n, v);
    const auto r = run(alg, x, c.mode);
    const int want = alg.answers == AnswerSet::Finding ? v : (v == 0 ? 0 : 1);
    return std::pair{r.probability(want), r.pruned_mass};
  });
  for (const auto& [p, m] : runs) {
    per_input.push_back(p);
    pruned.push_back(m);
  }
  double success = 0.0;
  if (alg.answers == AnswerSet::Finding) {
    for (double p : per_input) success += p;
    success /= alg.n;
  } else {
    success = *std::min_element(per_input.begin(), per_input.end());
  }

  json j = to_json(report);
  j["oracle_mode"] = mode_name(c.mode);
  j["success_mode_avg"] = success;
  j["success_mode_per_input"] = per_input;
  j["pruned_mass_per_input"] = pruned;
  const std::string json_text = j.dump(2) + "\n";
  const std::string csv_text = std::string(kReportCsvHeader) + "\n" + csv_row(report, success) + "\n";

  if (!c.output.empty()) {
    write_file(c.output + ".json", json_text);
    write_file(c.output + ".csv", csv_text);
  }
  out << (o.format == "json" ? json_text : csv_text);
  if (!report.report.all_pass()) {
    for (const auto& chk : report.report.checks)
      if (!chk.pass) err << fmt::format("FAIL {} step {}: {} vs {}\n", chk.name, chk.step, chk.achieved, chk.bound);
    return kVerificationFailed;
  }
  return kOk;
}

struct VerifyConfig {
  std::vector<int> n_list{4, 8};
  int tau_limit = 5;
  int tau_c_limit = -1;  // defaults to tau_limit
  int trials = 100;
  std::uint64_t seed = 0;
  bool broken_oracle = false;
};

/// Random algorithms for the verify suite: every fourth trial solves the
/// detection version.
inline HybridAlgorithm verify_instance(const VerifyConfig& v, int n, int trial) {
  RandomAlgorithmOptions ro;
  ro.n = n;
  ro.max_tau = v.tau_limit;
  ro.max_classical = v.tau_c_limit < 0 ? v.tau_limit : v.tau_c_limit;
  ro.l0 = 1;
  ro.answers = trial % 4 == 3 ? AnswerSet::Detection : AnswerSet::Finding;
  return random_algorithm(ro, v.seed + static_cast<std::uint64_t>(trial));
}

inline std::vector<AlgorithmReport> verify_suite(const VerifyConfig& v) {
  if (v.trials < 1) throw InputError("--trials must be at least 1");
  if (v.tau_limit < 0) throw InputError("--tau must be nonnegative");
  for (int n : v.n_list)
    if (n < 2) throw InputError("--n values must be at least 2");
  const std::size_t total = v.n_list.size() * static_cast<std::size_t>(v.trials);
  return parallel_map(total, [&](std::size_t i) {
    const int n = v.n_list[i / v.trials];
    const int trial = static_cast<int>(i % v.trials);
    VerifyOptions vo;
    vo.broken_pseudo_oracle = v.broken_oracle;
    return verify_algorithm(verify_instance(v, n, trial), v.seed + static_cast<std::uint64_t>(trial), vo);
  });
}

inline int cmd_verify(const VerifyConfig& v, const std::string& format, const std::string& out_path, std::ostream& out,
                      std::ostream& err) {
  const auto reports = verify_suite(v);
  std::string text;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    text = arr.dump(2) + "\n";
  } else {
    text = std::string(kReportCsvHeader) + "\n";
    for (const auto& r : reports) text += csv_row(r, r.success_avg) + "\n";
  }
  if (out_path.empty()) out << text;
  else write_file(out_path, text);

  std::size_t checks = 0, failures = 0;
  for (const auto& r : reports) {
    checks += r.report.checks.size();
    failures += r.report.failures();
    for (const auto& c : r.report.checks)
      if (!c.pass)
        err << fmt::format("FAIL {} n={} seed={} {} step {}: achieved {:.12g} bound {:.12g}\n", r.name, r.n, r.seed,
                           c.name, c.step, c.achieved, c.bound);
  }
  err << fmt::format("verify: {} algorithms, {} checks, {} failures\n", reports.size(), checks, failures);
  return failures == 0 ? kOk : kVerificationFailed;
}

struct SweepRow {
  int n, tau_c, tau_q;
  double success, closed_form, bound, ratio;
};

inline std::vector<SweepRow> sweep_rows(const std::vector<int>& ns, const std::vector<int>& tcs,
                                        const std::vector<int>& tqs, const std::string& baseline, std::uint64_t seed,
                                        OracleMode mode) {
  std::vector<BaselineKind> kinds;
  std::vector<int> sizes;
  for (int n : ns)
    for (int tc : tcs)
      for (int tq : tqs) {
        try {
          const auto kind = BaselineKind::from_name(baseline, tc, tq);
          kind.validate(n);
          kinds.push_back(kind);
          sizes.push_back(n);
        } catch (const std::exception& e) {
          throw InputError(fmt::format("grid point n={} tau_c={} tau_q={}: {}", n, tc, tq, e.what()));
        }
      }
  if (kinds.empty()) throw InputError("sweep grid is empty");
  auto rows = parallel_map(kinds.size(), [&](std::size_t i) {
    const int n = sizes[i];
    const auto& k = kinds[i];
    const auto alg = hsl::build(k, n, seed);
    const double s = success_finding(alg, mode);
    const int tc = alg.schedule.tau_c(), tq = alg.schedule.tau_q();
    const double bound = theorem_bounds(n, tc, tq, 0.0).theorem2;
    return SweepRow{n, tc, tq, s, closed_form(k, n), bound, s / std::min(1.0, bound)};
  });
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.n, a.tau_c, a.tau_q) < std::tie(b.n, b.tau_c, b.tau_q);
  });
  return rows;
}

inline int cmd_sweep(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  if (o.n.empty()) throw InputError("sweep needs --n");
  const auto ns = parse_int_list(o.n, "--n");
  const auto tcs = parse_int_list(o.tau_c.empty() ? "0" : o.tau_c, "--tau-c");
  const auto tqs = parse_int_list(o.tau_q.empty() ? "0" : o.tau_q, "--tau-q");
  const std::string baseline = o.baseline.empty() ? "hybrid" : o.baseline;
  const OracleMode mode = o.oracle_mode.empty() ? OracleMode::UseClassical : parse_oracle_mode(o.oracle_mode);
  const auto rows = sweep_rows(ns, tcs, tqs, baseline, o.seed, mode);

  std::string text;
  bool violated = false;
  if (o.format == "json") {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back(json{{"n", r.n}, {"tau_c", r.tau_c}, {"tau_q", r.tau_q}, {"baseline", baseline},
                         {"success_avg", r.success}, {"closed_form", r.closed_form}, {"bound_thm_B", r.bound},
                         {"ratio", r.ratio}});
    text = arr.dump(2) + "\n";
  } else {
    text = "n,tau_c,tau_q,baseline,success_avg,closed_form,bound_thm_B,ratio\n";
    for (const auto& r : rows)
      text += fmt::format("{},{},{},{},{},{},{},{}\n", r.n, r.tau_c, r.tau_q, baseline, csv_number(r.success),
                          csv_number(r.closed_form), csv_number(r.bound), csv_number(r.ratio));
  }
  for (const auto& r : rows) {
    if (r.success > r.bound + kCheckSlack) {
      violated = true;
      err << fmt::format("FAIL n={} tau_c={} tau_q={}: success {:.12g} exceeds bound {:.12g}\n", r.n, r.tau_c, r.tau_q,
                         r.success, r.bound);
    }
  }
  if (o.out.empty()) out << text;
  else write_file(o.out, text);
  return violated ? kVerificationFailed : kOk;
}

inline int cmd_optimize(const CommonOptions& o, const std::string& schedule_text, int budget, std::ostream& out,
                        std::ostream& err) {
  ParamAlgorithm pa;
  pa.n = o.n.empty() ? 4 : parse_single_int(o.n, "--n");
  pa.mode = o.oracle_mode.empty() ? OracleMode::UseClassical : parse_oracle_mode(o.oracle_mode);
  try {
    if (!schedule_text.empty()) {
      pa.schedule = Schedule::parse(schedule_text);
    } else {
      const int tc = o.tau_c.empty() ? 0 : parse_single_int(o.tau_c, "--tau-c");
      const int tq = o.tau_q.empty() ? 1 : parse_single_int(o.tau_q, "--tau-q");
      if (tc < 0 || tq < 0) throw InputError("query counts must be nonnegative");
      pa.schedule = Schedule::parse(std::string(tc, 'C') + [&] {
        std::string s;
        for (int i = 0; i < tq; ++i) s += "Q:0";
        return s;
      }());
    }
    pa.validate();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  if (budget < 1) throw InputError("--budget must be at least 1");
  OptimizerOptions opt;
  opt.seed = o.seed;
  const auto res = optimize(pa, budget, opt);

  json j{{"n", pa.n}, {"schedule", pa.schedule.str()}, {"oracle_mode", mode_name(pa.mode)}};
  j.update(to_json(res));
  if (pa.schedule.tau_c() == 0) j["grover_value"] = grover_success(pa.n, pa.schedule.tau_q());
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) out << text;
  else write_file(o.out, text);
  if (res.best_success > res.bound + kCheckSlack) {
    err << fmt::format("FAIL optimizer success {:.12g} exceeds bound {:.12g}\n", res.best_success, res.bound);
    return kVerificationFailed;
  }
  return kOk;
}

inline int cmd_report(const CommonOptions& o, double epsilon, std::ostream& out) {
  const int n = o.n.empty() ? 16 : parse_single_int(o.n, "--n");
  const int tc = o.tau_c.empty() ? 0 : parse_single_int(o.tau_c, "--tau-c");
  const int tq = o.tau_q.empty() ? 0 : parse_single_int(o.tau_q, "--tau-q");
  TheoremBounds b;
  try {
    b = theorem_bounds(n, tc, tq, epsilon);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  json j{{"n", n}, {"tau_c", tc}, {"tau_q", tq}, {"epsilon", epsilon}, {"bounds", to_json(b)}};
  json baselines = json::object();
  for (const std::string name : {"grover", "pc-grover", "classical", "hybrid"}) {
    try {
      const auto kind = BaselineKind::from_name(name, tc, tq);
      baselines[name] = closed_form(kind, n);
    } catch (const std::exception&) {
    }
  }
  j["baselines"] = std::move(baselines);
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty()) out << text;
  else write_file(o.out, text);
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Hybrid search lab: simulate hybrid classical/quantum search and check query lower bounds"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_common = [&](CLI::App* sub, bool lists) {
    sub->add_option("--n", o.n, lists ? "Index register size(s), e.g. 4,8 or 4..8" : "Index register size");
    sub->add_option("--tau-c", o.tau_c, lists ? "Classical query counts" : "Classical query count");
    sub->add_option("--tau-q", o.tau_q, lists ? "Quantum query counts" : "Quantum query count");
    sub->add_option("--seed", o.seed, "Seed");
    sub->add_option("--out", o.out, "Output path");
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run_cmd = app.add_subcommand("run", "Execute a scenario and verify its progress measures");
  add_common(run_cmd, false);
  run_cmd->add_option("--config", o.config, "Scenario JSON file");
  run_cmd->add_option("--baseline", o.baseline, "Reference algorithm")
      ->check(CLI::IsMember({"grover", "pc-grover", "classical", "hybrid"}));
  run_cmd->add_option("--oracle-mode", o.oracle_mode, "How C steps run")->check(CLI::IsMember({"classical", "pseudo"}));

  VerifyConfig vc;
  std::string verify_n = "4,8";
  bool broken = false;
  auto* verify_cmd = app.add_subcommand("verify", "Check every per-step claim and theorem on random algorithms");
  verify_cmd->add_option("--n", verify_n, "Index register sizes");
  verify_cmd->add_option("--tau", vc.tau_limit, "Maximum number of oracle calls");
  verify_cmd->add_option("--tau-c", o.tau_c, "Maximum number of classical calls");
  verify_cmd->add_option("--trials", vc.trials, "Algorithms per n");
  verify_cmd->add_option("--seed", vc.seed, "Base seed");
  verify_cmd->add_option("--out", o.out, "Output path");
  verify_cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  verify_cmd->add_flag("--inject-broken-oracle", broken)->group("");

  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate a baseline against the success bound over a grid");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--baseline", o.baseline, "Reference algorithm")
      ->check(CLI::IsMember({"grover", "pc-grover", "classical", "hybrid"}));
  sweep_cmd->add_option("--oracle-mode", o.oracle_mode, "How C steps run")->check(CLI::IsMember({"classical", "pseudo"}));

  std::string schedule_text;
  int budget = 2000;
  auto* opt_cmd = app.add_subcommand("optimize", "Search diffusion angles for a fixed schedule");
  add_common(opt_cmd, false);
  opt_cmd->add_option("--schedule", schedule_text, "Schedule such as CQ:0Q:0 (overrides --tau-c/--tau-q)");
  opt_cmd->add_option("--budget", budget, "Objective evaluations");
  opt_cmd->add_option("--oracle-mode", o.oracle_mode, "How C steps run")->check(CLI::IsMember({"classical", "pseudo"}));

  double epsilon = 0.0;
  auto* report_cmd = app.add_subcommand("report", "Print the closed-form bounds for given query counts");
  add_common(report_cmd, false);
  report_cmd->add_option("--epsilon", epsilon, "Error probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*run_cmd) return cmd_run(o, out, err);
    if (*verify_cmd) {
      vc.n_list = parse_int_list(verify_n, "--n");
      if (!o.tau_c.empty()) vc.tau_c_limit = parse_single_int(o.tau_c, "--tau-c");
      vc.broken_oracle = broken;
      return cmd_verify(vc, o.format, o.out, out, err);
    }
    if (*sweep_cmd) return cmd_sweep(o, out, err);
    if (*opt_cmd) return cmd_optimize(o, schedule_text, budget, out, err);
    if (*report_cmd) return cmd_report(o, epsilon, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace hsl::cli
