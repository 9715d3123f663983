// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <hsl/cli.hpp>
#include <hsl/hsl.hpp>

#include <support/density_reference.hpp>

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hsl;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Executed {
  std::string label;
  int n, tau_c, tau_q;
  double success;
};

// Every algorithm run by criteria 2-6 and every optimizer result.
std::vector<Executed> g_executed;

void record(std::string label, int n, int tc, int tq, double success) {
  g_executed.push_back({std::move(label), n, tc, tq, success});
}

double theorem2(int n, int tc, int tq) { return theorem_bounds(n, tc, tq, 0.0).theorem2; }

Outcome oracle_worked_example() {
  const InputString x = InputString::parse("00100000");
  const Complex a2{0.3, 0.4}, a4{-0.5, 0.1};
  const Complex a5{0.0, std::sqrt(1.0 - std::norm(a2) - std::norm(a4))};
  Vector v = Vector::Zero(8);
  v[2] = a2;
  v[4] = a4;
  v[5] = a5;
  const StateVector psi({8, 0}, v);
  double err = 0.0;
  auto diff = [&](const Vector& got, const Vector& want) { err = std::max(err, (got - want).cwiseAbs().maxCoeff()); };

  // Classical: three branches, one per index, carrying x_i.
  const auto c = apply_classical(x, BranchEnsemble::pure(psi));
  bool shape_ok = c.size() == 3;
  const int idx[] = {2, 4, 5}, bit[] = {1, 0, 0};
  const Complex amp[] = {a2, a4, a5};
  for (std::size_t b = 0; b < 3 && shape_ok; ++b) {
    const auto& br = c.branches()[b];
    err = std::max(err, std::abs(br.weight - std::norm(amp[b])));
    Vector want = Vector::Zero(16);
    want[2 * idx[b] + bit[b]] = amp[b] / std::abs(amp[b]);
    diff(br.state.amplitudes(), want);
  }

  // Pseudo-classical: outcome 0 keeps indices 4 and 5, outcome 1 pins index 2.
  const auto p = apply_pseudo_classical(x, BranchEnsemble::pure(psi));
  shape_ok = shape_ok && p.size() == 2;
  if (p.size() == 2) {
    const double p0 = std::norm(a4) + std::norm(a5);
    err = std::max({err, std::abs(p.branches()[0].weight - p0), std::abs(p.branches()[1].weight - std::norm(a2))});
    Vector w0 = Vector::Zero(16), w1 = Vector::Zero(16);
    w0[8] = a4 / std::sqrt(p0);
    w0[10] = a5 / std::sqrt(p0);
    w1[5] = a2 / std::abs(a2);
    diff(p.branches()[0].state.amplitudes(), w0);
    diff(p.branches()[1].state.amplitudes(), w1);
  }

  // Quantum: coherent, the marked index flips its target.
  const auto in = append_qubit(psi, 0);
  Vector wq = Vector::Zero(16);
  wq[5] = a2;
  wq[8] = a4;
  wq[10] = a5;
  diff(apply_quantum(x, in.shape(), in.amplitudes(), 0), wq);

  return {shape_ok && err <= 1e-12, fmt::format("max deviation {:.3g}", err)};
}

Outcome grover_exactness() {
  double worst = 0.0;
  for (int n : {4, 16, 64})
    for (int tq = 0; tq <= 5; ++tq) {
      const auto alg = build(BaselineKind::grover(tq), n);
      const double s = success_finding(alg, OracleMode::UseClassical);
      const double want = std::pow(std::sin((1 + 2 * tq) * std::asin(1.0 / std::sqrt(static_cast<double>(n)))), 2);
      worst = std::max(worst, std::abs(s - want));
      record(fmt::format("grover n={} tau_q={}", n, tq), n, 0, tq, s);
    }
  return {worst <= 1e-9, fmt::format("max |sim - sin^2((2tau+1)asin(1/sqrt n))| = {:.3g}", worst)};
}

Outcome pseudo_classical_grover() {
  double worst_quoted = 0.0, worst_exact = 0.0;
  for (int n : {4, 16})
    for (int tau = 1; tau <= 6; ++tau) {
      const auto alg = build(BaselineKind::pc_grover(tau), n);
      const double s = success_finding(alg, OracleMode::UseClassical);
      worst_quoted = std::max(worst_quoted, std::abs(s - pc_grover_quoted_formula(n, tau)));
      worst_exact = std::max(worst_exact, std::abs(s - pc_grover_success(n, tau)));
      record(fmt::format("pc-grover n={} tau={}", n, tau), n, tau, 0, s);
    }
  // Best ratio to (τ+1)/n at n = 256 over every τ, closed form.
  double best_ratio = 0.0, best_exact = 0.0;
  int best_tau = 0;
  for (int tau = 1; tau <= 256; ++tau) {
    const double r = pc_grover_quoted_formula(256, tau) / ((tau + 1.0) / 256.0);
    best_exact = std::max(best_exact, pc_grover_success(256, tau) / ((tau + 1.0) / 256.0));
    if (r > best_ratio) {
      best_ratio = r;
      best_tau = tau;
    }
  }
  const bool pass = worst_quoted <= 1e-9 && std::abs(best_ratio - 4.0) <= 0.4;
  return {pass, fmt::format("max |sim - quoted form| = {:.3g} (exact form {:.3g}); n=256 best ratio {:.4f} at "
                            "tau={} (ratio at tau=1: {:.4f}; exact form best {:.4f})",
                            worst_quoted, worst_exact, best_ratio, best_tau,
                            pc_grover_quoted_formula(256, 1) / (2.0 / 256.0), best_exact)};
}

Outcome classical_guessing() {
  double worst = 0.0;
  std::string where;
  for (int n : {4, 8, 16})
    for (int tc = 0; tc <= 4; ++tc) {
      const auto alg = build(BaselineKind::classical(tc), n, 1);
      const double s = success_finding(alg, OracleMode::UseClassical);
      const double dev = std::abs(s - (tc + 1.0) / n);
      if (dev > 1e-12) where += fmt::format(" n={} tau_c={}: {} vs {};", n, tc, s, (tc + 1.0) / n);
      worst = std::max(worst, dev);
      record(fmt::format("classical n={} tau_c={}", n, tc), n, tc, 0, s);
    }
  return {worst <= 1e-12, fmt::format("max |sim - (tau_c+1)/n| = {:.3g}{}", worst, where)};
}

Outcome single_grover_step() {
  double worst = 0.0;
  for (int n : {4, 16, 64}) {
    HybridAlgorithm alg;
    alg.n = n;
    alg.l0 = 1;
    Vector minus(2);
    minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    alg.initial = StateVector::product(Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))), minus);
    alg.schedule = Schedule::parse("Q:0");
    alg.unitaries = {Diffusion{}};
    const auto h = progress_H(dominant_components(alg));
    worst = std::max(worst, std::abs(h[1] - 4.0 / n));
    record(fmt::format("grover step n={}", n), n, 0, 1, success_finding(alg, OracleMode::UseClassical));
  }
  return {worst <= 1e-12, fmt::format("max |H1 - 4/n| = {:.3g}", worst)};
}

Outcome claim_suite() {
  RandomAlgorithmOptions opt;
  opt.n = 8;
  opt.max_tau = 6;
  std::size_t checks = 0, failures = 0;
  std::string first;
  const auto reports = parallel_map(200, [&](std::size_t i) {
    return verify_algorithm(random_algorithm(opt, 1000 + i), 1000 + i);
  });
  for (const auto& r : reports) {
    checks += r.report.checks.size();
    failures += r.report.failures();
    for (const auto& c : r.report.checks)
      if (!c.pass && first.empty()) first = fmt::format("; first: seed {} {} step {}", r.seed, c.name, c.step);
    record(fmt::format("random seed={}", r.seed), r.n, r.tau_c, r.tau_q, r.success_avg);
  }
  return {failures == 0, fmt::format("200 algorithms, {} checks, {} violations{}", checks, failures, first)};
}

Outcome ensemble_vs_density() {
  RandomAlgorithmOptions opt;
  opt.n = 4;
  opt.max_tau = 4;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto alg = random_algorithm(opt, 7000 + seed);
    for (auto mode : {OracleMode::UseClassical, OracleMode::UsePseudoClassical})
      for (int k = 0; k < 4; ++k) {
        const auto x = InputString::marked(4, k);
        const auto r = run(alg, x, mode, 0.0);
        const auto ref = hsl_test::simulate(alg, x, mode);
        worst = std::max(worst, (ensemble_density(r.final_ensemble).matrix() - ref.rho).cwiseAbs().maxCoeff());
      }
  }
  return {worst <= 1e-10, fmt::format("50 algorithms x 2 modes x 4 inputs, max entry deviation {:.3g}", worst)};
}

Outcome optimizer_sanity() {
  double worst = 0.0;
  std::string where;
  for (int n : {4, 16})
    for (int tq = 1; tq <= 2; ++tq) {
      ParamAlgorithm pa;
      pa.n = n;
      std::string s;
      for (int i = 0; i < tq; ++i) s += "Q:0";
      pa.schedule = Schedule::parse(s);
      const auto r = optimize(pa, 2000);
      const double zalka = grover_success(n, tq);
      const double dev = std::abs(r.best_success - zalka);
      worst = std::max(worst, dev);
      where += fmt::format(" n={} tau_q={}: {:.9f} vs {:.9f} ({} evals);", n, tq, r.best_success, zalka, r.evaluations);
      record(fmt::format("optimizer n={} {}", n, s), n, 0, tq, r.best_success);
      if (r.evaluations > 2000) return {false, "budget exceeded"};
    }
  // Mixed schedules feed the live success-bound check as well.
  for (const char* s : {"CQ:0", "PQ:0Q:0", "CCQ:0"}) {
    ParamAlgorithm pa;
    pa.n = 16;
    pa.schedule = Schedule::parse(s);
    pa.mode = OracleMode::UsePseudoClassical;
    const auto r = optimize(pa, 2000);
    record(fmt::format("optimizer n=16 {}", s), 16, pa.schedule.tau_c(), pa.schedule.tau_q(), r.best_success);
  }
  return {worst <= 1e-6, fmt::format("max deviation {:.3g};{}", worst, where)};
}

Outcome theorem2_live() {
  std::size_t violations = 0;
  double tightest = -1.0;
  std::string worst_label, first;
  for (const auto& e : g_executed) {
    const double b = theorem2(e.n, e.tau_c, e.tau_q);
    if (e.success > b + 1e-9) {
      ++violations;
      if (first.empty()) first = fmt::format("; first violation: {} {} > {}", e.label, e.success, b);
    }
    if (e.success / std::min(1.0, b) > tightest) {
      tightest = e.success / std::min(1.0, b);
      worst_label = e.label;
    }
  }
  return {violations == 0 && !g_executed.empty(),
          fmt::format("{} results, {} violations, highest success/min(1,bound) {:.6f} ({}){}", g_executed.size(),
                      violations, tightest, worst_label, first)};
}

Outcome determinism() {
  cli::VerifyConfig v;
  v.seed = 17;
  std::string texts[4];
  for (int rep = 0; rep < 2; ++rep)
    for (int f = 0; f < 2; ++f) {
      std::ostringstream out, err;
      cli::cmd_verify(v, f == 0 ? "csv" : "json", "", out, err);
      texts[rep * 2 + f] = out.str() + err.str();
    }
  const bool same = texts[0] == texts[2] && texts[1] == texts[3];
  return {same && !texts[0].empty(), fmt::format("csv {} bytes, json {} bytes, identical: {}", texts[0].size(),
                                                 texts[1].size(), same ? "yes" : "no")};
}

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 when unconstrained
  std::function<Outcome()> body;
  Outcome result;
  double seconds = 0.0;
};

}  // namespace

int main() {
  std::vector<Criterion> cs = {
      {1, "oracle semantics worked example", 1.0, oracle_worked_example, {}},
      {2, "Grover exactness", 10.0, grover_exactness, {}},
      {3, "pseudo-classical Grover closed form", 10.0, pseudo_classical_grover, {}},
      {4, "classical guessing", 0.0, classical_guessing, {}},
      {5, "single Grover step H = 4/n", 0.0, single_grover_step, {}},
      {6, "per-step claim suite", 120.0, claim_suite, {}},
      {8, "ensemble vs density-matrix simulator", 60.0, ensemble_vs_density, {}},
      {9, "optimizer recovers Zalka value", 120.0, optimizer_sanity, {}},
      {7, "success bound on every executed result", 0.0, theorem2_live, {}},
      {10, "verify determinism", 0.0, determinism, {}},
  };
  for (auto& c : cs) {
    const auto start = std::chrono::steady_clock::now();
    try {
      c.result = c.body();
    } catch (const std::exception& e) {
      c.result = {false, std::string("exception: ") + e.what()};
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && c.seconds >= c.time_limit) {
      c.result.pass = false;
      c.result.detail += fmt::format("; exceeded {:.0f} s limit", c.time_limit);
    }
  }
  std::sort(cs.begin(), cs.end(), [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failed = 0;
  for (const auto& c : cs) {
    failed += c.result.pass ? 0 : 1;
    fmt::print("{} [{:2}] {} ({:.2f} s): {}\n", c.result.pass ? "PASS" : "FAIL", c.id, c.name, c.seconds,
               c.result.detail);
  }
  fmt::print("{} of {} criteria passed\n", static_cast<int>(cs.size()) - failed, cs.size());
  return failed == 0 ? 0 : 1;
}
