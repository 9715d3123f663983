#pragma once

// Derivative-free search over permutation-symmetric hybrid algorithms: one
// diffusion angle per quantum call, classical calls on fresh indices.

#include <hsl/baselines.hpp>
#include <hsl/parallel.hpp>
#include <hsl/progress.hpp>
#include <hsl/runner.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace hsl {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Leading classical calls query indices 0, 1, ... one at a time and then
/// prepare the uniform superposition over the unqueried ones. Every quantum
/// call (target: the e_− qubit 0) is followed by the diffusion
/// (1 − e^{iθ_t}) ss* − I over the unqueried indices. A classical call after
/// the first quantum call queries the index register in place; from then on
/// diffusions act only where all such answers were 0, so a 1 answer pins the
/// marked index.
struct ParamAlgorithm {
  int n = 4;
  Schedule schedule;
  OracleMode mode = OracleMode::UseClassical;

  int angle_count() const { return schedule.tau_q(); }

  int prefix_length() const {
    int p = 0;
    while (p < schedule.tau() && schedule.is_classical(p + 1)) ++p;
    return p;
  }

  void validate() const {
    if (n < 2) throw std::invalid_argument("optimizer needs n >= 2");
    for (const auto& s : schedule.steps())
      if (s.type == OracleKind::Type::Quantum && s.target != 0)
        throw std::invalid_argument("optimizer schedules must target qubit 0 (the e_- register)");
    if (prefix_length() >= n) throw std::invalid_argument("classical prefix must leave an unqueried index");
  }

  /// Concrete algorithm for the given angles (one per quantum call).
  HybridAlgorithm instantiate(const std::vector<double>& angles) const {
    validate();
    if (static_cast<int>(angles.size()) != angle_count())
      throw std::invalid_argument("expected " + std::to_string(angle_count()) + " angles, got " +
                                  std::to_string(angles.size()));
    const int prefix = prefix_length();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::vector<int> rest(order.begin() + prefix, order.end());

    HybridAlgorithm alg;
    alg.n = n;
    alg.l0 = 1;
    alg.name = "param";
    const Vector start = prefix == 0 ? detail::uniform_on(n, order) : Vector(Vector::Unit(n, order[0]));
    alg.initial = StateVector::product(start, detail::e_minus());
    detail::append_classical_prefix(alg, order, prefix);

    std::vector<OracleKind> steps = alg.schedule.steps();
    std::vector<int> controls;
    std::size_t next_angle = 0;
    int qubits = 1 + prefix;
    for (int t = prefix + 1; t <= schedule.tau(); ++t) {
      const auto& step = schedule.step(t);
      steps.push_back(step);
      if (step.appends_qubit()) {
        controls.push_back(qubits++);
        alg.unitaries.push_back(Controlled{controls, diffusion_matrix(n, std::numbers::pi, rest)});
      } else {
        alg.unitaries.push_back(Controlled{controls, diffusion_matrix(n, angles[next_angle++], rest)});
      }
    }
    alg.schedule = Schedule(std::move(steps));
    alg.answer_map = detail::classical_prefix_answer(order, prefix, 1);
    return alg;
  }

  double success(const std::vector<double>& angles) const { return success_finding(instantiate(angles), mode); }
};

struct OptResult {
  std::vector<double> best_params;
  double best_success = 0.0;
  double bound = 0.0;  // success bound (2√τ_c+2τ_q+1)²/n, unclamped
  double ratio = 0.0;  // best_success / min(1, bound)
  int evaluations = 0;
  std::vector<double> history;  // best value after each evaluation
  int best_restart = 0;
};

struct OptimizerOptions {
  int restarts = 3;
  int grid_points = 12;
  double angle_tolerance = 1e-7;
  std::uint64_t seed = 0;
};

namespace detail {

class BudgetedObjective {
 public:
  BudgetedObjective(const ParamAlgorithm& pa, int budget) : pa_(pa), budget_(budget) {}

  bool exhausted() const { return evaluations_ >= budget_; }
  int evaluations() const { return evaluations_; }
  double best() const { return best_; }
  const std::vector<double>& best_params() const { return best_params_; }
  const std::vector<double>& history() const { return history_; }

  double operator()(const std::vector<double>& angles) {
    ++evaluations_;
    std::vector<double> wrapped = angles;
    for (double& a : wrapped) a = std::fmod(std::fmod(a, kTwoPi) + kTwoPi, kTwoPi);
    const double v = pa_.success(wrapped);
    if (v > best_ || best_params_.empty()) {
      best_ = v;
      best_params_ = wrapped;
    }
    history_.push_back(best_);
    return v;
  }

 private:
  const ParamAlgorithm& pa_;
  int budget_;
  int evaluations_ = 0;
  double best_ = -1.0;
  std::vector<double> best_params_;
  std::vector<double> history_;
};

// Golden-section maximization of t ↦ f(x + t·dir) over [lo, hi].
inline void golden_line(BudgetedObjective& f, const std::vector<double>& x, const std::vector<double>& dir, double lo,
                        double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto at = [&](double t) {
    std::vector<double> y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * dir[i];
    return f(y);
  };
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  if (f.exhausted()) return;
  double fc = at(c);
  if (f.exhausted()) return;
  double fd = at(d);
  while (hi - lo > tol && !f.exhausted()) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = at(d);
    }
  }
}

inline std::vector<double> unit_vector(std::size_t dims, std::size_t j) {
  std::vector<double> e(dims, 0.0);
  e[j] = 1.0;
  return e;
}

// Signed angle difference in (−π, π].
inline double angle_delta(double to, double from) {
  double d = std::fmod(to - from, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

// A grid pass per coordinate, then sweeps of bracketed line searches whose
// radius follows the last displacement. Each sweep ends with a line search
// along its net displacement, which follows ridges between coupled angles.
inline void coordinate_ascent(BudgetedObjective& f, std::vector<double> x, const OptimizerOptions& opt) {
  f(x);
  const std::size_t dims = x.size();
  const double step = kTwoPi / opt.grid_points;
  const double tol = opt.angle_tolerance;
  for (std::size_t j = 0; j < dims && !f.exhausted(); ++j) {
    x = f.best_params();
    double best_angle = x[j], best_value = -1.0;
    for (int g = 0; g < opt.grid_points && !f.exhausted(); ++g) {
      x[j] = g * step;
      const double v = f(x);
      if (v > best_value) {
        best_value = v;
        best_angle = x[j];
      }
    }
    x = f.best_params();
    golden_line(f, x, unit_vector(dims, j), angle_delta(best_angle, x[j]) - step, angle_delta(best_angle, x[j]) + step,
                tol);
  }

  double radius = step;
  double last = f.best();
  while (!f.exhausted()) {
    const std::vector<double> start = f.best_params();
    for (std::size_t j = 0; j < dims && !f.exhausted(); ++j)
      golden_line(f, f.best_params(), unit_vector(dims, j), -radius, radius, tol);
    const std::vector<double> end = f.best_params();
    std::vector<double> dir(dims);
    double len = 0.0;
    for (std::size_t j = 0; j < dims; ++j) {
      dir[j] = angle_delta(end[j], start[j]);
      len += dir[j] * dir[j];
    }
    len = std::sqrt(len);
    if (dims > 1 && len > tol && !f.exhausted()) {
      for (double& v : dir) v /= len;
      golden_line(f, end, dir, -2.0 * len, 4.0 * len, tol);
    }
    if (f.best() > last + 1e-15) {
      radius = std::clamp(4.0 * len, 10.0 * tol, step);
    } else {
      radius /= 8.0;
      if (radius < tol) break;
    }
    last = f.best();
  }
}

}  // namespace detail

/// Coordinate ascent from `restarts` seeded starting points, sharing the
/// evaluation budget. The best restart wins; ties go to the lower index.
inline OptResult optimize(const ParamAlgorithm& pa, int budget = 2000, OptimizerOptions opt = {}) {
  pa.validate();
  if (budget < 1) throw std::invalid_argument("optimizer budget must be at least 1");
  if (opt.restarts < 1 || opt.grid_points < 3) throw std::invalid_argument("invalid optimizer options");

  OptResult res;
  const double bound = theorem_bounds(pa.n, pa.schedule.tau_c(), pa.schedule.tau_q(), 0.0).theorem2;
  res.bound = bound;
  const int dims = pa.angle_count();

  if (dims == 0) {
    detail::BudgetedObjective f(pa, 1);
    f({});
    res.best_success = f.best();
    res.evaluations = 1;
    res.history = f.history();
  } else {
    const int restarts = std::min(opt.restarts, budget);
    std::vector<std::vector<double>> starts;
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    for (int r = 0; r < restarts; ++r) {
      std::vector<double> s(dims);
      for (double& a : s) a = angle(rng);
      starts.push_back(std::move(s));
    }
    struct RestartOutcome {
      double best;
      std::vector<double> params;
      std::vector<double> history;
      int evaluations;
    };
    auto outcomes = parallel_map(static_cast<std::size_t>(restarts), [&](std::size_t r) {
      const int share = budget / restarts + (static_cast<int>(r) < budget % restarts ? 1 : 0);
      detail::BudgetedObjective f(pa, share);
      detail::coordinate_ascent(f, starts[r], opt);
      return RestartOutcome{f.best(), f.best_params(), f.history(), f.evaluations()};
    });
    int winner = 0;
    for (int r = 1; r < restarts; ++r)
      if (outcomes[r].best > outcomes[winner].best) winner = r;
    res.best_restart = winner;
    res.best_params = outcomes[winner].params;
    res.best_success = outcomes[winner].best;
    // Merged history: evaluations in restart order, running best across all.
    double running = -1.0;
    for (const auto& o : outcomes) {
      res.evaluations += o.evaluations;
      for (double h : o.history) {
        running = std::max(running, h);
        res.history.push_back(running);
      }
    }
  }
  res.ratio = res.best_success / std::min(1.0, bound);
  return res;
}

}  // namespace hsl
