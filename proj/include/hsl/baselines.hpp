#pragma once

// Reference search strategies expressed as hybrid algorithms, together with
// their exact success probabilities.

#include <hsl/runner.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsl {

struct BaselineKind {
  enum class Type { GroverQuantum, GroverPseudoClassical, ClassicalRandom, ClassicalThenGrover };
  Type type = Type::GroverQuantum;
  int tau_c = 0;
  int tau_q = 0;

  static BaselineKind grover(int tau_q) { return {Type::GroverQuantum, 0, tau_q}; }
  static BaselineKind pc_grover(int tau) { return {Type::GroverPseudoClassical, tau, 0}; }
  static BaselineKind classical(int tau_c) { return {Type::ClassicalRandom, tau_c, 0}; }
  static BaselineKind hybrid(int tau_c, int tau_q) { return {Type::ClassicalThenGrover, tau_c, tau_q}; }

  /// Builds a kind from its CLI name: grover | pc-grover | classical | hybrid.
  static BaselineKind from_name(std::string_view name, int tau_c, int tau_q) {
    if (name == "grover") {
      if (tau_c != 0) throw std::invalid_argument("baseline grover takes no classical queries");
      return grover(tau_q);
    }
    if (name == "pc-grover") {
      if (tau_q != 0) throw std::invalid_argument("baseline pc-grover takes no quantum queries");
      return pc_grover(tau_c);
    }
    if (name == "classical") {
      if (tau_q != 0) throw std::invalid_argument("baseline classical takes no quantum queries");
      return classical(tau_c);
    }
    if (name == "hybrid") return hybrid(tau_c, tau_q);
    throw std::invalid_argument("unknown baseline '" + std::string(name) + "'");
  }

  std::string name() const {
    switch (type) {
      case Type::GroverQuantum: return "grover";
      case Type::GroverPseudoClassical: return "pc-grover";
      case Type::ClassicalRandom: return "classical";
      case Type::ClassicalThenGrover: return "hybrid";
    }
    return "?";
  }

  void validate(int n) const {
    if (n < 2) throw std::invalid_argument("baselines need n >= 2");
    if (tau_c < 0 || tau_q < 0) throw std::invalid_argument("query counts must be nonnegative");
    if (type == Type::ClassicalRandom && tau_c > n)
      throw std::invalid_argument("classical baseline cannot query more than n distinct indices");
    if (type == Type::ClassicalThenGrover && tau_c >= n)
      throw std::invalid_argument("hybrid baseline requires tau_c < n");
  }
};

namespace detail {

inline Vector e_minus() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

inline Vector uniform_on(int n, const std::vector<int>& support) {
  Vector v = Vector::Zero(n);
  for (int i : support) v[i] = 1.0 / std::sqrt(static_cast<double>(support.size()));
  return v;
}

inline Matrix transposition(int n, int a, int b) {
  Matrix m = Matrix::Identity(n, n);
  if (a != b) {
    m(a, a) = m(b, b) = 0.0;
    m(a, b) = m(b, a) = 1.0;
  }
  return m;
}

// Householder reflection sending unit vector u to unit vector v (u ⟂ v, real).
inline Matrix reflection_onto(const Vector& u, const Vector& v) {
  const Vector w = u - v;
  const double nn = w.squaredNorm();
  Matrix m = Matrix::Identity(u.size(), u.size());
  if (nn > 0.0) m -= (2.0 / nn) * (w * w.adjoint());
  return m;
}

inline std::vector<int> seeded_order(int n, std::uint64_t seed) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// Queries order[0..tau_c-1] one after another with the index register in a
// basis state, then prepares the uniform superposition over the rest.
inline void append_classical_prefix(HybridAlgorithm& alg, const std::vector<int>& order, int tau_c) {
  const int n = alg.n;
  std::vector<OracleKind> steps = alg.schedule.steps();
  const std::vector<int> rest(order.begin() + tau_c, order.end());
  for (int t = 0; t < tau_c; ++t) {
    steps.push_back(OracleKind::classical());
    if (t + 1 < tau_c) {
      alg.unitaries.push_back(Controlled{{}, transposition(n, order[t], order[t + 1])});
    } else if (rest.empty()) {
      alg.unitaries.push_back(IdentityOp{});
    } else {
      alg.unitaries.push_back(Controlled{{}, reflection_onto(Vector::Unit(n, order[t]), uniform_on(n, rest))});
    }
  }
  alg.schedule = Schedule(std::move(steps));
}

// Answer: the index whose classical query returned 1, else the index register.
inline AnswerMap classical_prefix_answer(std::vector<int> order, int tau_c, int first_qubit) {
  return [order = std::move(order), tau_c, first_qubit](const Outcome& o) {
    for (int j = 0; j < tau_c; ++j)
      if (o.bit(first_qubit + j)) return order[j];
    return o.index;
  };
}

}  // namespace detail

/// Builds the hybrid algorithm of a baseline. `seed` fixes the relabeling of
/// indices used by the classical strategies; success is relabeling-invariant.
inline HybridAlgorithm build(const BaselineKind& kind, int n, std::uint64_t seed = 0) {
  kind.validate(n);
  HybridAlgorithm alg;
  alg.n = n;
  alg.name = kind.name();
  const std::vector<int> all = [&] {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
  }();

  switch (kind.type) {
    case BaselineKind::Type::GroverQuantum: {
      alg.l0 = 1;
      alg.initial = StateVector::product(detail::uniform_on(n, all), detail::e_minus());
      alg.schedule = Schedule(std::vector<OracleKind>(kind.tau_q, OracleKind::quantum(0)));
      alg.unitaries.assign(kind.tau_q, Diffusion{});
      break;
    }
    case BaselineKind::Type::GroverPseudoClassical: {
      // Diffusion only on the branch where every pseudo-classical answer was 0;
      // a 1 answer leaves the marked index in the index register.
      alg.l0 = 0;
      alg.initial = StateVector::uniform({n, 0});
      alg.schedule = Schedule(std::vector<OracleKind>(kind.tau_c, OracleKind::pseudo_classical()));
      std::vector<int> controls;
      for (int t = 0; t < kind.tau_c; ++t) {
        controls.push_back(t);
        alg.unitaries.push_back(Controlled{controls, diffusion_matrix(n, std::numbers::pi)});
      }
      break;
    }
    case BaselineKind::Type::ClassicalRandom: {
      const auto order = detail::seeded_order(n, seed);
      alg.l0 = 0;
      alg.initial = kind.tau_c == 0 ? StateVector::uniform({n, 0}) : StateVector::basis({n, 0}, order[0]);
      detail::append_classical_prefix(alg, order, kind.tau_c);
      alg.answer_map = detail::classical_prefix_answer(order, kind.tau_c, 0);
      break;
    }
    case BaselineKind::Type::ClassicalThenGrover: {
      const auto order = detail::seeded_order(n, seed);
      const std::vector<int> rest(order.begin() + kind.tau_c, order.end());
      alg.l0 = 1;  // qubit 0 holds e_- for the phase oracle
      const Vector start = kind.tau_c == 0 ? detail::uniform_on(n, all) : Vector(Vector::Unit(n, order[0]));
      alg.initial = StateVector::product(start, detail::e_minus());
      detail::append_classical_prefix(alg, order, kind.tau_c);
      std::vector<OracleKind> steps = alg.schedule.steps();
      for (int q = 0; q < kind.tau_q; ++q) {
        steps.push_back(OracleKind::quantum(0));
        alg.unitaries.push_back(Diffusion{std::numbers::pi, kind.tau_c == 0 ? std::vector<int>{} : rest});
      }
      alg.schedule = Schedule(std::move(steps));
      alg.answer_map = detail::classical_prefix_answer(order, kind.tau_c, 1);
      break;
    }
  }
  return alg;
}

/// sin²((1 + 2τ_q) arcsin(1/√n)): Grover's success with τ_q iterations.
inline double grover_success(int n, int tau_q) {
  const double s = std::sin((1 + 2 * tau_q) * std::asin(1.0 / std::sqrt(static_cast<double>(n))));
  return s * s;
}

/// Frequently quoted form 1 − (1−1/n)²(1−2/n)^{2(τ−1)} for Grover run with
/// the pseudo-classical oracle. It does not equal the success of the
/// algorithm built above: the exact value is pc_grover_success.
inline double pc_grover_quoted_formula(int n, int tau) {
  const double nn = n;
  return 1.0 - std::pow(1.0 - 1.0 / nn, 2) * std::pow(1.0 - 2.0 / nn, 2.0 * (tau - 1));
}

/// Exact success of pseudo-classical Grover: 1 − (1−1/n)(1−2/n)^{2τ}. The
/// first query misses with probability 1−1/n; afterwards every zero-outcome
/// branch is the uniform superposition over the unmarked indices, from which
/// one diffusion puts weight 4(n−1)/n² = 1 − (1−2/n)² on the marked index.
inline double pc_grover_success(int n, int tau) {
  if (tau == 0) return 1.0 / n;
  const double nn = n;
  return 1.0 - (1.0 - 1.0 / nn) * std::pow(1.0 - 2.0 / nn, 2.0 * tau);
}

inline double closed_form(const BaselineKind& kind, int n) {
  kind.validate(n);
  switch (kind.type) {
    case BaselineKind::Type::GroverQuantum: return grover_success(n, kind.tau_q);
    case BaselineKind::Type::GroverPseudoClassical: return pc_grover_success(n, kind.tau_c);
    case BaselineKind::Type::ClassicalRandom: return std::min(1.0, (kind.tau_c + 1.0) / n);
    case BaselineKind::Type::ClassicalThenGrover: {
      const double found = static_cast<double>(kind.tau_c) / n;
      return found + (1.0 - found) * grover_success(n - kind.tau_c, kind.tau_q);
    }
  }
  return 0.0;
}

}  // namespace hsl
