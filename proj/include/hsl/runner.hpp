#pragma once

// Hybrid query algorithms: a fixed oracle schedule, an initial pure state,
// input-independent unitaries after every call, and a final standard-basis
// measurement mapped to an answer.

#include <hsl/oracles.hpp>
#include <hsl/parallel.hpp>
#include <hsl/statespace.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hsl {

class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<OracleKind> steps) : steps_(std::move(steps)) {}

  /// Parses a compact schedule string such as "PPQ:0Q:0" or "C C Q:1".
  static Schedule parse(std::string_view text) {
    std::vector<OracleKind> steps;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == ' ' || c == ',') {
        ++pos;
        continue;
      }
      if (c == 'C') {
        steps.push_back(OracleKind::classical());
        ++pos;
      } else if (c == 'P') {
        steps.push_back(OracleKind::pseudo_classical());
        ++pos;
      } else if (c == 'Q') {
        if (pos + 1 >= text.size() || text[pos + 1] != ':')
          throw std::invalid_argument("schedule: expected ':' after Q at position " + std::to_string(pos));
        std::size_t end = pos + 2;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
        if (end == pos + 2)
          throw std::invalid_argument("schedule: missing target qubit after Q: at position " + std::to_string(pos));
        steps.push_back(OracleKind::quantum(std::stoi(std::string(text.substr(pos + 2, end - pos - 2)))));
        pos = end;
      } else {
        throw std::invalid_argument(std::string("schedule: unexpected character '") + c + "' at position " +
                                    std::to_string(pos));
      }
    }
    return Schedule(std::move(steps));
  }

  std::string str() const {
    std::string s;
    for (const auto& k : steps_) {
      switch (k.type) {
        case OracleKind::Type::Classical: s += "C"; break;
        case OracleKind::Type::PseudoClassical: s += "P"; break;
        case OracleKind::Type::Quantum: s += "Q:" + std::to_string(k.target); break;
      }
    }
    return s;
  }

  const std::vector<OracleKind>& steps() const { return steps_; }
  /// Step t is 1-based, matching the time index of the analysis.
  const OracleKind& step(int t) const { return steps_.at(t - 1); }
  int tau() const { return static_cast<int>(steps_.size()); }
  int tau_c() const {
    return static_cast<int>(std::count_if(steps_.begin(), steps_.end(), [](auto& k) { return k.appends_qubit(); }));
  }
  int tau_q() const { return tau() - tau_c(); }
  bool is_classical(int t) const { return step(t).appends_qubit(); }

 private:
  std::vector<OracleKind> steps_;
};

// ---------------------------------------------------------------------------
// Inter-query unitaries

struct IdentityOp {};

/// (1 − e^{iθ}) ss* − I on span{e_i : i ∈ support}, identity on the rest of
/// the index register, tensored with the workspace identity. s is the uniform
/// superposition over the support; an empty support means every index. At
/// θ = π this is the Grover reflection 2ss* − I.
struct Diffusion {
  double angle = std::numbers::pi;
  std::vector<int> support;
};

/// Real rotation by `angle` in the plane spanned by index states a and b.
struct PhaseRotation {
  int a = 0;
  int b = 1;
  double angle = 0.0;
};

/// Full-dimension matrix on index ⊗ workspace.
struct ExplicitMatrix {
  Matrix matrix;
};

/// index_op ⊗ I applied on the subspace where every listed workspace qubit
/// is 0; identity elsewhere. No controls means unconditional.
struct Controlled {
  std::vector<int> controls;
  Matrix index_op;
};

using UnitarySpec = std::variant<IdentityOp, Diffusion, PhaseRotation, ExplicitMatrix, Controlled>;

/// n×n matrix of a Diffusion restricted to the index register.
inline Matrix diffusion_matrix(int n, double angle, const std::vector<int>& support = {}) {
  std::vector<int> s = support;
  if (s.empty())
    for (int i = 0; i < n; ++i) s.push_back(i);
  Matrix m = Matrix::Identity(n, n);
  const Complex coeff = (1.0 - std::polar(1.0, angle)) / static_cast<double>(s.size());
  for (int i : s) {
    m(i, i) = -1.0;
    for (int j : s) m(i, j) += coeff;
  }
  return m;
}

inline double unitarity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

inline void check_support(int n, const std::vector<int>& support) {
  for (int i : support)
    if (i < 0 || i >= n) throw std::out_of_range("diffusion support index " + std::to_string(i) + " out of range");
}

inline std::size_t control_mask(const RegisterShape& shape, const std::vector<int>& controls) {
  std::size_t mask = 0;
  for (int q : controls) {
    if (q < 0 || q >= shape.workspace_qubits)
      throw std::out_of_range("control qubit " + std::to_string(q) + " does not exist");
    mask |= shape.qubit_mask(q);
  }
  return mask;
}

}  // namespace detail

/// Checks that `spec` is a valid unitary for `shape`. Dense unitarity checks
/// cost O(d³) and can be skipped when only dimensions matter.
inline void validate_unitary(const UnitarySpec& spec, const RegisterShape& shape, bool check_unitarity = true) {
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Diffusion>) {
          detail::check_support(shape.n, op.support);
        } else if constexpr (std::is_same_v<T, PhaseRotation>) {
          if (op.a < 0 || op.a >= shape.n || op.b < 0 || op.b >= shape.n || op.a == op.b)
            throw std::out_of_range("rotation plane indices invalid");
        } else if constexpr (std::is_same_v<T, ExplicitMatrix>) {
          const auto d = static_cast<Eigen::Index>(shape.dim());
          if (op.matrix.rows() != d || op.matrix.cols() != d)
            throw ShapeError("explicit unitary is " + std::to_string(op.matrix.rows()) + "x" +
                             std::to_string(op.matrix.cols()) + ", expected dimension " + std::to_string(d));
          if (check_unitarity && unitarity_defect(op.matrix) > kNormSlack) throw std::invalid_argument("explicit matrix is not unitary");
        } else if constexpr (std::is_same_v<T, Controlled>) {
          detail::control_mask(shape, op.controls);
          if (op.index_op.rows() != shape.n || op.index_op.cols() != shape.n)
            throw ShapeError("controlled index operator must be n x n");
          if (check_unitarity && unitarity_defect(op.index_op) > kNormSlack) throw std::invalid_argument("controlled operator is not unitary");
        }
      },
      spec);
}

inline Vector apply_unitary(const UnitarySpec& spec, const RegisterShape& shape, const Vector& a) {
  const auto ws = static_cast<Eigen::Index>(shape.workspace_dim());
  const int n = shape.n;
  return std::visit(
      [&](const auto& op) -> Vector {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, IdentityOp>) {
          return a;
        } else if constexpr (std::is_same_v<T, Diffusion>) {
          detail::check_support(n, op.support);
          std::vector<int> s = op.support;
          if (s.empty())
            for (int i = 0; i < n; ++i) s.push_back(i);
          const Complex coeff = (1.0 - std::polar(1.0, op.angle)) / static_cast<double>(s.size());
          Vector v = a;
          for (Eigen::Index w = 0; w < ws; ++w) {
            Complex sum = 0.0;
            for (int i : s) sum += a[i * ws + w];
            for (int i : s) v[i * ws + w] = coeff * sum - a[i * ws + w];
          }
          return v;
        } else if constexpr (std::is_same_v<T, PhaseRotation>) {
          const double c = std::cos(op.angle), sn = std::sin(op.angle);
          Vector v = a;
          for (Eigen::Index w = 0; w < ws; ++w) {
            const Complex xa = a[op.a * ws + w], xb = a[op.b * ws + w];
            v[op.a * ws + w] = c * xa - sn * xb;
            v[op.b * ws + w] = sn * xa + c * xb;
          }
          return v;
        } else if constexpr (std::is_same_v<T, ExplicitMatrix>) {
          if (op.matrix.cols() != a.size()) throw ShapeError("explicit unitary dimension mismatch");
          return op.matrix * a;
        } else {
          const std::size_t mask = detail::control_mask(shape, op.controls);
          Vector v = a;
          Vector column(n);
          for (Eigen::Index w = 0; w < ws; ++w) {
            if (static_cast<std::size_t>(w) & mask) continue;
            for (int i = 0; i < n; ++i) column[i] = a[i * ws + w];
            column = op.index_op * column;
            for (int i = 0; i < n; ++i) v[i * ws + w] = column[i];
          }
          return v;
        }
      },
      spec);
}

/// Dense matrix of `spec` on `shape`.
inline Matrix materialize(const UnitarySpec& spec, const RegisterShape& shape) {
  const auto d = static_cast<Eigen::Index>(shape.dim());
  Matrix m(d, d);
  for (Eigen::Index c = 0; c < d; ++c) m.col(c) = apply_unitary(spec, shape, Vector::Unit(d, c));
  return m;
}

inline BranchEnsemble apply_unitary(const UnitarySpec& spec, const BranchEnsemble& e) {
  BranchEnsemble out(e.shape());
  const auto* dense = std::get_if<ExplicitMatrix>(&spec);
  if (dense && e.size() > 1) {
    // One matrix-matrix product instead of a product per branch.
    const auto d = static_cast<Eigen::Index>(e.shape().dim());
    if (dense->matrix.cols() != d) throw ShapeError("explicit unitary dimension mismatch");
    Matrix block(d, static_cast<Eigen::Index>(e.size()));
    for (std::size_t b = 0; b < e.size(); ++b) block.col(static_cast<Eigen::Index>(b)) = e.branches()[b].state.amplitudes();
    const Matrix mapped = dense->matrix * block;
    for (std::size_t b = 0; b < e.size(); ++b) {
      const auto& br = e.branches()[b];
      out.add({br.weight, StateVector(e.shape(), mapped.col(static_cast<Eigen::Index>(b))), br.outcomes});
    }
    return out;
  }
  for (const auto& br : e.branches())
    out.add({br.weight, StateVector(e.shape(), apply_unitary(spec, e.shape(), br.state.amplitudes())), br.outcomes});
  return out;
}

// ---------------------------------------------------------------------------
// Algorithms

/// A standard-basis measurement result on the final memory.
struct Outcome {
  int index = 0;
  std::size_t workspace = 0;
  int workspace_qubits = 0;

  int bit(int qubit) const {
    return static_cast<int>((workspace >> (workspace_qubits - 1 - qubit)) & 1u);
  }
};

using AnswerMap = std::function<int(const Outcome&)>;

enum class AnswerSet { Finding, Detection };

inline AnswerMap answer_index() {
  return [](const Outcome& o) { return o.index; };
}

struct HybridAlgorithm {
  int n = 2;
  int l0 = 0;
  StateVector initial = StateVector::basis({2, 0}, 0);
  Schedule schedule;
  std::vector<UnitarySpec> unitaries;
  AnswerMap answer_map = answer_index();
  AnswerSet answers = AnswerSet::Finding;
  std::string name;

  RegisterShape shape_at(int t) const {
    int l = l0;
    for (int s = 1; s <= t; ++s)
      if (schedule.is_classical(s)) ++l;
    return {n, l};
  }
  RegisterShape final_shape() const { return shape_at(schedule.tau()); }

  void validate(bool check_unitarity = true) const {
    const RegisterShape start{n, l0};
    start.validate();
    require_same_shape(start, initial.shape(), "initial state");
    if (std::abs(initial.norm() - 1.0) > kNormSlack) throw std::invalid_argument("initial state must have unit norm");
    if (static_cast<int>(unitaries.size()) != schedule.tau())
      throw std::invalid_argument("schedule has " + std::to_string(schedule.tau()) + " calls but " +
                                  std::to_string(unitaries.size()) + " unitaries were given");
    RegisterShape shape = start;
    for (int t = 1; t <= schedule.tau(); ++t) {
      const auto& step = schedule.step(t);
      if (step.appends_qubit()) {
        shape = shape.with_extra_qubit();
        shape.validate();
      } else {
        detail::check_target(shape, step.target);
      }
      try {
        validate_unitary(unitaries[t - 1], shape, check_unitarity);
      } catch (const std::exception& e) {
        throw std::invalid_argument("unitary " + std::to_string(t) + ": " + e.what());
      }
    }
    if (!answer_map) throw std::invalid_argument("answer map is empty");
  }
};

enum class OracleMode { UseClassical, UsePseudoClassical };

struct RunResult {
  BranchEnsemble final_ensemble;
  double pruned_mass = 0.0;
  std::map<int, double> answer_distribution;

  double probability(int answer) const {
    auto it = answer_distribution.find(answer);
    return it == answer_distribution.end() ? 0.0 : it->second;
  }
};

inline constexpr double kDefaultPruneTolerance = 1e-12;

/// Answer label of every standard-basis position of `shape`.
inline std::vector<int> answer_labels(const HybridAlgorithm& alg, const RegisterShape& shape) {
  const std::size_t ws = shape.workspace_dim();
  std::vector<int> labels(shape.dim());
  for (std::size_t p = 0; p < shape.dim(); ++p)
    labels[p] = alg.answer_map(Outcome{static_cast<int>(p / ws), p % ws, shape.workspace_qubits});
  return labels;
}

inline std::map<int, double> answer_distribution(const HybridAlgorithm& alg, const BranchEnsemble& e) {
  const auto labels = answer_labels(alg, e.shape());
  std::map<int, double> dist;
  for (const auto& br : e.branches()) {
    const Vector& a = br.state.amplitudes();
    for (Eigen::Index p = 0; p < a.size(); ++p) {
      const double pr = std::norm(a[p]);
      if (pr == 0.0) continue;
      dist[labels[p]] += br.weight * pr;
    }
  }
  return dist;
}

inline RunResult run(const HybridAlgorithm& alg, const InputString& x, OracleMode mode,
                     double prune_tol = kDefaultPruneTolerance) {
  alg.validate(false);
  if (x.n() != alg.n) throw ShapeError("input length does not match algorithm n");
  BranchEnsemble e = BranchEnsemble::pure(alg.initial);
  double pruned = 0.0;
  for (int t = 1; t <= alg.schedule.tau(); ++t) {
    const auto& step = alg.schedule.step(t);
    if (step.type == OracleKind::Type::Quantum) {
      e = apply_quantum(x, e, step.target);
    } else {
      const bool classical = step.type == OracleKind::Type::Classical && mode == OracleMode::UseClassical;
      auto pr = prune(classical ? apply_classical(x, e) : apply_pseudo_classical(x, e), prune_tol);
      pruned += pr.removed_mass;
      e = std::move(pr.ensemble);
    }
    e = apply_unitary(alg.unitaries[t - 1], e);
  }
  auto dist = answer_distribution(alg, e);
  return {std::move(e), pruned, std::move(dist)};
}

/// Pr[answer = k | x^(k)] for every k.
inline std::vector<double> finding_success_per_input(const HybridAlgorithm& alg, OracleMode mode) {
  if (alg.answers != AnswerSet::Finding) throw std::invalid_argument("success_finding needs the answer set {0..n-1}");
  alg.validate();
  return parallel_map(static_cast<std::size_t>(alg.n), [&](std::size_t k) {
    return run(alg, InputString::marked(alg.n, static_cast<int>(k)), mode).probability(static_cast<int>(k));
  });
}

/// Average-case success for the finding version, k uniform.
inline double success_finding(const HybridAlgorithm& alg, OracleMode mode) {
  const auto per = finding_success_per_input(alg, mode);
  double total = 0.0;
  for (double p : per) total += p;
  return total / alg.n;
}

/// Pr[correct | x^(κ)] for κ = 0..n; answer 0 means "no marked index".
inline std::vector<double> detection_success_per_input(const HybridAlgorithm& alg, OracleMode mode) {
  if (alg.answers != AnswerSet::Detection) throw std::invalid_argument("success_detection needs the answer set {0, 1}");
  alg.validate();
  return parallel_map(static_cast<std::size_t>(alg.n) + 1, [&](std::size_t kappa) {
    const auto r = run(alg, InputString::kappa(alg.n, static_cast<int>(kappa)), mode);
    return r.probability(kappa == 0 ? 0 : 1);
  });
}

/// Worst-case success over κ ∈ {0..n}.
inline double success_detection(const HybridAlgorithm& alg, OracleMode mode) {
  const auto per = detection_success_per_input(alg, mode);
  return *std::min_element(per.begin(), per.end());
}

/// tr[Π ρ] for an orthogonal projector Π given as a dense matrix.
inline double measure_projector(const BranchEnsemble& e, const Matrix& projector) {
  const auto d = static_cast<Eigen::Index>(e.shape().dim());
  if (projector.rows() != d || projector.cols() != d) throw ShapeError("projector dimension mismatch");
  double p = 0.0;
  for (const auto& br : e.branches()) p += br.weight * (projector * br.state.amplitudes()).squaredNorm();
  return p;
}

// ---------------------------------------------------------------------------
// Seeded random instances

inline Matrix haar_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix z(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) z(r, c) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix rmat = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < dim; ++c) {
    const Complex d = rmat(c, c);
    if (std::abs(d) > 0) q.col(c) *= d / std::abs(d);
  }
  return q;
}

inline StateVector random_state(RegisterShape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(shape.dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(g(rng), g(rng));
  v.normalize();
  return {shape, std::move(v)};
}

struct RandomAlgorithmOptions {
  int n = 8;
  int max_tau = 6;
  int l0 = 1;
  int max_classical = 6;  // cap on τ_c, bounds the final dimension
  AnswerSet answers = AnswerSet::Finding;
};

/// Haar-random unitaries and initial state; schedule drawn uniformly over
/// {classical, quantum} strings with τ uniform in [0, max_tau]; quantum
/// targets uniform over existing workspace qubits.
inline HybridAlgorithm random_algorithm(const RandomAlgorithmOptions& opt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  HybridAlgorithm alg;
  alg.n = opt.n;
  alg.l0 = opt.l0;
  alg.answers = opt.answers;
  alg.name = "random-" + std::to_string(seed);
  alg.initial = random_state({opt.n, opt.l0}, rng);

  const int tau = std::uniform_int_distribution<int>(0, opt.max_tau)(rng);
  std::vector<OracleKind> steps;
  int l = opt.l0, classical = 0;
  for (int t = 0; t < tau; ++t) {
    bool want_classical = std::bernoulli_distribution(0.5)(rng);
    if (classical >= opt.max_classical) want_classical = false;
    if (!want_classical && l == 0) want_classical = classical < opt.max_classical;
    if (want_classical) {
      steps.push_back(OracleKind::classical());
      ++l;
      ++classical;
    } else if (l > 0) {
      steps.push_back(OracleKind::quantum(std::uniform_int_distribution<int>(0, l - 1)(rng)));
    } else {
      break;
    }
  }
  alg.schedule = Schedule(std::move(steps));
  for (int t = 1; t <= alg.schedule.tau(); ++t)
    alg.unitaries.push_back(ExplicitMatrix{haar_unitary(static_cast<Eigen::Index>(alg.shape_at(t).dim()), rng)});
  if (opt.answers == AnswerSet::Detection) alg.answer_map = [](const Outcome& o) { return o.index % 2; };
  return alg;
}

}  // namespace hsl
