#pragma once

// The classical, pseudo-classical and quantum oracle channels, both as
// explicit Kraus operators and as branch-wise transformations of a
// BranchEnsemble. Indices are 0-based throughout.

#include <hsl/statespace.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsl {

/// Input x ∈ {0,1}^n.
class InputString {
 public:
  explicit InputString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.size() < 2) throw std::invalid_argument("input string needs n >= 2");
    for (auto b : bits_)
      if (b > 1) throw std::invalid_argument("input bits must be 0 or 1");
  }

  /// x^(0) = 0^n.
  static InputString zeros(int n) {
    if (n < 2) throw std::invalid_argument("input string needs n >= 2");
    return InputString(std::vector<std::uint8_t>(n, 0));
  }

  /// x^(k): the single marked index k (0-based).
  static InputString marked(int n, int k) {
    if (k < 0 || k >= n) throw std::out_of_range("marked index " + std::to_string(k) + " out of range");
    auto x = zeros(n);
    x.bits_[k] = 1;
    return x;
  }

  /// x^(κ) for κ ∈ {0..n}: κ = 0 is the empty input, κ ≥ 1 marks index κ−1.
  static InputString kappa(int n, int kappa_value) {
    return kappa_value == 0 ? zeros(n) : marked(n, kappa_value - 1);
  }

  static InputString parse(std::string_view text) {
    std::vector<std::uint8_t> bits;
    for (char c : text) {
      if (c != '0' && c != '1') throw std::invalid_argument("input string may only contain 0 and 1");
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return InputString(std::move(bits));
  }

  int n() const { return static_cast<int>(bits_.size()); }
  int operator[](int i) const { return bits_.at(i); }
  int hamming_weight() const {
    int w = 0;
    for (auto b : bits_) w += b;
    return w;
  }
  std::string str() const {
    std::string s;
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

 private:
  std::vector<std::uint8_t> bits_;
};

struct OracleKind {
  enum class Type { Classical, PseudoClassical, Quantum };
  Type type = Type::Classical;
  int target = -1;  // workspace qubit, quantum calls only

  static OracleKind classical() { return {Type::Classical, -1}; }
  static OracleKind pseudo_classical() { return {Type::PseudoClassical, -1}; }
  static OracleKind quantum(int target) { return {Type::Quantum, target}; }

  bool appends_qubit() const { return type != Type::Quantum; }
  friend bool operator==(const OracleKind&, const OracleKind&) = default;
};

namespace detail {

inline void check_input(const InputString& x, const RegisterShape& shape) {
  if (x.n() != shape.n)
    throw ShapeError("input length " + std::to_string(x.n()) + " does not match index register n=" +
                     std::to_string(shape.n));
}

inline void check_target(const RegisterShape& shape, int target) {
  if (target < 0 || target >= shape.workspace_qubits)
    throw std::out_of_range("quantum oracle target qubit " + std::to_string(target) +
                            " does not exist (workspace has " + std::to_string(shape.workspace_qubits) +
                            " qubits)");
}

}  // namespace detail

/// O_{x,i} = ii* ⊗ x_i, extended by the identity on the existing workspace.
/// Maps shape (n, ℓ) to (n, ℓ+1).
inline Matrix kraus_classical(const InputString& x, int i, RegisterShape shape) {
  detail::check_input(x, shape);
  if (i < 0 || i >= x.n()) throw std::out_of_range("classical Kraus index " + std::to_string(i) + " out of range");
  const std::size_t ws = shape.workspace_dim();
  Matrix op = Matrix::Zero(2 * shape.dim(), shape.dim());
  for (std::size_t w = 0; w < ws; ++w) {
    const std::size_t col = i * ws + w;
    op(2 * col + x[i], col) = 1.0;
  }
  return op;
}

inline Matrix kraus_classical(const InputString& x, int i) { return kraus_classical(x, i, {x.n(), 0}); }

/// P_{x,b} = Σ_{i: x_i = b} ii* ⊗ b.
inline Matrix kraus_pseudo_classical(const InputString& x, int b, RegisterShape shape) {
  detail::check_input(x, shape);
  if (b != 0 && b != 1) throw std::invalid_argument("pseudo-classical outcome must be 0 or 1");
  const std::size_t ws = shape.workspace_dim();
  Matrix op = Matrix::Zero(2 * shape.dim(), shape.dim());
  for (int i = 0; i < x.n(); ++i) {
    if (x[i] != b) continue;
    for (std::size_t w = 0; w < ws; ++w) {
      const std::size_t col = i * ws + w;
      op(2 * col + b, col) = 1.0;
    }
  }
  return op;
}

inline Matrix kraus_pseudo_classical(const InputString& x, int b) {
  return kraus_pseudo_classical(x, b, {x.n(), 0});
}

/// Q_x = Σ ii* ⊗ (b⊕x_i) b* on the designated target, identity elsewhere.
inline Matrix quantum_oracle_matrix(const InputString& x, RegisterShape shape, int target) {
  detail::check_input(x, shape);
  detail::check_target(shape, target);
  const std::size_t ws = shape.workspace_dim();
  const std::size_t mask = shape.qubit_mask(target);
  Matrix op = Matrix::Zero(shape.dim(), shape.dim());
  for (int i = 0; i < x.n(); ++i)
    for (std::size_t w = 0; w < ws; ++w) {
      const std::size_t from = i * ws + w;
      const std::size_t to = i * ws + (x[i] ? (w ^ mask) : w);
      op(to, from) = 1.0;
    }
  return op;
}

/// Measures the index register, then appends a qubit holding x_i.
/// Output order: input branch, then index i. Outcome label recorded: i.
inline BranchEnsemble apply_classical(const InputString& x, const BranchEnsemble& e) {
  detail::check_input(x, e.shape());
  const RegisterShape grown = e.shape().with_extra_qubit();
  grown.validate();
  const auto ws = static_cast<Eigen::Index>(e.shape().workspace_dim());
  BranchEnsemble out(grown);
  for (const auto& br : e.branches()) {
    const Vector& a = br.state.amplitudes();
    for (int i = 0; i < x.n(); ++i) {
      const double p = a.segment(i * ws, ws).squaredNorm();
      if (p == 0.0) continue;
      const double scale = 1.0 / std::sqrt(p);
      Vector v = Vector::Zero(grown.dim());
      for (Eigen::Index w = 0; w < ws; ++w) v[2 * (i * ws + w) + x[i]] = a[i * ws + w] * scale;
      auto outcomes = br.outcomes;
      outcomes.push_back(i);
      out.add({br.weight * p, StateVector(grown, std::move(v)), std::move(outcomes)});
    }
  }
  return out;
}

/// Appends a qubit holding x_i coherently and measures only that qubit.
/// Output order: input branch, then outcome b ∈ {0, 1}.
inline BranchEnsemble apply_pseudo_classical(const InputString& x, const BranchEnsemble& e) {
  detail::check_input(x, e.shape());
  const RegisterShape grown = e.shape().with_extra_qubit();
  grown.validate();
  const auto ws = static_cast<Eigen::Index>(e.shape().workspace_dim());
  BranchEnsemble out(grown);
  for (const auto& br : e.branches()) {
    const Vector& a = br.state.amplitudes();
    for (int b = 0; b <= 1; ++b) {
      Vector v = Vector::Zero(grown.dim());
      for (int i = 0; i < x.n(); ++i) {
        if (x[i] != b) continue;
        for (Eigen::Index w = 0; w < ws; ++w) v[2 * (i * ws + w) + b] = a[i * ws + w];
      }
      const double p = v.squaredNorm();
      if (p == 0.0) continue;
      v /= std::sqrt(p);
      auto outcomes = br.outcomes;
      outcomes.push_back(b);
      out.add({br.weight * p, StateVector(grown, std::move(v)), std::move(outcomes)});
    }
  }
  return out;
}

/// Applies Q_x with the given workspace qubit as target register.
inline Vector apply_quantum(const InputString& x, const RegisterShape& shape, const Vector& a, int target) {
  detail::check_input(x, shape);
  detail::check_target(shape, target);
  const std::size_t ws = shape.workspace_dim();
  const std::size_t mask = shape.qubit_mask(target);
  Vector v = a;
  for (int i = 0; i < x.n(); ++i) {
    if (!x[i]) continue;
    for (std::size_t w = 0; w < ws; ++w)
      if (!(w & mask)) std::swap(v[i * ws + w], v[i * ws + (w | mask)]);
  }
  return v;
}

inline BranchEnsemble apply_quantum(const InputString& x, const BranchEnsemble& e, int target) {
  detail::check_input(x, e.shape());
  detail::check_target(e.shape(), target);
  BranchEnsemble out(e.shape());
  for (const auto& br : e.branches())
    out.add({br.weight, StateVector(e.shape(), apply_quantum(x, e.shape(), br.state.amplitudes(), target)),
             br.outcomes});
  return out;
}

struct PruneResult {
  BranchEnsemble ensemble;
  double removed_mass = 0.0;
};

/// Drops branches lighter than `tol`; surviving weights are left as they are.
inline PruneResult prune(const BranchEnsemble& e, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("prune tolerance must be nonnegative");
  PruneResult r{BranchEnsemble(e.shape()), 0.0};
  for (const auto& br : e.branches()) {
    if (br.weight < tol) {
      r.removed_mass += br.weight * br.state.squared_norm();
      continue;
    }
    r.ensemble.add(br);
  }
  return r;
}

}  // namespace hsl
