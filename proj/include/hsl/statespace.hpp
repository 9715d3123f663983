#pragma once

// Dense state-space arithmetic for the index ⊗ workspace memory model.
//
// Layout: the index register is the most significant factor. Workspace
// qubits follow in creation order, the newest one least significant, so the
// amplitude of |i, w⟩ lives at i * 2^ℓ + w and appending a qubit with value b
// sends position p to 2p + b.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hsl {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Raised when two objects that must live on the same space do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kNormSlack = 1e-10;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kEigenFloor = 1e-13;
inline constexpr int kMaxWorkspaceQubits = 24;

struct RegisterShape {
  int n = 2;
  int workspace_qubits = 0;

  std::size_t workspace_dim() const { return std::size_t{1} << workspace_qubits; }
  std::size_t dim() const { return static_cast<std::size_t>(n) * workspace_dim(); }

  RegisterShape with_extra_qubit() const { return {n, workspace_qubits + 1}; }

  /// Mask selecting workspace qubit `qubit` (creation order) inside the
  /// workspace part of a basis label.
  std::size_t qubit_mask(int qubit) const {
    return std::size_t{1} << (workspace_qubits - 1 - qubit);
  }

  void validate() const {
    if (n < 2) throw std::invalid_argument("index register needs n >= 2, got " + std::to_string(n));
    if (workspace_qubits < 0 || workspace_qubits > kMaxWorkspaceQubits)
      throw std::invalid_argument("workspace qubit count out of range: " +
                                  std::to_string(workspace_qubits));
  }

  std::string describe() const {
    return "(n=" + std::to_string(n) + ", l=" + std::to_string(workspace_qubits) + ")";
  }

  friend bool operator==(const RegisterShape&, const RegisterShape&) = default;
};

inline void require_same_shape(const RegisterShape& a, const RegisterShape& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": shape mismatch " + a.describe() + " vs " + b.describe());
}

/// Pure (possibly sub-normalized) vector over index ⊗ workspace.
class StateVector {
 public:
  StateVector(RegisterShape shape, Vector amplitudes) : shape_(shape), amps_(std::move(amplitudes)) {
    shape_.validate();
    if (static_cast<std::size_t>(amps_.size()) != shape_.dim())
      throw ShapeError("amplitude count " + std::to_string(amps_.size()) + " does not match shape " +
                       shape_.describe());
    if (!amps_.allFinite()) throw std::invalid_argument("state vector has non-finite amplitudes");
    if (amps_.norm() > 1.0 + kNormSlack)
      throw std::invalid_argument("state vector norm exceeds 1: " + std::to_string(amps_.norm()));
  }

  static StateVector zero(RegisterShape shape) { return {shape, Vector::Zero(shape.dim())}; }

  static StateVector basis(RegisterShape shape, int index, std::size_t workspace = 0) {
    shape.validate();
    if (index < 0 || index >= shape.n || workspace >= shape.workspace_dim())
      throw std::out_of_range("basis label out of range");
    Vector v = Vector::Zero(shape.dim());
    v[index * shape.workspace_dim() + workspace] = 1.0;
    return {shape, std::move(v)};
  }

  /// index_part ⊗ workspace_part.
  static StateVector product(const Vector& index_part, const Vector& workspace_part) {
    const auto ws = static_cast<std::size_t>(workspace_part.size());
    if (ws == 0 || (ws & (ws - 1)) != 0) throw ShapeError("workspace factor must have power-of-two length");
    int qubits = 0;
    while ((std::size_t{1} << qubits) < ws) ++qubits;
    RegisterShape shape{static_cast<int>(index_part.size()), qubits};
    Vector v(shape.dim());
    for (Eigen::Index i = 0; i < index_part.size(); ++i)
      v.segment(i * ws, ws) = index_part[i] * workspace_part;
    return {shape, std::move(v)};
  }

  /// Uniform superposition over the index register, workspace all-zero.
  static StateVector uniform(RegisterShape shape) {
    shape.validate();
    Vector idx = Vector::Constant(shape.n, 1.0 / std::sqrt(static_cast<double>(shape.n)));
    Vector ws = Vector::Zero(shape.workspace_dim());
    ws[0] = 1.0;
    return product(idx, ws);
  }

  const RegisterShape& shape() const { return shape_; }
  const Vector& amplitudes() const { return amps_; }
  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }
  Complex amplitude(int index, std::size_t workspace = 0) const {
    return amps_[index * shape_.workspace_dim() + workspace];
  }

  /// Unit vector in the same direction; the zero vector stays zero.
  StateVector normalized() const {
    const double nrm = norm();
    if (nrm == 0.0) return *this;
    return {shape_, amps_ / nrm};
  }

 private:
  RegisterShape shape_;
  Vector amps_;
};

inline Complex inner(const StateVector& u, const StateVector& v) {
  require_same_shape(u.shape(), v.shape(), "inner");
  return u.amplitudes().dot(v.amplitudes());
}

/// Returns a copy of v with everything outside index block `k` zeroed (kk* ⊗ I).
inline Vector project_index(const RegisterShape& shape, const Vector& v, int k) {
  const auto ws = static_cast<Eigen::Index>(shape.workspace_dim());
  Vector out = Vector::Zero(v.size());
  out.segment(k * ws, ws) = v.segment(k * ws, ws);
  return out;
}

inline StateVector append_qubit(const StateVector& v, int bit) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("appended qubit value must be 0 or 1");
  const RegisterShape grown = v.shape().with_extra_qubit();
  grown.validate();
  Vector out = Vector::Zero(grown.dim());
  const Vector& in = v.amplitudes();
  for (Eigen::Index p = 0; p < in.size(); ++p) out[2 * p + bit] = in[p];
  return {grown, std::move(out)};
}

/// Hermitian operator on index ⊗ workspace, trace ≤ 1, positive semidefinite.
class DensityOperator {
 public:
  DensityOperator(RegisterShape shape, Matrix matrix) : shape_(shape), m_(std::move(matrix)) {
    shape_.validate();
    const auto d = static_cast<Eigen::Index>(shape_.dim());
    if (m_.rows() != d || m_.cols() != d) throw ShapeError("density matrix dimension does not match shape");
    if (!m_.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
    const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTolerance)
      throw std::invalid_argument("density matrix is not Hermitian (deviation " + std::to_string(asym) + ")");
    m_ = (m_ + m_.adjoint()) * 0.5;
    const double tr = m_.trace().real();
    if (tr < -kNormSlack || tr > 1.0 + kNormSlack)
      throw std::invalid_argument("density matrix trace out of [0, 1]: " + std::to_string(tr));
    if (min_eigenvalue() < -kNormSlack)
      throw std::invalid_argument("density matrix is not positive semidefinite (eigenvalue " +
                                  std::to_string(min_eigenvalue()) + ")");
  }

  static DensityOperator pure(const StateVector& psi) {
    return {psi.shape(), psi.amplitudes() * psi.amplitudes().adjoint()};
  }

  const RegisterShape& shape() const { return shape_; }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }

  /// Smallest eigenvalue; PSD holds iff this is ≥ -1e-10.
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  RegisterShape shape_;
  Matrix m_;
};

namespace detail {

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

/// A with AA* = m, keeping only eigenvalues above kEigenFloor.
inline Matrix psd_factor(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  const auto& ev = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > kEigenFloor) keep.push_back(i);
  Matrix a(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    a.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(ev[keep[c]]);
  return a;
}

}  // namespace detail

/// D(ρ,σ) = Tr|ρ−σ| / 2, from the eigenvalues of the Hermitian difference.
inline double trace_distance(const DensityOperator& r, const DensityOperator& s) {
  require_same_shape(r.shape(), s.shape(), "trace_distance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::hermitian_part(r.matrix() - s.matrix()),
                                           Eigen::EigenvaluesOnly);
  const double d = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

/// F(ρ,σ) = (Tr √(√ρ σ √ρ))².
inline double fidelity(const DensityOperator& r, const DensityOperator& s) {
  require_same_shape(r.shape(), s.shape(), "fidelity");
  // ‖√ρ√σ‖₁ = ‖A*B‖₁ for ρ = AA*, σ = BB*. Dropping eigenvalues at the
  // rounding floor keeps exactly rank-deficient inputs stable: F is only
  // ½-Hölder there, so 1e-17 of noise would otherwise move it by ~1e-9.
  Eigen::JacobiSVD<Matrix> svd(detail::psd_factor(r.matrix()).adjoint() * detail::psd_factor(s.matrix()));
  const double tr = svd.singularValues().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

/// Pure-state shortcut F(ρ, ψψ*) = ψ*ρψ.
inline double fidelity(const DensityOperator& r, const StateVector& psi) {
  require_same_shape(r.shape(), psi.shape(), "fidelity");
  const Complex v = psi.amplitudes().dot(r.matrix() * psi.amplitudes());
  return std::clamp(v.real(), 0.0, 1.0);
}

/// One weighted pure term of a mixed state. `outcomes` records the
/// measurement results that produced it, one entry per non-unitary call.
struct Branch {
  double weight = 1.0;
  StateVector state;
  std::vector<int> outcomes;
};

/// Mixed state Σ w_i ψ_i ψ_i* stored as its pure branches.
class BranchEnsemble {
 public:
  explicit BranchEnsemble(RegisterShape shape) : shape_(shape) { shape_.validate(); }

  static BranchEnsemble pure(StateVector psi) {
    BranchEnsemble e(psi.shape());
    e.add({1.0, std::move(psi), {}});
    return e;
  }

  void add(Branch b) {
    require_same_shape(shape_, b.state.shape(), "BranchEnsemble::add");
    if (!(b.weight >= 0.0)) throw std::invalid_argument("branch weight must be nonnegative");
    branches_.push_back(std::move(b));
  }

  const RegisterShape& shape() const { return shape_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  bool empty() const { return branches_.empty(); }

  /// Σ w_i ‖ψ_i‖², the trace of the represented operator.
  double total_weight() const {
    double total = 0.0;
    for (const auto& b : branches_) total += b.weight * b.state.squared_norm();
    return total;
  }

 private:
  RegisterShape shape_;
  std::vector<Branch> branches_;
};

inline DensityOperator ensemble_density(const BranchEnsemble& e) {
  Matrix rho = Matrix::Zero(e.shape().dim(), e.shape().dim());
  for (const auto& b : e.branches()) {
    const Vector& a = b.state.amplitudes();
    rho.noalias() += b.weight * (a * a.adjoint());
  }
  return {e.shape(), std::move(rho)};
}

}  // namespace hsl
