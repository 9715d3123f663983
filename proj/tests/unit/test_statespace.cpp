#include <hsl/statespace.hpp>
#include <hsl/runner.hpp>

#include <support/generators.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hsl;
using hsl_test::random_density;
using hsl_test::unit_vector;

namespace {

const RegisterShape kShapes[] = {{2, 0}, {4, 0}, {2, 1}, {8, 0}, {4, 1}, {2, 2}};

}  // namespace

TEST(RegisterShape, DimensionAndGrowth) {
  const RegisterShape s{4, 2};
  EXPECT_EQ(s.workspace_dim(), 4u);
  EXPECT_EQ(s.dim(), 16u);
  EXPECT_EQ(s.with_extra_qubit().dim(), 32u);
  EXPECT_EQ(s.qubit_mask(0), 2u);
  EXPECT_EQ(s.qubit_mask(1), 1u);
  EXPECT_THROW((RegisterShape{1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((RegisterShape{4, -1}.validate()), std::invalid_argument);
}

TEST(StateVector, RejectsBadAmplitudes) {
  const RegisterShape s{2, 0};
  Vector big(2);
  big << 1.0, 1.0;
  EXPECT_THROW(StateVector(s, big), std::invalid_argument);
  Vector nan(2);
  nan << std::nan(""), 0.0;
  EXPECT_THROW(StateVector(s, nan), std::invalid_argument);
  EXPECT_THROW(StateVector(s, Vector::Zero(3)), ShapeError);
  Vector small(2);
  small << 0.5, 0.0;
  EXPECT_NO_THROW(StateVector(s, small));
}

TEST(StateVector, ProductLayoutPutsIndexFirst) {
  Vector idx = Vector::Zero(2), ws = Vector::Zero(2);
  idx[1] = 1.0;
  ws[1] = 1.0;
  const auto p = StateVector::product(idx, ws);
  EXPECT_EQ(p.shape(), (RegisterShape{2, 1}));
  EXPECT_EQ(p.amplitude(1, 1), Complex(1.0));
}

TEST(Inner, BasisAndUniformExamples) {
  const RegisterShape s{5, 0};
  EXPECT_NEAR(std::abs(inner(StateVector::basis(s, 0), StateVector::basis(s, 0)) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(inner(StateVector::basis(s, 0), StateVector::basis(s, 1)), Complex(0.0));
  for (int k = 0; k < 5; ++k)
    EXPECT_NEAR(std::abs(inner(StateVector::uniform(s), StateVector::basis(s, k)) - 1.0 / std::sqrt(5.0)), 0.0, 1e-15);
}

TEST(Inner, ConjugateLinearAndBounded) {
  std::mt19937_64 rng(11);
  const RegisterShape s{4, 1};
  for (int trial = 0; trial < 50; ++trial) {
    const StateVector u(s, unit_vector(8, rng)), v(s, unit_vector(8, rng));
    const Complex c(0.3, -0.7);
    const StateVector cu(s, (c * u.amplitudes()).eval() / std::abs(c) * 0.9);
    EXPECT_NEAR(std::abs(inner(cu, v) - std::conj(c) / std::abs(c) * 0.9 * inner(u, v)), 0.0, 1e-12);
    EXPECT_LE(std::abs(inner(u, v)), u.norm() * v.norm() + 1e-12);
  }
  EXPECT_THROW(inner(StateVector::basis({2, 0}, 0), StateVector::basis({4, 0}, 0)), ShapeError);
}

TEST(TraceDistance, Examples) {
  const RegisterShape s{2, 0};
  const auto e0 = DensityOperator::pure(StateVector::basis(s, 0));
  const auto e1 = DensityOperator::pure(StateVector::basis(s, 1));
  EXPECT_NEAR(trace_distance(e0, e0), 0.0, 1e-15);
  EXPECT_NEAR(trace_distance(e0, e1), 1.0, 1e-15);
  EXPECT_THROW(trace_distance(e0, DensityOperator::pure(StateVector::basis({4, 0}, 0))), ShapeError);
}

TEST(Fidelity, Examples) {
  const RegisterShape s{2, 0};
  const auto e0 = DensityOperator::pure(StateVector::basis(s, 0));
  const auto e1 = DensityOperator::pure(StateVector::basis(s, 1));
  EXPECT_NEAR(fidelity(e0, e0), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(e0, e1), 0.0, 1e-12);
  std::mt19937_64 rng(3);
  const auto rho = random_density({4, 0}, 3, rng);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
}

TEST(Fidelity, PureShortcutMatchesGeneralFormula) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const RegisterShape s{4, 0};
    const auto rho = random_density(s, 1 + trial % 4, rng);
    const StateVector psi(s, unit_vector(4, rng));
    EXPECT_NEAR(fidelity(rho, psi), fidelity(rho, DensityOperator::pure(psi)), 1e-9);
  }
}

TEST(Metrics, FuchsVanDeGraafSandwich) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 200; ++trial) {
    const RegisterShape s = kShapes[trial % 6];
    const int d = static_cast<int>(s.dim());
    const auto r = random_density(s, 1 + trial % d, rng);
    const auto q = random_density(s, 1 + (trial / 2) % d, rng);
    const double D = trace_distance(r, q), F = fidelity(r, q);
    EXPECT_GE(D, 1.0 - std::sqrt(F) - 1e-9) << "trial " << trial;
    EXPECT_LE(D, std::sqrt(1.0 - F) + 1e-9) << "trial " << trial;
  }
}

TEST(Metrics, SymmetricAndUnitarilyInvariant) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const RegisterShape s = kShapes[trial % 6];
    const auto d = static_cast<Eigen::Index>(s.dim());
    const auto r = random_density(s, 2, rng);
    const auto q = random_density(s, 1 + trial % 3, rng);
    const Matrix u = haar_unitary(d, rng);
    const DensityOperator ur(s, u * r.matrix() * u.adjoint()), uq(s, u * q.matrix() * u.adjoint());
    EXPECT_NEAR(trace_distance(r, q), trace_distance(q, r), 1e-9);
    EXPECT_NEAR(fidelity(r, q), fidelity(q, r), 1e-9);
    EXPECT_NEAR(trace_distance(r, q), trace_distance(ur, uq), 1e-9);
    EXPECT_NEAR(fidelity(r, q), fidelity(ur, uq), 1e-9);
  }
}

TEST(DensityOperator, Validation) {
  const RegisterShape s{2, 0};
  Matrix m(2, 2);
  m << 0.5, 0.1, 0.0, 0.5;
  EXPECT_THROW(DensityOperator(s, m), std::invalid_argument);
  m << 0.8, 0.0, 0.0, 0.8;
  EXPECT_THROW(DensityOperator(s, m), std::invalid_argument);
  m << 1.2, 0.0, 0.0, -0.2;
  EXPECT_THROW(DensityOperator(s, m), std::invalid_argument);
  m << 0.5, 0.0, 0.0, 0.5;
  EXPECT_NO_THROW(DensityOperator(s, m));
  EXPECT_THROW(DensityOperator(s, Matrix::Identity(3, 3) / 3.0), ShapeError);
}

TEST(AppendQubit, Examples) {
  const auto e = append_qubit(StateVector::basis({2, 0}, 0), 0);
  EXPECT_EQ(e.shape(), (RegisterShape{2, 1}));
  EXPECT_EQ(e.amplitudes().size(), 4);
  EXPECT_EQ(e.amplitude(0, 0), Complex(1.0));
  EXPECT_NEAR(e.norm(), 1.0, 1e-15);

  std::mt19937_64 rng(9);
  const StateVector v({4, 1}, unit_vector(8, rng) * 0.8);
  for (int b = 0; b <= 1; ++b) {
    const auto w = append_qubit(v, b);
    EXPECT_NEAR(w.norm(), v.norm(), 1e-12);
    // Nothing lives where the new qubit equals 1 − b.
    for (Eigen::Index p = 0; p < w.amplitudes().size(); ++p)
      if (static_cast<int>(p & 1) != b) {
        EXPECT_EQ(w.amplitudes()[p], Complex(0.0));
      }
  }
  EXPECT_THROW(append_qubit(v, 2), std::invalid_argument);
}

TEST(AppendQubit, PreservesInnerProducts) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const RegisterShape s = kShapes[trial % 6];
    const auto d = static_cast<Eigen::Index>(s.dim());
    const StateVector u(s, unit_vector(d, rng)), v(s, unit_vector(d, rng));
    const int b = trial % 2;
    EXPECT_NEAR(std::abs(inner(append_qubit(u, b), append_qubit(v, b)) - inner(u, v)), 0.0, 1e-12);
  }
}

TEST(EnsembleDensity, Examples) {
  const RegisterShape s{2, 0};
  const auto single = ensemble_density(BranchEnsemble::pure(StateVector::uniform(s)));
  EXPECT_NEAR((single.matrix() * single.matrix() - single.matrix()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(single.trace(), 1.0, 1e-12);

  BranchEnsemble mixed(s);
  mixed.add({0.5, StateVector::basis(s, 0), {}});
  mixed.add({0.5, StateVector::basis(s, 1), {}});
  const auto rho = ensemble_density(mixed);
  EXPECT_NEAR((rho.matrix() - Matrix::Identity(2, 2) * 0.5).norm(), 0.0, 1e-15);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-15);

  BranchEnsemble sub(s);
  Vector half(2);
  half << 0.6, 0.0;
  sub.add({0.5, StateVector(s, half), {}});
  EXPECT_NEAR(ensemble_density(sub).trace(), 0.5 * 0.36, 1e-15);
  EXPECT_THROW(sub.add({0.5, StateVector::basis({4, 0}, 0), {}}), ShapeError);
  EXPECT_THROW(sub.add({-0.1, StateVector::basis(s, 0), {}}), std::invalid_argument);
}
