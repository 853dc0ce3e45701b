#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtime/freefermion.hpp"
#include "qtime/hamiltonians.hpp"
#include "qtime/random_instances.hpp"

using namespace qtime;

namespace {

double coefficient_of(const PauliSum& h, const std::string& letters) {
  cplx c = 0.0;
  for (const auto& t : h.terms())
    if (t.letters() == letters) c += t.coefficient();
  return c.real();
}

}  // namespace

TEST(AubryAndre, TwoSiteOpenChain) {
  AubryAndreParams p{2, 4.0, 0.0, golden_alpha(), Boundary::Open};
  const PauliSum h = build_aubry_andre_spin(p);
  EXPECT_EQ(h.size(), 2u);
  EXPECT_DOUBLE_EQ(coefficient_of(h, "XX"), 1.0);
  EXPECT_DOUBLE_EQ(coefficient_of(h, "YY"), 1.0);
}

TEST(AubryAndre, PeriodicTermCountAndValidation) {
  AubryAndreParams p{3, 2.0, 0.0};
  EXPECT_EQ(build_aubry_andre_spin(p).size(), 6u);
  EXPECT_THROW(build_aubry_andre_spin(AubryAndreParams{2, 2.0, 0.0}), ValidationError);
  EXPECT_THROW(build_aubry_andre_spin(AubryAndreParams{3, 2.0, 0.0, 1.5}), ValidationError);
  EXPECT_THROW(build_aubry_andre_spin(AubryAndreParams{1, 2.0, 0.0, 0.5, Boundary::Open}), ValidationError);
}

TEST(AubryAndre, FieldTermsCarryIdentityShift) {
  AubryAndreParams p{3, 2.0, 1.0, golden_alpha(), Boundary::Open};
  const PauliSum h = build_aubry_andre_spin(p);
  double shift = 0.0;
  for (int j = 1; j <= 3; ++j) shift += p.lambda / 2 * p.field(j);
  EXPECT_NEAR(coefficient_of(h, "III"), shift, 1e-15);
  EXPECT_NEAR(coefficient_of(h, "IZI"), p.lambda / 4 * p.field(2), 1e-15);
}

// The one-excitation block of the spin model equals the fermionic hopping
// matrix with lambda_ff = lambda_spin / 2 plus the constant (lambda/4) sum cos.
TEST(AubryAndre, SingleExcitationSectorMatchesHoppingMatrix) {
  for (Boundary b : {Boundary::Periodic, Boundary::Open}) {
    AubryAndreParams p{4, 2.0, 1.0, golden_alpha(), b};
    const Matrix H = pauli_sum_to_matrix(build_aubry_andre_spin(p));
    const std::size_t all = 15;
    Matrix block(4, 4);
    for (int a = 1; a <= 4; ++a)
      for (int c = 1; c <= 4; ++c)
        block(a - 1, c - 1) = H(Eigen::Index(all ^ (1u << (4 - a))), Eigen::Index(all ^ (1u << (4 - c))));
    AubryAndreParams pf = p;
    pf.lambda = p.lambda / 2;
    double shift = 0.0;
    for (int j = 1; j <= 4; ++j) shift += p.lambda / 4 * p.field(j);
    const Matrix expect = build_hopping_matrix(pf).matrix + shift * Matrix::Identity(4, 4);
    EXPECT_LT(max_abs(block - expect), 1e-14);
    const auto e1 = hermitian_eig(block).eigenvalues, e2 = hermitian_eig(expect).eigenvalues;
    EXPECT_LT((e1 - e2).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(XYChain, BasicShapes) {
  XYParams p{2, {1.0}, {0.0}, {0.0, 0.0}};
  const PauliSum h = build_xy_spin(p);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms()[0].letters(), "XX");
  XYParams d{3, {0.0, 0.0}, {0.0, 0.0}, {0.3, -0.2, 0.5}};
  const Matrix m = pauli_sum_to_matrix(build_xy_spin(d));
  EXPECT_LT(max_abs(Matrix(m.diagonal().asDiagonal()) - m), 1e-15);
  XYParams bad{3, {1.0}, {0.0, 0.0}, {0.0, 0.0, 0.0}};
  EXPECT_THROW(build_xy_spin(bad), ValidationError);
}

TEST(XYChain, RandomParamsAreHermitian) {
  Philox rng(41);
  XYParams p{3, {}, {}, {}};
  for (int j = 0; j < 2; ++j) {
    p.ax.push_back(rng.normal());
    p.ay.push_back(rng.normal());
  }
  for (int j = 0; j < 3; ++j) p.az.push_back(rng.normal());
  const Matrix m = pauli_sum_to_matrix(build_xy_spin(p));
  EXPECT_LT(hermiticity_defect(m), 1e-15);
  EXPECT_TRUE(build_xy_spin(p).is_hermitian());
}

TEST(XYChain, AubryAndreTargetIsOpenAndTraceless) {
  AubryAndreParams p{4, 2.0, 1.5, golden_alpha(), Boundary::Periodic};
  const PauliSum h = build_xy_spin(aubry_andre_xy_params(p));
  EXPECT_NEAR(pauli_sum_to_matrix(h).trace().real(), 0.0, 1e-14);
  EXPECT_EQ(h.size(), 3u * 2u + 4u);
}

TEST(DephasedState, EigenstateAndEqualWeight) {
  PauliSum z(1);
  z.add(1.0, "Z");
  const auto rho = dephased_state(z, StateVector::plus(1));
  EXPECT_LT(max_abs(rho.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
  Philox rng(42);
  const Matrix H = random_hermitian(8, rng);
  const auto s = hermitian_eig(H);
  const StateVector eig(s.eigenvectors.col(3));
  const auto c = cluster_spectrum(s);
  EXPECT_LT(max_abs(dephased_state(c, eig).matrix() - DensityMatrix::from_pure(eig).matrix()), 1e-12);
}

TEST(DephasedState, CommutesWithHAndPurityIsSumOfFourthPowers) {
  Philox rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const PauliSum h = random_pauli_sum(3, 5, rng);
    const StateVector psi = random_state(3, rng);
    const auto c = cluster_spectrum(h);
    const Matrix H = pauli_sum_to_matrix(h);
    const DensityMatrix rho = dephased_state(c, psi);
    EXPECT_LT(max_abs(rho.matrix() * H - H * rho.matrix()), 1e-10);
    // independent grouping: eigenvalues within 1e-8 share a level
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Vector coeffs = es.eigenvectors().adjoint() * psi.amplitudes();
    std::vector<double> level_weight;
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
      if (k == 0 || es.eigenvalues()(k) - es.eigenvalues()(k - 1) > 1e-8) level_weight.push_back(0.0);
      level_weight.back() += std::norm(coeffs(k));
    }
    double s4 = 0.0;
    for (double w : level_weight) s4 += w * w;
    EXPECT_NEAR(purity(rho), s4, 1e-12);
    EXPECT_NEAR(loschmidt_bar(c, psi), s4, 1e-12);
    // fixed point: dephasing rho_bar in its own basis reproduces it
    Matrix again = Matrix::Zero(8, 8);
    for (std::size_t k = 0; k < c.size(); ++k) {
      Matrix P = Matrix::Zero(8, 8);
      for (auto i : c.members[k]) P += c.spectrum.eigenvectors.col(i) * c.spectrum.eigenvectors.col(i).adjoint();
      again += P * rho.matrix() * P;
    }
    EXPECT_LT(max_abs(again - rho.matrix()), 1e-12);
  }
}

TEST(DephasedState, DegenerateClustersUseProjectors) {
  PauliSum h(2);
  h.add(1.0, "ZI");  // doubly degenerate levels
  const StateVector psi = StateVector::plus(2);
  const auto c = cluster_spectrum(h);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_NEAR(loschmidt_bar(c, psi), 0.5, 1e-14);
}

TEST(DistinctEigenvalues, PeriodDetection) {
  PauliSum h(1);
  h.add(1.0, "Z").add(1.0, "I");
  const auto r = distinct_eigenvalue_count(h, 1e-10);
  EXPECT_EQ(r.M, 2);
  ASSERT_TRUE(r.tau.has_value());
  EXPECT_NEAR(*r.tau, kPi, 1e-12);

  PauliSum z2(2);
  z2.add(1.0, "ZI");
  EXPECT_EQ(distinct_eigenvalue_count(z2, 1e-10).M, 2);

  const PauliSum aa = build_aubry_andre_spin(AubryAndreParams{4, 2.0, 1.0});
  const auto q = distinct_eigenvalue_count(aa, 1e-8);
  EXPECT_GT(q.M, 2);
  EXPECT_FALSE(q.tau.has_value());
}

TEST(DistinctEigenvalues, CommensurateLevels) {
  PauliSum h(2);
  h.add(1.0, "ZI").add(0.5, "IZ");  // levels 1.5, 0.5, -0.5, -1.5
  const auto r = distinct_eigenvalue_count(h, 1e-10);
  EXPECT_EQ(r.M, 4);
  ASSERT_TRUE(r.tau.has_value());
  EXPECT_NEAR(*r.tau, 2 * kPi, 1e-10);
  const Matrix U = propagator(h, *r.tau);
  EXPECT_LT(max_abs(U - U(0, 0) * Matrix::Identity(4, 4)), 1e-10);
}
