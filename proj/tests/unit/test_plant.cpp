#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "wcps/errors.hpp"
#include "wcps/plant.hpp"

using namespace wcps;

namespace {

Eigen::VectorXcd eig(const Eigen::MatrixXd& A) { return Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues(); }

double max_real(const Eigen::MatrixXd& A) {
  const auto ev = eig(A);
  double m = -1e300;
  for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, ev(i).real());
  return m;
}

// Taylor series of exp(M) with scaling and squaring; independent of the library path.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& M) {
  int s = 0;
  double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2;
    ++s;
  }
  const Eigen::MatrixXd X = M / std::pow(2.0, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(M.rows(), M.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * X / k;
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST(Plant, DefaultLinearizationUnstableEigenvalue) {
  const auto c = linearize_cartpole({});
  // characteristic polynomial is s^2 (s^2 - (M+m) g / (M l)) for the default parameters
  const double expected = std::sqrt((0.5 + 0.2) * 9.81 / (0.5 * 0.3));
  EXPECT_NEAR(max_real(c.A), expected, 1e-9);
  EXPECT_NEAR(max_real(c.A), 6.766, 1e-3);
}

TEST(Plant, NoGravityIsDoubleIntegratorPair) {
  PendulumParams p;
  p.gravity = 0.0;
  const auto ev = eig(linearize_cartpole(p).A);
  for (Eigen::Index i = 0; i < ev.size(); ++i) EXPECT_NEAR(std::abs(ev(i)), 0.0, 1e-12);
}

TEST(Plant, SpectrumSymmetricAboutZero) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int t = 0; t < 50; ++t) {
    PendulumParams p;
    p.cart_mass = u(rng);
    p.pole_mass = u(rng);
    p.pole_com_length = u(rng);
    p.gravity = 9.81 * u(rng);
    const auto ev = eig(linearize_cartpole(p).A);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      double best = 1e300;
      for (Eigen::Index j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev(i) + ev(j)));
      EXPECT_LT(best, 1e-9);
    }
  }
}

TEST(Plant, InvalidParametersNameTheField) {
  PendulumParams p;
  p.pole_com_length = 0.0;
  try {
    linearize_cartpole(p);
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_EQ(e.field(), "pole_com_length");
  }
  p = {};
  p.cart_mass = -1.0;
  EXPECT_THROW(linearize_cartpole(p), ParameterError);
}

TEST(Plant, DoubleIntegratorDiscretization) {
  ContinuousLtiModel c{Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 1)};
  c.A << 0, 1, 0, 0;
  c.B << 0, 1;
  const auto d = discretize_zoh(c, 0.1);
  EXPECT_NEAR(d.A(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(d.A(0, 1), 0.1, 1e-14);
  EXPECT_NEAR(d.A(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(d.A(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(d.B(0), 0.005, 1e-14);
  EXPECT_NEAR(d.B(1), 0.1, 1e-14);
}

TEST(Plant, ZeroDynamicsDiscretization) {
  ContinuousLtiModel c{Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd(3, 1)};
  c.B << 1, -2, 0.5;
  const auto d = discretize_zoh(c, 0.3);
  EXPECT_TRUE(d.A.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  EXPECT_TRUE(d.B.isApprox(c.B * 0.3, 1e-14));
}

TEST(Plant, EigenvalueMappingAndSeriesOracle) {
  const auto c = linearize_cartpole({});
  const auto d = discretize_zoh(c, 0.05);
  const double rho = eig(d.A).cwiseAbs().maxCoeff();
  EXPECT_NEAR(rho, std::exp(max_real(c.A) * 0.05), 1e-9);
  EXPECT_NEAR(rho, 1.403, 1e-3);

  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(5, 5);
  aug.topLeftCorner(4, 4) = c.A * 0.05;
  aug.topRightCorner(4, 1) = c.B * 0.05;
  const Eigen::MatrixXd E = expm_taylor(aug);
  EXPECT_LT((E.topLeftCorner(4, 4) - d.A).norm(), 1e-11);
  EXPECT_LT((E.topRightCorner(4, 1) - d.B).norm(), 1e-11);
}

TEST(Plant, SemigroupProperty) {
  const auto c = linearize_cartpole({});
  const auto half = discretize_zoh(c, 0.025);
  const auto full = discretize_zoh(c, 0.05);
  EXPECT_LT((half.A * half.A - full.A).norm(), 1e-11);
  EXPECT_LT((half.A * half.B + half.B - full.B).norm(), 1e-11);
}

TEST(Plant, StepEquilibriumAndInput) {
  Rng rng(1);
  auto d = discretize_zoh(linearize_cartpole({}), 0.05);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  EXPECT_EQ(step(d, zero, Eigen::VectorXd::Zero(1), rng), zero);

  DiscreteLtiModel id{Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 1), {}, 0.05};
  id.B(0, 0) = 1.0;
  const auto next = step(id, PlantState{}, 2.0, rng);
  EXPECT_EQ(next, (PlantState{2.0, 0.0, 0.0, 0.0}));
}

TEST(Plant, NoiseIsSeedDeterministic) {
  const auto d = discretize_zoh(linearize_cartpole({}), 0.05, diagonal_covariance({1e-3, 1e-3, 1e-3, 1e-3}));
  auto roll = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PlantState> out;
    PlantState s{0, 0, 0.01, 0};
    for (int k = 0; k < 50; ++k) out.push_back(s = step(d, s, 0.0, rng));
    return out;
  };
  EXPECT_EQ(roll(3), roll(3));
  EXPECT_NE(roll(3), roll(4));
}

TEST(Plant, NoiseSampleCovariance) {
  DiscreteLtiModel d{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 1), Eigen::MatrixXd(4, 4), 0.05};
  d.W << 2.0, 0.5, 0, 0, 0.5, 1.0, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, 0.25;
  Rng rng(11);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd w = step(d, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(1), rng);
    acc += w * w.transpose();
  }
  EXPECT_LT((acc / n - d.W).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Plant, Envelope) {
  EXPECT_FALSE(exceeds_envelope({0, 0, 0.35, 0}, 0.35));
  EXPECT_TRUE(exceeds_envelope({0, 0, -0.36, 0}, 0.35));
  EXPECT_TRUE(exceeds_envelope({0, 0, std::nan(""), 0}, 0.35));
}
