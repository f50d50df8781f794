#include "wcps/plant.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "wcps/errors.hpp"

namespace wcps {

void PendulumParams::validate() const {
  auto positive = [](double value, const char* field) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw ParameterError(field, "must be finite and > 0, got " + std::to_string(value));
    }
  };
  positive(cart_mass, "cart_mass");
  positive(pole_mass, "pole_mass");
  positive(pole_com_length, "pole_com_length");
  positive(gravity, "gravity");
  if (!std::isfinite(input_gain)) throw ParameterError("input_gain", "must be finite");
  for (double s : process_noise_std) {
    if (!(std::isfinite(s) && s >= 0.0)) {
      throw ParameterError("process_noise_std", "entries must be finite and >= 0");
    }
  }
}

PlantState PlantState::from_vector(const Eigen::Ref<const Eigen::VectorXd>& s) {
  return PlantState{s(0), s(1), s(2), s(3)};
}

bool PlantState::finite() const {
  return std::isfinite(x) && std::isfinite(v) && std::isfinite(theta) && std::isfinite(omega);
}

ContinuousLtiModel linearize_cartpole(const PendulumParams& params) {
  // Gravity is allowed to be zero here (rigid double-integrator pair) even
  // though validate() rejects it for simulation configs.
  const double M = params.cart_mass;
  const double m = params.pole_mass;
  const double l = params.pole_com_length;
  const double g = params.gravity;
  if (!(M > 0.0)) throw ParameterError("cart_mass", "must be > 0");
  if (!(m > 0.0)) throw ParameterError("pole_mass", "must be > 0");
  if (!(l > 0.0)) throw ParameterError("pole_com_length", "must be > 0");
  if (!(g >= 0.0) || !std::isfinite(g)) throw ParameterError("gravity", "must be finite and >= 0");

  ContinuousLtiModel out;
  out.A = Eigen::MatrixXd::Zero(4, 4);
  out.A(0, 1) = 1.0;
  out.A(1, 2) = -m * g / M;
  out.A(2, 3) = 1.0;
  out.A(3, 2) = (M + m) * g / (M * l);
  out.B = Eigen::MatrixXd::Zero(4, 1);
  out.B(1, 0) = params.input_gain / M;
  out.B(3, 0) = -params.input_gain / (M * l);
  return out;
}

DiscreteLtiModel discretize_zoh(const ContinuousLtiModel& cont, double sample_time,
                                const Eigen::MatrixXd& noise_covariance) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw ParameterError("sample_time", "must be finite and > 0");
  }
  const Eigen::Index n = cont.A.rows();
  const Eigen::Index m = cont.B.cols();
  if (cont.A.cols() != n || cont.B.rows() != n) {
    throw ParameterError("model", "A must be square and B must have as many rows as A");
  }

  // exp([[A, B], [0, 0]] T) = [[Ad, Bd], [0, I]]
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = cont.A * sample_time;
  aug.topRightCorner(n, m) = cont.B * sample_time;
  const Eigen::MatrixXd expd = aug.exp();

  DiscreteLtiModel out;
  out.A = expd.topLeftCorner(n, n);
  out.B = expd.topRightCorner(n, m);
  out.W = noise_covariance.size() == 0 ? Eigen::MatrixXd::Zero(n, n) : noise_covariance;
  out.sample_time = sample_time;
  if (!out.A.allFinite() || !out.B.allFinite()) {
    throw NumericalError("zero-order-hold discretization produced non-finite entries");
  }
  if (out.W.rows() != n || out.W.cols() != n) {
    throw ParameterError("noise_covariance", "must be n x n");
  }
  return out;
}

Eigen::MatrixXd diagonal_covariance(const std::array<double, 4>& stddev) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) w(i, i) = stddev[i] * stddev[i];
  return w;
}

namespace {

// Square-root factor L with L L' = W.
Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd off = w - Eigen::MatrixXd(w.diagonal().asDiagonal());
  if (off.isZero(0.0)) {
    return w.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

Eigen::VectorXd step(const DiscreteLtiModel& model, const Eigen::VectorXd& state,
                     const Eigen::VectorXd& input, Rng& rng) {
  Eigen::VectorXd next = model.A * state + model.B * input;
  if (!model.W.isZero(0.0)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(state.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    next += noise_factor(model.W) * z;
  }
  return next;
}

PlantState step(const DiscreteLtiModel& model, const PlantState& state, double u, Rng& rng) {
  Eigen::VectorXd input(1);
  input(0) = u;
  return PlantState::from_vector(step(model, Eigen::VectorXd(state.vector()), input, rng));
}

}  // namespace wcps
