#pragma once

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace wcps {

/// Every stochastic component draws from an explicit engine of this type.
using Rng = std::mt19937_64;

/// Physical parameters of a frictionless cart-pole.
struct PendulumParams {
  double cart_mass = 0.5;        // kg
  double pole_mass = 0.2;        // kg
  double pole_com_length = 0.3;  // m, pivot to pole centre of mass
  double gravity = 9.81;         // m/s^2
  double input_gain = 1.0;       // N per command unit
  std::array<double, 4> process_noise_std{1e-4, 1e-4, 1e-4, 1e-4};

  /// Throws ParameterError naming the first offending field.
  void validate() const;
};

/// x' = A x + B u in continuous time.
struct ContinuousLtiModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// x+ = A x + B u + w, w ~ N(0, W), sampled every sample_time seconds.
struct DiscreteLtiModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd W;
  double sample_time = 0.0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
};

/// Cart-pole state; theta = 0 is the upright equilibrium.
struct PlantState {
  double x = 0.0;      // cart position, m
  double v = 0.0;      // cart velocity, m/s
  double theta = 0.0;  // pole angle from upright, rad
  double omega = 0.0;  // pole angular velocity, rad/s

  Eigen::Vector4d vector() const { return {x, v, theta, omega}; }
  static PlantState from_vector(const Eigen::Ref<const Eigen::VectorXd>& s);
  bool finite() const;
  friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// Linearization about the upright equilibrium, state order (x, v, theta, omega).
ContinuousLtiModel linearize_cartpole(const PendulumParams& params);

/// Exact zero-order-hold discretization. W is attached unchanged (zero if empty).
DiscreteLtiModel discretize_zoh(const ContinuousLtiModel& cont, double sample_time,
                                const Eigen::MatrixXd& noise_covariance = {});

/// Diagonal covariance from per-state standard deviations.
Eigen::MatrixXd diagonal_covariance(const std::array<double, 4>& stddev);

/// One noisy step x+ = A x + B u + w. Draws from rng only if W is nonzero.
Eigen::VectorXd step(const DiscreteLtiModel& model, const Eigen::VectorXd& state,
                     const Eigen::VectorXd& input, Rng& rng);

PlantState step(const DiscreteLtiModel& model, const PlantState& state, double u, Rng& rng);

/// True when the pole has left the |theta| <= theta_max envelope.
inline bool exceeds_envelope(const PlantState& s, double theta_max) {
  return !(std::abs(s.theta) <= theta_max);
}

}  // namespace wcps
