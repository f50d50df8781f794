#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace wcps {

/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& M);

/// P with A'PA - P = -Q, by squared-series (Smith) doubling of
/// sum_k (A')^k Q A^k. Throws InstabilityError when rho(A) >= 1.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// ||A'PA - P + Q||_F / ||P||_F
double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& P);

/// How the per-step contraction factor of V(x) = x'Px is bounded.
enum class DecayEstimate {
  /// 1 - lambda_min(Q, P): the exact factor implied by A'PA = P - Q.
  generalized,
  /// 1 - lambda_min(Q) / lambda_max(P): never smaller; equal when Q = cI.
  conservative,
};

/// Lyapunov certificate for one mode's closed loop: A'PA <= decay * P.
struct ModeCertificate {
  int mode_id = -1;
  Eigen::MatrixXd closed_loop_A;
  double rho = 0.0;
  Eigen::MatrixXd P;
  double decay = 0.0;
};

/// Throws CertificationError if rho(A) >= 1 or Q is not positive definite.
ModeCertificate certify_mode(int mode_id, const Eigen::MatrixXd& closed_loop_A,
                             const Eigen::MatrixXd& Q,
                             DecayEstimate estimate = DecayEstimate::generalized);

inline ModeCertificate certify_mode(int mode_id, const Eigen::MatrixXd& closed_loop_A) {
  const auto n = closed_loop_A.rows();
  return certify_mode(mode_id, closed_loop_A, Eigen::MatrixXd::Identity(n, n));
}

/// Minimum number of rounds between switches for which the multiple-Lyapunov
/// argument guarantees convergence: mu * decay^tau_min <= 1.
struct DwellTimeBound {
  int tau_min = 1;
  double mu = 1.0;           // worst mismatch lambda_max(P_i, P_j) over ordered pairs
  double worst_decay = 0.0;  // largest per-mode decay factor
};

/// Throws CertificationError if a certificate is malformed (rho >= 1,
/// decay outside (0,1), or dimensions differ).
DwellTimeBound dwell_time_bound(std::span<const ModeCertificate> certs);

struct ModeActivation {
  int mode_id = 0;
  long round = 0;
};

struct Admissibility {
  bool admissible = true;
  std::optional<std::size_t> first_violation;  // index whose gap to its predecessor is short
};

/// Every consecutive activation gap must be >= tau_min (boundary inclusive).
Admissibility admissible(std::span<const ModeActivation> sequence, const DwellTimeBound& bound);

}  // namespace wcps
