#include "wcps/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcps/errors.hpp"

namespace wcps {

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& P) {
  const double diff = (A.transpose() * P * A - P + Q).norm();
  const double scale = P.norm();
  return scale > 0.0 ? diff / scale : diff;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw ParameterError("A/Q", "must be square and of equal size");
  }
  const double rho = spectral_radius(A);
  if (!(rho < 1.0)) {
    throw InstabilityError("Lyapunov equation needs rho(A) < 1, got " + std::to_string(rho));
  }

  // After k doublings P holds the first 2^k series terms and Ak = A^(2^k).
  Eigen::MatrixXd P = Q;
  Eigen::MatrixXd Ak = A;
  for (int k = 0; k < 200; ++k) {
    const Eigen::MatrixXd term = Ak.transpose() * P * Ak;
    P += term;
    Ak = Ak * Ak;
    if (term.norm() <= 1e-17 * P.norm() && Ak.norm() < 1e-8) break;
    if (!P.allFinite()) throw NumericalError("Lyapunov series overflowed");
  }
  P = 0.5 * (P + P.transpose());
  // One residual-correction pass with the same series mops up rounding.
  const Eigen::MatrixXd defect = A.transpose() * P * A - P + Q;
  if (defect.norm() > 1e-14 * P.norm()) {
    Eigen::MatrixXd D = defect;
    Eigen::MatrixXd Bk = A;
    for (int k = 0; k < 200; ++k) {
      const Eigen::MatrixXd term = Bk.transpose() * D * Bk;
      D += term;
      Bk = Bk * Bk;
      if (term.norm() <= 1e-17 * std::max(D.norm(), 1e-300) && Bk.norm() < 1e-8) break;
    }
    P += 0.5 * (D + D.transpose());
  }
  return P;
}

ModeCertificate certify_mode(int mode_id, const Eigen::MatrixXd& closed_loop_A,
                             const Eigen::MatrixXd& Q, DecayEstimate estimate) {
  ModeCertificate cert;
  cert.mode_id = mode_id;
  cert.closed_loop_A = closed_loop_A;
  cert.rho = spectral_radius(closed_loop_A);
  if (!(cert.rho < 1.0)) {
    throw CertificationError(mode_id, "closed-loop spectral radius " + std::to_string(cert.rho) +
                                          " >= 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(Q, Eigen::EigenvaluesOnly);
  if (Q.size() > 0 && !(qs.eigenvalues().minCoeff() > 0.0)) {
    throw CertificationError(mode_id, "Lyapunov weight Q must be positive definite");
  }
  cert.P = solve_discrete_lyapunov(closed_loop_A, Q);

  double decay = 0.0;
  if (Q.size() > 0) {
    if (estimate == DecayEstimate::generalized) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Q, cert.P,
                                                                    Eigen::EigenvaluesOnly);
      decay = 1.0 - ges.eigenvalues().minCoeff();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(cert.P, Eigen::EigenvaluesOnly);
      decay = 1.0 - qs.eigenvalues().minCoeff() / ps.eigenvalues().maxCoeff();
    }
  }
  constexpr double kFloor = 1e-12;
  if (!(decay < 1.0)) throw CertificationError(mode_id, "no strict Lyapunov decrease");
  cert.decay = std::clamp(decay, kFloor, 1.0 - 1e-15);
  return cert;
}

DwellTimeBound dwell_time_bound(std::span<const ModeCertificate> certs) {
  DwellTimeBound bound;
  if (certs.empty()) return bound;
  const Eigen::Index n = certs.front().P.rows();
  for (const auto& c : certs) {
    if (!(c.rho < 1.0) || !(c.decay > 0.0 && c.decay < 1.0)) {
      throw CertificationError(c.mode_id, "uncertified mode in dwell-time analysis");
    }
    if (c.P.rows() != n) throw CertificationError(c.mode_id, "state dimension differs");
    bound.worst_decay = std::max(bound.worst_decay, c.decay);
  }
  for (const auto& ci : certs) {
    for (const auto& cj : certs) {
      if (&ci == &cj || n == 0) continue;
      // largest lambda with P_i v = lambda P_j v, i.e. sup V_i / V_j
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(ci.P, cj.P,
                                                                    Eigen::EigenvaluesOnly);
      bound.mu = std::max(bound.mu, ges.eigenvalues().maxCoeff());
    }
  }
  const double ratio = std::log(bound.mu) / std::log(1.0 / bound.worst_decay);
  bound.tau_min = std::max(1, static_cast<int>(std::ceil(ratio)));
  return bound;
}

Admissibility admissible(std::span<const ModeActivation> sequence, const DwellTimeBound& bound) {
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    if (sequence[i].round - sequence[i - 1].round < bound.tau_min) {
      return {false, i};
    }
  }
  return {};
}

}  // namespace wcps
