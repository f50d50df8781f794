#include "wcps/control.hpp"

#include <cmath>
#include <string>

#include "wcps/errors.hpp"
#include "wcps/stability.hpp"

namespace wcps {

namespace {

bool is_symmetric(const Eigen::MatrixXd& M) {
  const double scale = std::max(1.0, M.norm());
  return (M - M.transpose()).norm() <= 1e-10 * scale;
}

}  // namespace

void LqrWeights::validate(Eigen::Index states, Eigen::Index inputs) const {
  if (Q.rows() != states || Q.cols() != states) throw ParameterError("Q", "must be n x n");
  if (R.rows() != inputs || R.cols() != inputs) throw ParameterError("R", "must be m x m");
  if (!is_symmetric(Q)) throw ParameterError("Q", "must be symmetric");
  if (!is_symmetric(R)) throw ParameterError("R", "must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(Q);
  if (qs.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.norm())) {
    throw ParameterError("Q", "must be positive semidefinite");
  }
  Eigen::LLT<Eigen::MatrixXd> rl(R);
  if (rl.info() != Eigen::Success) throw ParameterError("R", "must be positive definite");
}

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const DareOptions& options) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) throw ParameterError("A/B", "dimension mismatch");
  LqrWeights{Q, R}.validate(n, B.cols());

  Eigen::MatrixXd P = 0.5 * (Q + Q.transpose());
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd PA = P * A;
    const Eigen::MatrixXd BtPA = B.transpose() * PA;
    const Eigen::MatrixXd S = R + B.transpose() * P * B;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success) throw NoSolutionError("R + B'PB lost definiteness");
    // same fixed point as Q + A'PA - A'PB S^-1 B'PA, written as a sum of PSD
    // terms so it cannot lose definiteness to cancellation
    const Eigen::MatrixXd K = ldlt.solve(BtPA);
    const Eigen::MatrixXd Acl = A - B * K;
    Eigen::MatrixXd next = Q + K.transpose() * R * K + Acl.transpose() * P * Acl;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite() || next.norm() > 1e150) {
      throw NoSolutionError("Riccati iteration diverged after " + std::to_string(it + 1) +
                            " iterations (pair not stabilizable?)");
    }
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= options.tolerance * P.norm()) {
      const double residual = dare_residual(A, B, Q, R, P);
      if (residual > options.residual_tolerance) {
        throw NoSolutionError("Riccati iteration stalled with residual " +
                              std::to_string(residual));
      }
      return P;
    }
  }
  throw NoSolutionError("Riccati iteration hit the cap of " +
                        std::to_string(options.max_iterations) + " iterations");
}

double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtPA = B.transpose() * P * A;
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  const Eigen::MatrixXd rhs =
      Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
  const double scale = P.norm();
  const double diff = (P - rhs).norm();
  return scale > 0.0 ? diff / scale : diff;
}

ControllerGain lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) throw NumericalError("R + B'PB is singular");
  ControllerGain gain;
  gain.K = lu.solve(B.transpose() * P * A);
  const double rho = spectral_radius(A - B * gain.K);
  if (!(rho < 1.0)) {
    throw NumericalError("closed loop A - BK is not Schur stable (rho = " +
                         std::to_string(rho) + ")");
  }
  return gain;
}

Eigen::VectorXd predict_state(const DiscreteLtiModel& model, const PredictorState& p, int d) {
  Eigen::VectorXd x = p.x_hat;
  for (int i = 0; i < d; ++i) {
    x = model.A * x;
    if (static_cast<std::size_t>(i) < p.pending_inputs.size()) x += model.B * p.pending_inputs[i];
  }
  return x;
}

LawOutput control_law(const TaskSet& tasks, std::span<const ControllerGain> gains,
                      std::span<const Eigen::VectorXd> estimates,
                      std::span<const int> staleness, const LawOptions& options) {
  const std::size_t count = tasks.pendulum_count();
  if (gains.size() != count || estimates.size() != count || staleness.size() != count) {
    throw ParameterError("control_law", "gains, estimates and staleness need one entry per pendulum");
  }
  const auto leader = tasks.leader();

  LawOutput out;
  out.commands.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const Law law = tasks.laws[i];
    if (!is_actuated(law)) continue;
    if (staleness[i] > options.max_loss_rounds) {
      out.stale.push_back(i);
      continue;
    }
    Eigen::VectorXd error = estimates[i];
    if (law == Law::sync_follower) {
      error(0) -= estimates[*leader](0);
    } else if (tasks.track_cart_reference) {
      error(0) -= options.cart_reference;
    }
    out.commands[i] = -(gains[i].K.row(0) * error)(0);
  }
  return out;
}

}  // namespace wcps
