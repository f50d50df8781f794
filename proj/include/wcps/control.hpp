#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wcps/plant.hpp"
#include "wcps/tasks.hpp"

namespace wcps {

struct LqrWeights {
  Eigen::MatrixXd Q;  // symmetric PSD
  Eigen::MatrixXd R;  // symmetric PD

  void validate(Eigen::Index states, Eigen::Index inputs) const;
};

struct ControllerGain {
  Eigen::MatrixXd K;
  int mode_id = -1;  // -1: shared by every mode
};

struct DareOptions {
  double tolerance = 1e-12;            // relative Frobenius change between iterates
  std::size_t max_iterations = 1'000'000;
  double residual_tolerance = 1e-9;    // relative residual accepted on exit
};

/// Stabilizing solution of P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA by value
/// iteration from P0 = Q. Throws NoSolutionError if the iteration diverges,
/// hits the cap, or ends with a residual above options.residual_tolerance.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const DareOptions& options = {});

/// ||P - (Q + A'PA - A'PB(R+B'PB)^-1 B'PA)||_F / ||P||_F
double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

/// K = (R + B'PB)^-1 B'PA. Throws NumericalError if R + B'PB is singular or
/// A - BK is not Schur stable.
ControllerGain lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

/// Controller-side belief about one remote plant.
struct PredictorState {
  Eigen::VectorXd x_hat;                      // estimate of the state at last_update_round
  long last_update_round = -1;                // round of the last received measurement
  std::vector<Eigen::VectorXd> pending_inputs;  // released commands, oldest first
};

/// A^d x_hat + sum_i A^(d-1-i) B u_i over the first d pending inputs
/// (missing ones count as zero).
Eigen::VectorXd predict_state(const DiscreteLtiModel& model, const PredictorState& p, int d);

struct LawOptions {
  int max_loss_rounds = 10;   // L_max
  double cart_reference = 0.0;  // used when the task set tracks the operator reference
};

struct LawOutput {
  std::vector<double> commands;
  std::vector<std::size_t> stale;  // pendulums whose command was forced to zero
};

/// Per-pendulum commands for one mode. Stabilize: u = -K x; follower:
/// u = -K (x - (x_leader, 0, 0, 0)); parked pendulums get 0. A pendulum whose
/// estimate is older than max_loss_rounds gets 0 and is listed in `stale`.
LawOutput control_law(const TaskSet& tasks, std::span<const ControllerGain> gains,
                      std::span<const Eigen::VectorXd> estimates,
                      std::span<const int> staleness, const LawOptions& options = {});

}  // namespace wcps
