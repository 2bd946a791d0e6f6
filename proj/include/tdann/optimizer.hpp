#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tdann/network.hpp"
#include "tdann/signal.hpp"

namespace tdann {

struct LmConfig {
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double lambda_max = 1e10;
  std::size_t max_epochs = 200;
  // Stop when the infinity norm of J^T e falls at or below this.
  double grad_tol = 1e-7;
  // Stop when the mse falls at or below this; 0 disables.
  double mse_tol = 0.0;
  // Passed through to model initialization by callers; unused by the solver.
  std::uint64_t seed = 0;

  void validate() const;
};

enum class LmStop {
  kGradientConverged,
  kMseConverged,
  kMaxEpochs,
  kStalled,    // damping exceeded lambda_max without an acceptable step
  kNonFinite,  // residuals or Jacobian became non-finite; training aborted
};

const char* to_string(LmStop s);

struct LmEpoch {
  std::size_t epoch = 0;  // 1-based
  double mse = 0.0;       // mse after this epoch's accept/reject decision
  double lambda = 0.0;    // damping used for this epoch's solve
  double gradient_inf_norm = 0.0;
  bool step_accepted = false;
};

struct LmReport {
  std::vector<LmEpoch> epochs;
  LmStop termination_reason = LmStop::kMaxEpochs;
  double initial_mse = 0.0;
  double final_mse = 0.0;
};

nlohmann::json report_to_json(const LmReport& r);

// A nonlinear least-squares problem over a flat parameter vector.
struct LmProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> predict;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

// Damped Gauss-Newton loop. Each epoch solves
//   (J^T J + lambda * D) delta = J^T e,   e = targets - predictions,
// with D = diag(J^T J) when every diagonal entry exceeds 1e-12 and the
// identity otherwise. A step is accepted only when it strictly decreases the
// mse; rejected steps raise lambda. The returned parameters never score worse
// than theta0.
std::pair<Eigen::VectorXd, LmReport> lm_minimize(const LmProblem& problem,
                                                 Eigen::VectorXd theta0,
                                                 const Eigen::VectorXd& targets,
                                                 const LmConfig& cfg);

// Trains a TDANN on a delay matrix; targets are the aligned output samples.
std::pair<TdannModel, LmReport> lm_train(const TdannModel& m, const DelayMatrix& X,
                                         const Eigen::VectorXd& targets,
                                         const LmConfig& cfg);

double mse(std::span<const double> pred, std::span<const double> target);
double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

}  // namespace tdann
