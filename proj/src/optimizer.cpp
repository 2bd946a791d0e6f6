#include "tdann/optimizer.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "tdann/errors.hpp"

namespace tdann {

namespace {

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

double mse_of_residual(const Eigen::VectorXd& e) {
  return e.squaredNorm() / static_cast<double>(e.size());
}

}  // namespace

void LmConfig::validate() const {
  if (!(lambda_init > 0.0) || !(lambda_max > 0.0) || lambda_init > lambda_max) {
    throw InvalidInputError("lambda_init must lie in (0, lambda_max]");
  }
  if (!(lambda_up > 1.0) || !(lambda_down > 1.0)) {
    throw InvalidInputError("lambda_up and lambda_down must exceed 1");
  }
  if (max_epochs < 1) {
    throw InvalidInputError("max_epochs must be at least 1");
  }
  if (!(grad_tol >= 0.0) || !(mse_tol >= 0.0)) {
    throw InvalidInputError("tolerances must be non-negative");
  }
}

const char* to_string(LmStop s) {
  switch (s) {
    case LmStop::kGradientConverged: return "gradient_converged";
    case LmStop::kMseConverged: return "mse_converged";
    case LmStop::kMaxEpochs: return "max_epochs";
    case LmStop::kStalled: return "stalled";
    case LmStop::kNonFinite: return "non_finite";
  }
  return "unknown";
}

nlohmann::json report_to_json(const LmReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"mse", e.mse},
                      {"lambda", e.lambda},
                      {"gradient_inf_norm", e.gradient_inf_norm},
                      {"step_accepted", e.step_accepted}});
  }
  return {{"termination_reason", to_string(r.termination_reason)},
          {"initial_mse", r.initial_mse},
          {"final_mse", r.final_mse},
          {"epochs", std::move(epochs)}};
}

std::pair<Eigen::VectorXd, LmReport> lm_minimize(const LmProblem& problem,
                                                 Eigen::VectorXd theta0,
                                                 const Eigen::VectorXd& targets,
                                                 const LmConfig& cfg) {
  cfg.validate();
  if (targets.size() < 1) {
    throw InvalidInputError("lm_minimize needs at least one target sample");
  }

  LmReport report;
  Eigen::VectorXd theta = std::move(theta0);

  Eigen::VectorXd pred = problem.predict(theta);
  if (pred.size() != targets.size()) {
    throw DimensionError("prediction length does not match targets");
  }
  Eigen::VectorXd e = targets - pred;
  if (!finite(e)) {
    report.termination_reason = LmStop::kNonFinite;
    report.initial_mse = std::numeric_limits<double>::quiet_NaN();
    report.final_mse = report.initial_mse;
    return {theta, report};
  }
  double cur_mse = mse_of_residual(e);
  report.initial_mse = cur_mse;

  double lambda = cfg.lambda_init;
  report.termination_reason = LmStop::kMaxEpochs;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Eigen::MatrixXd J = problem.jacobian(theta);
    if (J.rows() != targets.size() ||
        static_cast<Eigen::Index>(J.cols()) != theta.size()) {
      throw DimensionError("jacobian shape does not match problem dimensions");
    }
    if (!J.allFinite()) {
      report.epochs.push_back({epoch, cur_mse, lambda, 0.0, false});
      report.termination_reason = LmStop::kNonFinite;
      break;
    }

    Eigen::VectorXd g = J.transpose() * e;
    const double g_inf = g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    if (g_inf <= cfg.grad_tol) {
      report.epochs.push_back({epoch, cur_mse, lambda, g_inf, false});
      report.termination_reason = LmStop::kGradientConverged;
      break;
    }
    if (cfg.mse_tol > 0.0 && cur_mse <= cfg.mse_tol) {
      report.epochs.push_back({epoch, cur_mse, lambda, g_inf, false});
      report.termination_reason = LmStop::kMseConverged;
      break;
    }

    Eigen::MatrixXd H(theta.size(), theta.size());
    H.setZero();
    H.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
    Eigen::VectorXd damping = H.diagonal();
    if ((damping.array() <= 1e-12).any()) {
      damping.setOnes();  // Marquardt scaling would make the system singular
    }

    Eigen::MatrixXd A = H.selfadjointView<Eigen::Lower>();
    A.diagonal() += lambda * damping;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    bool accepted = false;
    double trial_mse = cur_mse;

    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd delta = ldlt.solve(g);
      if (finite(delta)) {
        Eigen::VectorXd theta_try = theta + delta;
        Eigen::VectorXd pred_try = problem.predict(theta_try);
        if (finite(pred_try)) {
          Eigen::VectorXd e_try = targets - pred_try;
          trial_mse = mse_of_residual(e_try);
          if (std::isfinite(trial_mse) && trial_mse < cur_mse) {
            accepted = true;
            theta = std::move(theta_try);
            e = std::move(e_try);
            cur_mse = trial_mse;
          }
        }
      }
    }

    report.epochs.push_back({epoch, cur_mse, lambda, g_inf, accepted});

    if (accepted) {
      lambda /= cfg.lambda_down;
    } else {
      lambda *= cfg.lambda_up;
      if (lambda > cfg.lambda_max) {
        report.termination_reason = LmStop::kStalled;
        break;
      }
    }
  }

  report.final_mse = cur_mse;
  return {theta, report};
}

std::pair<TdannModel, LmReport> lm_train(const TdannModel& m, const DelayMatrix& X,
                                         const Eigen::VectorXd& targets,
                                         const LmConfig& cfg) {
  m.validate();
  if (static_cast<std::size_t>(targets.size()) != X.rows()) {
    throw DimensionError("target length must equal the delay matrix row count");
  }
  if (X.cols() != m.d + 1) {
    throw DimensionError("delay matrix width does not match the model's window");
  }
  if (!targets.allFinite() || !X.values().allFinite()) {
    throw InvalidInputError("training data must be finite");
  }

  TdannModel scratch = m;
  LmProblem problem{
      [&](const Eigen::VectorXd& theta) {
        scratch.unpack(theta);
        return predict_matrix(scratch, X);
      },
      [&](const Eigen::VectorXd& theta) {
        scratch.unpack(theta);
        return jacobian(scratch, X);
      },
  };
  auto [theta, report] = lm_minimize(problem, m.pack(), targets, cfg);
  TdannModel trained = m;
  trained.unpack(theta);
  return {std::move(trained), std::move(report)};
}

double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw DimensionError("mse needs equal-length inputs");
  }
  if (pred.empty()) {
    throw InvalidInputError("mse needs at least one sample");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    s += diff * diff;
  }
  return s / static_cast<double>(pred.size());
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  return mse(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
             std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
}

}  // namespace tdann
