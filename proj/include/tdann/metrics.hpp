#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "tdann/network.hpp"
#include "tdann/signal.hpp"

namespace tdann {

// Sample Pearson correlation coefficient. Throws DegenerateSignalError when
// either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Ridge-regularized tapped-delay linear baseline.
struct BaselineConfig {
  double gamma = 1e-6;  // regularization weight on the non-intercept taps
  std::size_t d = 1;    // delay window

  void validate() const;
};

// Minimizes ||X w + b - targets||^2 + gamma ||w||^2 with the intercept b
// unpenalized. Returns [w_0 .. w_d, b], length d+2. gamma = 0 on a
// rank-deficient system raises RankError advising gamma > 0.
Eigen::VectorXd fit_fir_ridge(const DelayMatrix& X, const Eigen::VectorXd& targets,
                              const BaselineConfig& cfg);

// Applies a fitted [taps..., intercept] vector causally over a series, using
// the primed state for the first d outputs. Output length = input length.
TimeSeries predict_fir(const Eigen::VectorXd& weights, const TimeSeries& input,
                       const DelayState& prime);

struct EvalReport {
  double model_corr = 0.0;
  double model_mse = 0.0;
  double baseline_corr = 0.0;
  double baseline_mse = 0.0;
};

nlohmann::json eval_report_to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& doc);

// Predicts the test input with both the model and the fitted baseline
// weights, priming each from the input head, and scores them against the
// test output.
EvalReport evaluate(const TdannModel& model, const Eigen::VectorXd& baseline_weights,
                    const TimeSeries& test_input, const TimeSeries& test_output);

}  // namespace tdann
