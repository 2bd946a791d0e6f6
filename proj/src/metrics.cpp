#include "tdann/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "tdann/errors.hpp"

namespace tdann {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("pearson needs equal-length inputs");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw InvalidInputError("pearson needs at least 2 samples");
  }
  // One-pass co-moment accumulation (Welford style).
  double mean_x = 0.0, mean_y = 0.0, m2x = 0.0, m2y = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = 1.0 / static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    mean_x += dx * k;
    mean_y += dy * k;
    m2x += dx * (x[i] - mean_x);
    m2y += dy * (y[i] - mean_y);
    cxy += dx * (y[i] - mean_y);
  }
  if (m2x <= 0.0) {
    throw DegenerateSignalError("pearson is undefined for a zero-variance first input");
  }
  if (m2y <= 0.0) {
    throw DegenerateSignalError("pearson is undefined for a zero-variance second input");
  }
  double r = cxy / std::sqrt(m2x * m2y);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

void BaselineConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidInputError("gamma must be finite and non-negative");
  }
}

Eigen::VectorXd fit_fir_ridge(const DelayMatrix& X, const Eigen::VectorXd& targets,
                              const BaselineConfig& cfg) {
  cfg.validate();
  const Eigen::Index rows = X.values().rows();
  if (rows < 1) {
    throw InvalidInputError("fit_fir_ridge needs at least one row");
  }
  if (targets.size() != rows) {
    throw DimensionError("target length must equal the delay matrix row count");
  }
  const Eigen::Index p = X.values().cols() + 1;  // taps plus intercept

  Eigen::MatrixXd Xa(rows, p);
  Xa.leftCols(p - 1) = X.values();
  Xa.col(p - 1).setOnes();

  if (cfg.gamma == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xa);
    if (qr.rank() < p) {
      throw RankError(
          "tapped-delay regressors are rank-deficient at gamma = 0; use gamma > 0");
    }
    return qr.solve(targets);
  }

  // Normal equations with the intercept left unpenalized; SPD for gamma > 0.
  Eigen::MatrixXd A = Xa.transpose() * Xa;
  A.diagonal().head(p - 1).array() += cfg.gamma;
  Eigen::VectorXd b = Xa.transpose() * targets;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::VectorXd w = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    throw RankError("ridge normal equations could not be solved; try a larger gamma");
  }
  return w;
}

TimeSeries predict_fir(const Eigen::VectorXd& weights, const TimeSeries& input,
                       const DelayState& prime) {
  if (weights.size() < 2) {
    throw DimensionError("fir weights need at least one tap and an intercept");
  }
  const std::size_t d = static_cast<std::size_t>(weights.size()) - 2;
  if (prime.size() != d) {
    throw DimensionError("delay state length must equal the fir delay window");
  }
  const double intercept = weights(weights.size() - 1);
  std::vector<double> out(input.size());
  for_each_window(input.span(), prime.past(), d,
                  [&](std::size_t t, std::span<const double> window) {
                    double y = intercept;
                    for (std::size_t j = 0; j <= d; ++j) {
                      y += weights(static_cast<Eigen::Index>(j)) * window[j];
                    }
                    out[t] = y;
                  });
  return TimeSeries(std::move(out), input.sample_rate_hz(), "baseline");
}

nlohmann::json eval_report_to_json(const EvalReport& r) {
  return {{"corr", r.model_corr},
          {"mse", r.model_mse},
          {"baseline_corr", r.baseline_corr},
          {"baseline_mse", r.baseline_mse}};
}

EvalReport eval_report_from_json(const nlohmann::json& doc) {
  EvalReport r;
  try {
    r.model_corr = doc.at("corr").get<double>();
    r.model_mse = doc.at("mse").get<double>();
    r.baseline_corr = doc.at("baseline_corr").get<double>();
    r.baseline_mse = doc.at("baseline_mse").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

EvalReport evaluate(const TdannModel& model, const Eigen::VectorXd& baseline_weights,
                    const TimeSeries& test_input, const TimeSeries& test_output) {
  if (test_input.size() != test_output.size()) {
    throw DimensionError("test input and output must have equal length");
  }
  TimeSeries model_pred =
      predict_series(model, test_input, DelayState::from_input_head(test_input, model.d));
  const std::size_t baseline_d = static_cast<std::size_t>(baseline_weights.size()) - 2;
  TimeSeries baseline_pred = predict_fir(
      baseline_weights, test_input, DelayState::from_input_head(test_input, baseline_d));

  EvalReport r;
  r.model_corr = pearson(model_pred.span(), test_output.span());
  r.model_mse = mse(model_pred.span(), test_output.span());
  r.baseline_corr = pearson(baseline_pred.span(), test_output.span());
  r.baseline_mse = mse(baseline_pred.span(), test_output.span());
  return r;
}

}  // namespace tdann
