#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "tdann/signal.hpp"

namespace tdann {

enum class Activation { kSigmoid, kLinear };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Feedforward tapped-delay network: one input, N sigmoid hidden neurons over
// the current sample plus d lags, one linear output neuron.
//
// Parameter flattening order (used by pack/unpack, the Jacobian columns and
// the optimizer): w_in row-major, b_hidden, w_out, b_out.
struct TdannModel {
  std::size_t d = 0;
  std::size_t n_hidden = 1;
  Eigen::MatrixXd w_in;     // n_hidden x (d+1), column j weights lag j
  Eigen::VectorXd b_hidden; // n_hidden
  Eigen::VectorXd w_out;    // n_hidden
  double b_out = 0.0;
  Activation hidden_activation = Activation::kSigmoid;
  Activation output_activation = Activation::kLinear;

  // Throws DimensionError / InvalidInputError when shapes disagree or any
  // parameter is non-finite.
  void validate() const;

  std::size_t parameter_count() const noexcept {
    return n_hidden * (d + 1) + 2 * n_hidden + 1;
  }

  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& theta);
};

// The d most recent past input samples, newest first: past[0] is the sample
// immediately before the series being predicted.
class DelayState {
 public:
  DelayState(std::vector<double> past);

  static DelayState zeros(std::size_t d);
  // Fig-2-style priming: the first d samples of the series itself serve as
  // its pre-history (reversed so the d-th sample is the newest past value).
  static DelayState from_input_head(const TimeSeries& ts, std::size_t d);

  std::span<const double> past() const noexcept { return past_; }
  std::size_t size() const noexcept { return past_.size(); }

 private:
  std::vector<double> past_;
};

// Deterministic initialization: weights uniform in [-r, r] with
// r = 1/sqrt(d+1) for w_in and r = 1/sqrt(N) for w_out, biases zero.
// Draw order: w_in row-major, then w_out.
TdannModel init_model(std::size_t d, std::size_t n_hidden, std::uint64_t seed);

// window is newest first: [u(t), u(t-1), ..., u(t-d)], length d+1.
double forward(const TdannModel& m, std::span<const double> window);

// Batch forward over the rows of a delay matrix.
Eigen::VectorXd predict_matrix(const TdannModel& m, const DelayMatrix& X);

// Causal prediction over a whole series; windows for t <= d borrow from the
// primed state. Output length equals input length.
TimeSeries predict_series(const TdannModel& m, const TimeSeries& input,
                          const DelayState& prime);

// Row t = d(prediction at row t of X)/d(theta), analytic. Columns follow the
// flattening order documented on TdannModel.
Eigen::MatrixXd jacobian(const TdannModel& m, const DelayMatrix& X);

// JSON model document, schema_version 1. Numbers round-trip exactly; loading
// rejects unknown schema versions.
nlohmann::json model_to_json(const TdannModel& m, const nlohmann::json& training_metadata);
TdannModel model_from_json(const nlohmann::json& doc);

void save_model(const TdannModel& m, const std::filesystem::path& path,
                const nlohmann::json& training_metadata);
TdannModel load_model(const std::filesystem::path& path);

}  // namespace tdann
