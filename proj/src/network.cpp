#include "tdann/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rng_util.hpp"
#include "tdann/errors.hpp"

namespace tdann {

namespace {

using detail::uniform_in;

constexpr int kModelSchemaVersion = 1;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::ArrayXd activate(const Eigen::ArrayXd& z, Activation a) {
  if (a == Activation::kSigmoid) {
    return 1.0 / (1.0 + (-z).exp());
  }
  return z;
}

}  // namespace

const char* to_string(Activation a) {
  return a == Activation::kSigmoid ? "sigmoid" : "linear";
}

Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "linear") return Activation::kLinear;
  throw SchemaError("unknown activation tag: " + s);
}

void TdannModel::validate() const {
  if (n_hidden < 1) {
    throw InvalidInputError("model needs at least one hidden neuron");
  }
  const auto n = static_cast<Eigen::Index>(n_hidden);
  const auto cols = static_cast<Eigen::Index>(d + 1);
  if (w_in.rows() != n || w_in.cols() != cols || b_hidden.size() != n || w_out.size() != n) {
    throw DimensionError("model parameter shapes are inconsistent");
  }
  if (!w_in.allFinite() || !b_hidden.allFinite() || !w_out.allFinite() ||
      !std::isfinite(b_out)) {
    throw InvalidInputError("model parameters must be finite");
  }
}

Eigen::VectorXd TdannModel::pack() const {
  Eigen::VectorXd theta(parameter_count());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < w_in.rows(); ++i) {
    for (Eigen::Index j = 0; j < w_in.cols(); ++j) theta(k++) = w_in(i, j);
  }
  theta.segment(k, b_hidden.size()) = b_hidden;
  k += b_hidden.size();
  theta.segment(k, w_out.size()) = w_out;
  k += w_out.size();
  theta(k) = b_out;
  return theta;
}

void TdannModel::unpack(const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
    throw DimensionError("parameter vector length does not match the model");
  }
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < w_in.rows(); ++i) {
    for (Eigen::Index j = 0; j < w_in.cols(); ++j) w_in(i, j) = theta(k++);
  }
  b_hidden = theta.segment(k, b_hidden.size());
  k += b_hidden.size();
  w_out = theta.segment(k, w_out.size());
  k += w_out.size();
  b_out = theta(k);
}

DelayState::DelayState(std::vector<double> past) : past_(std::move(past)) {
  for (double v : past_) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("delay state values must be finite");
    }
  }
}

DelayState DelayState::zeros(std::size_t d) { return DelayState(std::vector<double>(d, 0.0)); }

DelayState DelayState::from_input_head(const TimeSeries& ts, std::size_t d) {
  if (ts.size() < d) {
    throw RangeError("series shorter than the delay window cannot prime it");
  }
  std::vector<double> past(d);
  for (std::size_t j = 0; j < d; ++j) {
    past[j] = ts[d - 1 - j];  // sample d is the newest past value
  }
  return DelayState(std::move(past));
}

TdannModel init_model(std::size_t d, std::size_t n_hidden, std::uint64_t seed) {
  if (n_hidden < 1) {
    throw InvalidInputError("init_model needs n_hidden >= 1");
  }
  TdannModel m;
  m.d = d;
  m.n_hidden = n_hidden;
  m.w_in.resize(static_cast<Eigen::Index>(n_hidden), static_cast<Eigen::Index>(d + 1));
  m.b_hidden = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_hidden));
  m.w_out.resize(static_cast<Eigen::Index>(n_hidden));
  m.b_out = 0.0;

  std::mt19937_64 rng(seed);
  const double r_in = 1.0 / std::sqrt(static_cast<double>(d + 1));
  const double r_out = 1.0 / std::sqrt(static_cast<double>(n_hidden));
  for (Eigen::Index i = 0; i < m.w_in.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w_in.cols(); ++j) m.w_in(i, j) = uniform_in(rng, r_in);
  }
  for (Eigen::Index i = 0; i < m.w_out.size(); ++i) m.w_out(i) = uniform_in(rng, r_out);
  return m;
}

double forward(const TdannModel& m, std::span<const double> window) {
  if (window.size() != m.d + 1) {
    throw DimensionError("forward expects a window of d+1 samples");
  }
  const Eigen::Map<const Eigen::VectorXd> x(window.data(),
                                            static_cast<Eigen::Index>(window.size()));
  Eigen::ArrayXd z = (m.w_in * x + m.b_hidden).array();
  Eigen::ArrayXd a = activate(z, m.hidden_activation);
  double y = m.b_out + m.w_out.dot(a.matrix());
  if (m.output_activation == Activation::kSigmoid) y = sigmoid(y);
  return y;
}

Eigen::VectorXd predict_matrix(const TdannModel& m, const DelayMatrix& X) {
  if (X.cols() != m.d + 1) {
    throw DimensionError("delay matrix width does not match the model's window");
  }
  Eigen::MatrixXd z = X.values() * m.w_in.transpose();
  z.rowwise() += m.b_hidden.transpose();
  Eigen::MatrixXd a = m.hidden_activation == Activation::kSigmoid
                          ? (1.0 / (1.0 + (-z.array()).exp())).matrix()
                          : z;
  Eigen::VectorXd y = (a * m.w_out).array() + m.b_out;
  if (m.output_activation == Activation::kSigmoid) {
    y = (1.0 / (1.0 + (-y.array()).exp())).matrix();
  }
  return y;
}

TimeSeries predict_series(const TdannModel& m, const TimeSeries& input,
                          const DelayState& prime) {
  if (prime.size() != m.d) {
    throw DimensionError("delay state length must equal the model's delay window");
  }
  std::vector<double> out(input.size());
  for_each_window(input.span(), prime.past(), m.d,
                  [&](std::size_t t, std::span<const double> window) {
                    out[t] = forward(m, window);
                  });
  return TimeSeries(std::move(out), input.sample_rate_hz(), "predicted");
}

Eigen::MatrixXd jacobian(const TdannModel& m, const DelayMatrix& X) {
  if (X.cols() != m.d + 1) {
    throw DimensionError("delay matrix width does not match the model's window");
  }
  const Eigen::Index rows = X.values().rows();
  const Eigen::Index n = static_cast<Eigen::Index>(m.n_hidden);
  const Eigen::Index w = static_cast<Eigen::Index>(m.d + 1);

  Eigen::MatrixXd z = X.values() * m.w_in.transpose();
  z.rowwise() += m.b_hidden.transpose();
  Eigen::MatrixXd a(rows, n);
  Eigen::MatrixXd da(rows, n);  // activation derivative
  if (m.hidden_activation == Activation::kSigmoid) {
    a = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    da = (a.array() * (1.0 - a.array())).matrix();
  } else {
    a = z;
    da.setOnes();
  }

  Eigen::MatrixXd J(rows, static_cast<Eigen::Index>(m.parameter_count()));
  for (Eigen::Index i = 0; i < n; ++i) {
    // d y / d z_i, shared by the w_in row and the hidden bias columns
    Eigen::ArrayXd gi = m.w_out(i) * da.col(i).array();
    for (Eigen::Index j = 0; j < w; ++j) {
      J.col(i * w + j) = (gi * X.values().col(j).array()).matrix();
    }
    J.col(n * w + i) = gi.matrix();        // hidden bias
    J.col(n * w + n + i) = a.col(i);       // output weight
  }
  J.col(n * w + 2 * n).setOnes();          // output bias
  return J;
}

nlohmann::json model_to_json(const TdannModel& m, const nlohmann::json& training_metadata) {
  m.validate();
  nlohmann::json w_in = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.w_in.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.w_in.cols(); ++j) row.push_back(m.w_in(i, j));
    w_in.push_back(std::move(row));
  }
  nlohmann::json doc{
      {"schema_version", kModelSchemaVersion},
      {"d", m.d},
      {"n_hidden", m.n_hidden},
      {"hidden_activation", to_string(m.hidden_activation)},
      {"output_activation", to_string(m.output_activation)},
      // window and w_in columns are ordered newest first: column j is lag j
      {"window_order", "newest_first"},
      {"w_in", std::move(w_in)},
      {"b_hidden", std::vector<double>(m.b_hidden.data(), m.b_hidden.data() + m.b_hidden.size())},
      {"w_out", std::vector<double>(m.w_out.data(), m.w_out.data() + m.w_out.size())},
      {"b_out", m.b_out},
  };
  doc["training_metadata"] = training_metadata.is_null() ? nlohmann::json::object()
                                                         : training_metadata;
  return doc;
}

TdannModel model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw SchemaError("model document is missing schema_version");
  }
  if (doc.at("schema_version").get<int>() != kModelSchemaVersion) {
    throw SchemaError("unsupported model schema_version " +
                      doc.at("schema_version").dump());
  }
  TdannModel m;
  try {
    m.d = doc.at("d").get<std::size_t>();
    m.n_hidden = doc.at("n_hidden").get<std::size_t>();
    m.hidden_activation = activation_from_string(doc.at("hidden_activation").get<std::string>());
    m.output_activation = activation_from_string(doc.at("output_activation").get<std::string>());
    const auto& w_in = doc.at("w_in");
    m.w_in.resize(static_cast<Eigen::Index>(m.n_hidden), static_cast<Eigen::Index>(m.d + 1));
    if (w_in.size() != m.n_hidden) throw SchemaError("w_in row count mismatch");
    for (std::size_t i = 0; i < m.n_hidden; ++i) {
      const auto& row = w_in.at(i);
      if (row.size() != m.d + 1) throw SchemaError("w_in column count mismatch");
      for (std::size_t j = 0; j <= m.d; ++j) {
        m.w_in(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            row.at(j).get<double>();
      }
    }
    auto b_hidden = doc.at("b_hidden").get<std::vector<double>>();
    auto w_out = doc.at("w_out").get<std::vector<double>>();
    m.b_hidden = Eigen::Map<const Eigen::VectorXd>(b_hidden.data(),
                                                   static_cast<Eigen::Index>(b_hidden.size()));
    m.w_out = Eigen::Map<const Eigen::VectorXd>(w_out.data(),
                                                static_cast<Eigen::Index>(w_out.size()));
    m.b_out = doc.at("b_out").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model document: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const TdannModel& m, const std::filesystem::path& path,
                const nlohmann::json& training_metadata) {
  std::ofstream out(path);
  if (!out) {
    throw FileError("cannot open model file for writing: " + path.string());
  }
  out << model_to_json(m, training_metadata).dump(2) << "\n";
}

TdannModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileError("cannot open model file: " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace tdann
