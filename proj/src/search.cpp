#include "tdann/search.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "rng_util.hpp"
#include "tdann/errors.hpp"
#include "tdann/metrics.hpp"

namespace tdann {

namespace {

struct ConfigKey {
  std::size_t n_index;  // position in the neurons vector
  std::size_t d;
  std::size_t restart;

  auto operator<=>(const ConfigKey&) const = default;
};

std::optional<double> json_opt(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

std::vector<std::size_t> SearchSpace::default_neurons() {
  std::vector<std::size_t> n;
  for (std::size_t i = 1; i <= 20; ++i) n.push_back(i);
  n.push_back(40);
  n.push_back(80);
  n.push_back(100);
  return n;
}

void SearchSpace::validate() const {
  if (neurons.empty()) {
    throw InvalidInputError("search space needs a non-empty neurons list");
  }
  for (std::size_t n : neurons) {
    if (n < 1) throw InvalidInputError("hidden-layer sizes must be >= 1");
  }
  if (d_max < 1) {
    throw InvalidInputError("d_max must be at least 1");
  }
  if (restarts_per_config < 1) {
    throw InvalidInputError("restarts_per_config must be at least 1");
  }
}

nlohmann::json outcome_to_json(const ConfigOutcome& o) {
  nlohmann::json doc{{"n", o.n},
                     {"d", o.d},
                     {"restart", o.restart},
                     {"seed", o.seed},
                     {"lm_termination", o.lm_termination},
                     {"note", o.note}};
  doc["train_mse"] = o.train_mse ? nlohmann::json(*o.train_mse) : nlohmann::json();
  doc["test_corr"] = o.test_corr ? nlohmann::json(*o.test_corr) : nlohmann::json();
  doc["val_corr"] = o.validation_corr ? nlohmann::json(*o.validation_corr) : nlohmann::json();
  return doc;
}

ConfigOutcome outcome_from_json(const nlohmann::json& doc) {
  ConfigOutcome o;
  try {
    o.n = doc.at("n").get<std::size_t>();
    o.d = doc.at("d").get<std::size_t>();
    o.restart = doc.at("restart").get<std::size_t>();
    o.seed = doc.at("seed").get<std::uint64_t>();
    o.lm_termination = doc.at("lm_termination").get<std::string>();
    o.note = doc.value("note", std::string{});
    o.train_mse = json_opt(doc, "train_mse");
    o.test_corr = json_opt(doc, "test_corr");
    o.validation_corr = json_opt(doc, "val_corr");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed run-log record: ") + e.what());
  }
  return o;
}

std::uint64_t seed_for(std::uint64_t base_seed, std::size_t n, std::size_t d,
                       std::size_t restart) {
  std::uint64_t h = detail::mix64(base_seed ^ 0x5eedf00dULL);
  h = detail::mix64(h ^ static_cast<std::uint64_t>(n));
  h = detail::mix64(h ^ static_cast<std::uint64_t>(d));
  h = detail::mix64(h ^ static_cast<std::uint64_t>(restart));
  return h;
}

SearchResult grid_search(const std::vector<TimeSeries>& train_inputs,
                         const std::vector<TimeSeries>& train_outputs,
                         const TimeSeries& test_input, const TimeSeries& test_output,
                         const SearchSpace& space, const LmConfig& cfg,
                         const SearchOptions& opts) {
  space.validate();
  cfg.validate();
  if (train_inputs.empty() || train_inputs.size() != train_outputs.size()) {
    throw InvalidInputError("grid_search needs paired, non-empty training lists");
  }
  for (std::size_t i = 0; i < train_inputs.size(); ++i) {
    if (train_inputs[i].size() != train_outputs[i].size()) {
      throw DimensionError("training pair " + std::to_string(i) + " has mismatched lengths");
    }
  }
  if (test_input.size() != test_output.size()) {
    throw DimensionError("test input and output must have equal length");
  }
  if (test_input.size() <= space.d_max) {
    throw InvalidInputError("test series must be longer than d_max");
  }
  if (opts.validation &&
      opts.validation->first.size() != opts.validation->second.size()) {
    throw DimensionError("validation input and output must have equal length");
  }

  // Reference protocol: concatenate the training pairs, then detrend once.
  TimeSeries train_input = train_inputs.front();
  TimeSeries train_output = train_outputs.front();
  for (std::size_t i = 1; i < train_inputs.size(); ++i) {
    train_input = concat(train_input, train_inputs[i]);
    train_output = concat(train_output, train_outputs[i]);
  }
  train_input = detrend(train_input);
  train_output = detrend(train_output);
  if (train_input.size() <= space.d_max) {
    throw InvalidInputError("training series must be longer than d_max");
  }

  const TimeSeries test_in_used = opts.detrend_test ? detrend(test_input) : test_input;
  std::optional<std::pair<TimeSeries, TimeSeries>> val_used;
  if (opts.validation) {
    val_used.emplace(opts.detrend_test ? detrend(opts.validation->first)
                                       : opts.validation->first,
                     opts.validation->second);
  }

  // Visit order mirrors the reference loop: neurons outer, delay inner.
  std::vector<ConfigKey> keys;
  keys.reserve(space.config_count());
  for (std::size_t ni = 0; ni < space.neurons.size(); ++ni) {
    for (std::size_t d = 1; d <= space.d_max; ++d) {
      for (std::size_t r = 0; r < space.restarts_per_config; ++r) {
        keys.push_back({ni, d, r});
      }
    }
  }

  // Crash resume: reuse any completed configuration found in the run log.
  std::map<ConfigKey, ConfigOutcome> resumed;
  if (!opts.run_log.empty() && std::filesystem::exists(opts.run_log)) {
    std::ifstream in(opts.run_log);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ConfigOutcome o;
      try {
        o = outcome_from_json(nlohmann::json::parse(line));
      } catch (const std::exception&) {
        continue;  // ignore torn/foreign lines from an interrupted run
      }
      const auto ni_it = std::find(space.neurons.begin(), space.neurons.end(), o.n);
      if (ni_it == space.neurons.end() || o.d < 1 || o.d > space.d_max ||
          o.restart >= space.restarts_per_config ||
          o.seed != seed_for(space.base_seed, o.n, o.d, o.restart)) {
        continue;  // foreign record, e.g. from a run with different seeds
      }
      const std::size_t ni = static_cast<std::size_t>(ni_it - space.neurons.begin());
      resumed.emplace(ConfigKey{ni, o.d, o.restart}, std::move(o));
    }
  }

  std::ofstream log_out;
  std::mutex log_mutex;
  if (!opts.run_log.empty()) {
    if (const auto dir = opts.run_log.parent_path(); !dir.empty()) {
      std::filesystem::create_directories(dir);
    }
    log_out.open(opts.run_log, std::ios::app);
    if (!log_out) {
      throw FileError("cannot open run log for appending: " + opts.run_log.string());
    }
  }

  const auto evaluate_config = [&](const ConfigKey& key) -> std::pair<ConfigOutcome, TdannModel> {
    const std::size_t n = space.neurons[key.n_index];
    ConfigOutcome o;
    o.n = n;
    o.d = key.d;
    o.restart = key.restart;
    o.seed = seed_for(space.base_seed, n, key.d, key.restart);

    TdannModel model = init_model(key.d, n, o.seed);
    const DelayMatrix X = build_delay_matrix(train_input, key.d);
    const Eigen::VectorXd targets = Eigen::Map<const Eigen::VectorXd>(
        train_output.samples().data() + key.d,
        static_cast<Eigen::Index>(train_output.size() - key.d));
    auto [trained, report] = lm_train(model, X, targets, cfg);
    o.lm_termination = to_string(report.termination_reason);
    if (std::isfinite(report.final_mse)) {
      o.train_mse = report.final_mse;
    }

    if (report.termination_reason == LmStop::kNonFinite) {
      o.note = "training aborted on non-finite residuals";
      return {std::move(o), std::move(trained)};
    }

    const auto correlate = [&](const TimeSeries& in, const TimeSeries& out,
                               const char* what) -> std::optional<double> {
      TimeSeries pred = predict_series(trained, in, DelayState::from_input_head(in, key.d));
      const std::size_t skip = opts.exclude_primed ? key.d : 0;
      try {
        return pearson(pred.span().subspan(skip), out.span().subspan(skip));
      } catch (const DegenerateSignalError& e) {
        if (!o.note.empty()) o.note += "; ";
        o.note += std::string(what) + " correlation unavailable: " + e.what();
        return std::nullopt;
      }
    };
    o.test_corr = correlate(test_in_used, test_output, "test");
    if (val_used) {
      o.validation_corr = correlate(val_used->first, val_used->second, "validation");
    }
    return {std::move(o), std::move(trained)};
  };

  std::vector<ConfigOutcome> outcomes(keys.size());
  std::vector<std::optional<TdannModel>> models(keys.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= keys.size() || failed.load()) return;
      try {
        if (const auto it = resumed.find(keys[i]); it != resumed.end()) {
          outcomes[i] = it->second;
          continue;
        }
        auto [outcome, model] = evaluate_config(keys[i]);
        models[i] = std::move(model);
        outcomes[i] = std::move(outcome);
        if (log_out.is_open()) {
          const std::lock_guard<std::mutex> lock(log_mutex);
          log_out << outcome_to_json(outcomes[i]).dump() << "\n";
          log_out.flush();
        }
      } catch (...) {
        failed.store(true);
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, keys.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // keys were generated in visit order, so outcomes are already normalized
  // by (neuron position, d, restart).
  const char* selector = val_used ? "validation" : "test";
  std::size_t best_index = keys.size();
  double best_corr = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& corr = val_used ? outcomes[i].validation_corr : outcomes[i].test_corr;
    if (!corr) continue;
    if (best_index == keys.size() || *corr > best_corr) {
      best_index = i;
      best_corr = *corr;
    }
  }
  if (best_index == keys.size()) {
    throw NoValidConfigError(std::string("no configuration produced a usable ") + selector +
                             " correlation");
  }

  SearchResult result;
  result.max_corr = best_corr;
  result.best_n = outcomes[best_index].n;
  result.best_d = outcomes[best_index].d;
  result.best_restart = outcomes[best_index].restart;
  if (models[best_index]) {
    result.best_model = std::move(*models[best_index]);
  } else {
    // The winner came from a resumed log; retrain it (deterministic seed).
    result.best_model = evaluate_config(keys[best_index]).second;
  }
  result.full_log = std::move(outcomes);
  return result;
}

}  // namespace tdann
