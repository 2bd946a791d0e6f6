#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tdann/network.hpp"
#include "tdann/optimizer.hpp"
#include "tdann/signal.hpp"

namespace tdann {

// The exhaustive (N, d) grid: every hidden-layer width in `neurons` crossed
// with every delay window 1..d_max, `restarts_per_config` trainings each.
struct SearchSpace {
  std::vector<std::size_t> neurons = default_neurons();
  std::size_t d_max = 20;
  std::size_t restarts_per_config = 1;
  std::uint64_t base_seed = 0;

  static std::vector<std::size_t> default_neurons();  // 1..20, 40, 80, 100

  std::size_t config_count() const noexcept {
    return neurons.size() * d_max * restarts_per_config;
  }
  void validate() const;
};

// One full_log record. test_corr is absent when training failed or the
// prediction was degenerate; `note` then carries the diagnostic.
struct ConfigOutcome {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t restart = 0;
  std::uint64_t seed = 0;
  std::optional<double> train_mse;
  std::optional<double> test_corr;
  std::optional<double> validation_corr;
  std::string lm_termination;
  std::string note;
};

nlohmann::json outcome_to_json(const ConfigOutcome& o);
ConfigOutcome outcome_from_json(const nlohmann::json& doc);

struct SearchResult {
  TdannModel best_model;
  double max_corr = 0.0;
  std::size_t best_n = 0;
  std::size_t best_d = 0;
  std::size_t best_restart = 0;
  // Sorted by (position of n in the space, d, restart); covers the whole
  // space regardless of worker count.
  std::vector<ConfigOutcome> full_log;
};

struct SearchOptions {
  std::size_t jobs = 1;
  // Detrend the test input before prediction. Off by default: the reference
  // protocol feeds the raw test series to the net.
  bool detrend_test = false;
  // Drop the first d primed samples from the correlation range.
  bool exclude_primed = false;
  // When set, completed configurations are appended here as JSON lines and
  // skipped on restart.
  std::filesystem::path run_log;
  // When present, selection uses validation correlation instead of the
  // literal test-set correlation; test_corr is still logged.
  std::optional<std::pair<TimeSeries, TimeSeries>> validation;
};

// Deterministic per-configuration seed; collision-free over the default
// space.
std::uint64_t seed_for(std::uint64_t base_seed, std::size_t n, std::size_t d,
                       std::size_t restart);

// Concatenates and detrends the training pairs, trains every configuration
// in the space, scores each on the held-out series by Pearson correlation
// (priming the delay line from the test input head), and returns the
// strict-maximum configuration, earliest visited winning ties.
SearchResult grid_search(const std::vector<TimeSeries>& train_inputs,
                         const std::vector<TimeSeries>& train_outputs,
                         const TimeSeries& test_input, const TimeSeries& test_output,
                         const SearchSpace& space, const LmConfig& cfg,
                         const SearchOptions& opts = {});

}  // namespace tdann
