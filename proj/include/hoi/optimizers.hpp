#pragma once

#include "hoi/measures.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoi {

/// What to optimize: one measure, aggregated over the D datasets of a CovSet.
/// Energies always follow a maximize convention; Direction::min negates them.
struct ObjectiveSpec {
  enum class Aggregator { mean, paired_effect_size, custom };

  Measure measure = Measure::o;
  Direction direction = Direction::max;
  Aggregator aggregator = Aggregator::mean;
  /// Paired effect size: dataset indices of the two conditions, paired by position.
  std::vector<std::size_t> condition_a;
  std::vector<std::size_t> condition_b;
  /// Custom aggregator over the D per-dataset values of one n-plet.
  std::function<double(std::span<const double>)> custom;

  void validate(std::size_t datasets) const;
};

/// Paired Cohen's d: mean(a − b) / sd(a − b), sd with divisor (pairs − 1).
/// All-zero differences give 0; zero spread otherwise is DegenerateEffectSize.
double paired_effect_size(std::span<const double> a, std::span<const double> b);

/// Aggregated objective per row (before the direction sign).
std::vector<double> aggregate_objective(const HoiBatch& hoi, const ObjectiveSpec& spec);

/// Energies per row: aggregate_objective with the direction applied.
std::vector<double> evaluate_objective(const HoiBatch& hoi, const ObjectiveSpec& spec);

struct RankedSolution {
  std::vector<int> members;
  double objective = 0.0;  // aggregated measure, direction not applied
  double energy = 0.0;     // larger is better
};

// ---------------------------------------------------------------------------
// Greedy growth

struct GreedyOptions {
  int start_order = 3;
  int target_order = 0;  // 0 means N
  std::size_t kappa = 10;
  /// Repeat 0 starts from the exhaustive top-κ at start_order; every further
  /// repeat starts from κ random n-plets of that order drawn from `seed`.
  int repeats = 1;
  std::uint64_t seed = 0;
  bool bias_correct = false;
  std::size_t batch_size = 10000;
};

struct GreedyOrderResult {
  int order = 0;
  std::vector<RankedSolution> solutions;  // best first, at most κ
};

struct GreedyResult {
  std::vector<GreedyOrderResult> per_order;  // start_order .. target_order
  std::vector<std::string> warnings;
};

GreedyResult greedy(const CovSet& covs, const ObjectiveSpec& spec, const GreedyOptions& options);

// ---------------------------------------------------------------------------
// Simulated annealing

enum class AnnealMode { within_order, across_orders };

struct AnnealSchedule {
  /// Initial temperature; unset means the spread of the initial κ energies
  /// (population standard deviation, floored at 1e-6).
  std::optional<double> temp0;
  double alpha = 0.99;  // Temp_{t+1} = α·Temp_t
  int max_iters = 1000;
  int patience = 0;  // stop after this many iterations without a new best; 0 disables
  AnnealMode mode = AnnealMode::across_orders;
  int min_order = 3;
  int max_order = 0;  // 0 means N

  void validate(int n_vars) const;
};

struct OptimState {
  int n_vars = 0;
  std::vector<std::uint8_t> solutions;  // κ × N masks
  std::vector<double> energies;         // κ
  RankedSolution best_ever;
  std::uint64_t rng_seed = 0;
  double temperature = 0.0;
  int iteration = 0;

  std::size_t chains() const noexcept { return energies.size(); }
  std::span<const std::uint8_t> mask(std::size_t chain) const {
    return {solutions.data() + chain * static_cast<std::size_t>(n_vars),
            static_cast<std::size_t>(n_vars)};
  }
};

struct AnnealOptions {
  AnnealSchedule schedule;
  std::size_t kappa = 20;
  std::uint64_t seed = 0;
  bool bias_correct = false;
  /// Optional starting n-plets, one per chain (overrides kappa).
  std::vector<std::vector<int>> initial;
  /// Called after initialization and after every iteration.
  std::function<void(const OptimState&)> on_iteration;
};

struct AnnealResult {
  RankedSolution best;
  std::vector<RankedSolution> chain_best;
  std::vector<RankedSolution> final_states;
  int iterations = 0;
  double final_temperature = 0.0;
};

AnnealResult anneal(const CovSet& covs, const ObjectiveSpec& spec, const AnnealOptions& options);

}  // namespace hoi
