#include "hoi/optimizers.hpp"

#include "hoi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace hoi {

void ObjectiveSpec::validate(std::size_t datasets) const {
  if (datasets == 0) throw Error(ErrorCode::InvalidArgument, "objective needs at least one dataset");
  switch (aggregator) {
    case Aggregator::mean:
      break;
    case Aggregator::custom:
      if (!custom) throw Error(ErrorCode::InvalidArgument, "custom aggregator has no callback");
      break;
    case Aggregator::paired_effect_size: {
      if (condition_a.size() != condition_b.size() || condition_a.size() < 2)
        throw Error(ErrorCode::InvalidArgument,
                    "paired effect size needs two equal-length condition lists of >= 2 datasets");
      std::set<std::size_t> seen;
      for (auto idx : condition_a) seen.insert(idx);
      for (auto idx : condition_b) {
        if (seen.count(idx))
          throw Error(ErrorCode::InvalidArgument, "condition lists must be disjoint");
      }
      for (auto idx : condition_a)
        if (idx >= datasets) throw Error(ErrorCode::InvalidArgument, "condition index out of range");
      for (auto idx : condition_b)
        if (idx >= datasets) throw Error(ErrorCode::InvalidArgument, "condition index out of range");
      std::set<std::size_t> b_seen(condition_b.begin(), condition_b.end());
      if (seen.size() != condition_a.size() || b_seen.size() != condition_b.size())
        throw Error(ErrorCode::InvalidArgument, "condition lists must not repeat datasets");
      break;
    }
  }
}

double paired_effect_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "paired effect size needs >= 2 pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dev = (a[i] - b[i]) - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    if (mean == 0.0) return 0.0;
    throw Error(ErrorCode::DegenerateEffectSize, "paired differences have zero spread");
  }
  return mean / sd;
}

std::vector<double> aggregate_objective(const HoiBatch& hoi, const ObjectiveSpec& spec) {
  spec.validate(hoi.datasets);
  const auto& vals = hoi.values(spec.measure);
  std::vector<double> out(hoi.batch);
  std::vector<double> a(spec.condition_a.size()), b(spec.condition_b.size());
  for (std::size_t r = 0; r < hoi.batch; ++r) {
    std::span<const double> row(vals.data() + r * hoi.datasets, hoi.datasets);
    switch (spec.aggregator) {
      case ObjectiveSpec::Aggregator::mean: {
        double acc = 0.0;
        for (double v : row) acc += v;
        out[r] = acc / static_cast<double>(row.size());
        break;
      }
      case ObjectiveSpec::Aggregator::paired_effect_size:
        for (std::size_t i = 0; i < a.size(); ++i) {
          a[i] = row[spec.condition_a[i]];
          b[i] = row[spec.condition_b[i]];
        }
        out[r] = paired_effect_size(a, b);
        break;
      case ObjectiveSpec::Aggregator::custom:
        out[r] = spec.custom(row);
        break;
    }
  }
  return out;
}

std::vector<double> evaluate_objective(const HoiBatch& hoi, const ObjectiveSpec& spec) {
  auto out = aggregate_objective(hoi, spec);
  if (spec.direction == Direction::min)
    for (double& v : out) v = -v;
  return out;
}

namespace {

bool better(const RankedSolution& a, const RankedSolution& b) {
  if (a.energy != b.energy) return a.energy > b.energy;
  return a.members < b.members;
}

// Sorts best first, drops repeated member lists, keeps at most k.
void keep_top(std::vector<RankedSolution>& pool, std::size_t k) {
  std::sort(pool.begin(), pool.end(), better);
  std::set<std::vector<int>> seen;
  std::vector<RankedSolution> out;
  out.reserve(std::min(k, pool.size()));
  for (auto& s : pool) {
    if (out.size() == k) break;
    if (seen.insert(s.members).second) out.push_back(std::move(s));
  }
  pool = std::move(out);
}

// Evaluates equal-order member lists in fixed-order batches.
std::vector<RankedSolution> evaluate_rows(const CovSet& covs, const ObjectiveSpec& spec,
                                          const std::vector<std::vector<int>>& rows,
                                          bool bias_correct, std::size_t batch_size) {
  std::vector<RankedSolution> out;
  out.reserve(rows.size());
  NpletBatch batch;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t stop = std::min(rows.size(), start + batch_size);
    batch.reset(NpletBatch::Mode::fixed_order, covs.n_vars());
    for (std::size_t r = start; r < stop; ++r) batch.push_members(rows[r]);
    const HoiBatch hoi = compute_hoi_batch(covs, batch, bias_correct);
    const auto objective = aggregate_objective(hoi, spec);
    const double sign = spec.direction == Direction::max ? 1.0 : -1.0;
    for (std::size_t r = start; r < stop; ++r)
      out.push_back(RankedSolution{rows[r], objective[r - start], sign * objective[r - start]});
  }
  return out;
}

std::vector<RankedSolution> exhaustive_top(const CovSet& covs, const ObjectiveSpec& spec, int order,
                                           std::size_t kappa, bool bias_correct,
                                           std::size_t batch_size) {
  std::vector<RankedSolution> best;
  CombinationStream stream(covs.n_vars(), order, batch_size);
  NpletBatch batch;
  const double sign = spec.direction == Direction::max ? 1.0 : -1.0;
  while (stream.next(batch) && !batch.empty()) {
    const HoiBatch hoi = compute_hoi_batch(covs, batch, bias_correct);
    const auto objective = aggregate_objective(hoi, spec);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto m = batch.members(r);
      best.push_back(RankedSolution{{m.begin(), m.end()}, objective[r], sign * objective[r]});
    }
    keep_top(best, kappa);
  }
  return best;
}

std::vector<int> random_subset(int n, int k, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates; std::shuffle's draw pattern is not specified.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

// ---------------------------------------------------------------------------

GreedyResult greedy(const CovSet& covs, const ObjectiveSpec& spec, const GreedyOptions& options) {
  const int n = covs.n_vars();
  const int target = options.target_order > 0 ? options.target_order : n;
  if (options.start_order < 1 || options.start_order > target || target > n)
    throw Error(ErrorCode::InvalidOrderRange,
                "greedy needs 1 <= start_order <= target_order <= N");
  if (options.kappa == 0) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
  if (options.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  if (options.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  spec.validate(covs.size());

  GreedyResult result;
  const std::size_t n_orders = static_cast<std::size_t>(target - options.start_order + 1);
  std::vector<std::vector<RankedSolution>> merged(n_orders);

  const BigCount pool0 = count_nplets(n, options.start_order, options.start_order);
  std::size_t kappa = options.kappa;
  if (pool0 < kappa) {
    kappa = static_cast<std::size_t>(pool0);
    result.warnings.push_back("kappa " + std::to_string(options.kappa) + " exceeds the " +
                              std::to_string(kappa) + " n-plets of order " +
                              std::to_string(options.start_order) + "; clipped");
  }

  for (int rep = 0; rep < options.repeats; ++rep) {
    std::vector<RankedSolution> current;
    if (rep == 0) {
      current = exhaustive_top(covs, spec, options.start_order, kappa, options.bias_correct,
                               options.batch_size);
    } else {
      auto rng = make_rng(options.seed, static_cast<std::uint64_t>(rep));
      std::set<std::vector<int>> picked;
      while (picked.size() < kappa)
        picked.insert(random_subset(n, options.start_order, rng));
      current = evaluate_rows(covs, spec, {picked.begin(), picked.end()}, options.bias_correct,
                              options.batch_size);
      keep_top(current, kappa);
    }
    merged[0].insert(merged[0].end(), current.begin(), current.end());

    for (int t = options.start_order; t < target; ++t) {
      std::set<std::vector<int>> unique;
      for (const auto& sol : current) {
        std::vector<std::uint8_t> in(static_cast<std::size_t>(n), 0);
        for (int v : sol.members) in[static_cast<std::size_t>(v)] = 1;
        for (int v = 0; v < n; ++v) {
          if (in[static_cast<std::size_t>(v)]) continue;
          std::vector<int> ext = sol.members;
          ext.insert(std::upper_bound(ext.begin(), ext.end(), v), v);
          unique.insert(std::move(ext));
        }
      }
      std::vector<std::vector<int>> candidates(unique.begin(), unique.end());
      if (candidates.size() < kappa && rep == 0)
        result.warnings.push_back("order " + std::to_string(t + 1) + ": only " +
                                  std::to_string(candidates.size()) +
                                  " distinct candidates for kappa " + std::to_string(kappa));
      current = evaluate_rows(covs, spec, candidates, options.bias_correct, options.batch_size);
      keep_top(current, kappa);
      auto& slot = merged[static_cast<std::size_t>(t + 1 - options.start_order)];
      slot.insert(slot.end(), current.begin(), current.end());
    }
  }

  for (std::size_t i = 0; i < n_orders; ++i) {
    keep_top(merged[i], kappa);
    result.per_order.push_back(
        GreedyOrderResult{options.start_order + static_cast<int>(i), std::move(merged[i])});
  }
  return result;
}

// ---------------------------------------------------------------------------

void AnnealSchedule::validate(int n_vars) const {
  const int hi = max_order > 0 ? max_order : n_vars;
  if (min_order < 1 || min_order > hi || hi > n_vars)
    throw Error(ErrorCode::InvalidOrderRange, "anneal needs 1 <= min_order <= max_order <= N");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (max_iters < 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 0");
  if (patience < 0) throw Error(ErrorCode::InvalidArgument, "patience must be >= 0");
  if (temp0 && !(*temp0 >= 0.0 && std::isfinite(*temp0)))
    throw Error(ErrorCode::InvalidArgument, "temp0 must be finite and >= 0");
}

namespace {

struct Chain {
  std::vector<int> members;
  double energy = 0.0;
  double objective = 0.0;
  RankedSolution best;
  std::mt19937_64 rng;
};

// One padded batch over all proposals; returns (objective, energy) per row.
void evaluate_masks(const CovSet& covs, const ObjectiveSpec& spec,
                    const std::vector<const std::vector<int>*>& rows, bool bias_correct,
                    std::vector<double>& objective, std::vector<double>& energy) {
  NpletBatch batch;
  batch.reset(NpletBatch::Mode::mixed_order, covs.n_vars());
  for (const auto* r : rows) batch.push_members(*r);
  const HoiBatch hoi = compute_hoi_batch(covs, batch, bias_correct);
  objective = aggregate_objective(hoi, spec);
  energy = objective;
  if (spec.direction == Direction::min)
    for (double& e : energy) e = -e;
}

void fill_state(OptimState& state, const std::vector<Chain>& chains) {
  const auto n = static_cast<std::size_t>(state.n_vars);
  state.solutions.assign(chains.size() * n, 0);
  state.energies.resize(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (int v : chains[c].members) state.solutions[c * n + static_cast<std::size_t>(v)] = 1;
    state.energies[c] = chains[c].energy;
  }
}

}  // namespace

AnnealResult anneal(const CovSet& covs, const ObjectiveSpec& spec, const AnnealOptions& options) {
  const int n = covs.n_vars();
  const auto& sched = options.schedule;
  sched.validate(n);
  spec.validate(covs.size());
  const int lo = sched.min_order;
  const int hi = sched.max_order > 0 ? sched.max_order : n;

  const std::size_t kappa = options.initial.empty() ? options.kappa : options.initial.size();
  if (kappa == 0) throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");

  std::vector<Chain> chains(kappa);
  for (std::size_t c = 0; c < kappa; ++c) {
    auto& ch = chains[c];
    ch.rng = make_rng(options.seed, c);
    if (!options.initial.empty()) {
      ch.members = options.initial[c];
      std::sort(ch.members.begin(), ch.members.end());
      const auto k = static_cast<int>(ch.members.size());
      if (k < lo || k > hi || std::adjacent_find(ch.members.begin(), ch.members.end()) !=
                                  ch.members.end() ||
          ch.members.front() < 0 || ch.members.back() >= n)
        throw Error(ErrorCode::InvalidNplet,
                    "initial solution " + std::to_string(c) + " is outside the search space");
    } else {
      std::uniform_int_distribution<int> order(lo, hi);
      ch.members = random_subset(n, order(ch.rng), ch.rng);
    }
  }

  std::vector<const std::vector<int>*> rows(kappa);
  std::vector<double> objective, energy;
  for (std::size_t c = 0; c < kappa; ++c) rows[c] = &chains[c].members;
  evaluate_masks(covs, spec, rows, options.bias_correct, objective, energy);

  AnnealResult result;
  for (std::size_t c = 0; c < kappa; ++c) {
    auto& ch = chains[c];
    ch.energy = energy[c];
    ch.objective = objective[c];
    ch.best = RankedSolution{ch.members, ch.objective, ch.energy};
    if (c == 0 || better(ch.best, result.best)) result.best = ch.best;
  }

  double temp;
  if (sched.temp0) {
    temp = *sched.temp0;
  } else {
    const double mean = std::accumulate(energy.begin(), energy.end(), 0.0) / kappa;
    double ss = 0.0;
    for (double e : energy) ss += (e - mean) * (e - mean);
    temp = std::max(1e-6, std::sqrt(ss / kappa));
  }

  OptimState state;
  state.n_vars = n;
  state.rng_seed = options.seed;
  auto notify = [&](int iteration) {
    if (!options.on_iteration) return;
    fill_state(state, chains);
    state.best_ever = result.best;
    state.temperature = temp;
    state.iteration = iteration;
    options.on_iteration(state);
  };
  notify(0);

  std::vector<std::vector<int>> proposals(kappa);
  std::vector<std::uint8_t> valid(kappa);
  std::vector<std::uint8_t> in(static_cast<std::size_t>(n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int stale = 0;
  int it = 0;
  for (; it < sched.max_iters; ++it) {
    // Propose one neighbour per chain from its own generator.
    rows.clear();
    for (std::size_t c = 0; c < kappa; ++c) {
      auto& ch = chains[c];
      auto& prop = proposals[c];
      prop = ch.members;
      const int k = static_cast<int>(prop.size());
      std::fill(in.begin(), in.end(), 0);
      for (int v : prop) in[static_cast<std::size_t>(v)] = 1;
      std::vector<int> out_vars;
      out_vars.reserve(static_cast<std::size_t>(n - k));
      for (int v = 0; v < n; ++v)
        if (!in[static_cast<std::size_t>(v)]) out_vars.push_back(v);

      bool ok = true;
      bool add = false;
      bool remove = false;
      if (sched.mode == AnnealMode::within_order) {
        add = remove = true;
        ok = !out_vars.empty();
      } else {
        std::bernoulli_distribution coin(0.5);
        if (coin(ch.rng)) {
          add = true;
          ok = k + 1 <= hi && !out_vars.empty();
        } else {
          remove = true;
          ok = k - 1 >= lo;
        }
      }
      if (ok && remove) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        prop.erase(prop.begin() + pick(ch.rng));
      }
      if (ok && add) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(out_vars.size()) - 1);
        const int v = out_vars[static_cast<std::size_t>(pick(ch.rng))];
        prop.insert(std::upper_bound(prop.begin(), prop.end(), v), v);
      }
      valid[c] = ok ? 1 : 0;
      if (ok) rows.push_back(&prop);
    }

    if (!rows.empty())
      evaluate_masks(covs, spec, rows, options.bias_correct, objective, energy);

    bool improved = false;
    std::size_t row = 0;
    for (std::size_t c = 0; c < kappa; ++c) {
      auto& ch = chains[c];
      const double u = unit(ch.rng);
      if (!valid[c]) continue;
      const double e_new = energy[row];
      const double obj_new = objective[row];
      ++row;
      const double delta = e_new - ch.energy;
      const bool accept = delta > 0.0 || (temp > 0.0 && u < std::exp(-std::abs(delta) / temp));
      if (!accept) continue;
      ch.members = proposals[c];
      ch.energy = e_new;
      ch.objective = obj_new;
      RankedSolution cur{ch.members, ch.objective, ch.energy};
      if (cur.energy > ch.best.energy) ch.best = cur;
      if (cur.energy > result.best.energy) {
        result.best = std::move(cur);
        improved = true;
      }
    }
    temp *= sched.alpha;
    notify(it + 1);
    stale = improved ? 0 : stale + 1;
    if (sched.patience > 0 && stale >= sched.patience) {
      ++it;
      break;
    }
  }

  result.iterations = it;
  result.final_temperature = temp;
  for (const auto& ch : chains) {
    result.chain_best.push_back(ch.best);
    result.final_states.push_back(RankedSolution{ch.members, ch.objective, ch.energy});
  }
  return result;
}

}  // namespace hoi
