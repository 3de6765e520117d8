#include "hoi/cli.hpp"

#include "hoi/csv.hpp"
#include "hoi/error.hpp"
#include "hoi/kernels.hpp"
#include "hoi/optimizers.hpp"
#include "hoi/scanner.hpp"
#include "hoi/synthetic.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace hoi::cli {

namespace {

struct OrderRange {
  int min = 3;
  int max = 0;  // 0 = N
};

OrderRange parse_orders(const std::string& text) {
  auto parse_bound = [&](const std::string& s) -> int {
    if (s == "all" || s == "N" || s == "n") return 0;
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size() || v < 1) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidOrderRange, "bad order bound \"" + s + "\"");
    }
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const int v = parse_bound(text);
    return v == 0 ? OrderRange{3, 0} : OrderRange{v, v};
  }
  OrderRange r{parse_bound(text.substr(0, colon)), parse_bound(text.substr(colon + 1))};
  if (r.min == 0) throw Error(ErrorCode::InvalidOrderRange, "lower order bound cannot be \"all\"");
  return r;
}

int resolve_max(const OrderRange& r, int n) {
  const int max = r.max == 0 ? n : r.max;
  if (r.min > max || max > n)
    throw Error(ErrorCode::InvalidOrderRange, "orders " + std::to_string(r.min) + ":" +
                                                  std::to_string(max) + " invalid for N=" +
                                                  std::to_string(n));
  return max;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

struct Inputs {
  std::vector<std::string> ids;
  std::vector<std::string> names;
  CovSet covs;
};

struct CommonFlags {
  std::string input;
  std::string out = "-";
  bool covariance = false;
  bool no_copula = false;
  bool bias_correct = false;
  bool progress = false;
  int workers = 0;
};

Inputs load_inputs(const CommonFlags& flags) {
  Inputs in;
  std::vector<CovarianceMatrix> covs;
  for (const auto& item : csv::list_inputs(flags.input)) {
    std::vector<std::string> names;
    if (flags.covariance) {
      covs.push_back(csv::read_covariance(item.path, &names));
    } else {
      DataMatrix data = csv::read_data(item.path);
      data.validate();
      names = data.column_names;
      covs.push_back(flags.no_copula ? estimate_covariance(data) : copula_covariance(data));
    }
    if (in.ids.empty()) {
      in.names = names;
    } else if (names != in.names) {
      throw Error(ErrorCode::InvalidData, item.path.string() + ": header differs from " +
                                              in.ids.front());
    }
    in.ids.push_back(item.id);
  }
  if (flags.bias_correct && flags.covariance)
    throw Error(ErrorCode::InvalidArgument,
                "--bias-correct needs sampled data, not an analytic covariance");
  in.covs = CovSet(std::move(covs));
  return in;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorCode::Io, "cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) {
      std::cout.flush();
      return;
    }
    file_->close();
    if (!*file_) throw Error(ErrorCode::Io, "failed writing output");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string nplet_names(std::span<const int> members, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) out.push_back(',');
    out += names[static_cast<std::size_t>(members[i])];
  }
  return csv::field(out);
}

void add_common(CLI::App* sub, CommonFlags& f, bool needs_input = true) {
  if (needs_input) {
    sub->add_option("--input,-i", f.input, "CSV file or directory of CSVs (one dataset each)")
        ->required();
    sub->add_flag("--covariance", f.covariance,
                  "Inputs are analytic covariance matrices instead of samples");
    sub->add_flag("--no-copula", f.no_copula,
                  "Estimate the covariance of the raw data (already Gaussian)");
    sub->add_flag("--bias-correct", f.bias_correct, "Subtract the finite-sample entropy bias");
  }
  sub->add_option("--out,-o", f.out, "Output path, '-' for stdout");
  sub->add_flag("--progress", f.progress, "Report progress as JSON lines on stderr");
  sub->add_option("--workers", f.workers, "Worker threads (default: $HOI_WORKERS or all cores)")
      ->check(CLI::NonNegativeNumber);
}

void apply_workers(const CommonFlags& f) {
  int w = f.workers;
  if (w == 0) {
    if (const char* env = std::getenv("HOI_WORKERS")) {
      try {
        w = std::stoi(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "HOI_WORKERS is not an integer");
      }
      if (w < 0) throw Error(ErrorCode::InvalidArgument, "HOI_WORKERS must be >= 0");
    }
  }
  set_workers(w);
}

ObjectiveSpec make_objective(const std::string& measure, const std::string& direction,
                             const std::string& aggregate, const std::string& cond_a,
                             const std::string& cond_b) {
  ObjectiveSpec spec;
  const auto m = parse_measure(measure);
  if (!m) throw Error(ErrorCode::InvalidArgument, "unknown measure \"" + measure + "\"");
  const auto d = parse_direction(direction);
  if (!d) throw Error(ErrorCode::InvalidArgument, "unknown direction \"" + direction + "\"");
  spec.measure = *m;
  spec.direction = *d;
  if (aggregate == "mean") {
    spec.aggregator = ObjectiveSpec::Aggregator::mean;
  } else if (aggregate == "effect-size") {
    spec.aggregator = ObjectiveSpec::Aggregator::paired_effect_size;
    auto to_indices = [](const std::string& text) {
      std::vector<std::size_t> out;
      for (const auto& s : split(text, ',')) {
        try {
          out.push_back(static_cast<std::size_t>(std::stoul(s)));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument, "bad dataset index \"" + s + "\"");
        }
      }
      return out;
    };
    spec.condition_a = to_indices(cond_a);
    spec.condition_b = to_indices(cond_b);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown aggregate \"" + aggregate + "\"");
  }
  return spec;
}

// ---------------------------------------------------------------------------

int cmd_scan(const CommonFlags& f, const std::string& orders, const std::string& reduce,
             std::size_t batch_size) {
  const OrderRange range = parse_orders(orders);
  const auto parts = split(reduce, ':');
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "empty --reduce");
  apply_workers(f);
  Inputs in = load_inputs(f);
  const int n = in.covs.n_vars();

  ScanOptions opts;
  opts.min_order = range.min;
  opts.max_order = resolve_max(range, n);
  opts.batch_size = batch_size;
  opts.bias_correct = f.bias_correct;
  if (f.progress) {
    opts.on_batch = [](const ScanProgress& p) {
      std::cerr << "{\"event\":\"batch\",\"visited\":" << p.visited << ",\"batches\":" << p.batches
                << ",\"order\":" << p.order << ",\"elapsed\":" << p.elapsed_seconds << "}\n";
    };
  }

  Output out(f.out);
  auto& os = out.stream();
  if (parts[0] == "top") {
    if (parts.size() != 4)
      throw Error(ErrorCode::InvalidArgument, "--reduce top:<k>:<max|min>:<measure>");
    std::size_t k = 0;
    try {
      k = static_cast<std::size_t>(std::stoul(parts[1]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad top-k count \"" + parts[1] + "\"");
    }
    const auto dir = parse_direction(parts[2]);
    const auto meas = parse_measure(parts[3]);
    if (!dir || !meas) throw Error(ErrorCode::InvalidArgument, "bad --reduce \"" + reduce + "\"");
    TopKReducer top(*meas, *dir, k);
    scan(in.covs, opts, top);
    os << "dataset,rank,order,nplet,mask,tc,dtc,o,s\n";
    for (std::size_t d = 0; d < in.covs.size(); ++d) {
      const auto rows = top.results(d);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& x = rows[r];
        os << csv::field(in.ids[d]) << ',' << r + 1 << ',' << x.members.size() << ','
           << nplet_names(x.members, in.names) << ',' << mask_hex(x.members, n) << ','
           << csv::format_double(x.tc) << ',' << csv::format_double(x.dtc) << ','
           << csv::format_double(x.o) << ',' << csv::format_double(x.s) << '\n';
      }
    }
  } else if (parts[0] == "hist") {
    if (parts.size() != 5)
      throw Error(ErrorCode::InvalidArgument, "--reduce hist:<measure>:<bins>:<lo>:<hi>");
    const auto meas = parse_measure(parts[1]);
    if (!meas) throw Error(ErrorCode::InvalidArgument, "bad measure in --reduce");
    std::size_t bins = 0;
    double lo = 0.0, hi = 0.0;
    try {
      bins = static_cast<std::size_t>(std::stoul(parts[2]));
      lo = std::stod(parts[3]);
      hi = std::stod(parts[4]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad histogram parameters in --reduce");
    }
    HistogramReducer hist(*meas, bins, lo, hi);
    scan(in.covs, opts, hist);
    os << "dataset,bin,lo,hi,count\n";
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t d = 0; d < hist.datasets(); ++d) {
      const auto& c = hist.counts(d);
      for (std::size_t i = 0; i < c.size(); ++i) {
        std::string blo, bhi, label;
        if (i == 0) {
          label = "underflow";
          blo = "-inf";
          bhi = csv::format_double(lo);
        } else if (i == c.size() - 1) {
          label = "overflow";
          blo = csv::format_double(hi);
          bhi = "inf";
        } else {
          label = std::to_string(i - 1);
          blo = csv::format_double(lo + width * static_cast<double>(i - 1));
          bhi = csv::format_double(lo + width * static_cast<double>(i));
        }
        os << csv::field(in.ids[d]) << ',' << label << ',' << blo << ',' << bhi << ',' << c[i]
           << '\n';
      }
    }
  } else if (parts[0] == "all") {
    os << "dataset,order,nplet,mask,tc,dtc,o,s\n";
    CallbackReducer dump([&](const NpletBatch& batch, const HoiBatch& hoi) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto members = batch.members(b);
        const std::string label = nplet_names(members, in.names);
        const std::string mask = mask_hex(members, n);
        for (std::size_t d = 0; d < hoi.datasets; ++d) {
          const std::size_t m = b * hoi.datasets + d;
          os << csv::field(in.ids[d]) << ',' << members.size() << ',' << label << ',' << mask
             << ',' << csv::format_double(hoi.tc[m]) << ',' << csv::format_double(hoi.dtc[m])
             << ',' << csv::format_double(hoi.o[m]) << ',' << csv::format_double(hoi.s[m])
             << '\n';
        }
      }
    });
    scan(in.covs, opts, dump);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown reducer \"" + parts[0] + "\"");
  }
  out.close();
  return 0;
}

int cmd_greedy(const CommonFlags& f, const ObjectiveSpec& spec, GreedyOptions opts) {
  apply_workers(f);
  Inputs in = load_inputs(f);
  const int n = in.covs.n_vars();
  opts.bias_correct = f.bias_correct;
  if (opts.target_order == 0) opts.target_order = n;
  const auto start = std::chrono::steady_clock::now();
  GreedyResult res = greedy(in.covs, spec, opts);
  for (const auto& w : res.warnings) std::cerr << "hoi: warning: " << w << '\n';
  if (f.progress) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    std::cerr << "{\"event\":\"done\",\"orders\":" << res.per_order.size()
              << ",\"elapsed\":" << dt.count() << "}\n";
  }
  Output out(f.out);
  auto& os = out.stream();
  os << "order,rank,nplet,mask,objective\n";
  for (const auto& level : res.per_order) {
    for (std::size_t r = 0; r < level.solutions.size(); ++r) {
      const auto& s = level.solutions[r];
      os << level.order << ',' << r + 1 << ',' << nplet_names(s.members, in.names) << ','
         << mask_hex(s.members, n) << ',' << csv::format_double(s.objective) << '\n';
    }
  }
  out.close();
  return 0;
}

int cmd_anneal(const CommonFlags& f, const ObjectiveSpec& spec, AnnealOptions opts,
               const std::string& orders, const std::string& mode, const std::string& temp0) {
  const OrderRange range = parse_orders(orders);
  if (mode == "across") {
    opts.schedule.mode = AnnealMode::across_orders;
  } else if (mode == "within") {
    opts.schedule.mode = AnnealMode::within_order;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--mode must be across or within");
  }
  if (temp0 != "auto") {
    try {
      opts.schedule.temp0 = std::stod(temp0);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad --temp0 \"" + temp0 + "\"");
    }
  }
  apply_workers(f);
  Inputs in = load_inputs(f);
  const int n = in.covs.n_vars();
  opts.schedule.min_order = range.min;
  opts.schedule.max_order = resolve_max(range, n);
  opts.bias_correct = f.bias_correct;
  if (f.progress) {
    opts.on_iteration = [](const OptimState& s) {
      std::cerr << "{\"event\":\"iteration\",\"iteration\":" << s.iteration
                << ",\"temperature\":" << s.temperature << ",\"best\":" << s.best_ever.objective
                << "}\n";
    };
  }
  AnnealResult res = anneal(in.covs, spec, opts);
  Output out(f.out);
  auto& os = out.stream();
  os << "kind,chain,order,nplet,mask,objective\n";
  auto row = [&](const std::string& kind, const std::string& chain, const RankedSolution& s) {
    os << kind << ',' << chain << ',' << s.members.size() << ',' << nplet_names(s.members, in.names)
       << ',' << mask_hex(s.members, n) << ',' << csv::format_double(s.objective) << '\n';
  };
  row("best", "", res.best);
  for (std::size_t c = 0; c < res.chain_best.size(); ++c)
    row("chain_best", std::to_string(c), res.chain_best[c]);
  out.close();
  return 0;
}

int cmd_features(const CommonFlags& f, int limit, std::size_t batch_size) {
  apply_workers(f);
  Inputs in = load_inputs(f);
  const auto start = std::chrono::steady_clock::now();
  const auto feats = extract_features(in.covs, f.bias_correct, limit, batch_size);
  if (f.progress) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    std::cerr << "{\"event\":\"done\",\"datasets\":" << feats.size()
              << ",\"visited\":" << count_nplets(in.covs.n_vars(), 2, in.covs.n_vars())
              << ",\"elapsed\":" << dt.count() << "}\n";
  }
  Output out(f.out);
  auto& os = out.stream();
  os << "dataset";
  for (auto name : feature_names()) os << ',' << name;
  os << '\n';
  for (std::size_t d = 0; d < feats.size(); ++d) {
    os << csv::field(in.ids[d]);
    for (double v : feats[d].values) os << ',' << csv::format_double(v);
    os << '\n';
  }
  out.close();
  return 0;
}

int cmd_synth(const CommonFlags& f, const std::string& spec_path, std::int64_t samples,
              std::uint64_t seed, const std::string& cov_out) {
  std::ifstream in(spec_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + spec_path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto spec = synthetic::PgmSpec::from_json(buf.str());
  const auto system = spec.build();
  auto names = spec.variable_names();
  if (samples < 3) throw Error(ErrorCode::InsufficientSamples, "--samples must be >= 3");
  DataMatrix data = synthetic::sample_gaussian(system.cov, samples, seed);
  data.column_names = names;
  Output out(f.out);
  csv::write_data(out.stream(), data);
  out.close();
  if (!cov_out.empty()) {
    Output cov(cov_out);
    csv::write_covariance(cov.stream(), system.cov, names);
    cov.close();
  }
  if (f.progress)
    std::cerr << "{\"event\":\"done\",\"samples\":" << samples << ",\"variables\":" << names.size()
              << "}\n";
  return 0;
}

int cmd_count(const CommonFlags& f, int n, const std::string& orders) {
  const OrderRange range = parse_orders(orders);
  if (n < 1) throw Error(ErrorCode::InvalidOrderRange, "--n must be >= 1");
  const int max = resolve_max(range, n);
  Output out(f.out);
  out.stream() << count_nplets(n, range.min, max) << '\n';
  out.close();
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Higher-order information interactions (TC, DTC, O-information, S-information)",
               "hoi"};
  app.require_subcommand(1);

  CommonFlags common;

  // scan
  std::string scan_orders = "3:all", scan_reduce = "top:10:max:o";
  std::size_t batch_size = 10000;
  auto* scan_cmd = app.add_subcommand("scan", "Exhaustive scan over an order range");
  add_common(scan_cmd, common);
  scan_cmd->add_option("--orders", scan_orders, "min:max order range ('all' = N)");
  scan_cmd->add_option("--reduce", scan_reduce,
                       "top:<k>:<max|min>:<measure> | hist:<measure>:<bins>:<lo>:<hi> | all");
  scan_cmd->add_option("--batch-size", batch_size, "n-plets per batch")->check(CLI::PositiveNumber);

  // objective flags shared by greedy and anneal
  std::string measure = "o", direction = "max", aggregate = "mean", cond_a, cond_b;
  auto add_objective = [&](CLI::App* sub) {
    sub->add_option("--measure", measure, "tc | dtc | o | s");
    sub->add_option("--direction", direction, "max | min");
    sub->add_option("--aggregate", aggregate, "mean | effect-size");
    sub->add_option("--cond-a", cond_a, "Comma-separated dataset indices of condition A");
    sub->add_option("--cond-b", cond_b, "Comma-separated dataset indices of condition B");
  };

  GreedyOptions gopts;
  std::uint64_t seed = 0;
  auto* greedy_cmd = app.add_subcommand("greedy", "Greedy growth of n-plets");
  add_common(greedy_cmd, common);
  add_objective(greedy_cmd);
  greedy_cmd->add_option("--start-order", gopts.start_order)->check(CLI::PositiveNumber);
  greedy_cmd->add_option("--target-order", gopts.target_order, "Default: N")
      ->check(CLI::NonNegativeNumber);
  greedy_cmd->add_option("--kappa", gopts.kappa, "Solutions kept per order")
      ->check(CLI::PositiveNumber);
  greedy_cmd->add_option("--repeats", gopts.repeats, "Independent restarts")
      ->check(CLI::PositiveNumber);
  greedy_cmd->add_option("--batch-size", gopts.batch_size)->check(CLI::PositiveNumber);
  greedy_cmd->add_option("--seed", seed);

  AnnealOptions aopts;
  std::string anneal_orders = "3:all", anneal_mode = "across", temp0 = "auto";
  auto* anneal_cmd = app.add_subcommand("anneal", "Simulated annealing over n-plets");
  add_common(anneal_cmd, common);
  add_objective(anneal_cmd);
  anneal_cmd->add_option("--orders", anneal_orders, "min:max order range ('all' = N)");
  anneal_cmd->add_option("--mode", anneal_mode, "across | within");
  anneal_cmd->add_option("--kappa", aopts.kappa, "Parallel chains")->check(CLI::PositiveNumber);
  anneal_cmd->add_option("--iters", aopts.schedule.max_iters)->check(CLI::NonNegativeNumber);
  anneal_cmd->add_option("--alpha", aopts.schedule.alpha, "Cooling rate in (0, 1)");
  anneal_cmd->add_option("--temp0", temp0, "Initial temperature or 'auto'");
  anneal_cmd->add_option("--patience", aopts.schedule.patience, "Early stop; 0 disables")
      ->check(CLI::NonNegativeNumber);
  anneal_cmd->add_option("--seed", seed);

  int limit = 20;
  auto* features_cmd = app.add_subcommand("features", "21-feature fingerprint per dataset");
  add_common(features_cmd, common);
  features_cmd->add_option("--limit", limit, "Largest N scanned exhaustively");
  features_cmd->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);

  std::string spec_path, cov_out;
  std::int64_t samples = 1000;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a dataset from a PGM spec");
  add_common(synth_cmd, common, false);
  synth_cmd->add_option("--spec", spec_path, "PGM spec (JSON)")->required();
  synth_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--cov-out", cov_out, "Also write the analytic covariance");

  int count_n = 0;
  std::string count_orders = "3:all";
  auto* count_cmd = app.add_subcommand("count", "Number of n-plets in an order range");
  add_common(count_cmd, common, false);
  count_cmd->add_option("--n", count_n, "Number of variables")->required();
  count_cmd->add_option("--orders", count_orders);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "hoi: error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*scan_cmd) return cmd_scan(common, scan_orders, scan_reduce, batch_size);
    if (*greedy_cmd) {
      gopts.seed = seed;
      return cmd_greedy(common, make_objective(measure, direction, aggregate, cond_a, cond_b),
                        gopts);
    }
    if (*anneal_cmd) {
      aopts.seed = seed;
      return cmd_anneal(common, make_objective(measure, direction, aggregate, cond_a, cond_b),
                        aopts, anneal_orders, anneal_mode, temp0);
    }
    if (*features_cmd) return cmd_features(common, limit, batch_size);
    if (*synth_cmd) return cmd_synth(common, spec_path, samples, seed, cov_out);
    if (*count_cmd) return cmd_count(common, count_n, count_orders);
  } catch (const Error& e) {
    std::cerr << "hoi: error: " << e.what() << '\n';
    return e.is_computation_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "hoi: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  argv.reserve(copy.size());
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace hoi::cli
