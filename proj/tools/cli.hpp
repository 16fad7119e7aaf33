#pragma once

#include "sparsechan/experiments.hpp"
#include "sparsechan/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sparsechan::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Settings beyond ExperimentConfig that some subcommands read.
struct CliConfig {
  ExperimentConfig experiment;
  double c = 2.0;                     // measurement-budget constant
  std::optional<std::size_t> p;       // budget channel length (defaults to L)
  std::size_t max_supports = 100000;  // RIC enumeration cap
};

inline const std::vector<std::string> kCliKeys = {"c", "p", "max_supports"};

inline json to_json(const CliConfig& c) {
  json j = sparsechan::to_json(c.experiment);
  j["c"] = c.c;
  j["p"] = c.p ? json(*c.p) : json(nullptr);
  j["max_supports"] = c.max_supports;
  return j;
}

inline void apply_json(CliConfig& cfg, const json& flat) {
  apply_json(cfg.experiment, flat, kCliKeys);
  if (flat.contains("c")) cfg.c = detail::get_real(flat["c"], "c");
  if (flat.contains("p") && !flat["p"].is_null()) cfg.p = detail::get_count(flat["p"], "p");
  if (flat.contains("max_supports"))
    cfg.max_supports = detail::get_count(flat["max_supports"], "max_supports");
}

/// Reads a flat config file, or a meta.json sidecar (whose "config" member
/// holds the flat config of an earlier run).
inline void load_config_file(CliConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j["config"].is_object()) {
    for (const auto& [key, v] : j.items())
      if (key != "config" && key != "subcommand" && key != "metadata")
        throw ConfigError(key, "unknown key in metadata sidecar");
    j = j["config"];
  }
  apply_json(cfg, j);
}

struct Overrides {
  std::string config_path;
  std::string out_dir = "runs";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials, L, T, p, max_supports;
  std::optional<unsigned> threads;
  std::vector<double> snr;
  std::vector<std::size_t> n;
  std::vector<std::string> methods;
  std::optional<std::string> lambda_ds, lambda_lasso;
  std::optional<double> c;
};

inline LambdaRule parse_lambda_flag(const std::string& flag, const std::string& text) {
  if (text == "auto") return {};
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && v >= 0.0 && std::isfinite(v)) return LambdaRule::fixed(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(flag, "expected 'auto' or a non-negative number, got '" + text + "'");
}

inline void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "Flat JSON config (or an earlier meta.json)");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--seed", o.seed, "Base seed");
  sub->add_option("--M", o.trials, "Monte Carlo trials per point");
  sub->add_option("--L", o.L, "Channel length");
  sub->add_option("--T", o.T, "Number of dominant taps");
  sub->add_option("--snr", o.snr, "SNR value(s) in dB")->delimiter(',');
  sub->add_option("--n", o.n, "Training length(s)")->delimiter(',');
  sub->add_option("--methods", o.methods, "Estimators: ls,omp,lasso,ds,sds,oracle")->delimiter(',');
  sub->add_option("--lambda-ds", o.lambda_ds, "DS constraint level: auto or a value");
  sub->add_option("--lambda-lasso", o.lambda_lasso, "Lasso penalty: auto or a value");
  sub->add_option("--c", o.c, "Measurement budget constant");
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

/// Flags win over the config file. `--snr`/`--n` fill the swept grid for the
/// matching sweep and the fixed value otherwise.
inline CliConfig resolve(const std::string& sub, const Overrides& o) {
  CliConfig cfg;
  if (sub == "demo-fig2") cfg.experiment.fixed_snr_db = 10.0;  // n = 30, L = 60 are the defaults
  if (!o.config_path.empty()) load_config_file(cfg, o.config_path);
  ExperimentConfig& e = cfg.experiment;
  if (o.seed) e.base_seed = *o.seed;
  if (o.trials) e.trials = *o.trials;
  if (o.L) e.L = *o.L;
  if (o.T) e.T = *o.T;
  if (o.threads) e.threads = *o.threads;
  if (!o.snr.empty()) {
    if (sub == "sweep-snr") e.snr_grid_db = o.snr;
    else e.fixed_snr_db = o.snr.front();
  }
  if (!o.n.empty()) {
    if (sub == "sweep-n") e.n_grid = o.n;
    else e.fixed_n = o.n.front();
  }
  if (!o.methods.empty()) {
    e.methods.clear();
    for (const auto& m : o.methods) {
      try {
        e.methods.push_back(parse_method(m));
      } catch (const InvalidInput& ex) {
        throw ConfigError("--methods", ex.what());
      }
    }
  }
  if (o.lambda_ds) e.estimator.lambda_ds = parse_lambda_flag("--lambda-ds", *o.lambda_ds);
  if (o.lambda_lasso) e.estimator.lambda_lasso = parse_lambda_flag("--lambda-lasso", *o.lambda_lasso);
  if (o.c) cfg.c = *o.c;
  if (o.p) cfg.p = *o.p;
  if (o.max_supports) cfg.max_supports = *o.max_supports;
  try {
    validate(e);
  } catch (const InvalidInput& ex) {
    throw ConfigError("<config>", ex.what());
  }
  return cfg;
}

inline json run_metadata() {
  return {
      {"norm_convention", "real_composite: l1 = sum(|re|+|im|), linf over re and im parts separately"},
      {"lambda_rule", "auto: sigma * sqrt(2 ln L) * max column norm, shared by ds and lasso"},
      {"snr_definition", "sigma^2 = ||Xh||^2 / (N * 10^(snr_db/10))"},
      {"seed_mixing",
       "splitmix64 chain over (base_seed, snr_db bits, n, trial); channel/training/noise seeds = "
       "splitmix64(trial_seed ^ 1/2/3)"},
      {"sds_x_alt", "column i = R^-1 x_i / (x_i^H R^-1 x_i), R = X W^2 X^H"},
      {"oracle_observation", "full y"},
      {"omp_stopping", "auto: true T atoms when ground truth is available"},
      {"mse", "unnormalized ||h - h_hat||^2; result_normalized.csv divides by ||h||^2"}};
}

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline fs::path make_run_dir(const fs::path& root, const std::string& sub) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  fs::path dir = root / (sub + "-" + stamp.str());
  for (int k = 1; fs::exists(dir); ++k) dir = root / (sub + "-" + stamp.str() + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

inline std::string sweep_plot(const ExperimentConfig& e, SweepAxis axis) {
  std::ostringstream g;
  const bool snr = axis == SweepAxis::snr_db;
  g << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set logscale y\n"
    << "set grid\n"
    << "set xlabel '" << (snr ? "SNR (dB)" : "training length N") << "'\n"
    << "set ylabel 'MSE'\n"
    << "set terminal pngcairo size 800,600\n"
    << "set output 'mse.png'\n"
    << "methods = \"";
  for (std::size_t i = 0; i < e.methods.size(); ++i) g << (i ? " " : "") << to_string(e.methods[i]);
  g << "\"\n"
    << "plot for [m in methods] 'result.csv' every ::1 using 2:(strcol(3) eq m ? $4 : 1/0) "
       "with linespoints title m\n";
  return g.str();
}

inline std::string stem_plot(const std::vector<std::string>& series) {
  std::ostringstream g;
  g << "set datafile separator ','\n"
    << "set xlabel 'tap index'\n"
    << "set ylabel '|h|'\n"
    << "set grid\n"
    << "set terminal pngcairo size 900,500\n"
    << "set output 'taps.png'\n"
    << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i)
    g << (i ? ", \\\n     " : "") << series[i];
  g << "\n";
  return g.str();
}

struct RunContext {
  std::ostream& out;
  std::ostream& err;
  std::string subcommand;
  CliConfig cfg;
  fs::path out_root;
};

inline json meta_json(const RunContext& ctx, json extra = json::object()) {
  json m;
  m["subcommand"] = ctx.subcommand;
  m["config"] = to_json(ctx.cfg);
  json md = run_metadata();
  md.update(extra);
  m["metadata"] = md;
  return m;
}

inline int finish(RunContext& ctx, const fs::path& dir, std::size_t failures) {
  if (failures > 0) {
    ctx.err << "solver failure in " << failures << " estimator cell(s); diagnostics: "
            << (dir / "meta.json").string() << '\n';
    ctx.out << "output: " << dir.string() << '\n';
    return kExitSolver;
  }
  ctx.out << "output: " << dir.string() << '\n';
  return kExitOk;
}

inline json exclusions_json(const SweepResult& res) {
  json ex = json::array();
  for (const auto& pt : res.points)
    for (std::size_t k = 0; k < pt.per_method.size(); ++k) {
      if (pt.per_method[k].failed == 0) continue;
      json cell;
      cell["axis_value"] = pt.axis_value;
      cell["method"] = to_string(pt.per_method[k].method);
      json trials = json::array();
      for (std::size_t t = 0; t < pt.trials.size(); ++t)
        if (pt.trials[t].outcomes[k].failed)
          trials.push_back({{"trial", t}, {"error", pt.trials[t].outcomes[k].error}});
      cell["trials"] = trials;
      ex.push_back(cell);
    }
  return ex;
}

inline int run_sweep(RunContext& ctx, SweepAxis axis) {
  const ExperimentConfig& e = ctx.cfg.experiment;
  const SweepResult res = axis == SweepAxis::snr_db ? sweep_snr(e) : sweep_training_length(e);
  const fs::path dir = make_run_dir(ctx.out_root, ctx.subcommand);
  write_file(dir / "result.csv", sweep_csv(res));
  write_file(dir / "result_normalized.csv", sweep_csv(res, true));
  write_file(dir / "plot.gp", sweep_plot(e, axis));
  json extra;
  extra["training_ensemble"] = e.fixed_training ? "fixed per training length" : "regenerated per trial";
  extra["exclusions"] = exclusions_json(res);
  write_file(dir / "meta.json", meta_json(ctx, extra).dump(2) + "\n");
  return finish(ctx, dir, res.failed_cells());
}

inline int run_estimate(RunContext& ctx) {
  const ExperimentConfig& e = ctx.cfg.experiment;
  const std::uint64_t seed = trial_seed(e.base_seed, e.fixed_snr_db, e.fixed_n, 0);
  const SparseChannel h = generate_sparse_channel(e.L, e.T, splitmix64(seed ^ 0x1));
  const ToeplitzTraining x =
      build_toeplitz_training(e.fixed_n, e.L, e.distribution, splitmix64(seed ^ 0x2));
  const Observation obs = observe(x, h, e.fixed_snr_db, splitmix64(seed ^ 0x3));

  const fs::path dir = make_run_dir(ctx.out_root, ctx.subcommand);
  write_file(dir / "truth.csv", taps_csv(h.taps));
  std::ostringstream summary;
  summary << "method,mse,normalized_mse,support_size,converged\n";
  json diag = json::array();
  std::size_t failures = 0;
  std::vector<std::string> series = {"'truth.csv' every ::1 using 1:(sqrt($2**2+$3**2)) with impulses lw 2 title 'true'"};
  for (Method m : e.methods) {
    try {
      const Estimate est = run_estimator(m, x, obs, e.estimator, &h.support);
      const std::string name(to_string(m));
      write_file(dir / ("taps_" + name + ".csv"), taps_csv(est.h_hat));
      const double err = mse(h, est);
      summary << name << ',' << format_double(err) << ','
              << format_double(err / h.taps.squaredNorm()) << ',' << est.support_hat.size() << ','
              << (est.diagnostics.converged ? 1 : 0) << '\n';
      diag.push_back(diagnostics_json(est));
      series.push_back("'taps_" + name + ".csv' every ::1 using 1:(sqrt($2**2+$3**2)) with points title '" + name + "'");
    } catch (const std::exception& ex) {
      ++failures;
      diag.push_back({{"method", to_string(m)}, {"error", ex.what()}});
    }
  }
  write_file(dir / "result.csv", summary.str());
  write_file(dir / "diagnostics.json", diag.dump(2) + "\n");
  write_file(dir / "plot.gp", stem_plot(series));
  json extra;
  extra["instance_seed"] = seed;
  extra["noise_variance"] = obs.noise_variance;
  extra["true_support"] = h.support;
  extra["estimates"] = diag;
  write_file(dir / "meta.json", meta_json(ctx, extra).dump(2) + "\n");
  return finish(ctx, dir, failures);
}

inline int run_demo_fig2(RunContext& ctx) {
  const ExperimentConfig& e = ctx.cfg.experiment;
  const SparseChannel h = fixed_channel_figure2(e.base_seed);
  const ToeplitzTraining x = build_toeplitz_training(e.fixed_n, h.length(), e.distribution,
                                                     splitmix64(e.base_seed ^ 0x2));
  const Observation obs = observe(x, h, e.fixed_snr_db, splitmix64(e.base_seed ^ 0x3));
  const Estimate ls = ls_estimate(x, obs);
  const Estimate ds = ds_estimate(x, obs, e.estimator);

  const fs::path dir = make_run_dir(ctx.out_root, ctx.subcommand);
  std::ostringstream csv;
  csv << "index,true_real,true_imag,ls_real,ls_imag,ds_real,ds_imag,ds_support\n";
  for (Eigen::Index i = 0; i < h.taps.size(); ++i) {
    const bool in_ds =
        std::find(ds.support_hat.begin(), ds.support_hat.end(), static_cast<std::size_t>(i)) !=
        ds.support_hat.end();
    csv << i << ',' << format_double(h.taps(i).real()) << ',' << format_double(h.taps(i).imag())
        << ',' << format_double(ls.h_hat(i).real()) << ',' << format_double(ls.h_hat(i).imag())
        << ',' << format_double(ds.h_hat(i).real()) << ',' << format_double(ds.h_hat(i).imag())
        << ',' << (in_ds ? 1 : 0) << '\n';
  }
  write_file(dir / "result.csv", csv.str());
  write_file(dir / "plot.gp",
             stem_plot({"'result.csv' every ::1 using 1:(sqrt($2**2+$3**2)) with impulses lw 2 lc 'black' title 'true'",
                        "'result.csv' every ::1 using 1:(sqrt($4**2+$5**2)) with points pt 1 lc 'red' title 'LS'",
                        "'result.csv' every ::1 using 1:(sqrt($6**2+$7**2)) with points pt 6 lc 'blue' title 'DS'"}));
  json extra;
  extra["true_support"] = h.support;
  extra["noise_variance"] = obs.noise_variance;
  extra["estimates"] = {diagnostics_json(ls), diagnostics_json(ds)};
  write_file(dir / "meta.json", meta_json(ctx, extra).dump(2) + "\n");
  return finish(ctx, dir, ds.diagnostics.converged ? 0 : 1);
}

inline int run_ric(RunContext& ctx) {
  const ExperimentConfig& e = ctx.cfg.experiment;
  const ToeplitzTraining x =
      build_toeplitz_training(e.fixed_n, e.L, e.distribution, splitmix64(e.base_seed ^ 0x2));
  const RicEstimate ric = restricted_isometry_constant(x, e.T, ctx.cfg.max_supports, true, e.base_seed);
  const fs::path dir = make_run_dir(ctx.out_root, ctx.subcommand);
  std::ostringstream csv;
  csv << "support,min_eig,max_eig\n";
  for (const auto& row : ric.per_support) {
    for (std::size_t k = 0; k < row.support.size(); ++k) csv << (k ? " " : "") << row.support[k];
    csv << ',' << format_double(row.min_eig) << ',' << format_double(row.max_eig) << '\n';
  }
  write_file(dir / "result.csv", csv.str());
  write_file(dir / "plot.gp",
             "set datafile separator ','\nset xlabel 'support #'\nset ylabel 'eigenvalue'\n"
             "set terminal pngcairo size 800,500\nset output 'ric.png'\n"
             "plot 'result.csv' every ::1 using 0:2 with dots title 'min eig', "
             "'' every ::1 using 0:3 with dots title 'max eig'\n");
  json extra;
  extra["order"] = ric.order;
  extra["delta"] = ric.delta;
  extra["exhaustive"] = ric.exhaustive;
  extra["lower_bound"] = !ric.exhaustive;
  extra["rip_holds"] = ric.rip_holds();
  extra["supports_evaluated"] = ric.supports_evaluated;
  write_file(dir / "meta.json", meta_json(ctx, extra).dump(2) + "\n");
  ctx.out << "delta_" << ric.order << " = " << format_double(ric.delta)
          << (ric.exhaustive ? "" : " (sampled lower bound)") << '\n';
  return finish(ctx, dir, 0);
}

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Sparse multipath channel estimation toolkit"};
  app.require_subcommand(1);
  Overrides o;
  const std::vector<std::string> names = {"estimate", "sweep-snr", "sweep-n", "ric", "demo-fig2", "budget"};
  const std::vector<std::string> help = {
      "Run all configured estimators on one seeded instance",
      "MSE versus SNR sweep",
      "MSE versus training-length sweep",
      "Restricted isometry constant of a random Toeplitz training matrix",
      "Five-tap LS vs DS illustration (n = 30, L = 60, SNR = 10 dB)",
      "Print the measurement budget n_min = ceil(c T ln(p/T))"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    add_common(sub, o);
    if (names[i] == "budget") sub->add_option("--p", o.p, "Channel length p");
    if (names[i] == "ric") sub->add_option("--max-supports", o.max_supports, "Enumeration cap");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  RunContext ctx{out, err, sub, {}, o.out_dir};
  try {
    ctx.cfg = resolve(sub, o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sub == "budget") {
      const std::size_t p = ctx.cfg.p.value_or(ctx.cfg.experiment.L);
      const MeasurementBudget b = measurement_budget(ctx.cfg.experiment.T, p, ctx.cfg.c);
      out << b.n_min << '\n';
      return kExitOk;
    }
    fs::create_directories(ctx.out_root);
    if (sub == "sweep-snr") return run_sweep(ctx, SweepAxis::snr_db);
    if (sub == "sweep-n") return run_sweep(ctx, SweepAxis::n_training);
    if (sub == "estimate") return run_estimate(ctx);
    if (sub == "demo-fig2") return run_demo_fig2(ctx);
    if (sub == "ric") return run_ric(ctx);
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitConfig;
}

}  // namespace sparsechan::cli
