#pragma once

#include "sparsechan/estimators.hpp"
#include "sparsechan/model.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace sparsechan {

struct ExperimentConfig {
  std::size_t L = 60;
  std::size_t T = 4;
  std::size_t trials = 1000;
  std::vector<Method> methods = {Method::ls, Method::omp, Method::lasso, Method::ds,
                                 Method::oracle};
  std::vector<double> snr_grid_db = {3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
  std::vector<std::size_t> n_grid = {10, 15, 20, 25, 30, 35, 40, 45, 50, 55};
  double fixed_snr_db = 20.0;
  std::size_t fixed_n = 30;
  std::uint64_t base_seed = 1;
  EstimatorConfig estimator;
  ProbeDistribution distribution = ProbeDistribution::gaussian;
  bool fixed_training = false;  // one X per training length instead of one per trial
  unsigned threads = 1;         // 0: hardware concurrency
};

enum class SweepAxis { snr_db, n_training };

inline std::string_view to_string(SweepAxis a) {
  return a == SweepAxis::snr_db ? "snr_db" : "n_training";
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw InvalidInput("trials must be >= 1");
  if (cfg.T < 1 || cfg.T > cfg.L) throw InvalidInput("need 1 <= T <= L");
  if (cfg.methods.empty()) throw InvalidInput("methods must not be empty");
  if (cfg.snr_grid_db.empty() || !std::is_sorted(cfg.snr_grid_db.begin(), cfg.snr_grid_db.end()))
    throw InvalidInput("snr_grid_db must be non-empty and sorted ascending");
  if (cfg.n_grid.empty() || !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()))
    throw InvalidInput("n_grid must be non-empty and sorted ascending");
  for (double s : cfg.snr_grid_db)
    if (std::isnan(s)) throw InvalidInput("snr_grid_db contains NaN");
  for (std::size_t n : cfg.n_grid)
    if (n < 1) throw InvalidInput("training length n must be >= 1");
  if (cfg.fixed_n < 1) throw InvalidInput("fixed_n must be >= 1");
}

/// Single-trial squared error ‖h − ĥ‖₂² (unnormalized).
inline double mse(const SparseChannel& truth, const Estimate& est) {
  if (truth.taps.size() != est.h_hat.size())
    throw InvalidInput("mse: estimate has dimension " + std::to_string(est.h_hat.size()) +
                       ", channel has " + std::to_string(truth.taps.size()));
  return (truth.taps - est.h_hat).squaredNorm();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// seed = mix(mix(mix(mix(base) ⊕ bits(snr)) ⊕ n) ⊕ trial), mix = splitmix64.
inline std::uint64_t trial_seed(std::uint64_t base, double snr_db, std::size_t n,
                                std::size_t trial) {
  if (snr_db == 0.0) snr_db = 0.0;  // folds −0 onto +0
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ std::bit_cast<std::uint64_t>(snr_db));
  s = splitmix64(s ^ static_cast<std::uint64_t>(n));
  return splitmix64(s ^ static_cast<std::uint64_t>(trial));
}

struct MethodOutcome {
  Method method;
  double mse = 0.0;
  double normalized_mse = 0.0;
  bool failed = false;
  bool converged = true;
  std::string error;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> outcomes;  // same order as cfg.methods
};

/// One Monte Carlo trial: fresh channel, training matrix and noise, then
/// every configured method on the same (X, y).
inline TrialRecord run_trial(const ExperimentConfig& cfg, double snr_db, std::size_t n,
                             std::size_t trial_index) {
  if (trial_index >= cfg.trials) throw InvalidInput("trial index out of range");
  if (n < 1) throw InvalidInput("training length n must be >= 1");
  TrialRecord rec;
  rec.seed = trial_seed(cfg.base_seed, snr_db, n, trial_index);
  const std::uint64_t training_seed =
      cfg.fixed_training ? splitmix64(splitmix64(cfg.base_seed) ^ static_cast<std::uint64_t>(n))
                         : splitmix64(rec.seed ^ 0x2);
  const SparseChannel h = generate_sparse_channel(cfg.L, cfg.T, splitmix64(rec.seed ^ 0x1));
  const ToeplitzTraining x = build_toeplitz_training(n, cfg.L, cfg.distribution, training_seed);
  const Observation obs = observe(x, h, snr_db, splitmix64(rec.seed ^ 0x3));
  const double energy = h.taps.squaredNorm();

  for (Method m : cfg.methods) {
    MethodOutcome out;
    out.method = m;
    try {
      const Estimate est = run_estimator(m, x, obs, cfg.estimator, &h.support);
      out.mse = mse(h, est);
      out.normalized_mse = out.mse / energy;
      out.converged = est.diagnostics.converged;
    } catch (const std::exception& e) {
      out.failed = true;
      out.converged = false;
      out.error = e.what();
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

/// Runs trials 0..M−1 at one sweep point. Records land at their trial index,
/// so the result does not depend on the number of worker threads.
inline std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, double snr_db,
                                           std::size_t n) {
  std::vector<TrialRecord> records(cfg.trials);
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.trials));
  if (workers <= 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) records[t] = run_trial(cfg, snr_db, n, t);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> errored{false};
  auto work = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        records[t] = run_trial(cfg, snr_db, n, t);
      } catch (...) {
        if (!errored.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

/// Neumaier-compensated sum.
inline double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) {
    s.mean = s.median = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double n = static_cast<double>(v.size());
  s.mean = compensated_sum(v) / n;
  s.median = median_of(v);
  if (v.size() > 1) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - s.mean) * (v[i] - s.mean);
    s.std = std::sqrt(compensated_sum(dev) / (n - 1.0));
  }
  return s;
}

struct MethodAggregate {
  Method method;
  Summary mse;
  Summary normalized_mse;
  std::size_t trials_used = 0;
  std::size_t non_converged = 0;  // included in the aggregate
  std::size_t failed = 0;         // excluded: no estimate available
};

struct SweepPoint {
  double axis_value = 0.0;
  std::vector<MethodAggregate> per_method;  // same order as cfg.methods
  std::vector<TrialRecord> trials;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::snr_db;
  std::vector<SweepPoint> points;

  const MethodAggregate& at(std::size_t point, Method m) const {
    for (const auto& a : points.at(point).per_method)
      if (a.method == m) return a;
    throw InvalidInput("method not part of this sweep");
  }
  std::size_t failed_cells() const {
    std::size_t f = 0;
    for (const auto& p : points)
      for (const auto& a : p.per_method) f += a.failed;
    return f;
  }
};

inline SweepPoint aggregate(double axis_value, const std::vector<Method>& methods,
                            std::vector<TrialRecord> trials) {
  SweepPoint pt;
  pt.axis_value = axis_value;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodAggregate agg;
    agg.method = methods[k];
    std::vector<double> values, normalized;
    for (const auto& rec : trials) {
      const MethodOutcome& o = rec.outcomes[k];
      if (o.failed) {
        ++agg.failed;
        continue;
      }
      if (!o.converged) ++agg.non_converged;
      values.push_back(o.mse);
      normalized.push_back(o.normalized_mse);
    }
    agg.trials_used = values.size();
    agg.mse = summarize(values);
    agg.normalized_mse = summarize(normalized);
    pt.per_method.push_back(agg);
  }
  pt.trials = std::move(trials);
  return pt;
}

/// MSE versus SNR at training length fixed_n.
inline SweepResult sweep_snr(const ExperimentConfig& cfg) {
  validate(cfg);
  SweepResult res;
  res.axis = SweepAxis::snr_db;
  for (double snr : cfg.snr_grid_db)
    res.points.push_back(aggregate(snr, cfg.methods, run_trials(cfg, snr, cfg.fixed_n)));
  return res;
}

/// MSE versus training length at fixed_snr_db.
inline SweepResult sweep_training_length(const ExperimentConfig& cfg) {
  validate(cfg);
  SweepResult res;
  res.axis = SweepAxis::n_training;
  for (std::size_t n : cfg.n_grid)
    res.points.push_back(
        aggregate(static_cast<double>(n), cfg.methods, run_trials(cfg, cfg.fixed_snr_db, n)));
  return res;
}

}  // namespace sparsechan
