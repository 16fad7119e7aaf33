#pragma once

#include "sparsechan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace sparsechan {

using IndexSet = std::vector<std::size_t>;

/// Length-L tap vector whose nonzero entries sit exactly on `support`.
struct SparseChannel {
  ComplexVector taps;
  IndexSet support;  // ascending

  std::size_t length() const { return static_cast<std::size_t>(taps.size()); }
  std::size_t sparsity() const { return support.size(); }
};

enum class ProbeDistribution { gaussian, complex_gaussian, rademacher };

inline std::string_view to_string(ProbeDistribution d) {
  switch (d) {
    case ProbeDistribution::gaussian: return "gaussian";
    case ProbeDistribution::complex_gaussian: return "complex_gaussian";
    case ProbeDistribution::rademacher: return "rademacher";
  }
  return "unknown";
}

inline ProbeDistribution parse_distribution(std::string_view s) {
  if (s == "gaussian") return ProbeDistribution::gaussian;
  if (s == "complex_gaussian") return ProbeDistribution::complex_gaussian;
  if (s == "rademacher") return ProbeDistribution::rademacher;
  throw InvalidInput("unknown probe distribution '" + std::string(s) + "'");
}

/// N×L convolution matrix of a probe sequence of length N+L−1:
/// matrix(i, j) = probe(i − j + L − 1).
struct ToeplitzTraining {
  ComplexVector probe;
  ComplexMatrix matrix;

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }

  // Lets a training sequence be passed wherever a sensing matrix is expected.
  operator const ComplexMatrix&() const { return matrix; }
};

struct Observation {
  ComplexVector y;
  double noise_variance = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

struct MeasurementBudget {
  std::size_t sparsity;
  std::size_t length;
  double c;
  std::size_t n_min;
};

struct SupportExtremes {
  IndexSet support;
  double min_eig;
  double max_eig;
};

struct RicEstimate {
  std::size_t order = 0;
  double delta = 0.0;
  bool exhaustive = true;    // false: sampled supports, delta is a lower bound
  std::size_t supports_evaluated = 0;
  std::vector<SupportExtremes> per_support;

  bool rip_holds() const { return delta < 1.0; }
};

// Circular complex Gaussian with E|z|² = variance.
inline Complex complex_gaussian(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

/// Uniformly random `count`-subset of {0..n−1}, returned in draw order.
inline IndexSet draw_subset(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  IndexSet pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

inline SparseChannel generate_sparse_channel(std::size_t length, std::size_t sparsity,
                                             std::uint64_t seed) {
  if (sparsity < 1 || sparsity > length)
    throw InvalidInput("generate_sparse_channel: need 1 <= T <= L (T = " +
                       std::to_string(sparsity) + ", L = " + std::to_string(length) + ")");
  std::mt19937_64 rng(seed);
  SparseChannel h;
  h.support = draw_subset(length, sparsity, rng);
  h.taps = ComplexVector::Zero(static_cast<Eigen::Index>(length));
  for (std::size_t idx : h.support) {
    Complex v = complex_gaussian(rng, 1.0);
    // Zero has probability zero under the Gaussian draw but must never leak
    // into the support.
    while (v == Complex(0.0, 0.0)) v = complex_gaussian(rng, 1.0);
    h.taps(static_cast<Eigen::Index>(idx)) = v;
  }
  std::sort(h.support.begin(), h.support.end());
  return h;
}

/// The five-tap illustration channel: L = 60 with the coefficients
/// 0.8+0.4i, −0.5+0.7i, −0.1+0.15i, 0.6−0.3i, −0.8−0.7i placed at
/// seed-determined positions.
inline SparseChannel fixed_channel_figure2(std::uint64_t seed = 2) {
  static constexpr std::size_t kLength = 60;
  const Complex coeffs[] = {{0.8, 0.4}, {-0.5, 0.7}, {-0.1, 0.15}, {0.6, -0.3}, {-0.8, -0.7}};
  std::mt19937_64 rng(seed);
  SparseChannel h;
  h.support = draw_subset(kLength, 5, rng);
  h.taps = ComplexVector::Zero(kLength);
  for (std::size_t k = 0; k < 5; ++k) h.taps(static_cast<Eigen::Index>(h.support[k])) = coeffs[k];
  std::sort(h.support.begin(), h.support.end());
  return h;
}

inline ToeplitzTraining toeplitz_from_probe(const ComplexVector& probe, std::size_t rows,
                                            std::size_t cols) {
  if (rows < 1 || cols < 1) throw InvalidInput("toeplitz training needs N >= 1 and L >= 1");
  if (static_cast<std::size_t>(probe.size()) != rows + cols - 1)
    throw InvalidInput("toeplitz training: probe length must be N + L - 1");
  ToeplitzTraining t;
  t.probe = probe;
  t.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const auto L = static_cast<Eigen::Index>(cols);
  for (Eigen::Index i = 0; i < t.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < L; ++j) t.matrix(i, j) = probe(i - j + L - 1);
  return t;
}

/// Random Toeplitz sensing matrix; probe entries are i.i.d. with variance 1/N
/// so every column has unit expected squared norm.
inline ToeplitzTraining build_toeplitz_training(std::size_t rows, std::size_t cols,
                                                ProbeDistribution dist, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw InvalidInput("toeplitz training needs N >= 1 and L >= 1");
  std::mt19937_64 rng(seed);
  const double var = 1.0 / static_cast<double>(rows);
  ComplexVector probe(static_cast<Eigen::Index>(rows + cols - 1));
  std::normal_distribution<double> g(0.0, std::sqrt(var));
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index k = 0; k < probe.size(); ++k) {
    switch (dist) {
      case ProbeDistribution::gaussian: probe(k) = g(rng); break;
      case ProbeDistribution::complex_gaussian: probe(k) = complex_gaussian(rng, var); break;
      case ProbeDistribution::rademacher: probe(k) = coin(rng) ? std::sqrt(var) : -std::sqrt(var); break;
    }
  }
  return toeplitz_from_probe(probe, rows, cols);
}

/// y = X·h + z with σ² = ‖Xh‖²/(N·10^(snr/10)). An infinite SNR gives z = 0.
inline Observation observe(const ToeplitzTraining& x, const SparseChannel& h, double snr_db,
                           std::uint64_t seed) {
  if (x.cols() != h.length())
    throw InvalidInput("observe: training has " + std::to_string(x.cols()) +
                       " columns but channel length is " + std::to_string(h.length()));
  if (std::isnan(snr_db)) throw InvalidInput("observe: SNR is NaN");
  Observation obs;
  obs.snr_db = snr_db;
  obs.seed = seed;
  obs.y = x.matrix * h.taps;
  if (std::isinf(snr_db) && snr_db > 0) return obs;
  const double n = static_cast<double>(x.rows());
  obs.noise_variance = obs.y.squaredNorm() / (n * std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < obs.y.size(); ++i) obs.y(i) += complex_gaussian(rng, obs.noise_variance);
  return obs;
}

inline MeasurementBudget measurement_budget(std::size_t sparsity, std::size_t length, double c) {
  if (sparsity < 1 || sparsity >= length)
    throw InvalidInput("measurement_budget: need 1 <= T < p");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("measurement_budget: c must be positive");
  const double raw = c * static_cast<double>(sparsity) *
                     std::log(static_cast<double>(length) / static_cast<double>(sparsity));
  return {sparsity, length, c, static_cast<std::size_t>(std::ceil(raw))};
}

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Advances a sorted k-combination of {0..n−1}; false once exhausted.
inline bool next_combination(IndexSet& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// δ_T as the worst deviation from 1 of the Gram eigenvalues over all
/// T-column supports. When C(L, T) exceeds `max_supports` a random sample
/// of supports is used instead and the result is only a lower bound.
inline RicEstimate restricted_isometry_constant(const ComplexMatrix& x, std::size_t order,
                                                std::size_t max_supports,
                                                bool keep_table = false,
                                                std::uint64_t seed = 0) {
  const auto L = static_cast<std::size_t>(x.cols());
  if (order < 1 || order > L) throw InvalidInput("restricted_isometry_constant: need 1 <= T <= L");
  if (max_supports < 1) throw InvalidInput("restricted_isometry_constant: max_supports must be >= 1");

  RicEstimate est;
  est.order = order;
  est.exhaustive = detail::binomial(L, order) <= static_cast<double>(max_supports);

  auto evaluate = [&](const IndexSet& support) {
    ComplexMatrix sub(x.rows(), static_cast<Eigen::Index>(order));
    for (std::size_t k = 0; k < order; ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(support[k]));
    ComplexMatrix g = gram(sub);
    g = (0.5 * (g + g.adjoint())).eval();
    const EigenExtremes e = hermitian_eig_extremes(g);
    est.delta = std::max({est.delta, 1.0 - e.min_eig, e.max_eig - 1.0});
    ++est.supports_evaluated;
    if (keep_table) est.per_support.push_back({support, e.min_eig, e.max_eig});
  };

  if (est.exhaustive) {
    IndexSet comb(order);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    do evaluate(comb);
    while (detail::next_combination(comb, L));
  } else {
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < max_supports; ++s) {
      IndexSet support = draw_subset(L, order, rng);
      std::sort(support.begin(), support.end());
      evaluate(support);
    }
  }
  return est;
}

inline RicEstimate restricted_isometry_constant(const ToeplitzTraining& x, std::size_t order,
                                                std::size_t max_supports,
                                                bool keep_table = false,
                                                std::uint64_t seed = 0) {
  return restricted_isometry_constant(x.matrix, order, max_supports, keep_table, seed);
}

}  // namespace sparsechan
