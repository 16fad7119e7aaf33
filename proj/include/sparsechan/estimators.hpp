#pragma once

#include "sparsechan/lp.hpp"
#include "sparsechan/model.hpp"
#include "sparsechan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparsechan {

enum class Method { ls, omp, lasso, ds, sds, oracle };

inline constexpr Method kAllMethods[] = {Method::ls,  Method::omp, Method::lasso,
                                         Method::ds,  Method::sds, Method::oracle};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ls: return "ls";
    case Method::omp: return "omp";
    case Method::lasso: return "lasso";
    case Method::ds: return "ds";
    case Method::sds: return "sds";
    case Method::oracle: return "oracle";
  }
  return "unknown";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  throw InvalidInput("unknown estimator '" + std::string(s) + "'");
}

/// Raised when a solver reports an outcome that is impossible for a
/// well-posed estimator problem (e.g. an infeasible Dantzig program).
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "auto" or a fixed non-negative value.
struct LambdaRule {
  bool automatic = true;
  double value = 0.0;

  static LambdaRule fixed(double v) { return {false, v}; }
};

enum class ComplexMode { real_composite };

inline std::string_view to_string(ComplexMode) { return "real_composite"; }

struct EstimatorConfig {
  LambdaRule lambda_ds;
  LambdaRule lambda_lasso;
  std::optional<std::size_t> omp_max_atoms;   // unset: auto
  std::optional<double> omp_residual_tol;     // unset: auto
  double lp_tolerance = 1e-8;
  int lp_max_iterations = 200;
  ComplexMode complex_mode = ComplexMode::real_composite;
};

struct Diagnostics {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;
  bool regularized = false;
  std::string solver_status;
  IndexSet atoms;  // OMP selection order
  std::string note;
};

struct Estimate {
  ComplexVector h_hat;
  Method method = Method::ls;
  IndexSet support_hat;
  Diagnostics diagnostics;
};

/// Entries with modulus above max(1e-4·‖ĥ‖∞, 1e-8).
inline IndexSet reported_support(const ComplexVector& h) {
  const double thr = std::max(1e-4 * norm_inf(h), 1e-8);
  IndexSet s;
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (std::abs(h(i)) > thr) s.push_back(static_cast<std::size_t>(i));
  return s;
}

inline Estimate make_estimate(Method m, ComplexVector h, Diagnostics d = {}) {
  Estimate e;
  e.support_hat = reported_support(h);
  e.h_hat = std::move(h);
  e.method = m;
  e.diagnostics = std::move(d);
  return e;
}

/// Auto rule: λ = σ·√(2 ln L)·max‖xᵢ‖₂, shared by DS and Lasso.
inline double resolve_lambda(double sigma, const ComplexMatrix& x, const LambdaRule& rule) {
  if (!rule.automatic) {
    if (!(rule.value >= 0.0) || !std::isfinite(rule.value))
      throw InvalidInput("lambda must be a finite non-negative value");
    return rule.value;
  }
  if (!(sigma >= 0.0)) throw InvalidInput("resolve_lambda: sigma must be non-negative");
  const double L = static_cast<double>(x.cols());
  if (sigma == 0.0 || L <= 1.0) return 0.0;
  return sigma * std::sqrt(2.0 * std::log(L)) * max_column_norm(x);
}

inline double noise_sigma(const Observation& obs) { return std::sqrt(obs.noise_variance); }

// ---------------------------------------------------------------- LS

inline Estimate ls_estimate(const ComplexMatrix& x, const Observation& obs) {
  if (x.rows() != obs.y.size()) throw InvalidInput("ls_estimate: dimension mismatch");
  Diagnostics d;
  ComplexVector h;
  if (x.rows() >= x.cols()) {
    try {
      h = least_squares_solve(x, obs.y);
      d.note = "least squares";
      return make_estimate(Method::ls, std::move(h), d);
    } catch (const SingularMatrix&) {
      ComplexMatrix g = gram(x);
      g.diagonal().array() += 1e-10 * std::max(1.0, g.diagonal().real().maxCoeff());
      h = g.ldlt().solve(x.adjoint() * obs.y);
      d.regularized = true;
      d.note = "rank-deficient least squares, regularized normal equations";
      return make_estimate(Method::ls, std::move(h), d);
    }
  }
  // Minimum-norm solution Xᴴ(XXᴴ)⁻¹y.
  ComplexMatrix k = x * x.adjoint();
  Eigen::LLT<ComplexMatrix> chol(k);
  if (chol.info() != Eigen::Success || chol.rcond() < kPivotTolerance) {
    k.diagonal().array() += 1e-10 * std::max(1.0, k.diagonal().real().maxCoeff());
    chol.compute(k);
    d.regularized = true;
  }
  h = x.adjoint() * chol.solve(obs.y);
  d.note = d.regularized ? "minimum-norm, regularized" : "minimum-norm";
  return make_estimate(Method::ls, std::move(h), d);
}

// ---------------------------------------------------------------- OMP

inline Estimate omp_estimate(const ComplexMatrix& x, const Observation& obs,
                             const EstimatorConfig& cfg,
                             std::optional<std::size_t> known_sparsity = std::nullopt) {
  if (x.rows() != obs.y.size()) throw InvalidInput("omp_estimate: dimension mismatch");
  const auto N = static_cast<std::size_t>(x.rows());
  const auto L = static_cast<std::size_t>(x.cols());
  const std::size_t max_atoms = cfg.omp_max_atoms.value_or(known_sparsity.value_or(std::min(N, L)));
  if (max_atoms > std::min(N, L))
    throw InvalidInput("omp_estimate: omp_max_atoms exceeds min(N, L)");
  const double residual_tol = cfg.omp_residual_tol.value_or(
      known_sparsity ? 0.0 : std::sqrt(static_cast<double>(N)) * noise_sigma(obs));

  Diagnostics d;
  ComplexVector residual = obs.y;
  ComplexVector coef;
  ComplexMatrix chosen(x.rows(), 0);
  while (d.atoms.size() < max_atoms && residual.norm() > residual_tol) {
    const ComplexVector corr = x.adjoint() * residual;
    Eigen::Index best = 0;
    const double peak = corr.cwiseAbs().maxCoeff(&best);
    if (peak == 0.0) break;
    const auto pick = static_cast<std::size_t>(best);
    if (std::find(d.atoms.begin(), d.atoms.end(), pick) != d.atoms.end()) {
      d.converged = false;
      d.note = "atom " + std::to_string(pick) + " reselected; stopped";
      break;
    }
    ComplexMatrix trial(x.rows(), chosen.cols() + 1);
    trial << chosen, x.col(best);
    ComplexVector trial_coef;
    try {
      trial_coef = least_squares_solve(trial, obs.y);
    } catch (const SingularMatrix&) {
      d.converged = false;
      d.note = "degenerate refit at atom " + std::to_string(pick) + "; stopped";
      break;
    }
    chosen = std::move(trial);
    coef = std::move(trial_coef);
    d.atoms.push_back(pick);
    residual = obs.y - chosen * coef;
  }
  d.iterations = static_cast<int>(d.atoms.size());
  ComplexVector h = ComplexVector::Zero(x.cols());
  for (std::size_t k = 0; k < d.atoms.size(); ++k)
    h(static_cast<Eigen::Index>(d.atoms[k])) = coef(static_cast<Eigen::Index>(k));
  return make_estimate(Method::omp, std::move(h), d);
}

// ---------------------------------------------------------------- Lasso

inline constexpr double kLassoTolerance = 1e-9;
inline constexpr int kLassoMaxSweeps = 10000;

/// Shrinks the modulus of z by t, keeping its phase.
inline Complex complex_soft_threshold(Complex z, double t) {
  const double mag = std::abs(z);
  return mag <= t ? Complex(0.0, 0.0) : z * ((mag - t) / mag);
}

/// Cyclic coordinate descent on ½‖y − Xh‖² + λ‖h‖₁ (modulus ℓ₁).
inline Estimate lasso_estimate(const ComplexMatrix& x, const Observation& obs,
                               const EstimatorConfig& cfg) {
  if (x.rows() != obs.y.size()) throw InvalidInput("lasso_estimate: dimension mismatch");
  const double lambda = resolve_lambda(noise_sigma(obs), x, cfg.lambda_lasso);
  const Eigen::Index L = x.cols();
  const RealVector col_sq = x.colwise().squaredNorm().transpose();

  ComplexVector h = ComplexVector::Zero(L);
  ComplexVector residual = obs.y;
  Diagnostics d;
  d.lambda = lambda;
  d.converged = false;
  for (int sweep = 1; sweep <= kLassoMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < L; ++j) {
      if (col_sq(j) == 0.0) continue;
      const Complex old = h(j);
      const Complex rho = x.col(j).dot(residual) + col_sq(j) * old;
      const Complex upd = complex_soft_threshold(rho, lambda) / col_sq(j);
      const Complex delta = upd - old;
      if (delta != Complex(0.0, 0.0)) {
        residual -= x.col(j) * delta;
        h(j) = upd;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    d.iterations = sweep;
    if (max_change < kLassoTolerance) {
      d.converged = true;
      break;
    }
  }
  if (!d.converged) d.note = "sweep limit reached";
  return make_estimate(Method::lasso, std::move(h), d);
}

// ---------------------------------------------------------------- Dantzig selector

struct DantzigSolution {
  ComplexVector h;
  LpStatus status = LpStatus::optimal;
  int iterations = 0;
};

/// min ‖θ‖₁ s.t. ‖g − G·θ‖∞ ≤ λ over real θ, via θ = u − v with u, v ≥ 0.
inline LpSolution solve_real_dantzig(const RealMatrix& g_mat, const RealVector& g, double lambda,
                                     const LpOptions& opt) {
  const Eigen::Index rows = g_mat.rows(), p = g_mat.cols();
  LinearProgram lp;
  lp.objective = RealVector::Ones(2 * p);
  lp.constraints.resize(2 * rows, 2 * p);
  lp.constraints << g_mat, -g_mat, -g_mat, g_mat;
  lp.rhs.resize(2 * rows);
  lp.rhs << (g.array() + lambda).matrix(), (lambda - g.array()).matrix();
  return solve_lp(lp, opt);
}

/// Real-composite Dantzig program with correlation matrix `sensing`:
/// min Σ|Re hᵢ| + |Im hᵢ|  s.t.  |Re/Im [sensingᴴ(y − X·h)]ᵢ| ≤ λ.
/// When both matrices are real, the real and imaginary parts decouple and
/// are solved as two independent programs.
inline DantzigSolution solve_dantzig(const ComplexMatrix& sensing, const ComplexMatrix& x,
                                     const ComplexVector& y, double lambda, const LpOptions& opt) {
  const ComplexMatrix m = sensing.adjoint() * x;
  const ComplexVector q = sensing.adjoint() * y;
  const Eigen::Index L = x.cols();
  DantzigSolution out;

  auto absorb = [&](const LpSolution& s) {
    out.iterations += s.iterations;
    if (s.status == LpStatus::infeasible || s.status == LpStatus::unbounded)
      throw SolverFailure("Dantzig program reported " + std::string(to_string(s.status)) +
                          " after " + std::to_string(s.iterations) + " iterations");
    if (s.status != LpStatus::optimal) out.status = s.status;
  };

  if (is_real(sensing) && is_real(x)) {
    const RealMatrix mr = m.real();
    const LpSolution re = solve_real_dantzig(mr, q.real(), lambda, opt);
    absorb(re);
    const LpSolution im = solve_real_dantzig(mr, q.imag(), lambda, opt);
    absorb(im);
    out.h.resize(L);
    for (Eigen::Index i = 0; i < L; ++i)
      out.h(i) = Complex(re.x(i) - re.x(L + i), im.x(i) - im.x(L + i));
  } else {
    const LpSolution s = solve_real_dantzig(real_composite(m), real_composite(q), lambda, opt);
    absorb(s);
    const Eigen::Index p = 2 * L;
    out.h = from_real_composite((s.x.head(p) - s.x.tail(p)).eval());
  }
  return out;
}

inline LpOptions lp_options(const EstimatorConfig& cfg) {
  return {cfg.lp_tolerance, cfg.lp_max_iterations, 1e-10};
}

inline Estimate ds_estimate(const ComplexMatrix& x, const Observation& obs,
                            const EstimatorConfig& cfg) {
  if (x.rows() != obs.y.size()) throw InvalidInput("ds_estimate: dimension mismatch");
  const double lambda = resolve_lambda(noise_sigma(obs), x, cfg.lambda_ds);
  const DantzigSolution sol = solve_dantzig(x, x, obs.y, lambda, lp_options(cfg));
  Diagnostics d;
  d.lambda = lambda;
  d.iterations = sol.iterations;
  d.converged = sol.status == LpStatus::optimal;
  d.solver_status = to_string(sol.status);
  d.note = "norm convention: real_composite";
  return make_estimate(Method::ds, sol.h, d);
}

/// Reweighted sensing matrix: R = X·W²·Xᴴ and column i of X_alt equal to
/// R⁻¹xᵢ / (xᵢᴴR⁻¹xᵢ).
struct SdsWeighting {
  RealVector weights;  // diagonal of W
  ComplexMatrix r;
  ComplexMatrix x_alt;
  bool regularized = false;
};

inline SdsWeighting sds_weighting(const ComplexMatrix& x, const RealVector& weights) {
  if (weights.size() != x.cols()) throw InvalidInput("sds_weighting: one weight per column required");
  if ((weights.array() < 0.0).any()) throw InvalidInput("sds_weighting: weights must be non-negative");
  SdsWeighting out;
  out.weights = weights;
  out.r = x * weights.cwiseAbs2().asDiagonal() * x.adjoint();
  out.r = (0.5 * (out.r + out.r.adjoint())).eval();

  ComplexMatrix k = out.r;
  Eigen::LLT<ComplexMatrix> chol(k);
  if (chol.info() != Eigen::Success || chol.rcond() < kPivotTolerance) {
    k.diagonal().array() += 1e-10 * std::max(1.0, k.diagonal().real().maxCoeff());
    chol.compute(k);
    out.regularized = true;
  }
  out.x_alt = chol.solve(x);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double denom = x.col(i).dot(out.x_alt.col(i)).real();
    if (denom > 0.0)
      out.x_alt.col(i) /= denom;
    else
      out.x_alt.col(i).setZero();
  }
  return out;
}

inline Estimate sds_estimate(const ComplexMatrix& x, const Observation& obs,
                             const EstimatorConfig& cfg) {
  Estimate initial = ds_estimate(x, obs, cfg);
  initial.method = Method::sds;

  const ComplexVector corr = x.adjoint() * (obs.y - x * initial.h_hat);
  const RealVector w = corr.cwiseAbs();
  const double scale = 1.0 + norm_inf(ComplexVector(x.adjoint() * obs.y));
  if (w.size() == 0 || w.maxCoeff() <= 100.0 * cfg.lp_tolerance * scale) {
    initial.diagnostics.note = "zero correlated residual; initial DS estimate returned";
    return initial;
  }

  const SdsWeighting wt = sds_weighting(x, w);
  const DantzigSolution sol =
      solve_dantzig(wt.x_alt, x, obs.y, initial.diagnostics.lambda, lp_options(cfg));
  Diagnostics d;
  d.lambda = initial.diagnostics.lambda;
  d.iterations = initial.diagnostics.iterations + sol.iterations;
  d.converged = initial.diagnostics.converged && sol.status == LpStatus::optimal;
  d.regularized = wt.regularized;
  d.solver_status = to_string(sol.status);
  d.note = "norm convention: real_composite; x_alt column i = R^-1 x_i / (x_i^H R^-1 x_i)";
  return make_estimate(Method::sds, sol.h, d);
}

// ---------------------------------------------------------------- oracle

/// Least squares on the true support columns against the full observation.
inline Estimate oracle_estimate(const ComplexMatrix& x, const Observation& obs,
                                const IndexSet& true_support) {
  if (x.rows() != obs.y.size()) throw InvalidInput("oracle_estimate: dimension mismatch");
  ComplexMatrix sub(x.rows(), static_cast<Eigen::Index>(true_support.size()));
  for (std::size_t k = 0; k < true_support.size(); ++k) {
    if (true_support[k] >= static_cast<std::size_t>(x.cols()))
      throw InvalidInput("oracle_estimate: support index out of range");
    sub.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(true_support[k]));
  }
  const ComplexVector coef = least_squares_solve(sub, obs.y);
  ComplexVector h = ComplexVector::Zero(x.cols());
  for (std::size_t k = 0; k < true_support.size(); ++k)
    h(static_cast<Eigen::Index>(true_support[k])) = coef(static_cast<Eigen::Index>(k));
  return make_estimate(Method::oracle, std::move(h));
}

/// Runs one estimator. `true_support`, when given, feeds the oracle and the
/// genie-aided OMP stopping rule.
inline Estimate run_estimator(Method method, const ComplexMatrix& x, const Observation& obs,
                              const EstimatorConfig& cfg,
                              const IndexSet* true_support = nullptr) {
  switch (method) {
    case Method::ls: return ls_estimate(x, obs);
    case Method::omp:
      return omp_estimate(x, obs, cfg,
                          true_support ? std::optional<std::size_t>(true_support->size())
                                       : std::nullopt);
    case Method::lasso: return lasso_estimate(x, obs, cfg);
    case Method::ds: return ds_estimate(x, obs, cfg);
    case Method::sds: return sds_estimate(x, obs, cfg);
    case Method::oracle:
      if (!true_support) throw InvalidInput("oracle estimator needs the true support");
      return oracle_estimate(x, obs, *true_support);
  }
  throw InvalidInput("unknown estimator");
}

}  // namespace sparsechan
