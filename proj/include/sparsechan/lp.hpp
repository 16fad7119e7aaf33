#pragma once

#include "sparsechan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

namespace sparsechan {

/// minimize c·x  subject to  A·x ≤ b,  x ≥ 0.
struct LinearProgram {
  RealVector objective;
  RealMatrix constraints;
  RealVector rhs;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

/// Relative residuals of the returned iterate. For infeasible/unbounded
/// outcomes the primal/dual entries hold the residual of the Farkas ray.
struct KktReport {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity_gap = 0.0;
};

struct LpSolution {
  RealVector x;
  RealVector slacks;  // b − A·x
  RealVector duals;   // multipliers of A·x ≤ b, non-negative
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  LpStatus status = LpStatus::iteration_limit;
  KktReport kkt;
  int iterations = 0;
};

struct LpOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double regularization = 1e-10;
};

namespace detail {

inline double max_step(const RealVector& v, const RealVector& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  return alpha;
}

inline void validate(const LinearProgram& lp, const LpOptions& opt) {
  const auto n = lp.objective.size();
  const auto m = lp.rhs.size();
  if (lp.constraints.cols() != n || lp.constraints.rows() != m)
    throw InvalidInput("solve_lp: constraint matrix is " + std::to_string(lp.constraints.rows()) +
                       "x" + std::to_string(lp.constraints.cols()) + ", expected " +
                       std::to_string(m) + "x" + std::to_string(n));
  if (n == 0) throw InvalidInput("solve_lp: no variables");
  if (!all_finite(lp.objective) || !all_finite(lp.constraints) || !all_finite(lp.rhs))
    throw InvalidInput("solve_lp: non-finite entries");
  if (!(opt.tolerance > 0.0) || opt.tolerance > 1e-4)
    throw InvalidInput("solve_lp: tolerance must lie in (0, 1e-4]");
  if (opt.max_iterations < 1) throw InvalidInput("solve_lp: max_iterations must be >= 1");
}

}  // namespace detail

/// Primal-dual path-following interior-point method with Mehrotra
/// predictor-corrector steps. Inequalities are turned into equalities with
/// slacks s = b − A·x; the Newton systems are reduced to regularized normal
/// equations, factored by Cholesky and polished by iterative refinement.
inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
  detail::validate(lp, opt);
  const RealMatrix& A = lp.constraints;
  const RealVector& b = lp.rhs;
  const RealVector& c = lp.objective;
  const Eigen::Index n = c.size();
  const Eigen::Index m = b.size();
  const double tol = opt.tolerance;
  const double b_scale = 1.0 + (m ? b.cwiseAbs().maxCoeff() : 0.0);
  const double c_scale = 1.0 + c.cwiseAbs().maxCoeff();
  const double blowup = 1e6;

  RealVector x = RealVector::Constant(n, std::max(1.0, b_scale - 1.0));
  RealVector s = RealVector::Constant(m, std::max(1.0, b_scale - 1.0));
  RealVector w = RealVector::Constant(n, std::max(1.0, c_scale - 1.0));
  RealVector y = RealVector::Constant(m, std::max(1.0, c_scale - 1.0));

  LpSolution out;
  RealVector dx(n), ds(m), dw(n), dy(m);
  RealMatrix K(std::min(n, m), std::min(n, m));

  // The Newton system is reduced to whichever normal-equation form is
  // smaller. The primal form (Aᵀ·Θ·A + W/X, Θ = Y/S) is preferred on ties:
  // paired rows such as a ≤ aᵀx ≤ a add up there instead of cancelling.
  const bool primal_form = n <= m;
  auto newton = [&](const RealVector& rp, const RealVector& rd, const RealVector& r_xw,
                    const RealVector& r_sy, const Eigen::LLT<RealMatrix>& chol) {
    const auto Kfull = K.selfadjointView<Eigen::Lower>();
    if (primal_form) {
      const RealVector theta = y.cwiseQuotient(s);
      const RealVector rhs = -rd - A.transpose() * (theta.cwiseProduct(rp) + r_sy.cwiseQuotient(s)) +
                             r_xw.cwiseQuotient(x);
      dx = chol.solve(rhs);
      for (int refine = 0; refine < 3; ++refine) dx += chol.solve((rhs - Kfull * dx).eval());
      dy = theta.cwiseProduct(A * dx + rp) + r_sy.cwiseQuotient(s);
    } else {
      const RealVector D = x.cwiseQuotient(w);
      const RealVector rhs = rp - A * (D.cwiseProduct(rd)) + A * r_xw.cwiseQuotient(w) +
                             r_sy.cwiseQuotient(y);
      dy = chol.solve(rhs);
      for (int refine = 0; refine < 3; ++refine) dy += chol.solve((rhs - Kfull * dy).eval());
      dx = -D.cwiseProduct(rd + A.transpose() * dy) + r_xw.cwiseQuotient(w);
    }
    // Taking ds (and dw) from the linear equations keeps the residuals
    // exact even when the normal equations are nearly singular.
    ds = -rp - A * dx;
    if (primal_form)
      dw = rd + A.transpose() * dy;
    else
      dw = (r_xw - w.cwiseProduct(dx)).cwiseQuotient(x);
  };

  for (int iter = 0;; ++iter) {
    const RealVector rp = A * x + s - b;
    const RealVector rd = c + A.transpose() * y - w;
    const double pobj = c.dot(x);
    const double comp = x.dot(w) + s.dot(y);
    const double mu = comp / static_cast<double>(n + m);

    out.iterations = iter;
    out.kkt.primal_infeasibility = (m ? rp.cwiseAbs().maxCoeff() : 0.0) / b_scale;
    out.kkt.dual_infeasibility = rd.cwiseAbs().maxCoeff() / c_scale;
    out.kkt.complementarity_gap = comp / (1.0 + std::abs(pobj));

    if (out.kkt.primal_infeasibility <= tol && out.kkt.dual_infeasibility <= tol &&
        out.kkt.complementarity_gap <= tol) {
      out.status = LpStatus::optimal;
      break;
    }

    // Farkas ray for infeasibility: y ≥ 0, Aᵀy ≥ 0, b·y < 0.
    const double by = m ? b.dot(y) : 0.0;
    if (by < 0.0 && y.cwiseAbs().maxCoeff() > blowup * c_scale) {
      const RealVector ray = y / -by;
      const double viol = (m ? (-(A.transpose() * ray)).cwiseMax(0.0).maxCoeff() : 0.0);
      if (viol <= tol) {
        out.status = LpStatus::infeasible;
        out.kkt = {0.0, viol, 0.0};
        out.x = x;
        out.duals = ray;
        out.slacks = b - A * x;
        out.objective_value = pobj;
        return out;
      }
    }
    // Primal ray for unboundedness: d ≥ 0, A·d ≤ 0, c·d < 0.
    if (pobj < 0.0 && x.cwiseAbs().maxCoeff() > blowup * b_scale) {
      const RealVector ray = x / -pobj;
      const double viol = m ? (A * ray).cwiseMax(0.0).maxCoeff() : 0.0;
      if (viol <= tol) {
        out.status = LpStatus::unbounded;
        out.kkt = {viol, 0.0, 0.0};
        out.x = ray;
        out.duals = y;
        out.slacks = b - A * x;
        out.objective_value = -std::numeric_limits<double>::infinity();
        return out;
      }
    }

    if (iter >= opt.max_iterations) {
      out.status = LpStatus::iteration_limit;
      break;
    }

    K.setZero();
    if (primal_form) {
      const RealMatrix AS = y.cwiseQuotient(s).cwiseSqrt().asDiagonal() * A;
      K.selfadjointView<Eigen::Lower>().rankUpdate(AS.transpose());
      K.diagonal() += w.cwiseQuotient(x);
    } else {
      const RealMatrix AS = A * x.cwiseQuotient(w).cwiseSqrt().asDiagonal();
      K.selfadjointView<Eigen::Lower>().rankUpdate(AS);
      K.diagonal() += s.cwiseQuotient(y);
    }
    Eigen::LLT<RealMatrix> chol;
    double reg = opt.regularization * std::max(1.0, K.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 12; ++attempt) {
      RealMatrix Kr = K;
      Kr.diagonal().array() += reg;
      chol.compute(Kr.selfadjointView<Eigen::Lower>());
      if (chol.info() == Eigen::Success) break;
      reg *= 100.0;
    }
    if (chol.info() != Eigen::Success) {
      out.status = LpStatus::iteration_limit;
      break;
    }

    // Predictor (affine scaling) direction.
    newton(rp, rd, -x.cwiseProduct(w), -s.cwiseProduct(y), chol);
    const double ap_aff = std::min(detail::max_step(x, dx), detail::max_step(s, ds));
    const double ad_aff = std::min(detail::max_step(w, dw), detail::max_step(y, dy));
    const double mu_aff = ((x + ap_aff * dx).dot(w + ad_aff * dw) +
                           (s + ap_aff * ds).dot(y + ad_aff * dy)) /
                          static_cast<double>(n + m);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector with centering and the second-order term.
    const RealVector r_xw =
        (RealVector::Constant(n, sigma * mu) - x.cwiseProduct(w) - dx.cwiseProduct(dw)).eval();
    const RealVector r_sy =
        (RealVector::Constant(m, sigma * mu) - s.cwiseProduct(y) - ds.cwiseProduct(dy)).eval();
    newton(rp, rd, r_xw, r_sy, chol);

    const double eta = std::clamp(1.0 - mu, 0.9, 0.995);
    const double ap = std::min(1.0, eta * std::min(detail::max_step(x, dx), detail::max_step(s, ds)));
    const double ad = std::min(1.0, eta * std::min(detail::max_step(w, dw), detail::max_step(y, dy)));
    if (!all_finite(dx) || !all_finite(ds) || !all_finite(dw) || !all_finite(dy) ||
        !std::isfinite(ap) || !std::isfinite(ad)) {
      out.status = LpStatus::iteration_limit;  // numerical breakdown: keep the last iterate
      break;
    }
    x += ap * dx;
    s += ap * ds;
    w += ad * dw;
    y += ad * dy;
  }

  out.x = x;
  out.slacks = b - A * x;
  out.duals = y;
  out.objective_value = c.dot(x);
  return out;
}

}  // namespace sparsechan
