#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsechan {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Raised when an operation receives arguments that violate its preconditions
/// (dimension mismatch, non-finite entries, out-of-range parameters).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by factorizations when a pivot falls below the relative threshold.
class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(std::size_t pivot, double magnitude)
      : std::runtime_error("singular matrix: pivot " + std::to_string(pivot) +
                           " has magnitude " + std::to_string(magnitude)),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A pivot counts as zero when below this fraction of the largest pivot.
inline constexpr double kPivotTolerance = 1e-12;

/// Maximum entrywise asymmetry tolerated for a "Hermitian" input.
inline constexpr double kHermitianTolerance = 1e-12;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto v = m(i, j);
      if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      } else {
        if (!std::isfinite(v)) return false;
      }
    }
  return true;
}

inline double norm1(const ComplexVector& v) { return v.cwiseAbs().sum(); }
inline double norm2_squared(const ComplexVector& v) { return v.squaredNorm(); }
inline double norm_inf(const ComplexVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Dense product M·v with dimension check.
inline ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& v) {
  if (m.cols() != v.size())
    throw InvalidInput("matvec: matrix has " + std::to_string(m.cols()) +
                       " columns but vector has dimension " + std::to_string(v.size()));
  return m * v;
}

/// Mᴴ·v with dimension check.
inline ComplexVector adjoint_matvec(const ComplexMatrix& m, const ComplexVector& v) {
  if (m.rows() != v.size())
    throw InvalidInput("adjoint_matvec: matrix has " + std::to_string(m.rows()) +
                       " rows but vector has dimension " + std::to_string(v.size()));
  return m.adjoint() * v;
}

inline ComplexMatrix gram(const ComplexMatrix& m) { return m.adjoint() * m; }

inline bool is_real(const ComplexMatrix& m) { return m.imag().isZero(0.0); }

inline double max_column_norm(const ComplexMatrix& m) {
  return m.cols() == 0 ? 0.0 : m.colwise().norm().maxCoeff();
}

/// argmin‖Mx − b‖₂ by Householder QR. Requires rows(M) ≥ cols(M) and an
/// R factor whose diagonal stays above kPivotTolerance × its largest entry.
inline ComplexVector least_squares_solve(const ComplexMatrix& m, const ComplexVector& b) {
  if (m.rows() != b.size())
    throw InvalidInput("least_squares_solve: right-hand side dimension " +
                       std::to_string(b.size()) + " does not match " +
                       std::to_string(m.rows()) + " rows");
  if (m.rows() < m.cols())
    throw InvalidInput("least_squares_solve: system is underdetermined (" +
                       std::to_string(m.rows()) + " < " + std::to_string(m.cols()) + ")");
  if (!all_finite(m) || !all_finite(b))
    throw InvalidInput("least_squares_solve: non-finite input");
  const Eigen::Index n = m.cols();
  if (n == 0) return ComplexVector(0);

  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  const ComplexMatrix& packed = qr.matrixQR();
  double largest = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) largest = std::max(largest, std::abs(packed(k, k)));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double pivot = std::abs(packed(k, k));
    if (largest == 0.0 || pivot <= kPivotTolerance * largest)
      throw SingularMatrix(static_cast<std::size_t>(k), pivot);
  }
  ComplexVector qtb = qr.householderQ().adjoint() * b;
  return packed.topLeftCorner(n, n)
      .triangularView<Eigen::Upper>()
      .solve(qtb.head(n));
}

struct EigenExtremes {
  double min_eig;
  double max_eig;
};

/// Smallest and largest eigenvalue of a Hermitian matrix.
inline EigenExtremes hermitian_eig_extremes(const ComplexMatrix& g) {
  if (g.rows() != g.cols() || g.rows() == 0)
    throw InvalidInput("hermitian_eig_extremes: matrix must be square and non-empty");
  if (!all_finite(g)) throw InvalidInput("hermitian_eig_extremes: non-finite input");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double asym = (g - g.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance * scale)
    throw InvalidInput("hermitian_eig_extremes: matrix is not Hermitian (asymmetry " +
                       std::to_string(asym) + ")");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(g, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig_extremes: eigenvalue iteration did not converge");
  const RealVector& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

/// Real-valued image of a complex matrix acting on stacked (re, im) coordinates:
/// [[Re M, −Im M], [Im M, Re M]].
inline RealMatrix real_composite(const ComplexMatrix& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  RealMatrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

inline RealVector real_composite(const ComplexVector& v) {
  RealVector out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

inline ComplexVector from_real_composite(const RealVector& v) {
  const Eigen::Index n = v.size() / 2;
  ComplexVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = Complex(v(i), v(n + i));
  return out;
}

/// ‖v‖₁ with |re| + |im| per entry.
inline double composite_norm1(const ComplexVector& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::abs(v(i).real()) + std::abs(v(i).imag());
  return s;
}

/// ‖v‖∞ over the real and imaginary parts separately.
inline double composite_norm_inf(const ComplexVector& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    m = std::max({m, std::abs(v(i).real()), std::abs(v(i).imag())});
  return m;
}

}  // namespace sparsechan
