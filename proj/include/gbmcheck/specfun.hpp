#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gbmcheck/error.hpp"

namespace gbmcheck::specfun {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse standard normal CDF.
///
/// Wichura's AS 241 (PPND16) rational approximations, followed by a single
/// Halley step against normal_cdf to remove the last few ulps of error.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::DomainError, "normal_quantile requires 0 < p < 1");

  const double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r + 4.6303378461565452959) * r +
           1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r + 2.05319162663775882187) * r +
           1.0);
    } else {
      r -= 5.0;
      x = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r + 5.4637849111641143699) * r +
           6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }

  // Halley refinement. Work in the smaller tail to avoid cancellation.
  const double err = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_sf(x);
  const double pdf = normal_pdf(x);
  if (pdf > 0.0) {
    const double u = err / pdf;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace detail {

constexpr int kMaxIterations = 1000;
constexpr double kEpsilon = 1e-16;

// Series for P(a, x); converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x); for x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEpsilon;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw Error(ErrorKind::DomainError, "regularized_gamma_p requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0))
    throw Error(ErrorKind::DomainError, "regularized_gamma_q requires a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_fraction(a, x);
}

/// P(X > q) for X ~ chi-square with df degrees of freedom.
inline double chi_square_survival(double q, int df) {
  if (df < 1) throw Error(ErrorKind::DomainError, "chi-square degrees of freedom must be >= 1");
  if (!(q >= 0.0)) throw Error(ErrorKind::DomainError, "chi-square statistic must be >= 0");
  return regularized_gamma_q(0.5 * df, 0.5 * q);
}

struct OlsFit {
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> residuals;
  std::size_t n = 0;
  std::size_t k = 0;
  double residual_variance = 0.0;  // RSS / (n - k)
};

/// Ordinary least squares via column-pivoted Householder QR. Standard errors
/// use the unbiased residual variance RSS / (n - k).
inline OlsFit ols(std::span<const double> y, const Eigen::MatrixXd& design) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const Eigen::Index k = design.cols();
  if (design.rows() != n)
    throw Error(ErrorKind::LengthMismatch, "response and design matrix row counts differ");
  if (k == 0 || n <= k)
    throw Error(ErrorKind::RankDeficient, "OLS needs more observations than regressors");

  const Eigen::Map<const Eigen::VectorXd> response(y.data(), n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < k) throw Error(ErrorKind::RankDeficient, "design matrix is rank deficient");

  const Eigen::VectorXd beta = qr.solve(response);
  const Eigen::VectorXd resid = response - design * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(n - k);

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd diag_perm = r_inv.rowwise().squaredNorm();
  const auto& perm = qr.colsPermutation().indices();

  OlsFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.k = static_cast<std::size_t>(k);
  fit.residual_variance = s2;
  fit.coefficients.assign(beta.data(), beta.data() + k);
  fit.residuals.assign(resid.data(), resid.data() + n);
  fit.standard_errors.assign(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index j = 0; j < k; ++j)
    fit.standard_errors[static_cast<std::size_t>(perm[j])] = std::sqrt(s2 * diag_perm[j]);
  return fit;
}

}  // namespace gbmcheck::specfun
