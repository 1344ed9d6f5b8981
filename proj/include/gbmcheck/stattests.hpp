#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbmcheck/error.hpp"
#include "gbmcheck/ingest.hpp"
#include "gbmcheck/specfun.hpp"

namespace gbmcheck::stattests {

/// Outcome of one hypothesis test. `skipped` is set when the test could not
/// run on the given series; the other fields are then meaningless.
struct TestResult {
  std::string name;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> p_value;
  std::map<std::string, double> detail;
  std::vector<std::pair<double, double>> points;
  std::optional<std::string> skipped;

  bool ran() const { return !skipped.has_value(); }
};

namespace detail {

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double centered_sum_squares(std::span<const double> x, double m) {
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss;
}

inline double slope(std::span<const double> xs, std::span<const double> ys) {
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// Horner evaluation of c[0] + c[1] x + c[2] x^2 + ...
template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = N; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller

/// Dickey-Fuller critical values for the constant + trend regression.
/// Rows follow kAdfSampleSizes, columns follow kAdfProbabilities.
inline constexpr std::array<double, 6> kAdfSampleSizes{25, 50, 100, 250, 500, 100000};
inline constexpr std::array<double, 8> kAdfProbabilities{0.01, 0.025, 0.05, 0.10,
                                                         0.90, 0.95,  0.975, 0.99};
inline constexpr std::array<std::array<double, 8>, 6> kAdfCriticalValues{{
    {-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15},
    {-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24},
    {-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28},
    {-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31},
    {-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32},
    {-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33},
}};

namespace detail {

// Piecewise-linear interpolation, clamped at both ends. xs ascending.
template <std::size_t N>
double interp_clamped(const std::array<double, N>& xs, const std::array<double, N>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  std::size_t hi = 1;
  for (; hi + 1 < N && xs[hi] < x; ++hi) {
  }
  const double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
}

}  // namespace detail

/// Critical values at each tabulated probability, interpolated in sample size.
inline std::array<double, 8> adf_critical_values(double sample_size) {
  std::array<double, 8> out{};
  for (std::size_t col = 0; col < out.size(); ++col) {
    std::array<double, 6> column{};
    for (std::size_t row = 0; row < column.size(); ++row) column[row] = kAdfCriticalValues[row][col];
    out[col] = detail::interp_clamped(kAdfSampleSizes, column, sample_size);
  }
  return out;
}

struct AdfPValue {
  double p_value;
  bool clamped;
};

/// Table p-value for an ADF statistic: interpolate critical values in sample
/// size, then the probability in the statistic. Clamped to [0.01, 0.99].
inline AdfPValue adf_p_value(double statistic, double sample_size) {
  const auto crit = adf_critical_values(sample_size);
  const bool clamped = statistic <= crit.front() || statistic >= crit.back();
  return {detail::interp_clamped(crit, kAdfProbabilities, statistic), clamped};
}

inline std::size_t adf_default_lags(std::size_t n) {
  auto lags = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n - 1))));
  // guard against cbrt rounding just below an exact cube
  while ((lags + 1) * (lags + 1) * (lags + 1) <= n - 1) ++lags;
  return lags;
}

/// ADF unit-root test with constant and linear trend:
///   dy_t = a + b t + g y_{t-1} + sum_{i=1..L} d_i dy_{t-i} + e_t,
/// L = floor((n-1)^(1/3)). The statistic is g / se(g). Needs n >= 8.
inline TestResult adf_test(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 8) throw Error(ErrorKind::SeriesTooShort, "ADF needs at least 8 observations");

  const std::size_t lags = adf_default_lags(n);
  std::vector<double> dy(n - 1);
  for (std::size_t t = 1; t < n; ++t) dy[t - 1] = y[t] - y[t - 1];
  const std::size_t m = dy.size();

  const std::size_t rows = m - lags;
  const std::size_t cols = 3 + lags;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<double> response(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + lags;  // index into dy
    const auto row = static_cast<Eigen::Index>(r);
    response[r] = dy[t];
    design(row, 0) = y[t];  // lagged level
    design(row, 1) = 1.0;
    design(row, 2) = static_cast<double>(t + 1);
    for (std::size_t i = 1; i <= lags; ++i)
      design(row, static_cast<Eigen::Index>(2 + i)) = dy[t - i];
  }

  const auto fit = specfun::ols(response, design);
  const double stat = fit.coefficients[0] / fit.standard_errors[0];
  const auto pv = adf_p_value(stat, static_cast<double>(m));
  const auto crit = adf_critical_values(static_cast<double>(m));

  TestResult out;
  out.name = "adf";
  out.statistic = stat;
  out.p_value = pv.p_value;
  out.detail = {{"lags", static_cast<double>(lags)},
                {"n", static_cast<double>(n)},
                {"table_sample_size", static_cast<double>(m)},
                {"clamped", pv.clamped ? 1.0 : 0.0},
                {"critical_1pct", crit[0]},
                {"critical_5pct", crit[2]},
                {"critical_10pct", crit[3]}};
  return out;
}

inline TestResult adf_test(const ReturnSeries& r) { return adf_test(r.values()); }

// ---------------------------------------------------------------------------
// Shapiro-Wilk (Royston 1995, algorithm AS R94)

namespace detail {
inline constexpr std::array<double, 6> kSwC1{0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
inline constexpr std::array<double, 6> kSwC2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
inline constexpr std::array<double, 2> kSwGamma{-2.273, 0.459};
inline constexpr std::array<double, 4> kSwMeanSmall{0.544, -0.39978, 0.025054, -6.714e-4};
inline constexpr std::array<double, 4> kSwLogSdSmall{1.3822, -0.77857, 0.062767, -0.0020322};
inline constexpr std::array<double, 4> kSwMeanLarge{-1.5861, -0.31082, -0.083751, 0.0038915};
inline constexpr std::array<double, 3> kSwLogSdLarge{-0.4803, -0.082676, 0.0030302};
}  // namespace detail

/// Royston's approximate Shapiro-Wilk weights for a sample of size n (n >= 6),
/// ordered to pair with ascending order statistics.
inline std::vector<double> shapiro_wilk_weights(std::size_t n) {
  const double dn = static_cast<double>(n);
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i)
    m[i] = specfun::normal_quantile((static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
  double summ2 = 0.0;
  for (double v : m) summ2 += v * v;
  const double ssumm2 = std::sqrt(summ2);
  const double u = 1.0 / std::sqrt(dn);

  const double an = detail::poly(detail::kSwC1, u) + m[n - 1] / ssumm2;
  const double an1 = detail::poly(detail::kSwC2, u) + m[n - 2] / ssumm2;
  const double phi = (summ2 - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                     (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
  const double scale = std::sqrt(phi);

  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = m[i] / scale;
  a[n - 1] = an;
  a[n - 2] = an1;
  a[0] = -an;
  a[1] = -an1;
  return a;
}

/// Shapiro-Wilk W and its p-value through Royston's normalizing transform.
/// Valid for 8 <= n <= 5000.
inline TestResult shapiro_wilk(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 8) throw Error(ErrorKind::SeriesTooShort, "Shapiro-Wilk needs at least 8 observations");
  if (n > 5000) throw Error(ErrorKind::SeriesTooLong, "Shapiro-Wilk supports at most 5000 observations");

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() - sorted.front() <= 0.0)
    throw Error(ErrorKind::ZeroVariance, "all observations are identical");

  const auto a = shapiro_wilk_weights(n);
  const double mu = detail::mean(sorted);
  const double ss = detail::centered_sum_squares(sorted, mu);
  double numerator = 0.0;
  for (std::size_t i = 0; i < n; ++i) numerator += a[i] * (sorted[i] - mu);
  numerator *= numerator;
  const double one_minus_w = std::max((ss - numerator) / ss, 0.0);
  const double w = 1.0 - one_minus_w;

  const double dn = static_cast<double>(n);
  double p = 0.0;
  if (one_minus_w <= 0.0) {
    p = 1.0;
  } else if (n <= 11) {
    const double gamma = detail::poly(detail::kSwGamma, dn);
    double y = std::log(one_minus_w);
    if (y >= gamma) {
      p = 0.0;
    } else {
      y = -std::log(gamma - y);
      const double m = detail::poly(detail::kSwMeanSmall, dn);
      const double s = std::exp(detail::poly(detail::kSwLogSdSmall, dn));
      p = specfun::normal_sf((y - m) / s);
    }
  } else {
    const double ln_n = std::log(dn);
    const double m = detail::poly(detail::kSwMeanLarge, ln_n);
    const double s = std::exp(detail::poly(detail::kSwLogSdLarge, ln_n));
    p = specfun::normal_sf((std::log(one_minus_w) - m) / s);
  }

  TestResult out;
  out.name = "shapiro_wilk";
  out.statistic = w;
  out.p_value = std::clamp(p, 0.0, 1.0);
  out.detail = {{"n", dn}};
  return out;
}

inline TestResult shapiro_wilk(const ReturnSeries& r) { return shapiro_wilk(r.values()); }

// ---------------------------------------------------------------------------
// Ljung-Box

/// Sample autocorrelation at `lag`: mean-subtracted, denominator sum (x - mean)^2.
inline double autocorrelation(std::span<const double> x, std::size_t lag) {
  const double m = detail::mean(x);
  const double denom = detail::centered_sum_squares(x, m);
  double num = 0.0;
  for (std::size_t t = lag; t < x.size(); ++t) num += (x[t] - m) * (x[t - lag] - m);
  return num / denom;
}

/// Q = n(n+2) sum_{k=1..h} rho_k^2 / (n-k), referred to chi-square(h).
inline TestResult ljung_box(std::span<const double> x, std::size_t lags = 1) {
  const std::size_t n = x.size();
  if (lags < 1) throw Error(ErrorKind::DomainError, "Ljung-Box needs at least one lag");
  if (n <= lags + 1)
    throw Error(ErrorKind::SeriesTooShort, "Ljung-Box needs more than lags + 1 observations");
  const double m = detail::mean(x);
  if (detail::centered_sum_squares(x, m) <= 0.0)
    throw Error(ErrorKind::ZeroVariance, "series has zero variance");

  const double dn = static_cast<double>(n);
  TestResult out;
  out.name = "ljung_box";
  double q = 0.0;
  for (std::size_t k = 1; k <= lags; ++k) {
    const double rho = autocorrelation(x, k);
    q += rho * rho / (dn - static_cast<double>(k));
    out.detail["acf_" + std::to_string(k)] = rho;
  }
  q *= dn * (dn + 2.0);
  out.statistic = q;
  out.p_value = specfun::chi_square_survival(q, static_cast<int>(lags));
  out.detail["lags"] = static_cast<double>(lags);
  out.detail["n"] = dn;
  return out;
}

inline TestResult ljung_box(const ReturnSeries& r, std::size_t lags = 1) {
  return ljung_box(r.values(), lags);
}

// ---------------------------------------------------------------------------
// Hurst exponent

enum class HurstMethod {
  RescaledRange,    // slope of ln(mean R/S) on ln(window)
  AnisLloyd,        // same slope after removing the expected R/S of white noise, plus 0.5
};

/// Anis-Lloyd expected R/S of an i.i.d. normal window of size w.
inline double expected_rescaled_range(std::size_t w) {
  const double dw = static_cast<double>(w);
  double sum = 0.0;
  for (std::size_t i = 1; i < w; ++i) sum += std::sqrt((dw - static_cast<double>(i)) / static_cast<double>(i));
  const double lead = w <= 340
                          ? std::exp(std::lgamma(0.5 * (dw - 1.0)) - std::lgamma(0.5 * dw)) /
                                std::sqrt(std::numbers::pi)
                          : 1.0 / std::sqrt(dw * std::numbers::pi / 2.0);
  return lead * sum;
}

/// Rescaled-range Hurst estimate over non-overlapping windows of size
/// 8, 16, 32, ... up to n/2. Windows with zero variance are skipped.
/// `points` holds the raw (ln w, ln mean R/S) pairs.
inline TestResult hurst_exponent(std::span<const double> x,
                                 HurstMethod method = HurstMethod::AnisLloyd) {
  const std::size_t n = x.size();
  if (n < 32) throw Error(ErrorKind::SeriesTooShort, "Hurst estimate needs at least 32 observations");

  std::vector<double> log_w, log_rs, log_expected;
  std::vector<double> cumulative;
  for (std::size_t w = 8; w <= n / 2; w *= 2) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t start = 0; start + w <= n; start += w) {
      const auto window = x.subspan(start, w);
      const double m = detail::mean(window);
      const double sd = std::sqrt(detail::centered_sum_squares(window, m) / static_cast<double>(w));
      if (!(sd > 0.0)) continue;
      double run = 0.0, lo = 0.0, hi = 0.0;
      for (double v : window) {
        run += v - m;
        lo = std::min(lo, run);
        hi = std::max(hi, run);
      }
      total += (hi - lo) / sd;
      ++used;
    }
    if (used == 0) continue;
    log_w.push_back(std::log(static_cast<double>(w)));
    log_rs.push_back(std::log(total / static_cast<double>(used)));
    log_expected.push_back(std::log(expected_rescaled_range(w)));
  }
  if (log_w.size() < 2)
    throw Error(ErrorKind::ZeroVariance, "too few windows with nonzero variance for a Hurst fit");

  TestResult out;
  out.name = "hurst";
  const double raw = detail::slope(log_w, log_rs);
  if (method == HurstMethod::RescaledRange) {
    out.statistic = raw;
  } else {
    std::vector<double> excess(log_rs.size());
    for (std::size_t i = 0; i < excess.size(); ++i) excess[i] = log_rs[i] - log_expected[i];
    out.statistic = 0.5 + detail::slope(log_w, excess);
  }
  out.detail = {{"n", static_cast<double>(n)},
                {"raw_rs_slope", raw},
                {"windows", static_cast<double>(log_w.size())},
                {"corrected", method == HurstMethod::AnisLloyd ? 1.0 : 0.0}};
  for (std::size_t i = 0; i < log_w.size(); ++i) out.points.emplace_back(log_w[i], log_rs[i]);
  return out;
}

inline TestResult hurst_exponent(const ReturnSeries& r,
                                 HurstMethod method = HurstMethod::AnisLloyd) {
  return hurst_exponent(r.values(), method);
}

// ---------------------------------------------------------------------------
// Assumption battery

struct BatteryOptions {
  double alpha = 0.05;
  double hurst_band = 0.1;
  std::size_t ljung_box_lags = 1;
  HurstMethod hurst_method = HurstMethod::AnisLloyd;
};

struct Verdicts {
  bool stationary = false;
  bool normal = false;
  bool independent = false;
  bool random_walk = false;

  bool gbm_suitable() const { return stationary && normal && independent && random_walk; }
};

/// The four threshold rules. Tests that did not run fail their verdict.
inline Verdicts decide(const TestResult& adf, const TestResult& sw, const TestResult& lb,
                       const TestResult& hurst, double alpha, double hurst_band) {
  Verdicts v;
  v.stationary = adf.ran() && adf.p_value && *adf.p_value < alpha;
  v.normal = sw.ran() && sw.p_value && *sw.p_value >= alpha;
  v.independent = lb.ran() && lb.p_value && *lb.p_value >= alpha;
  v.random_walk = hurst.ran() && std::abs(hurst.statistic - 0.5) <= hurst_band;
  return v;
}

struct AssumptionReport {
  TestResult adf;
  TestResult shapiro_wilk;
  TestResult ljung_box;
  TestResult hurst;
  Verdicts verdicts;
  double alpha = 0.05;
  double hurst_band = 0.1;

  bool gbm_suitable() const { return verdicts.gbm_suitable(); }

  /// Human-readable reasons the series failed the gate; empty when suitable.
  std::vector<std::string> failure_reasons() const {
    std::vector<std::string> out;
    auto note = [&](const TestResult& t, bool ok, const char* rejected) {
      if (ok) return;
      if (t.skipped)
        out.push_back(t.name + " skipped: " + *t.skipped);
      else
        out.emplace_back(rejected);
    };
    note(adf, verdicts.stationary, "stationarity not established");
    note(shapiro_wilk, verdicts.normal, "normality rejected");
    note(ljung_box, verdicts.independent, "independence rejected");
    note(hurst, verdicts.random_walk, "hurst exponent outside random-walk band");
    return out;
  }
};

namespace detail {

template <typename Fn>
TestResult guarded(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    TestResult skipped;
    skipped.name = name;
    skipped.skipped = e.what();
    return skipped;
  }
}

}  // namespace detail

/// Runs all four tests; failures inside a test are recorded, never thrown.
inline AssumptionReport run_battery(std::span<const double> returns,
                                    const BatteryOptions& options = {}) {
  AssumptionReport report;
  report.alpha = options.alpha;
  report.hurst_band = options.hurst_band;
  report.adf = detail::guarded("adf", [&] { return adf_test(returns); });
  report.shapiro_wilk = detail::guarded("shapiro_wilk", [&] { return shapiro_wilk(returns); });
  report.ljung_box =
      detail::guarded("ljung_box", [&] { return ljung_box(returns, options.ljung_box_lags); });
  report.hurst =
      detail::guarded("hurst", [&] { return hurst_exponent(returns, options.hurst_method); });
  report.verdicts = decide(report.adf, report.shapiro_wilk, report.ljung_box, report.hurst,
                           options.alpha, options.hurst_band);
  return report;
}

inline AssumptionReport run_battery(const ReturnSeries& r, const BatteryOptions& options = {}) {
  return run_battery(r.values(), options);
}

}  // namespace gbmcheck::stattests
