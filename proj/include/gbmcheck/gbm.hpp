#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "gbmcheck/error.hpp"
#include "gbmcheck/ingest.hpp"
#include "gbmcheck/random.hpp"
#include "gbmcheck/specfun.hpp"

namespace gbmcheck::gbm {

/// Annualized GBM parameters: drift mu per year, volatility sigma per sqrt(year).
struct GbmParams {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n_obs = 0;
  double dt_years = 1.0 / 12.0;
};

struct ForecastPoint {
  std::size_t step = 0;
  double dt_total = 0.0;
  double expected_price = 0.0;
  double variance = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double level = 0.95;
};

struct SimulationResult {
  std::vector<double> terminal_prices;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
};

/// Fits (mu, sigma) from log returns: sigma = s / sqrt(dt), mu = m / dt + sigma^2 / 2,
/// with m the sample mean and s^2 the n-1 sample variance.
inline GbmParams fit_gbm(std::span<const double> returns, double dt_years) {
  const std::size_t n = returns.size();
  if (n < 3) throw Error(ErrorKind::SeriesTooShort, "fit needs at least 3 returns");
  if (!(dt_years > 0.0)) throw Error(ErrorKind::DomainError, "dt_years must be positive");

  double m = 0.0;
  for (double r : returns) m += r;
  m /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : returns) ss += (r - m) * (r - m);
  const double s2 = ss / static_cast<double>(n - 1);

  GbmParams p;
  p.sigma = std::sqrt(s2 / dt_years);
  p.mu = m / dt_years + 0.5 * p.sigma * p.sigma;
  p.n_obs = n;
  p.dt_years = dt_years;
  return p;
}

inline GbmParams fit_gbm(const ReturnSeries& r) { return fit_gbm(r.values(), r.dt_years); }

/// Sum of normal log densities with mean (mu - sigma^2/2) dt and variance sigma^2 dt.
inline double log_likelihood(const GbmParams& params, std::span<const double> returns,
                             double dt_years) {
  if (!(params.sigma > 0.0)) throw Error(ErrorKind::DomainError, "log likelihood needs sigma > 0");
  if (!(dt_years > 0.0)) throw Error(ErrorKind::DomainError, "dt_years must be positive");
  const double mean = (params.mu - 0.5 * params.sigma * params.sigma) * dt_years;
  const double var = params.sigma * params.sigma * dt_years;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * var);
  double total = 0.0;
  for (double r : returns) total += log_norm - (r - mean) * (r - mean) / (2.0 * var);
  return total;
}

inline double log_likelihood(const GbmParams& params, const ReturnSeries& r) {
  return log_likelihood(params, r.values(), r.dt_years);
}

/// Price moments after `dt_total` years:
///   E = p exp((mu - sigma^2/2) dt)
///   Var = p^2 exp(2 mu dt) (exp(sigma^2 dt) - 1)
/// and the symmetric CI E +/- z sqrt(Var), z the two-sided normal quantile.
inline ForecastPoint forecast_at(const GbmParams& params, double current_price, double dt_total,
                                 double level, std::size_t step = 0) {
  if (!(current_price > 0.0) || !std::isfinite(current_price))
    throw Error(ErrorKind::DomainError, "current price must be positive");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::DomainError, "confidence level must lie in (0, 1)");
  if (!(dt_total >= 0.0)) throw Error(ErrorKind::DomainError, "horizon must be non-negative");
  if (params.sigma < 0.0) throw Error(ErrorKind::DomainError, "sigma must be non-negative");

  const double s2 = params.sigma * params.sigma;
  ForecastPoint f;
  f.step = step;
  f.dt_total = dt_total;
  f.level = level;
  f.expected_price = current_price * std::exp((params.mu - 0.5 * s2) * dt_total);
  f.variance = current_price * current_price * std::exp(2.0 * params.mu * dt_total) *
               std::expm1(s2 * dt_total);
  const double z = specfun::normal_quantile(0.5 * (1.0 + level));
  const double half = z * std::sqrt(f.variance);
  f.ci_lower = f.expected_price - half;
  f.ci_upper = f.expected_price + half;
  return f;
}

/// Forecasts for steps 1..steps, all anchored on the same current price.
inline std::vector<ForecastPoint> forecast(const GbmParams& params, double current_price,
                                           std::size_t steps, double level) {
  if (steps < 1) throw Error(ErrorKind::DomainError, "forecast needs at least one step");
  std::vector<ForecastPoint> out;
  out.reserve(steps);
  for (std::size_t h = 1; h <= steps; ++h)
    out.push_back(
        forecast_at(params, current_price, static_cast<double>(h) * params.dt_years, level, h));
  return out;
}

/// Monte Carlo terminal prices p exp((mu - sigma^2/2) T + sigma sqrt(T) Z).
/// Path i draws from substream (seed, i), so output does not depend on `workers`.
inline SimulationResult simulate(const GbmParams& params, double current_price, double dt_total,
                                 std::size_t paths, std::uint64_t seed, unsigned workers = 1) {
  if (paths < 1) throw Error(ErrorKind::DomainError, "simulation needs at least one path");
  if (!(dt_total >= 0.0)) throw Error(ErrorKind::DomainError, "horizon must be non-negative");
  if (!(current_price > 0.0)) throw Error(ErrorKind::DomainError, "current price must be positive");
  if (params.sigma < 0.0) throw Error(ErrorKind::DomainError, "sigma must be non-negative");

  SimulationResult out;
  out.paths = paths;
  out.seed = seed;
  out.terminal_prices.resize(paths);

  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * dt_total;
  const double diffusion = params.sigma * std::sqrt(dt_total);
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      NormalStream normals(SplitMix64::substream(seed, i));
      out.terminal_prices[i] = current_price * std::exp(drift + diffusion * normals());
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(paths, 256))));
  if (workers == 1) {
    fill(0, paths);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (paths + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(paths, begin + chunk);
      if (begin < end) pool.emplace_back(fill, begin, end);
    }
  }

  double sum = 0.0;
  for (double v : out.terminal_prices) sum += v;
  out.sample_mean = sum / static_cast<double>(paths);
  double ss = 0.0;
  for (double v : out.terminal_prices) ss += (v - out.sample_mean) * (v - out.sample_mean);
  out.sample_variance = paths > 1 ? ss / static_cast<double>(paths - 1) : 0.0;
  return out;
}

}  // namespace gbmcheck::gbm
