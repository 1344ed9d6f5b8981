#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gbmcheck/error.hpp"
#include "gbmcheck/gbm.hpp"

namespace gbmcheck::evaluate {

struct StepComparison {
  std::size_t step = 0;
  double expected_price = 0.0;
  double actual_price = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  bool inside_ci = false;
};

struct BacktestResult {
  std::vector<StepComparison> per_step;
  double mse = 0.0;          // squared price units
  double mse_percent = 0.0;  // mse * 100
  double coverage = 0.0;
  bool suitable = false;
};

/// MSE below this many "percent" passes outright.
inline constexpr double kMsePercentThreshold = 10.0;

inline bool inside(const gbm::ForecastPoint& f, double actual) {
  return f.ci_lower <= actual && actual <= f.ci_upper;
}

/// Fraction of steps whose actual price lies in the closed CI.
inline double coverage_check(std::span<const gbm::ForecastPoint> forecasts,
                             std::span<const double> actuals) {
  if (forecasts.size() != actuals.size())
    throw Error(ErrorKind::LengthMismatch, "forecasts and actuals differ in length");
  if (forecasts.empty()) throw Error(ErrorKind::DomainError, "coverage of an empty window is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) hits += inside(forecasts[i], actuals[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(forecasts.size());
}

/// Scores existing forecasts against actual prices.
/// Suitable when mse_percent < 10, or else when every actual sits inside its CI.
inline BacktestResult score(std::span<const gbm::ForecastPoint> forecasts,
                            std::span<const double> actuals) {
  const double coverage = coverage_check(forecasts, actuals);
  BacktestResult out;
  out.per_step.reserve(forecasts.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const auto& f = forecasts[i];
    const double err = f.expected_price - actuals[i];
    sq += err * err;
    out.per_step.push_back({f.step, f.expected_price, actuals[i], f.ci_lower, f.ci_upper,
                            inside(f, actuals[i])});
  }
  out.mse = sq / static_cast<double>(forecasts.size());
  out.mse_percent = out.mse * 100.0;
  out.coverage = coverage;
  out.suitable = out.mse_percent < kMsePercentThreshold || coverage == 1.0;
  return out;
}

/// Forecasts steps 1..actuals.size() from `anchor_price` and scores them.
inline BacktestResult backtest(const gbm::GbmParams& params, double anchor_price,
                               std::span<const double> actuals, double level) {
  if (actuals.empty()) throw Error(ErrorKind::DomainError, "backtest needs at least one actual price");
  const auto forecasts = gbm::forecast(params, anchor_price, actuals.size(), level);
  return score(forecasts, actuals);
}

}  // namespace gbmcheck::evaluate
