#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbmcheck/error.hpp"
#include "gbmcheck/evaluate.hpp"
#include "gbmcheck/gbm.hpp"
#include "gbmcheck/ingest.hpp"
#include "gbmcheck/specfun.hpp"
#include "gbmcheck/stattests.hpp"

namespace gbmcheck {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration and report types

struct Config {
  std::vector<std::filesystem::path> inputs;
  Frequency frequency = Frequency::Monthly;
  double alpha = 0.05;
  double level = 0.95;
  double split = 0.7;
  double hurst_band = 0.1;
  std::size_t horizon = 3;
  std::size_t ljung_box_lags = 1;
  std::size_t simulation_paths = 20000;
  std::uint64_t seed = 0;
  bool force_fit = false;
  stattests::HurstMethod hurst_method = stattests::HurstMethod::AnisLloyd;

  stattests::BatteryOptions battery() const {
    return {alpha, hurst_band, ljung_box_lags, hurst_method};
  }
};

struct ModelBacktest {
  gbm::GbmParams train_params;
  double anchor_price = 0.0;
  std::size_t train_prices = 0;
  std::size_t test_prices = 0;
  evaluate::BacktestResult result;
};

struct EquityReport {
  std::string ticker;
  Frequency frequency = Frequency::Monthly;
  std::size_t n_prices = 0;
  std::string first_date;
  std::string last_date;
  double last_price = 0.0;
  stattests::AssumptionReport assumptions;
  std::optional<gbm::GbmParams> params;
  std::optional<std::vector<gbm::ForecastPoint>> forecasts;
  std::optional<ModelBacktest> backtest;
  std::optional<gbm::SimulationResult> simulation;
  std::vector<std::string> warnings;
};

/// One entry per input file; exactly one of `report` / `error` is set.
struct EquityOutcome {
  std::filesystem::path input;
  std::optional<EquityReport> report;
  std::optional<std::string> error;
};

// ---------------------------------------------------------------------------
// JSON

/// Writes JSON with keys in sorted order and every real as %.17g, which
/// round-trips IEEE doubles exactly. Non-finite reals become null.
inline void write_json(std::ostream& os, const Json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close_pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << "\n" << close_pad << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default:
      os << j.dump();
  }
}

inline std::string dump_json(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  os << "\n";
  return os.str();
}

inline Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const stattests::TestResult& t) {
  Json j;
  j["name"] = t.name;
  j["statistic"] = real_or_null(t.statistic);
  j["p_value"] = t.p_value ? Json(*t.p_value) : Json(nullptr);
  j["skipped"] = t.skipped ? Json(*t.skipped) : Json(nullptr);
  j["detail"] = Json::object();
  for (const auto& [k, v] : t.detail) j["detail"][k] = real_or_null(v);
  j["points"] = Json::array();
  for (const auto& [x, y] : t.points) j["points"].push_back(Json::array({x, y}));
  return j;
}

inline Json to_json(const stattests::AssumptionReport& r) {
  Json j;
  j["alpha"] = r.alpha;
  j["hurst_band"] = r.hurst_band;
  j["tests"] = {{"adf", to_json(r.adf)},
                {"shapiro_wilk", to_json(r.shapiro_wilk)},
                {"ljung_box", to_json(r.ljung_box)},
                {"hurst", to_json(r.hurst)}};
  j["verdicts"] = {{"stationary", r.verdicts.stationary},
                   {"normal", r.verdicts.normal},
                   {"independent", r.verdicts.independent},
                   {"random_walk", r.verdicts.random_walk}};
  j["gbm_suitable"] = r.gbm_suitable();
  return j;
}

inline Json to_json(const gbm::GbmParams& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}, {"n_obs", p.n_obs}, {"dt_years", p.dt_years}};
}

inline Json to_json(const gbm::ForecastPoint& f) {
  return {{"step", f.step},         {"dt_total", f.dt_total}, {"expected_price", f.expected_price},
          {"variance", f.variance}, {"ci_lower", f.ci_lower}, {"ci_upper", f.ci_upper},
          {"level", f.level}};
}

inline Json to_json(const evaluate::BacktestResult& b) {
  Json steps = Json::array();
  for (const auto& s : b.per_step)
    steps.push_back({{"step", s.step},
                     {"expected_price", s.expected_price},
                     {"actual_price", s.actual_price},
                     {"ci_lower", s.ci_lower},
                     {"ci_upper", s.ci_upper},
                     {"inside_ci", s.inside_ci}});
  return {{"per_step", steps},       {"mse", b.mse},           {"mse_percent", b.mse_percent},
          {"coverage", b.coverage},  {"suitable", b.suitable}};
}

/// Summary only; terminal prices are not serialized.
inline Json to_json(const gbm::SimulationResult& s) {
  return {{"paths", s.paths},
          {"seed", s.seed},
          {"sample_mean", s.sample_mean},
          {"sample_variance", s.sample_variance}};
}

inline Json to_json(const EquityReport& r) {
  Json j;
  j["ticker"] = r.ticker;
  j["frequency"] = std::string(to_string(r.frequency));
  j["n_prices"] = r.n_prices;
  j["first_date"] = r.first_date;
  j["last_date"] = r.last_date;
  j["last_price"] = r.last_price;
  j["assumptions"] = to_json(r.assumptions);
  j["params"] = r.params ? to_json(*r.params) : Json(nullptr);
  if (r.forecasts) {
    j["forecasts"] = Json::array();
    for (const auto& f : *r.forecasts) j["forecasts"].push_back(to_json(f));
  } else {
    j["forecasts"] = nullptr;
  }
  if (r.backtest) {
    j["backtest"] = to_json(r.backtest->result);
    j["backtest"]["train_params"] = to_json(r.backtest->train_params);
    j["backtest"]["anchor_price"] = r.backtest->anchor_price;
    j["backtest"]["train_prices"] = r.backtest->train_prices;
    j["backtest"]["test_prices"] = r.backtest->test_prices;
  } else {
    j["backtest"] = nullptr;
  }
  j["simulation"] = r.simulation ? to_json(*r.simulation) : Json(nullptr);
  j["warnings"] = r.warnings;
  return j;
}

/// Writes `<dir>/<ticker>.report.json` and returns its path.
inline std::filesystem::path emit_report(const EquityReport& report,
                                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / (report.ticker + ".report.json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << dump_json(to_json(report));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
  return path;
}

// ---------------------------------------------------------------------------
// Plot data

enum class PlotKind { Trend, Histogram, Qq };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "trend") return PlotKind::Trend;
  if (s == "histogram") return PlotKind::Histogram;
  if (s == "qq") return PlotKind::Qq;
  throw Error(ErrorKind::DomainError, "unknown plot kind '" + std::string(s) + "'");
}

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// ceil(sqrt(n)) equal-width bins over [min, max]; a constant series gets a
/// unit-width range centred on its value.
inline std::vector<HistogramBin> histogram(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::SeriesTooShort, "plot data needs at least 2 returns");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  double lo = *mn, hi = *mx;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const auto bins = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.size()))));
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].left = lo + static_cast<double>(i) * width;
    out[i].right = i + 1 == bins ? hi : lo + static_cast<double>(i + 1) * width;
  }
  for (double v : x) {
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / width));
    out[std::min(idx, bins - 1)].count++;
  }
  return out;
}

/// (theoretical, sample) quantile pairs with plotting positions (i - 0.5)/n.
inline std::vector<std::pair<double, double>> qq_points(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::SeriesTooShort, "plot data needs at least 2 returns");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.emplace_back(specfun::normal_quantile((static_cast<double>(i + 1) - 0.5) / n), sorted[i]);
  return out;
}

namespace detail {
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline std::string emit_plot_data(std::span<const double> returns, PlotKind kind) {
  if (returns.size() < 2) throw Error(ErrorKind::SeriesTooShort, "plot data needs at least 2 returns");
  std::string out;
  switch (kind) {
    case PlotKind::Trend:
      out = "index,return\n";
      for (std::size_t i = 0; i < returns.size(); ++i)
        out += std::to_string(i + 1) + "," + detail::fmt_real(returns[i]) + "\n";
      break;
    case PlotKind::Histogram:
      out = "bin_left,bin_right,count\n";
      for (const auto& b : histogram(returns))
        out += detail::fmt_real(b.left) + "," + detail::fmt_real(b.right) + "," +
               std::to_string(b.count) + "\n";
      break;
    case PlotKind::Qq:
      out = "theoretical_quantile,sample_quantile\n";
      for (const auto& [t, s] : qq_points(returns))
        out += detail::fmt_real(t) + "," + detail::fmt_real(s) + "\n";
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

inline std::string ticker_from_path(const std::filesystem::path& p) {
  std::string stem = p.stem().string();
  if (const auto dot = stem.find('.'); dot != std::string::npos) stem.resize(dot);
  return stem;
}

/// Battery, gate, fit, forecast, backtest and a Monte Carlo cross-check for one series.
inline EquityReport analyze(const PriceSeries& prices, const Config& config) {
  EquityReport report;
  report.ticker = prices.ticker;
  report.frequency = prices.frequency;
  report.n_prices = prices.size();
  report.first_date = format_iso_date(prices.observations.front().date);
  report.last_date = format_iso_date(prices.observations.back().date);
  report.last_price = prices.observations.back().close;

  const auto returns = log_returns(prices);
  report.assumptions = stattests::run_battery(returns, config.battery());

  if (!report.assumptions.gbm_suitable()) {
    report.warnings = report.assumptions.failure_reasons();
    if (!config.force_fit) return report;
    report.warnings.push_back("gate overridden by --force-fit: model fitted on a series that failed the battery");
  }

  report.params = gbm::fit_gbm(returns);
  report.forecasts = gbm::forecast(*report.params, report.last_price, config.horizon, config.level);
  report.simulation = gbm::simulate(*report.params, report.last_price, report.params->dt_years,
                                    config.simulation_paths, config.seed);

  try {
    const auto parts = split(prices, config.split);
    ModelBacktest bt;
    bt.train_params = gbm::fit_gbm(log_returns(parts.train));
    bt.anchor_price = parts.train.observations.back().close;
    bt.train_prices = parts.train.size();
    bt.test_prices = parts.test.size();
    bt.result = evaluate::backtest(bt.train_params, bt.anchor_price, parts.test.closes(), config.level);
    report.backtest = std::move(bt);
  } catch (const Error& e) {
    report.warnings.push_back(std::string("backtest skipped: ") + e.what());
  }
  return report;
}

inline EquityReport run_equity(const std::filesystem::path& input, const Config& config) {
  return analyze(load_prices(input, ticker_from_path(input), config.frequency), config);
}

/// Processes every input independently; one failure never aborts the batch.
inline std::vector<EquityOutcome> run_pipeline(const Config& config) {
  std::vector<std::future<EquityOutcome>> jobs;
  jobs.reserve(config.inputs.size());
  for (const auto& input : config.inputs) {
    jobs.push_back(std::async(std::launch::async, [input, &config] {
      EquityOutcome outcome{input, std::nullopt, std::nullopt};
      try {
        outcome.report = run_equity(input, config);
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
      return outcome;
    }));
  }
  std::vector<EquityOutcome> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace gbmcheck
