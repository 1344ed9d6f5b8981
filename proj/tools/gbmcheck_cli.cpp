// gbmcheck: test equity return series against the GBM assumptions, fit,
// forecast, backtest and simulate.
//
//   gbmcheck report --input data/GCB.csv --freq monthly --out reports/
//   gbmcheck forecast --input data/GCB.csv --horizon 3 --price 3.71
//   gbmcheck plotdata --kind qq --input data/GCB.csv

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gbmcheck/gbmcheck.hpp"

namespace fs = std::filesystem;
using namespace gbmcheck;

namespace {

struct Options {
  Config config;
  std::string freq = "monthly";
  std::string hurst = "corrected";
  std::optional<fs::path> out;
  std::optional<double> price;
  std::string plot_kind = "trend";
  std::size_t paths = 100000;
  std::optional<double> sim_dt;
};

// Runs `body` per input; returns false when any input raised an error.
bool for_each_input(const Options& opt, const std::function<Json(const PriceSeries&)>& body,
                    Json& out) {
  bool ok = true;
  out = Json::array();
  for (const auto& path : opt.config.inputs) {
    try {
      const auto prices = load_prices(path, ticker_from_path(path), opt.config.frequency);
      out.push_back(body(prices));
    } catch (const std::exception& e) {
      ok = false;
      out.push_back({{"input", path.string()}, {"error", e.what()}});
      std::cerr << "gbmcheck: " << path.string() << ": " << e.what() << "\n";
    }
  }
  return ok;
}

struct Gate {
  stattests::AssumptionReport report;
  std::vector<std::string> warnings;
  bool proceed = false;
};

Gate apply_gate(const ReturnSeries& returns, const Config& config) {
  Gate g;
  g.report = stattests::run_battery(returns, config.battery());
  g.proceed = g.report.gbm_suitable() || config.force_fit;
  if (!g.report.gbm_suitable()) {
    g.warnings = g.report.failure_reasons();
    if (config.force_fit) g.warnings.push_back("gate overridden by --force-fit");
  }
  return g;
}

Json gated_header(const PriceSeries& prices, const Gate& gate) {
  return {{"ticker", prices.ticker},
          {"gbm_suitable", gate.report.gbm_suitable()},
          {"warnings", gate.warnings}};
}

void print(const Json& j) { std::cout << dump_json(j); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GBM assumption testing, estimation, forecasting and backtesting"};
  app.set_config("--config", "", "key=value configuration file (command-line flags win)");
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  std::vector<std::string> inputs;
  app.add_option("--input", inputs, "Price CSV files (header: date,close)")->required();
  app.add_option("--freq", opt.freq, "Sampling frequency")->check(CLI::IsMember({"weekly", "monthly"}));
  app.add_option("--alpha", opt.config.alpha, "Significance level")->check(CLI::Range(1e-9, 0.5));
  app.add_option("--level", opt.config.level, "Confidence level for intervals")->check(CLI::Range(1e-9, 1.0 - 1e-12));
  app.add_option("--split", opt.config.split, "Training fraction for backtests")->check(CLI::Range(1e-9, 1.0 - 1e-9));
  app.add_option("--seed", opt.config.seed, "Monte Carlo seed");
  app.add_option("--horizon", opt.config.horizon, "Forecast steps")->check(CLI::PositiveNumber);
  app.add_option("--hurst-band", opt.config.hurst_band, "Random-walk band |H - 0.5| <= band");
  app.add_option("--lags", opt.config.ljung_box_lags, "Ljung-Box lag count")->check(CLI::PositiveNumber);
  app.add_option("--hurst-method", opt.hurst, "Hurst estimator")->check(CLI::IsMember({"corrected", "rs"}));
  app.add_flag("--force-fit", opt.config.force_fit, "Fit even when the assumption battery fails");
  app.add_option("--out", opt.out, "Output directory");

  auto* test_cmd = app.add_subcommand("test", "Run the assumption battery");
  auto* fit_cmd = app.add_subcommand("fit", "Estimate annualized drift and volatility");
  auto* forecast_cmd = app.add_subcommand("forecast", "Expected prices with confidence intervals");
  forecast_cmd->add_option("--price", opt.price, "Current price (default: last close)")->check(CLI::PositiveNumber);
  auto* backtest_cmd = app.add_subcommand("backtest", "Fit on the training prefix, score the held-out suffix");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo terminal prices");
  simulate_cmd->add_option("--paths", opt.paths, "Number of paths")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--dt", opt.sim_dt, "Horizon in years (default: one step)")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--price", opt.price, "Current price (default: last close)")->check(CLI::PositiveNumber);
  auto* report_cmd = app.add_subcommand("report", "Full pipeline, one <ticker>.report.json per input");
  auto* plot_cmd = app.add_subcommand("plotdata", "CSV data for trend, histogram or Q-Q plots");
  plot_cmd->add_option("--kind", opt.plot_kind, "Plot kind")->check(CLI::IsMember({"trend", "histogram", "qq"}));

  CLI11_PARSE(app, argc, argv);

  try {
    opt.config.frequency = parse_frequency(opt.freq);
    opt.config.hurst_method = opt.hurst == "rs" ? stattests::HurstMethod::RescaledRange
                                                : stattests::HurstMethod::AnisLloyd;
    for (const auto& s : inputs) opt.config.inputs.emplace_back(s);
  } catch (const std::exception& e) {
    std::cerr << "gbmcheck: " << e.what() << "\n";
    return 2;
  }
  const Config& cfg = opt.config;

  if (report_cmd->parsed()) {
    const fs::path dir = opt.out.value_or(fs::path("."));
    bool ok = true;
    for (const auto& outcome : run_pipeline(cfg)) {
      if (outcome.error) {
        ok = false;
        std::cerr << "gbmcheck: " << outcome.input.string() << ": " << *outcome.error << "\n";
        continue;
      }
      try {
        std::cout << emit_report(*outcome.report, dir).string() << "\n";
      } catch (const std::exception& e) {
        ok = false;
        std::cerr << "gbmcheck: " << e.what() << "\n";
      }
    }
    return ok ? 0 : 1;
  }

  if (plot_cmd->parsed()) {
    bool ok = true;
    const auto kind = parse_plot_kind(opt.plot_kind);
    for (const auto& path : cfg.inputs) {
      try {
        const auto prices = load_prices(path, ticker_from_path(path), cfg.frequency);
        const auto csv = emit_plot_data(log_returns(prices).values(), kind);
        if (opt.out) {
          fs::create_directories(*opt.out);
          const auto file = *opt.out / (prices.ticker + "." + opt.plot_kind + ".csv");
          std::ofstream(file, std::ios::binary) << csv;
          std::cout << file.string() << "\n";
        } else {
          if (cfg.inputs.size() > 1) std::cout << "# " << prices.ticker << "\n";
          std::cout << csv;
        }
      } catch (const std::exception& e) {
        ok = false;
        std::cerr << "gbmcheck: " << path.string() << ": " << e.what() << "\n";
      }
    }
    return ok ? 0 : 1;
  }

  Json out;
  bool ok = true;
  if (test_cmd->parsed()) {
    ok = for_each_input(opt, [&](const PriceSeries& prices) {
      const auto report = stattests::run_battery(log_returns(prices), cfg.battery());
      return Json{{"ticker", prices.ticker},
                  {"assumptions", to_json(report)},
                  {"warnings", report.failure_reasons()}};
    }, out);
  } else if (fit_cmd->parsed()) {
    ok = for_each_input(opt, [&](const PriceSeries& prices) {
      const auto returns = log_returns(prices);
      const auto gate = apply_gate(returns, cfg);
      Json j = gated_header(prices, gate);
      j["params"] = gate.proceed ? to_json(gbm::fit_gbm(returns)) : Json(nullptr);
      return j;
    }, out);
  } else if (forecast_cmd->parsed()) {
    ok = for_each_input(opt, [&](const PriceSeries& prices) {
      const auto returns = log_returns(prices);
      const auto gate = apply_gate(returns, cfg);
      Json j = gated_header(prices, gate);
      j["forecasts"] = nullptr;
      j["params"] = nullptr;
      if (gate.proceed) {
        const auto params = gbm::fit_gbm(returns);
        const double p0 = opt.price.value_or(prices.observations.back().close);
        j["params"] = to_json(params);
        j["current_price"] = p0;
        j["forecasts"] = Json::array();
        for (const auto& f : gbm::forecast(params, p0, cfg.horizon, cfg.level))
          j["forecasts"].push_back(to_json(f));
      }
      return j;
    }, out);
  } else if (backtest_cmd->parsed()) {
    ok = for_each_input(opt, [&](const PriceSeries& prices) {
      const auto gate = apply_gate(log_returns(prices), cfg);
      Json j = gated_header(prices, gate);
      j["backtest"] = nullptr;
      if (gate.proceed) {
        const auto parts = split(prices, cfg.split);
        const auto params = gbm::fit_gbm(log_returns(parts.train));
        const double anchor = parts.train.observations.back().close;
        j["backtest"] = to_json(evaluate::backtest(params, anchor, parts.test.closes(), cfg.level));
        j["backtest"]["train_params"] = to_json(params);
        j["backtest"]["anchor_price"] = anchor;
      }
      return j;
    }, out);
  } else if (simulate_cmd->parsed()) {
    ok = for_each_input(opt, [&](const PriceSeries& prices) {
      const auto returns = log_returns(prices);
      const auto gate = apply_gate(returns, cfg);
      Json j = gated_header(prices, gate);
      j["simulation"] = nullptr;
      if (gate.proceed) {
        const auto params = gbm::fit_gbm(returns);
        const double p0 = opt.price.value_or(prices.observations.back().close);
        const double dt = opt.sim_dt.value_or(params.dt_years);
        const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
        const auto sim = gbm::simulate(params, p0, dt, opt.paths, cfg.seed, workers);
        const auto closed = gbm::forecast_at(params, p0, dt, cfg.level);
        j["params"] = to_json(params);
        j["simulation"] = to_json(sim);
        j["simulation"]["dt_total"] = dt;
        // expected_price is the lognormal median; the simulated mean estimates p exp(mu dt)
        j["simulation"]["expected_price"] = closed.expected_price;
        j["simulation"]["lognormal_mean"] = p0 * std::exp(params.mu * dt);
        j["simulation"]["closed_form_variance"] = closed.variance;
      }
      return j;
    }, out);
  }
  print(out);
  return ok ? 0 : 1;
}
