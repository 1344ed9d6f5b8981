#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gbmcheck/ingest.hpp"
#include "gbmcheck/random.hpp"

namespace gbmcheck::testutil {

// Deterministic non-random series; the same formula produced the frozen
// scipy/statsmodels reference values used in the tests.
inline std::vector<double> wiggle(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    x[k] = std::sin(1.7 * i) + 0.5 * std::cos(0.37 * i * i) + 0.01 * i;
  }
  return x;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  NormalStream z(SplitMix64::substream(seed, 0xA11CE));
  std::vector<double> x(n);
  for (auto& v : x) v = sd * z();
  return x;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  auto x = white_noise(n, seed);
  for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
  return x;
}

// Standard Cauchy draws: heavy tails without finite variance.
inline std::vector<double> cauchy(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng = SplitMix64::substream(seed, 0xCA0C7);
  std::vector<double> x(n);
  for (auto& v : x) v = std::tan(3.14159265358979323846 * (uniform_open0(rng) - 0.5));
  return x;
}

/// Monthly GBM log returns with annualized (mu, sigma).
inline std::vector<double> gbm_returns(std::size_t n, double mu, double sigma, double dt,
                                       std::uint64_t seed) {
  auto z = white_noise(n, seed);
  for (auto& v : z) v = (mu - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * v;
  return z;
}

/// Month-end style dates starting January 2000; one per step.
inline std::vector<Observation> monthly_observations(double p0, const std::vector<double>& returns) {
  using namespace std::chrono;
  std::vector<Observation> out;
  double p = p0;
  year_month ym{year{2000}, January};
  out.push_back({year_month_day{ym / 28}, p});
  for (double r : returns) {
    ym += months{1};
    p *= std::exp(r);
    out.push_back({year_month_day{ym / 28}, p});
  }
  return out;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<Observation>& obs) {
  std::ofstream out(path);
  out << "date,close\n";
  out.precision(17);
  for (const auto& o : obs) out << format_iso_date(o.date) << "," << o.close << "\n";
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gbmcheck_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gbmcheck::testutil
