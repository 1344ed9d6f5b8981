#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gbmcheck/error.hpp"

namespace gbmcheck {

enum class Frequency { Weekly, Monthly };

constexpr std::string_view to_string(Frequency f) {
  return f == Frequency::Weekly ? "weekly" : "monthly";
}

inline Frequency parse_frequency(std::string_view text) {
  if (text == "weekly") return Frequency::Weekly;
  if (text == "monthly") return Frequency::Monthly;
  throw Error(ErrorKind::DomainError, "unknown frequency '" + std::string(text) + "'");
}

/// Year fraction covered by one sampling step. Calendar gaps are ignored.
constexpr double step_years(Frequency f) {
  return f == Frequency::Weekly ? 1.0 / 52.0 : 1.0 / 12.0;
}

struct Observation {
  std::chrono::year_month_day date;
  double close = 0.0;
};

/// Closing prices for one equity, strictly ascending by date, all positive.
struct PriceSeries {
  std::string ticker;
  Frequency frequency = Frequency::Monthly;
  std::vector<Observation> observations;

  std::size_t size() const { return observations.size(); }

  std::vector<double> closes() const {
    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) out.push_back(o.close);
    return out;
  }
};

/// Log returns ln(p[i+1]/p[i]) with the per-step year fraction.
struct ReturnSeries {
  std::string ticker;
  Frequency frequency = Frequency::Monthly;
  std::vector<double> returns;
  double dt_years = 1.0 / 12.0;

  std::size_t size() const { return returns.size(); }
  std::span<const double> values() const { return returns; }
};

template <typename Series>
struct SplitSeries {
  Series train;
  Series test;
  double split_fraction = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses a strict YYYY-MM-DD date; returns false on any deviation.
inline bool parse_iso_date(std::string_view text, std::chrono::year_month_day& out) {
  text = detail::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  if (!detail::parse_int(text.substr(0, 4), y) || !detail::parse_int(text.substr(5, 2), m) ||
      !detail::parse_int(text.substr(8, 2), d))
    return false;
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out = ymd;
  return true;
}

inline std::string format_iso_date(const std::chrono::year_month_day& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

/// Sorts observations and enforces the PriceSeries invariants.
inline PriceSeries make_price_series(std::string ticker, Frequency frequency,
                                     std::vector<Observation> observations) {
  std::stable_sort(observations.begin(), observations.end(),
                   [](const Observation& a, const Observation& b) { return a.date < b.date; });
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const double c = observations[i].close;
    if (!std::isfinite(c) || c <= 0.0)
      throw Error(ErrorKind::MalformedRow, "close must be a positive number");
    if (i > 0 && observations[i].date == observations[i - 1].date)
      throw Error(ErrorKind::DuplicateDate,
                  "duplicate date " + format_iso_date(observations[i].date));
  }
  if (observations.size() < 2)
    throw Error(ErrorKind::SeriesTooShort, "a price series needs at least 2 observations");
  return PriceSeries{std::move(ticker), frequency, std::move(observations)};
}

/// Reads a `date,close` CSV stream. Errors name the 1-based line number.
inline PriceSeries parse_prices(std::istream& in, std::string ticker, Frequency frequency) {
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  struct Row {
    Observation obs;
    std::size_t line;
  };
  std::vector<Row> rows;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (line_no == 1 && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF &&
        static_cast<unsigned char>(view[1]) == 0xBB && static_cast<unsigned char>(view[2]) == 0xBF)
      view.remove_prefix(3);  // UTF-8 BOM
    if (view.empty()) continue;
    if (!saw_header) {
      if (view != "date,close")
        throw Error(ErrorKind::MalformedRow, "expected header 'date,close'", line_no);
      saw_header = true;
      continue;
    }
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos)
      throw Error(ErrorKind::MalformedRow, "expected exactly two fields", line_no);

    Row row{{}, line_no};
    if (!parse_iso_date(view.substr(0, comma), row.obs.date))
      throw Error(ErrorKind::UnparseableDate,
                  "bad date '" + std::string(view.substr(0, comma)) + "'", line_no);

    const std::string_view close_text = detail::trim(view.substr(comma + 1));
    double close = 0.0;
    auto [ptr, ec] =
        std::from_chars(close_text.data(), close_text.data() + close_text.size(), close);
    if (close_text.empty() || ec != std::errc{} || ptr != close_text.data() + close_text.size())
      throw Error(ErrorKind::MalformedRow, "non-numeric close '" + std::string(close_text) + "'",
                  line_no);
    if (!std::isfinite(close) || close <= 0.0)
      throw Error(ErrorKind::MalformedRow, "close must be positive", line_no);
    row.obs.close = close;
    rows.push_back(row);
  }

  if (rows.empty()) throw Error(ErrorKind::EmptyFile, "no data rows", line_no == 0 ? 1 : line_no);

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.obs.date < b.obs.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].obs.date == rows[i - 1].obs.date)
      throw Error(ErrorKind::DuplicateDate, "duplicate date " + format_iso_date(rows[i].obs.date),
                  std::max(rows[i].line, rows[i - 1].line));
  }
  if (rows.size() < 2)
    throw Error(ErrorKind::SeriesTooShort, "a price series needs at least 2 observations",
                rows.front().line);

  PriceSeries out{std::move(ticker), frequency, {}};
  out.observations.reserve(rows.size());
  for (const auto& r : rows) out.observations.push_back(r.obs);
  return out;
}

inline PriceSeries load_prices(const std::filesystem::path& path, std::string ticker,
                               Frequency frequency) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return parse_prices(in, std::move(ticker), frequency);
}

inline ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2)
    throw Error(ErrorKind::SeriesTooShort, "log returns need at least 2 prices");
  ReturnSeries out{prices.ticker, prices.frequency, {}, step_years(prices.frequency)};
  out.returns.reserve(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i)
    out.returns.push_back(std::log(prices.observations[i].close / prices.observations[i - 1].close));
  return out;
}

/// Train length for a chronological split: floor(fraction * n), remainder to test.
inline std::size_t split_point(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorKind::DomainError, "split fraction must lie in (0, 1)");
  const auto train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (train == 0 || train >= n)
    throw Error(ErrorKind::DegenerateSplit,
                "split of " + std::to_string(n) + " items leaves an empty side");
  return train;
}

inline SplitSeries<PriceSeries> split(const PriceSeries& series, double fraction) {
  const std::size_t cut = split_point(series.size(), fraction);
  if (cut < 2)
    throw Error(ErrorKind::DegenerateSplit, "training prices need at least 2 observations");
  SplitSeries<PriceSeries> out{{series.ticker, series.frequency, {}},
                               {series.ticker, series.frequency, {}},
                               fraction};
  out.train.observations.assign(series.observations.begin(), series.observations.begin() + cut);
  out.test.observations.assign(series.observations.begin() + cut, series.observations.end());
  return out;
}

inline SplitSeries<ReturnSeries> split(const ReturnSeries& series, double fraction) {
  const std::size_t cut = split_point(series.size(), fraction);
  SplitSeries<ReturnSeries> out{{series.ticker, series.frequency, {}, series.dt_years},
                                {series.ticker, series.frequency, {}, series.dt_years},
                                fraction};
  out.train.returns.assign(series.returns.begin(), series.returns.begin() + cut);
  out.test.returns.assign(series.returns.begin() + cut, series.returns.end());
  return out;
}

/// Inverse of log_returns: price[i] = p0 * exp(sum of returns[0..i]).
inline std::vector<double> reconstruct_prices(double p0, std::span<const double> returns) {
  if (!(p0 > 0.0) || !std::isfinite(p0))
    throw Error(ErrorKind::DomainError, "initial price must be positive");
  std::vector<double> out;
  out.reserve(returns.size());
  double cumulative = 0.0;
  for (double r : returns) {
    cumulative += r;
    out.push_back(p0 * std::exp(cumulative));
  }
  return out;
}

inline std::vector<double> reconstruct_prices(double p0, const ReturnSeries& returns) {
  return reconstruct_prices(p0, returns.values());
}

}  // namespace gbmcheck
