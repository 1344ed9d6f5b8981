#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gbmcheck {

enum class ErrorKind {
  MalformedRow,
  DuplicateDate,
  EmptyFile,
  UnparseableDate,
  SeriesTooShort,
  SeriesTooLong,
  DegenerateSplit,
  RankDeficient,
  ZeroVariance,
  DomainError,
  LengthMismatch,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::UnparseableDate: return "UnparseableDate";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::SeriesTooLong: return "SeriesTooLong";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. Ingestion errors carry the 1-based
/// line number of the offending CSV row.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(compose(kind, message, line)), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string compose(ErrorKind kind, const std::string& message,
                             std::optional<std::size_t> line) {
    std::string out(to_string(kind));
    if (line) out += " (line " + std::to_string(*line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::optional<std::size_t> line_;
};

}  // namespace gbmcheck
