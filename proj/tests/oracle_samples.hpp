#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "support.hpp"

namespace gbmcheck::testutil {

struct OracleSample {
  std::size_t n;
  std::uint64_t seed;
};

/// 25 fixed seeded normal samples spread over n in {8, 30, 100, 500}.
inline std::vector<OracleSample> shapiro_oracle_samples() {
  std::vector<OracleSample> out;
  const std::array<std::size_t, 4> sizes{8, 30, 100, 500};
  for (std::uint64_t k = 0; k < 25; ++k) out.push_back({sizes[k % 4], 1000 + k});
  return out;
}

}  // namespace gbmcheck::testutil
