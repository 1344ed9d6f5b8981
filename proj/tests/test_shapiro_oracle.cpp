#include <gtest/gtest.h>

#include "gbmcheck/stattests.hpp"
#include "oracle_samples.hpp"
#include "royston_reference.hpp"

using namespace gbmcheck;

TEST(ShapiroOracle, ReferenceQuantileIsAccurate) {
  for (double p = 0.001; p < 1.0; p += 0.0137)
    EXPECT_NEAR(reference::acklam_quantile(p), specfun::normal_quantile(p), 1e-12);
}

TEST(ShapiroOracle, SeededNormalSamplesAgree) {
  for (const auto& s : testutil::shapiro_oracle_samples()) {
    const auto x = testutil::white_noise(s.n, s.seed, 0.05);
    const auto lib = stattests::shapiro_wilk(x);
    const auto ref = reference::royston_swilk(x);
    EXPECT_NEAR(lib.statistic, ref.w, 1e-6) << "n=" << s.n << " seed=" << s.seed;
    EXPECT_NEAR(*lib.p_value, ref.p, 1e-6) << "n=" << s.n << " seed=" << s.seed;
  }
}

TEST(ShapiroOracle, HeavyTailedSampleAgreesAndRejects) {
  const auto x = testutil::cauchy(30, 7);
  const auto lib = stattests::shapiro_wilk(x);
  const auto ref = reference::royston_swilk(x);
  EXPECT_NEAR(lib.statistic, ref.w, 1e-6);
  EXPECT_NEAR(*lib.p_value, ref.p, 1e-6);
  EXPECT_LT(ref.p, 0.05);
}

TEST(ShapiroOracle, SmallSampleBranch) {
  for (std::size_t n = 8; n <= 12; ++n) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto x = testutil::white_noise(n, seed + 50);
      EXPECT_NEAR(*stattests::shapiro_wilk(x).p_value, reference::royston_swilk(x).p, 1e-6);
    }
  }
}
