#include <gtest/gtest.h>

#include "folio/errors.hpp"
#include "folio/types.hpp"
#include "test_support.hpp"

namespace folio {
namespace {

TEST(WeightVector, FactoriesLieOnTheSimplex) {
    EXPECT_EQ(WeightVector::all_cash(3).values()[0], 1.0);
    const auto u = WeightVector::uniform(3);
    for (double w : u.values()) EXPECT_DOUBLE_EQ(w, 0.25);
    const auto r = WeightVector::equal_risky(4);
    EXPECT_EQ(r[0], 0.0);
    for (std::size_t i = 1; i <= 4; ++i) EXPECT_DOUBLE_EQ(r[i], 0.25);
}

TEST(WeightVector, RejectsPointsOffTheSimplex) {
    EXPECT_THROW(WeightVector({0.5, 0.6}), Error);
    EXPECT_THROW(WeightVector({-0.1, 1.1}), Error);
    EXPECT_THROW(WeightVector({}), Error);
    try {
        WeightVector({0.2, 0.2});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidAction);
    }
}

TEST(WeightVector, FromActionRenormalizesWithinTolerance) {
    const auto w = WeightVector::from_action(std::vector<double>{0.5, 0.5 + 5e-7});
    EXPECT_NEAR(w[0] + w[1], 1.0, 1e-15);
    const auto clamped = WeightVector::from_action(std::vector<double>{-5e-10, 1.0});
    EXPECT_EQ(clamped[0], 0.0);
    EXPECT_THROW(WeightVector::from_action(std::vector<double>{0.5, 0.5 + 1e-5}), Error);
    EXPECT_THROW(WeightVector::from_action(std::vector<double>{-1e-6, 1.0 + 1e-6}), Error);
}

TEST(WeightVector, RandomSimplexPointsAreAccepted) {
    Rng rng(11);
    for (int k = 0; k < 1000; ++k) {
        const auto w = testing::random_simplex(1 + k % 10, rng, 0.3);
        double s = 0.0;
        for (double x : w.values()) {
            EXPECT_GE(x, 0.0);
            EXPECT_LE(x, 1.0);
            s += x;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Errors, MessageCarriesTheCodeName) {
    const Error e(ErrorCode::ZeroVariance, "flat");
    EXPECT_EQ(e.code(), ErrorCode::ZeroVariance);
    EXPECT_NE(std::string(e.what()).find("ZeroVariance"), std::string::npos);
}

}  // namespace
}  // namespace folio
