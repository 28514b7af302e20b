#include <random>

#include "doctest.h"
#include "fairflow/metrics.hpp"
#include "support.hpp"

using namespace fairflow;
using doctest::Approx;

TEST_CASE("recording a sample stores dropout over arrivals") {
    FairnessWindow w(10);
    w.record(1, 2, 4);
    REQUIRE(w.samples().size() == 1);
    CHECK(w.samples().front().ratio == 0.5);
    w.record(2, 3, 0);
    CHECK(w.samples().back().ratio == 0);
}

TEST_CASE("timestamps must increase") {
    FairnessWindow w(10);
    w.record(1, 1, 1);
    CHECK_THROWS_AS(w.record(1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(w.record(0.5, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(w.record_ratio(2, -0.1), std::invalid_argument);
}

TEST_CASE("old samples are evicted") {
    FairnessWindow w(10);
    for (int t = 1; t <= 20; ++t) w.record_ratio(t, 0.1 * t);
    CHECK(w.samples().front().t >= 10);
    CHECK(w.samples().back().t == 20);
}

TEST_CASE("index of simple ratio trains") {
    FairnessWindow w(10);
    CHECK(w.index(5) == 0);
    for (int t = 1; t <= 20; ++t) w.record_ratio(t, 0.3);
    CHECK(w.index(20) == Approx(0.3).epsilon(1e-14));

    FairnessWindow h(10);
    h.record_ratio(5, 0.2);
    h.record_ratio(10, 0.4);
    CHECK(h.index(10) == Approx(0.3).epsilon(1e-14));
    // partial window: average since the origin
    CHECK(h.index(5) == Approx(0.2).epsilon(1e-14));
}

TEST_CASE("one-window-ahead prediction") {
    FairnessWindow w(10);
    for (int k = 1; k <= 200; ++k) w.record_ratio(0.1 * k, 0.2);
    CHECK(w.predict(20, 0.1, 1.0) == Approx((9.9 * 0.2 + 0.1 * 1.0) / 10).epsilon(1e-12));
    CHECK(w.predict(20, 0.1, 0.2) == Approx(w.index(20)).epsilon(1e-12));
}

TEST_CASE("index matches brute-force re-integration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const double horizon = 1 + 10 * U(rng);
        FairnessWindow w(horizon);
        std::vector<fftest::Sample> all;
        double t = 0;
        for (int k = 0; k < 400; ++k) {
            t += 0.01 + 0.2 * U(rng);
            const double r = U(rng);
            w.record_ratio(t, r);
            all.push_back({t, r});
            const double q = t + 0.3 * U(rng);
            CHECK(std::abs(w.index(q) - fftest::brute_index(all, horizon, q)) <= 1e-9);
        }
    }
}

TEST_CASE("index is bounded by the recorded ratios and unaffected by eviction") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        FairnessWindow kept(5, 0, false), evicted(5, 0, true);
        double t = 0, mx = 0;
        for (int k = 0; k < 300; ++k) {
            t += 0.05 + 0.1 * U(rng);
            const double r = 2 * U(rng);
            mx = std::max(mx, r);
            kept.record_ratio(t, r);
            evicted.record_ratio(t, r);
            CHECK(evicted.index(t) >= 0);
            CHECK(evicted.index(t) <= mx + 1e-12);
            CHECK(std::abs(kept.index(t) - evicted.index(t)) <= 1e-12);
        }
    }
}

TEST_CASE("prediction equals recording the predicted sample") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        FairnessWindow w(2 + 8 * U(rng));
        double t = 0;
        const int n = static_cast<int>(50 * U(rng));
        for (int k = 0; k < n; ++k) w.record_ratio(t += 0.01 + 0.3 * U(rng), U(rng));
        const double t_now = t + 0.2 * U(rng);
        const double Td = 0.05 + 0.2 * U(rng);
        const double r = U(rng);
        const double predicted = w.predict(t_now, Td, r);
        FairnessWindow appended = w;
        if (t_now > w.last_time()) appended.record_ratio(t_now, w.empty() ? 0 : w.samples().back().ratio);
        appended.record_ratio(t_now + Td, r);
        CHECK(predicted == Approx(appended.index(t_now + Td)).epsilon(1e-12));
    }
}

TEST_CASE("revenue accumulates p alpha z dt") {
    RevenueAccumulator acc;
    acc.step(10, 0.5, 20, 0.1);
    CHECK(acc.total == Approx(10));
    CHECK(acc.last_rate == 100);
    acc.step(0, 0.5, 20, 0.1);
    CHECK(acc.total == Approx(10));

    RevenueAccumulator c;
    for (int k = 0; k < 1000; ++k) c.step(3.5, 0.8, 12, 0.01);
    CHECK(std::abs(c.total - 3.5 * 0.8 * 12 * 10) <= 1e-9);
}
