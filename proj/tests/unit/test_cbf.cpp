#include <random>

#include "doctest.h"
#include "fairflow/cbf.hpp"
#include "fairflow/sim.hpp"
#include "support.hpp"

using namespace fairflow;
using doctest::Approx;

namespace {

const std::vector<ClassParams> kTwo{{0.05, 0.0}, {0.0, 0.0}};

SystemParams base() {
    SystemParams sp;
    sp.mu_star = 5;
    sp.q_c = 10;
    sp.q_max = 15;
    return sp;
}

}  // namespace

TEST_CASE("worked Lie derivatives") {
    const ExtendedState s{5, 20, 0.5};
    // w = (1, 0): w.r1 = 0.05, w.r2 = 0
    std::vector<double> w{1, 0};
    const auto lb = lie_bundle(s, w, 6, base(), kTwo);
    CHECK(lb.Lfb == -7.5);
    CHECK(lb.Lf2b == 5.75);
    CHECK(lb.LgpLfb == 0.5);
    CHECK(lb.LgnuLfb == -20);
    CHECK(lb.b == 10);
    CHECK(eta1(lb, {10, 0}, base()) == 13.25);

    // w.r1 = 0.025: the price gain is alpha z w.r1 = 0.25, the rest is unchanged
    std::vector<double> half{0.5, 0.5};
    const auto lh = lie_bundle(s, half, 6, base(), kTwo);
    CHECK(lh.Lfb == -7.5);
    CHECK(lh.Lf2b == 5.75);
    CHECK(lh.LgpLfb == 0.25);
    CHECK(lh.LgnuLfb == -20);
    CHECK(lh.b == 10);
    CHECK(eta1(lh, {10, 0}, base()) == 10.75);
}

TEST_CASE("empty demand queue") {
    const ExtendedState s{0, 0, 0.7};
    std::vector<double> w{0.3, 0.7};
    const auto lb = lie_bundle(s, w, 6, base(), kTwo);
    CHECK(lb.LgpLfb == 0);
    CHECK(lb.LgnuLfb == 0);
    CHECK(lb.Lf2b == Approx(-0.7 * 6));
}

TEST_CASE("eta1 vanishes at the affine root in p") {
    const ExtendedState s{12, 30, 0.8};
    std::vector<double> w{0.4, 0.6};
    const auto lb = lie_bundle(s, w, 9, base(), kTwo);
    const double rest = eta1(lb, {0, 0.5}, base());
    const double p = -rest / lb.LgpLfb;
    CHECK(std::abs(eta1(lb, {p, 0.5}, base())) <= 1e-12);
}

TEST_CASE("eta1 is affine in (p, nu); gains have fixed signs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + trial % 3;
        std::vector<ClassParams> cls(n);
        for (auto& c : cls) c = {0.08 * U(rng), 0.05 * U(rng)};
        const auto w = fftest::random_simplex(rng, n);
        const ExtendedState s{20 * U(rng), 40 * U(rng), U(rng)};
        const double K = 10 * U(rng);
        const auto sp = base();
        const auto lb = lie_bundle(s, w, K, sp, cls);
        const double p = 10 * U(rng), nu = 20 * U(rng) - 10;
        const double e00 = eta1(s, {0, 0}, w, K, sp, cls);
        CHECK(eta1(s, {p, nu}, w, K, sp, cls) - e00 ==
              Approx(lb.LgpLfb * p + lb.LgnuLfb * nu).epsilon(1e-10).scale(1));
        CHECK(lb.LgpLfb >= 0);
        CHECK(lb.LgnuLfb <= 0);
    }
}

TEST_CASE("second derivative of the barrier matches finite differences") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0, 1);
    auto sp = base();
    sp.q_c = 1e6;  // stay on the linear branch of the service rate
    sp.mu_star = 5e5;
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<ClassParams> cls{{0.05, 0.01}, {0.02, 0.0}, {0.0, 0.02}};
        HiddenState s{{5 + 10 * U(rng), 5 + 10 * U(rng), 5 + 10 * U(rng)}, 3 + 5 * U(rng),
                      0.3 + 0.4 * U(rng)};
        const std::vector<double> K{3 * U(rng), 3 * U(rng), 3 * U(rng)};
        const Control u{10 * U(rng), U(rng) - 0.5};
        const double Ksum = K[0] + K[1] + K[2];
        const double z = s.z();
        std::vector<double> w{s.x[0] / z, s.x[1] / z, s.x[2] / z};
        const auto lb = lie_bundle({s.q, z, s.alpha}, w, Ksum, sp, cls);
        const double exact = lb.Lf2b + lb.LgpLfb * u.p + lb.LgnuLfb * u.nu;
        double err[2];
        int i = 0;
        for (double h : {0.02, 0.01}) {
            const auto fwd = fftest::fine_flow(s, u, K, sp, cls, h, 64);
            const auto bwd = fftest::fine_flow(s, u, K, sp, cls, -h, 64);
            const double d2 = ((sp.q_max - fwd.q) - 2 * (sp.q_max - s.q) + (sp.q_max - bwd.q)) / (h * h);
            err[i++] = std::abs(d2 - exact);
        }
        CHECK(err[1] < 1e-3);
        CHECK(err[0] / err[1] >= 3.5);
    }
}

TEST_CASE("prediction with frozen dynamics") {
    const std::vector<ClassParams> inelastic{{0, 0}, {0, 0}};
    std::vector<double> w{0.5, 0.5};
    auto sp = base();
    const ExtendedState s{0, 10, 0};
    const auto pr = predict_state(s, {5, 0}, w, 0, sp, inelastic, 0.1);
    CHECK(pr.state.q == 0);
    CHECK(pr.state.z == 10);
    CHECK(pr.state.alpha == 0);
    CHECK(pr.mean_ratio == 0);
}

TEST_CASE("prediction clamps the admission rate") {
    std::vector<double> w{0.5, 0.5};
    const auto pr = predict_state({3, 10, 0.9}, {5, 10}, w, 4, base(), kTwo, 0.1);
    CHECK(pr.state.alpha == 1.0);
}

TEST_CASE("prediction converges at fourth order") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> w = fftest::random_simplex(rng, 2);
        const ExtendedState s{2 + 6 * U(rng), 5 + 20 * U(rng), 0.3 + 0.4 * U(rng)};
        const Control u{10 * U(rng), U(rng) - 0.5};
        const double K = 8 * U(rng);
        ExtendedState st[3];
        double dt = 0.1;
        for (auto& x : st) {
            auto sp = base();
            sp.dt = dt;
            x = predict_state(s, u, w, K, sp, kTwo, 0.4).state;
            dt /= 2;
        }
        const double d1 = std::abs(st[0].z - st[1].z) + std::abs(st[0].q - st[1].q);
        const double d2 = std::abs(st[1].z - st[2].z) + std::abs(st[1].q - st[2].q);
        CHECK(d1 / d2 > 12);
    }
}

TEST_CASE("short final step lands on the horizon") {
    auto sp = base();
    sp.dt = 0.03;
    const auto t = window_step_times(sp, 0.1);
    REQUIRE(t.size() == 4);
    CHECK(t.back() == 0.1);
    CHECK(t[2] == Approx(0.09));
}

TEST_CASE("fairness margin") {
    CHECK(eta2(0.4, 0.4) == 0);
    CHECK(eta2(1, 0.2) == Approx(-0.8));
    CHECK(eta2(0.1, 0.4) == Approx(0.3));
}

TEST_CASE("queue responses reproduce the per-class plant") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> U(0, 1);
    auto sp = base();
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<ClassParams> cls{{0.05, 0.0}, {0.02, 0.01}, {0.0, 0.0}};
        const double alpha0 = U(rng);
        const Control u{10 * U(rng), 20 * U(rng) - 10};
        const auto r = queue_response(alpha0, u, sp, cls, 0.1);
        HiddenState s{{20 * U(rng), 20 * U(rng), 20 * U(rng)}, 0, alpha0};
        const std::vector<double> a{3 * U(rng), 3 * U(rng), 3 * U(rng)};
        const auto x0 = s.x;
        double prev_t = 0;
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            s = integrate_step(s, u, a, sp, cls, r.times[k] - prev_t);
            prev_t = r.times[k];
            for (std::size_t i = 0; i < 2; ++i) {  // class 3 never drops out
                const double pred = x0[i] * r.decay[i][k + 1] + a[i] * r.fill[i][k + 1];
                CHECK(pred == Approx(s.x[i]).epsilon(1e-12).scale(1));
            }
        }
    }
}

TEST_CASE("worst arrival split: one class takes everything") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> U(0, 1);
    auto sp = base();
    const std::vector<ClassParams> cls{{0.05, 0.0}, {0.02, 0.0}, {0.0, 0.0}};
    for (int trial = 0; trial < 40; ++trial) {
        const double alpha0 = U(rng);
        const Control u{10 * U(rng), 20 * U(rng) - 10};
        const double z = 30 * U(rng), K = 0.5 + 8 * U(rng);
        const auto w = fftest::random_simplex(rng, 3);
        const auto r = queue_response(alpha0, u, sp, cls, 0.1);
        const auto worst = worst_ratio_integrals(r, w, z, K);

        // integral of the ratio along the plant for a given arrival split
        auto integral = [&](const std::vector<double>& split) {
            HiddenState s{{w[0] * z, w[1] * z, w[2] * z}, 0, alpha0};
            std::vector<double> a{split[0] * K, split[1] * K, split[2] * K};
            std::vector<double> out;
            double acc = 0, prev_t = 0;
            double prev = aggregate_dropout(cls, s.x, u.p) / K;
            for (double t : r.times) {
                s = integrate_step(s, u, a, sp, cls, t - prev_t);
                const double cur = aggregate_dropout(cls, s.x, u.p) / K;
                acc += 0.5 * (prev + cur) * (t - prev_t);
                out.push_back(acc);
                prev = cur;
                prev_t = t;
            }
            return out;
        };
        std::vector<double> best(r.times.size(), -1);
        for (std::size_t j = 0; j < 3; ++j) {
            std::vector<double> split(3, 0.0);
            split[j] = 1;
            const auto v = integral(split);
            for (std::size_t k = 0; k < v.size(); ++k) best[k] = std::max(best[k], v[k]);
        }
        for (std::size_t k = 0; k < best.size(); ++k) CHECK(worst[k] == Approx(best[k]).epsilon(1e-10).scale(1));
        const auto mixed = integral(fftest::random_simplex(rng, 3));
        for (std::size_t k = 0; k < best.size(); ++k) CHECK(mixed[k] <= worst[k] + 1e-12);
    }
}
