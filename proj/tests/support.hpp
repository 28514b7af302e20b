#pragma once
// Independent oracles shared by the unit and acceptance tests. Nothing here
// calls into the vertex enumeration or the controller search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "fairflow/model.hpp"

namespace fftest {

using Vec = std::vector<double>;

inline Vec dropouts(const std::vector<fairflow::ClassParams>& classes, double p) {
    Vec f;
    for (const auto& c : classes) f.push_back(fairflow::dropout_rate(c, p));
    return f;
}

// Points of {w >= 0, sum w = 1, f.w = c} on a lattice over every coordinate
// except the two with smallest and largest f, which are solved for. Refines
// the lattice until at least `target` feasible points are found (or the
// lattice gets too large). Degenerate cases (all f equal) grid the simplex.
inline std::vector<Vec> polytope_grid(const Vec& f, double c, std::size_t target = 10000) {
    const std::size_t n = f.size();
    std::vector<Vec> out;
    if (n == 1) {
        if (std::abs(f[0] - c) <= 1e-12) out.push_back({1.0});
        return out;
    }
    const auto a = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    const auto b = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    const bool flat = f[b] - f[a] <= 1e-15;
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (flat ? i != a : (i != a && i != b)) free_idx.push_back(i);
    }
    const std::size_t dim = free_idx.size();

    for (long M = 8;; M *= 2) {
        out.clear();
        std::vector<long> m(dim, 0);
        std::size_t visited = 0;
        // enumerate nonnegative integer vectors with sum <= M
        std::function<void(std::size_t, long)> rec = [&](std::size_t k, long left) {
            if (k == dim) {
                ++visited;
                Vec w(n, 0.0);
                double s = 0.0, fs = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    w[free_idx[j]] = static_cast<double>(m[j]) / static_cast<double>(M);
                    s += w[free_idx[j]];
                    fs += f[free_idx[j]] * w[free_idx[j]];
                }
                if (flat) {
                    w[a] = 1.0 - s;
                    if (w[a] < -1e-12) return;
                    w[a] = std::max(w[a], 0.0);
                    out.push_back(std::move(w));
                    return;
                }
                const double rest = 1.0 - s;
                const double wb = (c - fs - f[a] * rest) / (f[b] - f[a]);
                const double wa = rest - wb;
                if (wa < -1e-12 || wb < -1e-12) return;
                w[a] = std::max(wa, 0.0);
                w[b] = std::max(wb, 0.0);
                out.push_back(std::move(w));
                return;
            }
            for (long v = 0; v <= left; ++v) {
                m[k] = v;
                rec(k + 1, left - v);
            }
            m[k] = 0;
        };
        rec(0, M);
        if (dim == 0 || out.size() >= target || visited > 4'000'000) return out;
    }
}

// Exact ray searches along circuit directions of [1; f] until no direction
// improves the affine objective g.w. Each direction keeps both equality
// constraints; the step is the largest that keeps w >= 0.
inline Vec circuit_polish(const Vec& f, const Vec& g, Vec w, int max_iter = 10000) {
    const std::size_t n = f.size();
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (f[i] == f[j]) {
                Vec d(n, 0.0);
                d[i] = 1.0;
                d[j] = -1.0;
                dirs.push_back(d);
            }
            for (std::size_t k = j + 1; k < n; ++k) {
                Vec d(n, 0.0);
                d[i] = f[j] - f[k];
                d[j] = f[k] - f[i];
                d[k] = f[i] - f[j];
                if (std::abs(d[i]) + std::abs(d[j]) + std::abs(d[k]) > 0) dirs.push_back(d);
            }
        }
    }
    for (int it = 0; it < max_iter; ++it) {
        double best_gain = 1e-15;
        Vec best_step;
        for (const auto& d0 : dirs) {
            for (double sgn : {1.0, -1.0}) {
                double slope = 0.0;
                for (std::size_t i = 0; i < n; ++i) slope += sgn * d0[i] * g[i];
                if (slope >= 0) continue;
                double tmax = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double di = sgn * d0[i];
                    if (di < 0) tmax = std::min(tmax, w[i] / -di);
                }
                if (!std::isfinite(tmax) || tmax <= 0) continue;
                const double gain = -slope * tmax;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_step.assign(n, 0.0);
                    for (std::size_t i = 0; i < n; ++i) best_step[i] = sgn * d0[i] * tmax;
                }
            }
        }
        if (best_step.empty()) break;
        for (std::size_t i = 0; i < n; ++i) w[i] = std::max(w[i] + best_step[i], 0.0);
    }
    return w;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Integral of the sample-and-hold ratio over [lo, hi], straight from the
// full (never evicted) sample list starting at `origin`.
struct Sample {
    double t;
    double ratio;
};

inline double brute_integral(const std::vector<Sample>& s, double origin, double lo, double hi) {
    double acc = 0.0;
    double left = origin;
    for (const auto& x : s) {
        const double a = std::max(left, lo), b = std::min(x.t, hi);
        if (b > a) acc += x.ratio * (b - a);
        left = x.t;
    }
    if (!s.empty() && hi > left) acc += s.back().ratio * (hi - std::max(left, lo));
    return acc;
}

inline double brute_index(const std::vector<Sample>& s, double horizon, double t) {
    if (s.empty()) return 0.0;
    const double span = std::min(t, horizon);
    if (span <= 0) return 0.0;
    return brute_integral(s, 0.0, std::max(0.0, t - horizon), t) / span;
}

// Per-class plant integrated with many small RK4 substeps; reference
// trajectory for finite-difference and convergence checks.
inline fairflow::HiddenState fine_flow(fairflow::HiddenState s, const fairflow::Control& u,
                                       const Vec& K, const fairflow::SystemParams& sp,
                                       const std::vector<fairflow::ClassParams>& classes,
                                       double T, int substeps) {
    const double h = T / substeps;
    auto add = [](const fairflow::HiddenState& a, const fairflow::HiddenState& d, double k) {
        fairflow::HiddenState r = a;
        for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] += k * d.x[i];
        r.q += k * d.q;
        r.alpha += k * d.alpha;
        return r;
    };
    for (int i = 0; i < substeps; ++i) {
        const auto k1 = fairflow::hidden_derivative(s, u, K, sp, classes);
        const auto k2 = fairflow::hidden_derivative(add(s, k1, h / 2), u, K, sp, classes);
        const auto k3 = fairflow::hidden_derivative(add(s, k2, h / 2), u, K, sp, classes);
        const auto k4 = fairflow::hidden_derivative(add(s, k3, h), u, K, sp, classes);
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            s.x[j] += h / 6 * (k1.x[j] + 2 * k2.x[j] + 2 * k3.x[j] + k4.x[j]);
        }
        s.q += h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
        s.alpha += h / 6 * (k1.alpha + 2 * k2.alpha + 2 * k3.alpha + k4.alpha);
    }
    return s;
}

inline Vec random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    Vec w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng));
    for (auto& v : w) v /= s;
    return w;
}

}  // namespace fftest
