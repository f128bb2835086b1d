#pragma once

// Independent test oracles. Everything here recomputes quantities from first
// principles (set definitions, finite differences, dense grids, Monte Carlo)
// and must stay decoupled from the implementation paths it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "solenoid/branch.hpp"
#include "solenoid/system.hpp"
#include "solenoid/words.hpp"

namespace oracles {

using solenoid::SystemParams;
using solenoid::Word;

// Brute-force branch point straight from the set definition: enumerate all
// lap^n preimages of x under the n-th iterate of tau(x) = lap*x, and keep the
// one whose forward orbit visits the prescribed intervals
// (tau^i(y) in P(a_{n-i}), half-open convention).
inline std::optional<double> brute_word_point(int lap, const Word& a, double x) {
    const int n = a.size();
    const double ln = std::pow(static_cast<double>(lap), n);
    std::optional<double> hit;
    for (std::uint64_t j = 0; j < solenoid::pow_u64(lap, n); ++j) {
        double y = (x + static_cast<double>(j)) / ln;
        bool ok = true;
        double z = y;
        for (int i = 0; i < n && ok; ++i) {
            // z approximates tau^i(y); membership in P(a_{n-i}).
            int cell = static_cast<int>(std::floor(z * lap)) + 1;
            if (cell != a[n - 1 - i]) ok = false;
            z = solenoid::wrap01(lap * z);
        }
        if (ok) {
            if (hit) return std::nullopt;  // ambiguity: convention mismatch
            hit = y;
        }
    }
    return hit;
}

// Richardson-extrapolated central difference of a scalar function.
inline double central_diff_richardson(const std::function<double(double)>& g, double x,
                                      double h) {
    auto d = [&](double hh) { return (g(x + hh) - g(x - hh)) / (2.0 * hh); };
    double d1 = d(h), d2 = d(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

// Dense-grid transversality oracle: minimum over a step-`h` product grid of
// |S_c'(x,a) - S_c'(y,b)| on the closed enlargement, compared against the
// threshold. Treated as ground truth for bracket-soundness checks.
struct DenseOracle {
    const SystemParams& p;
    double h;

    std::vector<double> derivative_profile(const Word& c, const Word& a) const {
        solenoid::BranchExtension ext(p, c, a);
        double lo = ext.star().star_left();
        double hi = ext.star().star_right();
        int npts = static_cast<int>(std::ceil((hi - lo) / h)) + 1;
        std::vector<double> u(static_cast<std::size_t>(npts));
        for (int i = 0; i < npts; ++i) {
            double x = lo + (hi - lo) * static_cast<double>(i) / (npts - 1);
            u[static_cast<std::size_t>(i)] = ext.eval_lifted(x, 1);
        }
        return u;
    }

    static double min_abs_gap(std::vector<double> u, std::vector<double> v) {
        std::sort(u.begin(), u.end());
        std::sort(v.begin(), v.end());
        double best = std::abs(u.front() - v.front());
        std::size_t i = 0, j = 0;
        while (i < u.size() && j < v.size()) {
            best = std::min(best, std::abs(u[i] - v[j]));
            if (u[i] < v[j])
                ++i;
            else
                ++j;
        }
        return best;
    }

    bool transversal(const Word& c, const Word& a, const Word& b) const {
        auto ua = derivative_profile(c, a);
        auto ub = derivative_profile(c, b);
        return min_abs_gap(std::move(ua), std::move(ub)) > p.theta(a.size());
    }

    // max over (c,a) of the number of b that fail to be transversal.
    long long count_e_qp(int q, int pp) const {
        using solenoid::word_from_index;
        long long best = 0;
        const std::uint64_t nc = solenoid::pow_u64(p.lap, pp);
        const std::uint64_t nq = solenoid::pow_u64(p.lap, q);
        for (std::uint64_t ci = 0; ci < nc; ++ci) {
            Word c = word_from_index(p.lap, pp, ci);
            std::vector<std::vector<double>> profiles(nq);
            for (std::uint64_t ai = 0; ai < nq; ++ai) {
                profiles[ai] = derivative_profile(c, word_from_index(p.lap, q, ai));
                std::sort(profiles[ai].begin(), profiles[ai].end());
            }
            double theta = p.theta(q);
            for (std::uint64_t ai = 0; ai < nq; ++ai) {
                long long cnt = 0;
                for (std::uint64_t bi = 0; bi < nq; ++bi) {
                    double gap = min_abs_gap(profiles[ai], profiles[bi]);
                    if (!(gap > theta)) ++cnt;
                }
                best = std::max(best, cnt);
            }
        }
        return best;
    }
};

// Composite midpoint quadrature; spectrally accurate for smooth integrands
// that vanish (with all derivatives) at the interval ends or are periodic.
inline double midpoint_quad(const std::function<double(double)>& g, double a, double b, int n) {
    double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g(a + (i + 0.5) * h);
    return acc * h;
}

inline double midpoint_quad_2d(const std::function<double(double, double)>& g, double ax,
                               double bx, double ay, double by, int nx, int ny) {
    double hx = (bx - ax) / nx, hy = (by - ay) / ny;
    double acc = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) acc += g(ax + (i + 0.5) * hx, ay + (j + 0.5) * hy);
    return acc * hx * hy;
}

}  // namespace oracles
