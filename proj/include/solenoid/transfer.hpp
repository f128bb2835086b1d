#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "solenoid/grid.hpp"
#include "solenoid/parallel.hpp"
#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"

namespace solenoid {

struct ApplyStats {
    double mass_in = 0.0;
    double mass_out = 0.0;
    double leakage = 0.0;  // mass of the reconstruction not delivered in-range
    bool leak_flag = false;
};

/// One application of the pull-back form of the transfer operator,
///   (Ph)(x,y) = (1/(lambda lap)) sum_k h(x_k, (y - f(x_k))/lambda),
/// discretized conservatively: in x each output column reads the lap exact
/// branch preimages of its center (which are centers of the lap-fold refined
/// grid), and in y each output cell receives the integral of the
/// piecewise-constant reconstruction over the exact preimage interval of the
/// cell under y -> lambda*y + f. The per-column edge sums telescope, so the
/// discrete operator preserves total mass to rounding error.
inline ApplyStats apply_transfer(const SystemParams& p, const DensityField& in,
                                 DensityField& out, unsigned threads = 0) {
    if (&in == &out) throw std::invalid_argument("apply_transfer: aliased fields");
    if (in.nx != out.nx || in.ny != out.ny || in.ylo != out.ylo || in.yhi != out.yhi)
        throw std::invalid_argument("apply_transfer: grid mismatch");
    const int nx = in.nx, ny = in.ny, lap = p.lap;
    const double dy = in.dy(), ylo = in.ylo;
    const double lambda = p.lambda;

    // Per-column prefix sums of the reconstruction: C[t][j] = integral of
    // column t from ylo to the j-th cell edge (divided by dy).
    std::vector<double> pref(static_cast<std::size_t>(nx) * (ny + 1));
    for (int t = 0; t < nx; ++t) {
        double acc = 0.0;
        pref[static_cast<std::size_t>(t) * (ny + 1)] = 0.0;
        for (int j = 0; j < ny; ++j) {
            acc += in.at(t, j);
            pref[static_cast<std::size_t>(t) * (ny + 1) + j + 1] = acc;
        }
    }
    auto cum = [&](int t, double u) -> double {
        // Integral of column t from ylo to u, in units of value*dy.
        double g = (u - ylo) / dy;
        if (g <= 0.0) return 0.0;
        if (g >= ny) return pref[static_cast<std::size_t>(t) * (ny + 1) + ny];
        int j = static_cast<int>(g);
        double frac = g - j;
        const double* base = &pref[static_cast<std::size_t>(t) * (ny + 1)];
        return base[j] + frac * (base[j + 1] - base[j]);
    };

    std::vector<double> leak_per_col(static_cast<std::size_t>(nx), 0.0);
    parallel_for(static_cast<std::size_t>(nx), threads, [&](std::size_t i_) {
        int i = static_cast<int>(i_);
        double leak = 0.0;
        for (int k = 1; k <= lap; ++k) {
            // Exact branch preimage of the output column center; it is a cell
            // center of the lap-fold refined x-grid, and its coarse column is
            // floor(j/lap) for fine index j.
            std::uint64_t j = static_cast<std::uint64_t>(i) +
                              static_cast<std::uint64_t>(k - 1) * nx;
            int t = static_cast<int>(j / static_cast<std::uint64_t>(lap));
            double x_fine = (static_cast<double>(j) + 0.5) / (static_cast<double>(lap) * nx);
            double c = p.f.eval(x_fine);

            // cum() is in units of value (integral / dy); the output density
            // is integral / (lap * dy), so the factor is 1/lap.
            double inv_lap = 1.0 / static_cast<double>(lap);
            double prev = cum(t, (ylo - c) / lambda);
            for (int jy = 0; jy < ny; ++jy) {
                double upper = cum(t, (ylo + (jy + 1) * dy - c) / lambda);
                out.at(i, jy) += (upper - prev) * inv_lap;
                prev = upper;
            }
            double total = pref[static_cast<std::size_t>(t) * (ny + 1) + ny];
            double below = cum(t, (ylo - c) / lambda);
            leak += (below + (total - prev)) / lap;  // mass outside the y-range
        }
        leak_per_col[i_] = leak;
    });

    ApplyStats stats;
    stats.mass_in = in.integral();
    stats.mass_out = out.integral();
    for (double l : leak_per_col) stats.leakage += l * dy * in.dx();
    stats.leak_flag = stats.leakage > 1e-12 * std::max(1.0, std::abs(stats.mass_in));
    return stats;
}

inline DensityField zero_like(const DensityField& f) {
    return DensityField(f.nx, f.ny, f.ylo, f.yhi);
}

/// Smooth nonnegative bump supported strictly inside |y| < ybound,
/// constant in x, normalized to mass one.
inline DensityField smooth_bump_density(int nx, int ny, double ybound) {
    DensityField f(nx, ny, -ybound, ybound);
    double half = 0.95 * ybound;
    for (int iy = 0; iy < ny; ++iy) {
        double y = f.y_center(iy);
        double u = y / half;
        double val = std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        for (int ix = 0; ix < nx; ++ix) f.at(ix, iy) = val;
    }
    f.normalize();
    return f;
}

struct SbrOptions {
    int nx = 128, ny = 128;
    int iters = 500;
    double tol = 1e-8;
    double ybound = 0.0;  // 0 = 1.01 * alpha0
    unsigned threads = 0;
};

struct SbrResult {
    DensityField density;
    std::vector<double> diffs;  // consecutive L1 differences
    bool converged = false;
    int iterations = 0;
    double mass_drift = 0.0;  // |final mass - 1| before renormalization
    bool leak_flag = false;
};

/// Fixed-density estimate: iterate the transfer operator on a smooth bump
/// until consecutive iterates differ by less than tol in L1.
inline SbrResult sbr_density(const SystemParams& p, SbrOptions opts = {}) {
    double ybound = opts.ybound > 0.0 ? opts.ybound : p.grid_ybound();
    SbrResult res;
    DensityField cur = smooth_bump_density(opts.nx, opts.ny, ybound);
    for (int it = 0; it < opts.iters; ++it) {
        DensityField next = zero_like(cur);
        ApplyStats st = apply_transfer(p, cur, next, opts.threads);
        res.leak_flag = res.leak_flag || st.leak_flag;
        double d = next.l1_distance(cur);
        res.diffs.push_back(d);
        cur = std::move(next);
        res.iterations = it + 1;
        if (d < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.mass_drift = std::abs(cur.integral() - 1.0);
    cur.normalize();
    res.density = std::move(cur);
    return res;
}

struct OrbitHistogramResult {
    DensityField density;
    std::uint64_t points = 0;
    std::uint64_t out_of_range = 0;
};

/// Occupation histogram of a single forward orbit started at a seeded random
/// point of the slab, burn-in discarded, normalized to mass one.
inline OrbitHistogramResult orbit_histogram(const SystemParams& p, int nx, int ny,
                                            double ybound, std::uint64_t npoints,
                                            std::uint64_t burn_in, std::uint64_t seed) {
    OrbitHistogramResult res{DensityField(nx, ny, -ybound, ybound), 0, 0};
    RngStream rng(seed, {0x6f726269ULL});
    double x = rng.uniform();
    double y = rng.uniform(-ybound, ybound);
    for (std::uint64_t n = 0; n < burn_in; ++n) {
        auto [x1, y1] = step(p, x, y);
        x = x1;
        y = y1;
    }
    DensityField& h = res.density;
    const double dy = h.dy();
    for (std::uint64_t n = 0; n < npoints; ++n) {
        auto [x1, y1] = step(p, x, y);
        x = x1;
        y = y1;
        int ix = static_cast<int>(x * nx);
        if (ix >= nx) ix = nx - 1;
        int iy = static_cast<int>((y - h.ylo) / dy);
        if (iy < 0 || iy >= ny) {
            ++res.out_of_range;
            continue;
        }
        h.at(ix, iy) += 1.0;
        ++res.points;
    }
    if (res.points > 0) h.scale(1.0 / (static_cast<double>(res.points) * h.cell_area()));
    return res;
}

/// Exact SBR-measure sampler via the contracting past: x uniform, y the
/// branch sum of a random reverse itinerary truncated at certified depth.
/// Used as an independent cross-check on orbit statistics.
inline DensityField backward_histogram(const SystemParams& p, int nx, int ny, double ybound,
                                       std::uint64_t npoints, int depth, std::uint64_t seed) {
    DensityField h(nx, ny, -ybound, ybound);
    RngStream rng(seed, {0x70617374ULL});
    const double dy = h.dy();
    std::uint64_t kept = 0;
    for (std::uint64_t n = 0; n < npoints; ++n) {
        double x = rng.uniform();
        double z = x, y = 0.0, lam = 1.0;
        for (int i = 0; i < depth; ++i) {
            Symbol k = static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(p.lap))) + 1;
            z = inverse_branch(p.lap, k, z);
            y += lam * p.f.eval(z);
            lam *= p.lambda;
        }
        int ix = static_cast<int>(x * nx);
        if (ix >= nx) ix = nx - 1;
        int iy = static_cast<int>((y - h.ylo) / dy);
        if (iy < 0 || iy >= ny) continue;
        h.at(ix, iy) += 1.0;
        ++kept;
    }
    if (kept > 0) h.scale(1.0 / (static_cast<double>(kept) * h.cell_area()));
    return h;
}

}  // namespace solenoid
