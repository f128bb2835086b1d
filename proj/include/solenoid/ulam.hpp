#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "solenoid/grid.hpp"
#include "solenoid/parallel.hpp"
#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"

namespace solenoid {

/// Column-stochastic finite-rank surrogate of the transfer operator on a
/// cell grid: entry (j,i) is the fraction of stratified sample points of
/// cell i that the map sends into cell j. Stored column-compressed.
struct UlamOperator {
    int nx = 0, ny = 0;
    double ylo = 0.0, yhi = 0.0;
    std::vector<std::size_t> col_ptr;  // size dim+1
    std::vector<int> row_idx;
    std::vector<double> val;
    double mass_error = 0.0;      // max |column sum - 1|
    std::uint64_t clamped = 0;    // samples clamped back into the y-range
    int samples_axis = 1;         // stratification per axis (total = axis^2)

    std::size_t dim() const { return static_cast<std::size_t>(nx) * ny; }

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        if (x.size() != dim()) throw std::invalid_argument("matvec: size mismatch");
        y.assign(dim(), 0.0);
        for (std::size_t i = 0; i < dim(); ++i) {
            double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t e = col_ptr[i]; e < col_ptr[i + 1]; ++e)
                y[static_cast<std::size_t>(row_idx[e])] += val[e] * xi;
        }
    }

    static UlamOperator from_dense(const std::vector<std::vector<double>>& m) {
        UlamOperator op;
        op.nx = static_cast<int>(m.size());
        op.ny = 1;
        op.ylo = 0.0;
        op.yhi = 1.0;
        op.col_ptr.assign(op.dim() + 1, 0);
        for (std::size_t i = 0; i < op.dim(); ++i) {
            for (std::size_t j = 0; j < op.dim(); ++j) {
                if (m[j][i] != 0.0) {
                    op.row_idx.push_back(static_cast<int>(j));
                    op.val.push_back(m[j][i]);
                }
            }
            op.col_ptr[i + 1] = op.row_idx.size();
        }
        return op;
    }
};

/// Assemble the Ulam matrix with an axis-stratified, seed-keyed sample of
/// each cell. The jitter for the a-th x-stratum depends only on (seed, ix, a)
/// and likewise in y, so a product map factorizes the matrix exactly.
inline UlamOperator ulam_build(const SystemParams& p, int nx, int ny, int samples_per_cell,
                               std::uint64_t seed, double ybound = 0.0, unsigned threads = 0) {
    if (samples_per_cell < 1) throw std::invalid_argument("ulam_build: samples_per_cell >= 1");
    if (ybound <= 0.0) ybound = p.grid_ybound();
    UlamOperator op;
    op.nx = nx;
    op.ny = ny;
    op.ylo = -ybound;
    op.yhi = ybound;
    int s = std::max(1, static_cast<int>(std::lround(std::sqrt(double(samples_per_cell)))));
    op.samples_axis = s;

    const double dx = 1.0 / nx;
    const double dy = 2.0 * ybound / ny;
    const std::size_t dim = op.dim();

    std::vector<std::vector<std::pair<int, double>>> cols(dim);
    std::vector<std::uint64_t> clamped_per_col(dim, 0);

    parallel_for(dim, threads, [&](std::size_t cell) {
        int ix = static_cast<int>(cell) / ny;
        int iy = static_cast<int>(cell) % ny;
        std::vector<int> hits;
        hits.reserve(static_cast<std::size_t>(s) * s);
        for (int a = 0; a < s; ++a) {
            double x = (ix + (a + keyed_uniform(seed, 0xA11CE, ix, a)) / s) * dx;
            for (int b = 0; b < s; ++b) {
                double y = op.ylo + (iy + (b + keyed_uniform(seed, 0xB0B, iy, b)) / s) * dy;
                auto [x1, y1] = step(p, x, y);
                int jx = static_cast<int>(x1 * nx);
                if (jx >= nx) jx = nx - 1;
                int jy = static_cast<int>((y1 - op.ylo) / dy);
                if (jy < 0) {
                    jy = 0;
                    ++clamped_per_col[cell];
                } else if (jy >= ny) {
                    jy = ny - 1;
                    ++clamped_per_col[cell];
                }
                hits.push_back(jx * ny + jy);
            }
        }
        std::sort(hits.begin(), hits.end());
        auto& col = cols[cell];
        double w = 1.0 / static_cast<double>(hits.size());
        for (std::size_t i = 0; i < hits.size();) {
            std::size_t j = i;
            while (j < hits.size() && hits[j] == hits[i]) ++j;
            col.emplace_back(hits[i], static_cast<double>(j - i) * w);
            i = j;
        }
    });

    op.col_ptr.assign(dim + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        nnz += cols[i].size();
        op.col_ptr[i + 1] = nnz;
    }
    op.row_idx.reserve(nnz);
    op.val.reserve(nnz);
    for (std::size_t i = 0; i < dim; ++i) {
        double colsum = 0.0;
        for (auto [r, w] : cols[i]) {
            op.row_idx.push_back(r);
            op.val.push_back(w);
            colsum += w;
        }
        op.mass_error = std::max(op.mass_error, std::abs(colsum - 1.0));
    }
    for (std::uint64_t c : clamped_per_col) op.clamped += c;
    return op;
}

struct PowerResult {
    double second_ev = 0.0;
    bool converged = false;
    std::vector<double> estimates;       // windowed estimates per iteration
    std::vector<double> fixed_density;   // leading eigenvector (mass one)
};

/// Modulus of the second eigenvalue by power iteration on the zero-sum
/// subspace (which is invariant because columns sum to one). The estimate is
/// the windowed geometric mean of the growth factors, robust to complex
/// pairs.
inline PowerResult second_eigenvalue(const UlamOperator& op, int iters,
                                     std::uint64_t seed = 2) {
    const std::size_t n = op.dim();
    PowerResult res;

    // Leading fixed vector for reporting.
    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), tmp(n);
    for (int it = 0; it < std::min(iters, 200); ++it) {
        op.matvec(pi, tmp);
        double s = 0.0;
        for (double v : tmp) s += std::abs(v);
        if (s == 0.0) break;
        for (auto& v : tmp) v /= s;
        std::swap(pi, tmp);
    }
    res.fixed_density = pi;

    RngStream rng(seed, {0x65696732ULL});
    std::vector<double> w(n), next(n);
    double mean = 0.0;
    for (auto& v : w) {
        v = rng.uniform(-1.0, 1.0);
        mean += v;
    }
    mean /= static_cast<double>(n);
    for (auto& v : w) v -= mean;

    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    double nw = norm2(w);
    if (nw == 0.0) return res;
    for (auto& v : w) v /= nw;

    const int window = 10;
    std::vector<double> growth;
    for (int it = 0; it < iters; ++it) {
        op.matvec(w, next);
        // Re-project: column stochasticity preserves zero sum only to rounding.
        double m = 0.0;
        for (double v : next) m += v;
        m /= static_cast<double>(n);
        for (auto& v : next) v -= m;
        double g = norm2(next);
        if (g == 0.0) break;
        for (auto& v : next) v /= g;
        std::swap(w, next);
        growth.push_back(g);
        if (static_cast<int>(growth.size()) >= window) {
            double acc = 0.0;
            for (int k = 0; k < window; ++k)
                acc += std::log(growth[growth.size() - 1 - static_cast<std::size_t>(k)]);
            res.estimates.push_back(std::exp(acc / window));
        }
    }
    if (!res.estimates.empty()) {
        res.second_ev = res.estimates.back();
        if (res.estimates.size() >= 5) {
            double recent = res.estimates[res.estimates.size() - 5];
            res.converged = std::abs(res.second_ev - recent) <= 1e-3 * std::max(1.0, res.second_ev);
        }
    }
    if (res.second_ev > 1.0 && res.second_ev < 1.0 + 1e-9) res.second_ev = 1.0;
    return res;
}

}  // namespace solenoid
