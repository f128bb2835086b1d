#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "solenoid/fft.hpp"
#include "solenoid/grid.hpp"
#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"
#include "solenoid/transfer.hpp"

namespace solenoid {

/// Discrete W^s structure on the slab S^1 x [-L, L]: integer frequencies xi
/// in x, frequencies eta_k = pi k / L from the periodized y-transform, weight
/// ((2 pi xi)^2 + eta^2)^s plus the plain L2 pairing. Fields must be
/// supported in |y| < L; then the periodization is exact and the discrete
/// transform satisfies an exact Parseval identity.
struct SobolevSpec {
    double s = 0.0;
    double L = 4.0;
    int nxi = 128;   // x samples / frequencies (power of two)
    int neta = 256;  // y samples / frequencies (power of two)

    void validate() const {
        if (s < 0.0) throw std::invalid_argument("SobolevSpec: s must be >= 0");
        if (L <= 0.0) throw std::invalid_argument("SobolevSpec: L must be positive");
        if (!is_pow2(nxi) || !is_pow2(neta))
            throw std::invalid_argument("SobolevSpec: mode counts must be powers of two");
    }
};

using Field2D = std::function<double(double, double)>;

/// Sampled 2-D spectrum with the metadata needed for inner products.
struct Spectrum {
    SobolevSpec spec;
    std::vector<std::complex<double>> F;  // nxi x neta, row-major in xi index
    double l2_sq = 0.0;                   // exact grid L2 norm squared
};

inline Spectrum analyze(const SobolevSpec& spec, const Field2D& f) {
    spec.validate();
    const int nx = spec.nxi, ny = spec.neta;
    const double dx = 1.0 / nx;
    const double dy = 2.0 * spec.L / ny;
    Spectrum out;
    out.spec = spec;
    out.F.assign(static_cast<std::size_t>(nx) * ny, {0.0, 0.0});

    for (int i = 0; i < nx; ++i) {
        double x = (i + 0.5) * dx;
        for (int j = 0; j < ny; ++j) {
            double y = -spec.L + (j + 0.5) * dy;
            double v = f(x, y);
            out.F[static_cast<std::size_t>(i) * ny + j] = v;
            out.l2_sq += v * v;
        }
    }
    out.l2_sq *= dx * dy;

    // FFT rows (y direction) then columns (x direction).
    std::vector<std::complex<double>> buf(std::max(nx, ny));
    for (int i = 0; i < nx; ++i) {
        buf.assign(out.F.begin() + static_cast<std::ptrdiff_t>(i) * ny,
                   out.F.begin() + static_cast<std::ptrdiff_t>(i + 1) * ny);
        fft_pow2(buf);
        std::copy(buf.begin(), buf.end(), out.F.begin() + static_cast<std::ptrdiff_t>(i) * ny);
    }
    std::vector<std::complex<double>> col(static_cast<std::size_t>(nx));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) col[static_cast<std::size_t>(i)] = out.F[static_cast<std::size_t>(i) * ny + j];
        fft_pow2(col);
        for (int i = 0; i < nx; ++i) out.F[static_cast<std::size_t>(i) * ny + j] = col[static_cast<std::size_t>(i)];
    }

    // Continuous normalization (1/sqrt(2 pi)) * integral, with the phase of
    // the off-origin sample points folded in so bins mean exact frequencies.
    const double norm = dx * dy / std::sqrt(2.0 * std::numbers::pi);
    for (int i = 0; i < nx; ++i) {
        int xi = signed_freq(i, nx);
        for (int j = 0; j < ny; ++j) {
            int k = signed_freq(j, ny);
            double eta = std::numbers::pi * k / spec.L;
            // Sample m carries phase exp(-i w (m + 1/2) h); the DFT supplied
            // exp(-i 2 pi m idx / n), so correct by the half-sample shift and
            // the grid origin (x=0 offset dx/2, y=-L offset).
            double phase = -(2.0 * std::numbers::pi * xi) * (0.5 * dx) - eta * (-spec.L + 0.5 * dy);
            out.F[static_cast<std::size_t>(i) * ny + j] *=
                norm * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return out;
}

struct WsParts {
    double star = 0.0;  // frequency-weighted pairing
    double l2 = 0.0;    // plain L2 pairing
    double total() const { return star + l2; }
};

inline WsParts ws_inner_parts(const Spectrum& a, const Spectrum& b) {
    const SobolevSpec& spec = a.spec;
    if (b.spec.nxi != spec.nxi || b.spec.neta != spec.neta || b.spec.L != spec.L)
        throw std::invalid_argument("ws_inner: spectra on different grids");
    const int nx = spec.nxi, ny = spec.neta;
    const double deta = std::numbers::pi / spec.L;
    double star = 0.0;
    double l2_pair = 0.0;
    for (int i = 0; i < nx; ++i) {
        int xi = signed_freq(i, nx);
        double wx = 2.0 * std::numbers::pi * xi;
        for (int j = 0; j < ny; ++j) {
            int k = signed_freq(j, ny);
            double eta = std::numbers::pi * k / spec.L;
            std::complex<double> prod =
                a.F[static_cast<std::size_t>(i) * ny + j] *
                std::conj(b.F[static_cast<std::size_t>(i) * ny + j]);
            double w = wx * wx + eta * eta;
            l2_pair += prod.real();
            // IEEE pow: the origin bin weighs 1 at s = 0 and 0 for s > 0,
            // matching the limit of the continuum integrand.
            star += prod.real() * std::pow(w, spec.s);
        }
    }
    WsParts parts;
    parts.star = star * deta;
    parts.l2 = l2_pair * deta;  // discrete Parseval: equals the grid L2 pairing
    return parts;
}

inline double ws_inner(const SobolevSpec& spec, const Field2D& f1, const Field2D& f2) {
    Spectrum a = analyze(spec, f1);
    Spectrum b = analyze(spec, f2);
    return ws_inner_parts(a, b).total();
}

inline double ws_norm(const SobolevSpec& spec, const Field2D& f) {
    Spectrum a = analyze(spec, f);
    return std::sqrt(ws_inner_parts(a, a).total());
}

/// Norm of a gridded density, the field read as piecewise constant and zero
/// outside its slab. Errors out if the field's y-range pokes past L.
inline double ws_norm(const SobolevSpec& spec, const DensityField& f) {
    if (f.ylo < -spec.L || f.yhi > spec.L)
        throw std::invalid_argument("ws_norm: field support exceeds the transform window");
    Field2D sampler = [&f](double x, double y) -> double {
        if (y < f.ylo || y >= f.yhi) return 0.0;
        int ix = static_cast<int>(x * f.nx);
        if (ix >= f.nx) ix = f.nx - 1;
        int iy = static_cast<int>((y - f.ylo) / f.dy());
        if (iy >= f.ny) iy = f.ny - 1;
        return f.at(ix, iy);
    };
    return ws_norm(spec, sampler);
}

// ---------------------------------------------------------------------------
// Regularity sweep

struct RegularityRow {
    int grid = 0;
    double s = 0.0;
    double wnorm = 0.0;
    double growth_ratio = 0.0;  // ratio of successive squared norms
    bool bounded = true;        // growth_ratio < 1.2
};

struct RegularitySweep {
    std::vector<RegularityRow> rows;
    bool bounded_flag = false;  // last row's flag
    bool density_converged = true;
};

/// Fixed-density norms across a ladder of grids. The growth ratio of the
/// squared norms between consecutive grids is the boundedness diagnostic:
/// a convergent (regular) density settles toward ratio one, a singular one
/// keeps growing like a power of the resolution.
inline RegularitySweep regularity_sweep(const SystemParams& p, double s,
                                        const std::vector<int>& grids, SbrOptions density_opts,
                                        double L = 0.0) {
    require_sobolev_range(p);
    RegularitySweep sweep;
    double ybound = density_opts.ybound > 0.0 ? density_opts.ybound : p.grid_ybound();
    if (L <= 0.0) L = 2.0 * (ybound + 1.0);
    double prev_sq = 0.0;
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
        int n = grids[gi];
        SbrOptions opts = density_opts;
        opts.nx = n;
        opts.ny = n;
        opts.ybound = ybound;
        SbrResult res = sbr_density(p, opts);
        sweep.density_converged = sweep.density_converged && res.converged;

        SobolevSpec spec;
        spec.s = s;
        spec.L = L;
        spec.nxi = next_pow2(n);
        spec.neta = next_pow2(static_cast<int>(std::ceil(2.0 * L / (2.0 * ybound) * n)));
        double norm = ws_norm(spec, res.density);

        RegularityRow row;
        row.grid = n;
        row.s = s;
        row.wnorm = norm;
        if (gi > 0) {
            row.growth_ratio = (norm * norm) / prev_sq;
            row.bounded = row.growth_ratio < 1.2;
        } else {
            row.growth_ratio = 1.0;
            row.bounded = true;
        }
        prev_sq = norm * norm;
        sweep.rows.push_back(row);
    }
    if (!sweep.rows.empty()) sweep.bounded_flag = sweep.rows.back().bounded;
    return sweep;
}

// ---------------------------------------------------------------------------
// Curve-family surrogate of the anisotropic norm

/// Plain dense polynomial in one variable (used for curve profiles and test
/// functions, where exact derivatives and certified sups are cheap).
struct Poly {
    std::vector<double> c;  // c[0] + c[1] u + ...

    double eval(double u) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
        return acc;
    }

    Poly deriv() const {
        Poly d;
        if (c.size() <= 1) {
            d.c = {0.0};
            return d;
        }
        d.c.resize(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * static_cast<double>(i);
        return d;
    }

    /// Certified sup over [a,b]: dense sampling padded with a derivative
    /// coefficient bound.
    double sup_on(double a, double b) const {
        double m = std::max(std::abs(a), std::abs(b));
        double lip = 0.0;
        Poly d = deriv();
        double pw = 1.0;
        for (std::size_t i = 0; i < d.c.size(); ++i) {
            lip += std::abs(d.c[i]) * pw;
            pw *= std::max(1.0, m);
        }
        const int n = 2048;
        double h = (b - a) / n;
        double best = 0.0;
        for (int i = 0; i <= n; ++i) best = std::max(best, std::abs(eval(a + i * h)));
        return best + 0.5 * h * lip;
    }

    friend Poly operator*(const Poly& p, const Poly& q) {
        Poly r;
        r.c.assign(p.c.size() + q.c.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.c.size(); ++i)
            for (std::size_t j = 0; j < q.c.size(); ++j) r.c[i + j] += p.c[i] * q.c[j];
        return r;
    }
};

/// Near-vertical curve t -> (profile(t), t) with a polynomial horizontal
/// profile whose derivatives obey the cone bounds.
struct Curve {
    Poly profile;
    double t0 = -1.0, t1 = 1.0;
};

/// Test functions are polynomials on [-1,1] vanishing at the ends, stored
/// with unit normalization order so one family serves every derivative index
/// up to norm_order.
struct CurveFamily {
    std::vector<Curve> curves;
    std::vector<Poly> test_fns;  // on [-1,1]; scaled per curve at use time
    int norm_order = 2;
};

/// Deterministic default family: vertical and low-degree polynomial profiles
/// within the invariant cone (slope bound 1/alpha0), Chebyshev-weighted
/// polynomial bumps as test functions.
inline CurveFamily make_default_curve_family(const SystemParams& p, int n_curves = 64,
                                             int n_tests = 8, std::uint64_t seed = 17,
                                             int norm_order = -1) {
    CurveFamily fam;
    fam.norm_order = norm_order > 0 ? norm_order : p.r - 1;
    RngStream rng(seed, {0x63757276ULL});
    double slope = 1.0 / p.alpha0;
    for (int i = 0; i < n_curves; ++i) {
        Curve cv;
        double yspan = p.alpha0;
        double mid = rng.uniform(-0.5, 0.5) * yspan;
        double half = rng.uniform(0.2, 0.45) * yspan;
        cv.t0 = mid - half;
        cv.t1 = mid + half;
        double x0 = rng.uniform();
        if (i % 4 == 0) {
            cv.profile.c = {x0};  // vertical line
        } else {
            // Random cubic, rescaled so that each derivative obeys the bound
            // |d^k profile / dt^k| <= slope on [t0, t1].
            Poly raw;
            raw.c = {x0, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            double worst = 0.0;
            Poly d = raw.deriv();
            for (int k = 1; k <= 3; ++k) {
                worst = std::max(worst, d.sup_on(cv.t0, cv.t1) / slope);
                d = d.deriv();
            }
            cv.profile = raw;
            if (worst > 0.0)
                for (std::size_t j = 1; j < cv.profile.c.size(); ++j) cv.profile.c[j] /= worst;
        }
        fam.curves.push_back(cv);
    }
    // (1-u^2)^(norm_order+1) * T_j(u): smooth enough, vanishing at the ends.
    Poly window;
    window.c = {1.0};
    Poly base;
    base.c = {1.0, 0.0, -1.0};  // 1 - u^2
    for (int k = 0; k <= fam.norm_order; ++k) window = window * base;
    Poly t_prev, t_cur;
    t_prev.c = {1.0};
    t_cur.c = {0.0, 1.0};
    for (int j = 0; j < n_tests; ++j) {
        Poly cheb = (j == 0) ? t_prev : t_cur;
        if (j >= 1) {
            Poly two_u;
            two_u.c = {0.0, 2.0};
            Poly t_next = two_u * t_cur;
            for (std::size_t i = 0; i < t_prev.c.size(); ++i) t_next.c[i] -= t_prev.c[i];
            t_prev = t_cur;
            t_cur = t_next;
        }
        fam.test_fns.push_back(window * cheb);
    }
    return fam;
}

/// The h argument supplies exact partial derivatives: h(ax, ay, x, y).
using PartialsFn = std::function<double(int, int, double, double)>;

/// Lower bound of the curve-family norm: maximum over derivative indices
/// ax+ay <= rho, curves, and normalized test functions of
///   integral phi(t) * d^ax_x d^ay_y h(curve(t)) dt.
/// Any finite family only explores part of the defining supremum, so the
/// value is reported as a lower bound by construction.
inline double dagger_norm_surrogate(const PartialsFn& h, int rho, const CurveFamily& fam,
                                    int quad_points = 256) {
    if (rho < 0) throw std::invalid_argument("dagger_norm_surrogate: rho must be >= 0");
    double best = 0.0;
    for (const Curve& cv : fam.curves) {
        double len = cv.t1 - cv.t0;
        double u_scale = 2.0 / len;  // u in [-1,1] -> t
        for (const Poly& phi_unit : fam.test_fns) {
            // ||phi||_{C^k(t)} = max_j (u_scale)^j sup|phi_unit^(j)|; normalize
            // once at norm_order so the same phi works for all rho <= norm_order.
            double norm = 0.0;
            Poly d = phi_unit;
            double pw = 1.0;
            for (int k = 0; k <= fam.norm_order; ++k) {
                norm = std::max(norm, pw * d.sup_on(-1.0, 1.0));
                d = d.deriv();
                pw *= u_scale;
            }
            if (norm == 0.0) continue;
            for (int ax = 0; ax <= rho; ++ax) {
                for (int ay = 0; ax + ay <= rho; ++ay) {
                    double acc = 0.0;
                    double ht = len / quad_points;
                    for (int i = 0; i < quad_points; ++i) {
                        double t = cv.t0 + (i + 0.5) * ht;
                        double u = (t - cv.t0) * u_scale - 1.0;
                        acc += (phi_unit.eval(u) / norm) * h(ax, ay, cv.profile.eval(t), t);
                    }
                    best = std::max(best, std::abs(acc * ht));
                }
            }
        }
    }
    return best;
}

}  // namespace solenoid
