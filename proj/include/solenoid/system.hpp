#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "solenoid/trig_poly.hpp"
#include "solenoid/words.hpp"

namespace solenoid {

/// The cylinder map T(x,y) = (lap*x mod 1, lambda*y + f(x)) together with the
/// constants that certify its hyperbolic bookkeeping:
///   kappa  >= max_{k<=r} sup|f^(k)|   (so all derivative bounds below hold)
///   alpha0  = kappa / (1 - lambda)    (fiber trapping: |y| <= alpha0 invariant)
struct SystemParams {
    int lap = 2;
    double lambda = 0.5;
    TrigPoly f;
    int r = 3;
    double s = 0.0;
    double kappa = 1.0;
    double alpha0 = 2.0;

    // f, f', ..., f^(r); exact trig-polynomial derivatives.
    std::vector<TrigPoly> f_derivs;

    const TrigPoly& deriv(int nu) const {
        if (nu < 0 || nu > r) throw std::invalid_argument("derivative order outside [0,r]");
        return f_derivs[static_cast<std::size_t>(nu)];
    }

    /// Half-height of the default density grid: alpha0 plus a 1% margin.
    double grid_ybound() const { return 1.01 * alpha0; }

    /// Tight forward-invariant fiber bound sup|f|/(1-lambda). Useful when the
    /// C^r-driven alpha0 is far larger than the attractor.
    double effective_trap() const { return f.sup_bound() / (1.0 - lambda); }

    /// Transversality threshold 2 lambda^q lap^-q alpha0.
    double theta(int q) const {
        return 2.0 * std::pow(lambda / lap, q) * alpha0;
    }

    /// Regularity regime indicator lambda^(1+2s) * lap.
    double regime_product() const { return std::pow(lambda, 1.0 + 2.0 * s) * lap; }
};

inline SystemParams make_system(int lap, double lambda, TrigPoly f, int r, double s,
                                std::optional<double> kappa = std::nullopt) {
    if (lap < 2) throw std::invalid_argument("lap must be an integer >= 2");
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0,1)");
    if (r < 3) throw std::invalid_argument("r must be an integer >= 3");
    if (s < 0.0) throw std::invalid_argument("s must be >= 0");

    SystemParams p;
    p.lap = lap;
    p.lambda = lambda;
    p.f = std::move(f);
    p.r = r;
    p.s = s;

    double bound = p.f.cnorm_bound(r);
    if (kappa) {
        if (*kappa < bound)
            throw std::invalid_argument("kappa below the certified C^r bound of f");
        if (*kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
        p.kappa = *kappa;
    } else {
        if (bound <= 0.0)
            throw std::invalid_argument("f == 0 has no default kappa; supply one explicitly");
        p.kappa = 1.0001 * bound;
    }
    p.alpha0 = p.kappa / (1.0 - lambda);

    p.f_derivs.reserve(static_cast<std::size_t>(r) + 1);
    TrigPoly d = p.f;
    for (int k = 0; k <= r; ++k) {
        p.f_derivs.push_back(d);
        if (k < r) d = d.derivative();
    }
    return p;
}

/// One step of the map. Total on the cylinder; maps the trapping region into
/// itself since |lambda*y + f(x)| <= lambda*alpha0 + kappa = alpha0.
inline std::pair<double, double> step(const SystemParams& p, double x, double y) {
    return {wrap01(p.lap * x), p.lambda * y + p.f.eval(x)};
}

inline void require_sobolev_range(const SystemParams& p) {
    if (!(p.s >= 0.0 && p.s < p.r - 2))
        throw std::invalid_argument("Sobolev exponent requires 0 <= s < r - 2");
}

}  // namespace solenoid
