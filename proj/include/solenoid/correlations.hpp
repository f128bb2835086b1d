#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"

namespace solenoid {

struct Observable {
    std::string name;
    std::function<double(double, double)> fn;
};

/// Smooth compactly supported bump in y times a harmonic in x.
inline Observable harmonic_observable(int j, double ybound, std::string name = "") {
    if (name.empty()) name = "cos" + std::to_string(j);
    double half = 0.95 * ybound;
    return Observable{std::move(name), [j, half](double x, double y) {
                          double u = y / half;
                          if (std::abs(u) >= 1.0) return 0.0;
                          return std::cos(2.0 * std::numbers::pi * j * x) *
                                 std::exp(-1.0 / (1.0 - u * u));
                      }};
}

/// Odd fiber observable u * bump(u); picks up the slow contraction mode.
inline Observable fiber_observable(double ybound, std::string name = "ylin") {
    double half = 0.95 * ybound;
    return Observable{std::move(name), [half](double, double y) {
                          double u = y / half;
                          if (std::abs(u) >= 1.0) return 0.0;
                          return u * std::exp(-1.0 / (1.0 - u * u));
                      }};
}

/// Even fiber observable bump(u).
inline Observable bump_observable(double ybound, std::string name = "ybump") {
    double half = 0.95 * ybound;
    return Observable{std::move(name), [half](double, double y) {
                          double u = y / half;
                          if (std::abs(u) >= 1.0) return 0.0;
                          return std::exp(-1.0 / (1.0 - u * u));
                      }};
}

struct CorrelationOptions {
    int n_max = 30;
    std::uint64_t orbit_len = 1'000'000;
    std::uint64_t burn_in = 1000;
    std::uint64_t seed = 1;
    double ybound = 0.0;      // start box half-height; 0 = alpha0
    int min_fit_points = 5;
    double noise_factor = 3.0;
};

struct CorrelationResult {
    std::string name;
    std::vector<double> corr;  // C_0 .. C_n_max
    double rate = 0.0;         // fitted |C_n| ~ exp(rate * n), rate < 0
    double rate_per_step = 0.0;  // exp(rate): comparable to an eigenvalue modulus
    int fit_lo = 0, fit_hi = 0;
    double noise_floor = 0.0;
    bool noise_flag = false;  // the signal died before a usable fit window
};

/// Autocorrelations C_n(phi, phi) = <phi(T^n x) phi(x)> - <phi>^2 along one
/// long seeded orbit, with a log-linear fit over the pre-noise range.
inline std::vector<CorrelationResult> correlation_decay(const SystemParams& p,
                                                        const std::vector<Observable>& obs,
                                                        CorrelationOptions opts = {}) {
    double yb = opts.ybound > 0.0 ? opts.ybound : p.alpha0;
    const int n_max = opts.n_max;
    const std::size_t nobs = obs.size();

    RngStream rng(opts.seed, {0x636f7272ULL});
    double x = rng.uniform();
    double y = rng.uniform(-yb, yb);
    for (std::uint64_t n = 0; n < opts.burn_in; ++n) {
        auto [x1, y1] = step(p, x, y);
        x = x1;
        y = y1;
    }

    // Ring buffer of observable values for lagged products.
    std::vector<std::vector<double>> ring(nobs,
                                          std::vector<double>(static_cast<std::size_t>(n_max) + 1));
    std::vector<std::vector<double>> lag_sums(nobs,
                                              std::vector<double>(static_cast<std::size_t>(n_max) + 1, 0.0));
    std::vector<double> mean_sums(nobs, 0.0);
    std::vector<std::vector<std::uint64_t>> lag_counts(
        nobs, std::vector<std::uint64_t>(static_cast<std::size_t>(n_max) + 1, 0));

    for (std::uint64_t t = 0; t < opts.orbit_len; ++t) {
        std::size_t slot = static_cast<std::size_t>(t % (static_cast<std::uint64_t>(n_max) + 1));
        for (std::size_t o = 0; o < nobs; ++o) {
            double v = obs[o].fn(x, y);
            ring[o][slot] = v;
            mean_sums[o] += v;
            // v is phi(T^t); pair with phi(T^{t-n}) stored n slots back.
            std::uint64_t lags = t < static_cast<std::uint64_t>(n_max) ? t : static_cast<std::uint64_t>(n_max);
            for (std::uint64_t n = 0; n <= lags; ++n) {
                std::size_t past =
                    static_cast<std::size_t>((t - n) % (static_cast<std::uint64_t>(n_max) + 1));
                lag_sums[o][static_cast<std::size_t>(n)] += v * ring[o][past];
                ++lag_counts[o][static_cast<std::size_t>(n)];
            }
        }
        auto [x1, y1] = step(p, x, y);
        x = x1;
        y = y1;
    }

    std::vector<CorrelationResult> out;
    out.reserve(nobs);
    for (std::size_t o = 0; o < nobs; ++o) {
        CorrelationResult res;
        res.name = obs[o].name;
        double mean = mean_sums[o] / static_cast<double>(opts.orbit_len);
        res.corr.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n) {
            auto idx = static_cast<std::size_t>(n);
            res.corr[idx] = lag_sums[o][idx] / static_cast<double>(lag_counts[o][idx]) - mean * mean;
        }
        // Noise floor from the deep tail of the lag table.
        double floor_acc = 0.0;
        int floor_cnt = 0;
        for (int n = n_max - 4; n <= n_max; ++n) {
            floor_acc += std::abs(res.corr[static_cast<std::size_t>(n)]);
            ++floor_cnt;
        }
        res.noise_floor = floor_acc / floor_cnt;

        int hi = 1;
        while (hi <= n_max &&
               std::abs(res.corr[static_cast<std::size_t>(hi)]) >
                   opts.noise_factor * res.noise_floor)
            ++hi;
        res.fit_lo = 1;
        res.fit_hi = hi - 1;
        int span = res.fit_hi - res.fit_lo + 1;
        if (span < opts.min_fit_points) {
            res.noise_flag = true;
        } else {
            // Least squares on (n, log|C_n|).
            double sn = 0, sl = 0, snn = 0, snl = 0;
            for (int n = res.fit_lo; n <= res.fit_hi; ++n) {
                double l = std::log(std::abs(res.corr[static_cast<std::size_t>(n)]));
                sn += n;
                sl += l;
                snn += static_cast<double>(n) * n;
                snl += n * l;
            }
            double k = static_cast<double>(span);
            res.rate = (k * snl - sn * sl) / (k * snn - sn * sn);
            res.rate_per_step = std::exp(res.rate);
        }
        out.push_back(std::move(res));
    }
    return out;
}

/// Growth-rate reference value sqrt(e_upper(q)^(1/q) / (lambda^(1+2s) lap)).
/// Reported with the non-constructive prefactor set to one; a reference
/// number for comparisons, not a bound.
inline double gamma_reference(const SystemParams& p, long long e_upper, int q) {
    return std::sqrt(std::pow(static_cast<double>(e_upper), 1.0 / q) / p.regime_product());
}

/// Norm-index metadata attached to spectral reports: the smallest rho0 with
/// s < rho0 - 1, the largest rho1 with rho1 < s - 1/2 (when s > 1/2), and
/// nu = sum_{j=rho1+1..rho0} 1/j.
struct NormIndices {
    int rho0 = 0;
    std::optional<int> rho1;
    std::optional<double> nu;
};

inline NormIndices norm_indices(double s) {
    NormIndices ni;
    ni.rho0 = static_cast<int>(std::floor(s + 1.0)) + 1;
    while (!(s < ni.rho0 - 1)) ++ni.rho0;
    if (s > 0.5) {
        double t = s - 0.5;
        int r1 = static_cast<int>(std::ceil(t)) - 1;
        if (std::floor(t) == t) r1 = static_cast<int>(t) - 1;
        if (r1 >= 0) {
            ni.rho1 = r1;
            double acc = 0.0;
            for (int j = r1 + 1; j <= ni.rho0; ++j) acc += 1.0 / j;
            ni.nu = acc;
        }
    }
    return ni;
}

}  // namespace solenoid
