#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "solenoid/branch.hpp"
#include "solenoid/io.hpp"
#include "solenoid/parallel.hpp"
#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"

namespace solenoid {

/// Affine family f_t = g + sum_i t_i phi_i over the parameter box [-1,1]^m.
struct ParameterFamily {
    TrigPoly g;
    std::vector<TrigPoly> phis;
    double d0 = 0.0;  // sum of certified C^r bounds of the phi_i

    int m() const { return static_cast<int>(phis.size()); }

    TrigPoly at(const std::vector<double>& t) const {
        if (static_cast<int>(t.size()) != m())
            throw std::invalid_argument("ParameterFamily: wrong parameter dimension");
        TrigPoly f = g;
        for (int j = 0; j < m(); ++j) f = f + phis[static_cast<std::size_t>(j)].scaled(t[static_cast<std::size_t>(j)]);
        return f;
    }

    /// Smallest kappa keeping the entire family inside the C^r ball:
    /// ||g||_{C^r} + D0.
    double admissible_kappa(int r) const { return g.cnorm_bound(r) + d0; }
};

/// The standard concrete candidate: phi_{2j-1} = cos(2 pi j x),
/// phi_{2j} = sin(2 pi j x), j = 1..m/2.
inline ParameterFamily make_fourier_family(TrigPoly g, int m, int r) {
    if (m < 1 || m % 2 != 0) throw std::invalid_argument("make_fourier_family: m must be positive and even");
    ParameterFamily fam;
    fam.g = std::move(g);
    for (int j = 1; 2 * j <= m; ++j) {
        fam.phis.push_back(TrigPoly::harmonic(j, 1.0, 0.0));
        fam.phis.push_back(TrigPoly::harmonic(j, 0.0, 1.0));
    }
    for (const TrigPoly& phi : fam.phis) fam.d0 += phi.cnorm_bound(r);
    return fam;
}

/// Truncated-infinite word: a finite stem continued by the fixed tail
/// 1,1,1,... and cut at `depth` with a certified tail bound.
struct TailWord {
    Word stem;
    int depth = 24;

    Word realized() const {
        Word w = stem;
        if (w.size() >= depth) return w.prefix(depth);
        w.symbols.resize(static_cast<std::size_t>(depth), 1);
        return w;
    }
};

struct BranchSequence {
    std::vector<TailWord> words;  // a_0, a_1, ..., a_k
    double x = 0.0;
};

/// Affine map t -> (d/dx S(x, a_i; t) - d/dx S(x, a_0; t))_{i=1..k}.
/// The branch sum is affine in t, so rows decompose into a g-driven offset
/// and one column per family function.
struct AffineMap {
    std::vector<std::vector<double>> lin;  // k rows, m columns
    std::vector<double> offset;            // k

    int k() const { return static_cast<int>(offset.size()); }
    int m() const { return lin.empty() ? 0 : static_cast<int>(lin[0].size()); }

    std::vector<double> apply(const std::vector<double>& t) const {
        std::vector<double> out(offset);
        for (std::size_t i = 0; i < lin.size(); ++i)
            for (std::size_t j = 0; j < lin[i].size(); ++j) out[i] += lin[i][j] * t[j];
        return out;
    }
};

namespace detail {

/// d/dx of the branch sum of `word` with the symbol function replaced by an
/// arbitrary trig polynomial.
inline double branch_deriv_for(const SystemParams& p, const TrigPoly& fn_deriv, const Word& word,
                               double x) {
    double z = x;
    double lam_pow = 1.0;
    double slope = 1.0;
    double acc = 0.0;
    for (Symbol s : word.symbols) {
        z = inverse_branch(p.lap, s, z);
        slope /= p.lap;
        acc += lam_pow * slope * fn_deriv.eval(z);
        lam_pow *= p.lambda;
    }
    return acc;
}

}  // namespace detail

/// Assemble the affine map for a branch sequence. `precision` guards the
/// certified truncation error of each entry: the per-function tail bound must
/// stay below it.
inline AffineMap g_matrix(const SystemParams& p, const ParameterFamily& fam,
                          const BranchSequence& seq, double precision = 1e-9) {
    if (seq.words.size() < 2) throw std::invalid_argument("g_matrix: need k >= 1 (two words)");
    const int k = static_cast<int>(seq.words.size()) - 1;
    const int m = fam.m();

    // Tail control: the discarded part of sum lambda^{i-1} lap^{-i} fn'(...)
    // is below lambda^depth sup|fn'| / (lap - lambda) for each function.
    for (const TailWord& tw : seq.words) {
        double worst = fam.g.derivative().sup_bound();
        for (const TrigPoly& phi : fam.phis)
            worst = std::max(worst, phi.derivative().sup_bound());
        double bound = std::pow(p.lambda, tw.depth) * worst / (p.lap - p.lambda);
        if (bound > precision)
            throw std::invalid_argument(
                "g_matrix: tail bound " + fmt_double(bound, 3) +
                " exceeds the requested precision; increase the word depth");
    }

    std::vector<TrigPoly> phi_derivs;
    phi_derivs.reserve(static_cast<std::size_t>(m));
    for (const TrigPoly& phi : fam.phis) phi_derivs.push_back(phi.derivative());
    TrigPoly g_deriv = fam.g.derivative();

    AffineMap gm;
    gm.lin.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(m), 0.0));
    gm.offset.assign(static_cast<std::size_t>(k), 0.0);

    Word base = seq.words[0].realized();
    double base_g = detail::branch_deriv_for(p, g_deriv, base, seq.x);
    std::vector<double> base_phi(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        base_phi[static_cast<std::size_t>(j)] =
            detail::branch_deriv_for(p, phi_derivs[static_cast<std::size_t>(j)], base, seq.x);

    for (int i = 1; i <= k; ++i) {
        Word w = seq.words[static_cast<std::size_t>(i)].realized();
        gm.offset[static_cast<std::size_t>(i - 1)] =
            detail::branch_deriv_for(p, g_deriv, w, seq.x) - base_g;
        for (int j = 0; j < m; ++j)
            gm.lin[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] =
                detail::branch_deriv_for(p, phi_derivs[static_cast<std::size_t>(j)], w, seq.x) -
                base_phi[static_cast<std::size_t>(j)];
    }
    return gm;
}

/// Jacobian of a surjective affine map onto R^k: the product of the singular
/// values of the linear part, sqrt(det(M M^T)). Zero when the rows are
/// dependent (the map is not surjective).
inline double jacobian(const std::vector<std::vector<double>>& m_rows) {
    const int k = static_cast<int>(m_rows.size());
    if (k == 0) return 1.0;
    const int m = static_cast<int>(m_rows[0].size());
    if (k > m) return 0.0;
    // Gram matrix and its Cholesky factor.
    std::vector<std::vector<double>> g(static_cast<std::size_t>(k),
                                       std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            double acc = 0.0;
            for (int c = 0; c < m; ++c)
                acc += m_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] *
                       m_rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
            g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
            g[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = acc;
        }
    double det_sqrt = 1.0;
    for (int i = 0; i < k; ++i) {
        double d = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
        for (int c = 0; c < i; ++c) {
            double l = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            d -= l * l;
        }
        if (d <= 0.0) return 0.0;
        double l_ii = std::sqrt(d);
        det_sqrt *= l_ii;
        g[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = l_ii;
        for (int r = i + 1; r < k; ++r) {
            double acc = g[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
            for (int c = 0; c < i; ++c)
                acc -= g[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] *
                       g[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
            g[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] = acc / l_ii;
        }
    }
    return det_sqrt;
}

inline double jacobian(const AffineMap& gm) { return jacobian(gm.lin); }

// ---------------------------------------------------------------------------
// Genericity search

struct GenericCheckResult {
    bool found = false;
    bool exhausted = false;  // full search completed without a witness
    std::vector<int> witness_indices;
    double witness_jacobian = 0.0;
    bool k_within_gamma_bound = true;  // k < gamma * d held on entry
    std::uint64_t combinations_tried = 0;
};

/// Search the (k+1)-subsequences of the supplied words for one whose affine
/// map has Jacobian above delta. Subsequences preserve index order and the
/// first element is the base word. Budget exhaustion is reported separately
/// from a definite negative.
inline GenericCheckResult generic_check(const SystemParams& p, const ParameterFamily& fam,
                                        int n, double x, const std::vector<TailWord>& words,
                                        int k, double gamma, double delta,
                                        std::uint64_t budget = 1'000'000) {
    const int d = static_cast<int>(words.size()) - 1;
    if (k < 1 || k > d) throw std::invalid_argument("generic_check: need 1 <= k <= d");
    for (std::size_t i = 0; i < words.size(); ++i)
        for (std::size_t j = i + 1; j < words.size(); ++j)
            if (words[i].realized().prefix(n) == words[j].realized().prefix(n))
                throw std::invalid_argument("generic_check: words must differ at prefix length n");

    GenericCheckResult res;
    res.k_within_gamma_bound = k < gamma * d;

    std::vector<int> idx(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) idx[static_cast<std::size_t>(i)] = i;
    bool more = true;
    while (more) {
        if (res.combinations_tried >= budget) {
            res.exhausted = false;
            return res;
        }
        ++res.combinations_tried;
        BranchSequence seq;
        seq.x = x;
        for (int i : idx) seq.words.push_back(words[static_cast<std::size_t>(i)]);
        double jac = jacobian(g_matrix(p, fam, seq, 1e-6));
        if (jac > delta) {
            res.found = true;
            res.witness_indices = idx;
            res.witness_jacobian = jac;
            return res;
        }
        // Next combination in lexicographic order.
        int pos = k;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == d - (k - pos)) --pos;
        if (pos < 0) {
            more = false;
        } else {
            ++idx[static_cast<std::size_t>(pos)];
            for (int i = pos + 1; i <= k; ++i)
                idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
        }
    }
    res.exhausted = true;
    return res;
}

// ---------------------------------------------------------------------------
// Bad parameter sets

/// p(q) = floor(q log(lap/lambda) / log(lap)) + 1.
inline int p_of_q(int lap, double lambda, int q) {
    return static_cast<int>(std::floor(q * std::log(lap / lambda) / std::log(double(lap)))) + 1;
}

struct CondqCheck {
    bool ok = false;
    bool cond_contraction = false;  // lambda^(N0-1) lap^2 < 1
    bool cond_budget = false;       // d0 / (n0 + 1) > N0 + 1
    bool cond_tail = false;         // (d0 + 1) exp(-beta n0 / 2) < 1/2
};

inline CondqCheck condq_check(double beta, int n0, int d0, int N0, double lambda, int lap) {
    CondqCheck c;
    c.cond_contraction = std::pow(lambda, N0 - 1) * lap * lap < 1.0;
    c.cond_budget = static_cast<double>(d0) / (n0 + 1) > N0 + 1;
    c.cond_tail = (d0 + 1) * std::exp(-beta * n0 / 2.0) < 0.5;
    c.ok = c.cond_contraction && c.cond_budget && c.cond_tail;
    return c;
}

struct CondqSuggestion {
    int N0 = 2, n0 = 1, d0 = 2;
};

/// Minimal constants satisfying the three inequalities for given beta.
inline CondqSuggestion condq_suggest(double beta, double lambda, int lap) {
    CondqSuggestion s;
    while (!(std::pow(lambda, s.N0 - 1) * lap * lap < 1.0)) ++s.N0;
    // d0 > (N0+1)(n0+1); pick n0 from the tail condition with that d0.
    for (s.n0 = 1;; ++s.n0) {
        s.d0 = (s.N0 + 1) * (s.n0 + 1) + 1;
        if ((s.d0 + 1) * std::exp(-beta * s.n0 / 2.0) < 0.5) break;
    }
    return s;
}

struct BadSetOptions {
    std::uint64_t pair_budget = 200'000;  // (sequence, interval) pairs
    std::uint64_t trials = 4096;          // Monte Carlo parameters
    double width_scale = 1.0;             // widens/narrows the target cube (tests)
    int tail_depth = 0;                   // 0 = derived from the width
    double jacobian_floor = 0.5;          // membership threshold for pairs
    int extra_x_samples = 0;              // extra anchor points per interval
    unsigned threads = 0;
};

struct WilsonInterval {
    double lo = 0.0, hi = 1.0;
};

inline WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n, double z = 1.959964) {
    if (n == 0) return {0.0, 1.0};
    double phat = static_cast<double>(hits) / static_cast<double>(n);
    double z2 = z * z;
    double denom = 1.0 + z2 / static_cast<double>(n);
    double center = phat + z2 / (2.0 * static_cast<double>(n));
    double rad = z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n) +
                               z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n)));
    return {(center - rad) / denom, (center + rad) / denom};
}

struct BadSetRow {
    int q = 0, p = 0, N0 = 0;
    double width = 0.0;  // 8 (lambda/lap)^q alpha0, scaled
    double estimate = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    std::uint64_t pairs_total = 0;      // size of the full enumeration
    std::uint64_t pairs_used = 0;       // enumerated or sampled
    std::uint64_t pairs_qualifying = 0; // Jacobian above the floor
    bool pairs_certified = true;        // full enumeration (vs sampled)
    std::uint64_t trials = 0;
    bool family_in_kappa_ball = true;   // kappa >= ||g|| + D0
};

/// Monte Carlo measure of the union of slab preimages: the fraction of
/// parameters t in [-1,1]^m for which some qualifying (sequence, interval)
/// pair maps t into the target cube of half-width 8 (lambda/lap)^q alpha0.
inline BadSetRow bad_set_measure(const SystemParams& p, const ParameterFamily& fam, int q,
                                 int N0, std::uint64_t seed, BadSetOptions opts = {}) {
    if (q < 1 || N0 < 1) throw std::invalid_argument("bad_set_measure: q, N0 must be >= 1");
    const int m = fam.m();
    const int pq = p_of_q(p.lap, p.lambda, q);
    BadSetRow row;
    row.q = q;
    row.p = pq;
    row.N0 = N0;
    row.width = 8.0 * std::pow(p.lambda / p.lap, q) * p.alpha0 * opts.width_scale;
    row.family_in_kappa_ball = p.kappa >= fam.admissible_kappa(p.r) - 1e-12;

    int depth = opts.tail_depth;
    if (depth <= 0) {
        double worst = fam.g.derivative().sup_bound();
        for (const TrigPoly& phi : fam.phis) worst = std::max(worst, phi.derivative().sup_bound());
        double target = 1e-3 * row.width / std::max(1.0, worst);
        depth = q + 1;
        while (depth < 500 && std::pow(p.lambda, depth) / (p.lap - p.lambda) > target) ++depth;
    }

    // Full enumeration size: lap^(q (N0+1) + p(q)). Computed in logs to spot
    // overflow; sampled (and flagged) when it exceeds the budget.
    double log_pairs =
        (static_cast<double>(q) * (N0 + 1) + pq) * std::log(static_cast<double>(p.lap));
    bool enumerate = log_pairs <= std::log(static_cast<double>(opts.pair_budget));
    const std::uint64_t n_words = pow_u64(p.lap, q);
    std::uint64_t total_pairs = 0;
    if (log_pairs < 62.0 * std::numbers::ln2) {
        total_pairs = 1;
        for (int i = 0; i < N0 + 1; ++i) total_pairs *= n_words;
        total_pairs *= pow_u64(p.lap, pq);
    }
    row.pairs_total = total_pairs;
    row.pairs_certified = enumerate;
    const std::uint64_t n_pairs = enumerate ? total_pairs : opts.pair_budget;
    row.pairs_used = n_pairs;

    // Qualifying pairs, flattened for the trial loop.
    struct FlatMap {
        std::vector<double> lin;     // k*m
        std::vector<double> offset;  // k
    };
    std::vector<FlatMap> flats;
    std::vector<std::vector<FlatMap>> flats_per_chunk;

    auto build_pair = [&](std::uint64_t code, RngStream* sampler,
                          std::vector<FlatMap>& sink) {
        BranchSequence seq;
        std::uint64_t c_index;
        if (sampler) {
            for (int i = 0; i <= N0; ++i) {
                TailWord tw;
                tw.stem = word_from_index(p.lap, q, sampler->below(n_words));
                tw.depth = depth;
                seq.words.push_back(tw);
            }
            c_index = sampler->below(pow_u64(p.lap, pq));
        } else {
            std::uint64_t rem = code;
            for (int i = 0; i <= N0; ++i) {
                TailWord tw;
                tw.stem = word_from_index(p.lap, q, rem % n_words);
                tw.depth = depth;
                rem /= n_words;
                seq.words.push_back(tw);
            }
            c_index = rem;
        }
        PartitionInterval pc = PartitionInterval::from_word(p.lap, word_from_index(p.lap, pq, c_index));
        RngStream xrng(seed, {0x78747261ULL, code});
        for (int a = 0; a <= opts.extra_x_samples; ++a) {
            seq.x = a == 0 ? pc.left : pc.left + xrng.uniform() * pc.width;
            AffineMap gm = g_matrix(p, fam, seq, 1e30);  // tails controlled by depth choice
            if (!(jacobian(gm) > opts.jacobian_floor)) continue;
            FlatMap fm;
            fm.offset = gm.offset;
            fm.lin.reserve(static_cast<std::size_t>(gm.k()) * m);
            for (const auto& r : gm.lin) fm.lin.insert(fm.lin.end(), r.begin(), r.end());
            sink.push_back(std::move(fm));
        }
    };

    const unsigned threads = effective_threads(opts.threads);
    const std::uint64_t chunk = (n_pairs + threads - 1) / threads;
    flats_per_chunk.assign(threads, {});
    parallel_for(threads, threads, [&](std::size_t tid) {
        std::uint64_t lo = static_cast<std::uint64_t>(tid) * chunk;
        std::uint64_t hi = std::min(lo + chunk, n_pairs);
        RngStream sampler(seed, {0x70616972ULL, tid});
        for (std::uint64_t i = lo; i < hi; ++i)
            build_pair(i, enumerate ? nullptr : &sampler, flats_per_chunk[tid]);
    });
    for (auto& part : flats_per_chunk)
        for (auto& fm : part) flats.push_back(std::move(fm));
    row.pairs_qualifying = flats.size();

    // Monte Carlo over the parameter box, per-trial keyed streams.
    row.trials = opts.trials;
    std::vector<std::uint8_t> hit(opts.trials, 0);
    parallel_for(opts.trials, opts.threads, [&](std::size_t trial) {
        RngStream rng(seed, {0x74726961ULL, trial});
        std::vector<double> t(static_cast<std::size_t>(m));
        for (auto& v : t) v = rng.uniform(-1.0, 1.0);
        for (const FlatMap& fm : flats) {
            bool inside = true;
            const std::size_t k = fm.offset.size();
            for (std::size_t i = 0; i < k && inside; ++i) {
                double acc = fm.offset[i];
                const double* lrow = fm.lin.data() + i * static_cast<std::size_t>(m);
                for (int j = 0; j < m; ++j) acc += lrow[j] * t[static_cast<std::size_t>(j)];
                inside = std::abs(acc) <= row.width;
            }
            if (inside) {
                hit[trial] = 1;
                break;
            }
        }
    });
    std::uint64_t hits = 0;
    for (std::uint8_t h : hit) hits += h;
    row.estimate = static_cast<double>(hits) / static_cast<double>(opts.trials);
    WilsonInterval wi = wilson_interval(hits, opts.trials);
    row.ci_lo = wi.lo;
    row.ci_hi = wi.hi;
    return row;
}

}  // namespace solenoid
