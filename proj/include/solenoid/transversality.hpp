#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "solenoid/branch.hpp"
#include "solenoid/parallel.hpp"
#include "solenoid/rng.hpp"
#include "solenoid/system.hpp"

namespace solenoid {

enum class Verdict { Transversal, NotTransversal, Unknown };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Transversal: return "transversal";
        case Verdict::NotTransversal: return "not_transversal";
        default: return "unknown";
    }
}

/// Three-valued certified verdict for a pair of words on an enlarged
/// interval. Transversal and NotTransversal are rigorous; Unknown means the
/// grid plus Lipschitz padding could not decide at the deepest refinement.
struct PairVerdict {
    Word a, b, c;
    Verdict status = Verdict::Unknown;
    double margin = 0.0;     // certified distance to the threshold (>=0 when decided)
    double grid_step = 0.0;  // step at which the verdict was reached
    std::optional<std::pair<double, double>> witness;  // (x,y) for NotTransversal
};

struct PairCheckOptions {
    double grid_step = 0.0;  // 0 = default theta / (8 alpha0 lap^-2)
    int max_refine = 4;      // halvings applied while the verdict is Unknown
};

inline double default_grid_step(const SystemParams& p, int q) {
    // Padding 2 alpha0 lap^-2 h equals theta/4 at this step.
    return p.theta(q) / (8.0 * p.alpha0 / (static_cast<double>(p.lap) * p.lap));
}

namespace detail {

/// Derivative profiles of all length-q words over one enlarged interval,
/// cached per refinement level. Level k inserts midpoints into level k-1, so
/// grids are nested and certified verdicts can only sharpen under refinement.
class ProfileTable {
  public:
    ProfileTable(const SystemParams& p, const Word& c, int q, double h0)
        : params_(&p), c_(c), q_(q) {
        PartitionInterval star = PartitionInterval::from_word(p.lap, c, true);
        lo_ = star.star_left();
        hi_ = star.star_right();
        double width = hi_ - lo_;
        int cells = std::max(2, static_cast<int>(std::ceil(width / h0)));
        if (cells > (1 << 22)) cells = 1 << 22;
        base_cells_ = cells;
    }

    double step(int level) const {
        return (hi_ - lo_) / static_cast<double>(cells(level));
    }

    /// Sorted derivative values of S_c(., a) on the level grid.
    const std::vector<double>& sorted_profile(std::uint64_t a_index, int level) {
        auto key = std::make_pair(a_index, level);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Word a = word_from_index(params_->lap, q_, a_index);
        BranchExtension ext(*params_, c_, a);
        int n = cells(level) + 1;
        std::vector<double> u(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double x = lo_ + (hi_ - lo_) * static_cast<double>(i) / (n - 1);
            u[static_cast<std::size_t>(i)] = ext.eval_lifted(x, 1);
        }
        std::sort(u.begin(), u.end());
        return cache_.emplace(key, std::move(u)).first->second;
    }

    /// Unsorted profile (for witness reporting).
    std::vector<double> raw_profile(std::uint64_t a_index, int level) const {
        Word a = word_from_index(params_->lap, q_, a_index);
        BranchExtension ext(*params_, c_, a);
        int n = cells(level) + 1;
        std::vector<double> u(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double x = lo_ + (hi_ - lo_) * static_cast<double>(i) / (n - 1);
            u[static_cast<std::size_t>(i)] = ext.eval_lifted(x, 1);
        }
        return u;
    }

    double grid_x(int i, int level) const {
        int n = cells(level) + 1;
        return lo_ + (hi_ - lo_) * static_cast<double>(i) / (n - 1);
    }

  private:
    int cells(int level) const { return base_cells_ << level; }

    const SystemParams* params_;
    Word c_;
    int q_;
    double lo_ = 0.0, hi_ = 1.0;
    int base_cells_ = 2;
    std::map<std::pair<std::uint64_t, int>, std::vector<double>> cache_;
};

inline double min_abs_gap(const std::vector<double>& u, const std::vector<double>& v) {
    double best = std::abs(u.front() - v.front());
    std::size_t i = 0, j = 0;
    while (i < u.size() && j < v.size()) {
        double d = std::abs(u[i] - v[j]);
        if (d < best) best = d;
        if (u[i] < v[j])
            ++i;
        else
            ++j;
    }
    return best;
}

/// Decide one pair from cached profiles; refines while Unknown.
inline PairVerdict decide_pair(const SystemParams& p, ProfileTable& table, const Word& c,
                               std::uint64_t ai, std::uint64_t bi, int q, int max_refine) {
    const double theta = p.theta(q);
    const double lip = 2.0 * p.alpha0 / (static_cast<double>(p.lap) * p.lap);
    PairVerdict out;
    out.a = word_from_index(p.lap, q, ai);
    out.b = word_from_index(p.lap, q, bi);
    out.c = c;
    for (int level = 0; level <= max_refine; ++level) {
        double h = table.step(level);
        double gap = min_abs_gap(table.sorted_profile(ai, level), table.sorted_profile(bi, level));
        out.grid_step = h;
        if (gap <= theta) {
            out.status = Verdict::NotTransversal;
            out.margin = theta - gap;
            // Recover one witnessing grid pair.
            auto ua = table.raw_profile(ai, level);
            auto ub = table.raw_profile(bi, level);
            for (std::size_t i = 0; i < ua.size() && !out.witness; ++i)
                for (std::size_t j = 0; j < ub.size(); ++j)
                    if (std::abs(ua[i] - ub[j]) <= theta) {
                        out.witness = std::make_pair(table.grid_x(static_cast<int>(i), level),
                                                     table.grid_x(static_cast<int>(j), level));
                        break;
                    }
            return out;
        }
        if (gap - lip * h > theta) {
            out.status = Verdict::Transversal;
            out.margin = gap - lip * h - theta;
            return out;
        }
    }
    out.status = Verdict::Unknown;
    out.margin = 0.0;
    return out;
}

}  // namespace detail

inline PairVerdict pair_check(const SystemParams& p, const Word& a, const Word& b,
                              const Word& c, PairCheckOptions opts = {}) {
    if (a.size() != b.size()) throw std::invalid_argument("pair_check: |a| != |b|");
    int q = a.size();
    double h0 = opts.grid_step > 0.0 ? opts.grid_step : default_grid_step(p, q);
    detail::ProfileTable table(p, c, q, h0);
    return detail::decide_pair(p, table, c, word_index(p.lap, a), word_index(p.lap, b), q,
                               opts.max_refine);
}

struct EnumerationOptions {
    double grid_step = 0.0;
    int max_refine = 4;
    std::uint64_t triple_budget = 10'000'000;  // (c,a,b) triples
    std::uint64_t seed = 1;                    // for interval sampling over budget
    unsigned threads = 0;
};

/// Bracket for the transversality count at word lengths (q, p):
/// e_lower counts certified failures, e_upper adds the undecided pairs, both
/// maximized over (interval, first word). `certified` drops when the interval
/// enumeration had to be sampled.
struct EqpReport {
    int q = 0, p = 0;
    long long e_lower = 0, e_upper = 0;
    bool certified = true;
    std::uint64_t triples_checked = 0;
    std::uint64_t intervals_checked = 0;
    std::uint64_t unknown_pairs = 0;
};

inline EqpReport e_qp(const SystemParams& p, int q, int pp, EnumerationOptions opts = {}) {
    if (q < 1 || pp < 1) throw std::invalid_argument("e_qp: q and p must be >= 1");
    const std::uint64_t nq = pow_u64(p.lap, q);
    const std::uint64_t nc = pow_u64(p.lap, pp);
    const double h0 = opts.grid_step > 0.0 ? opts.grid_step : default_grid_step(p, q);

    // Triples per interval: all ordered (a,b) pairs.
    const std::uint64_t per_c = nq * nq;
    std::vector<std::uint64_t> c_indices;
    bool certified = true;
    if (per_c > opts.triple_budget) throw std::invalid_argument("e_qp: budget below one interval");
    std::uint64_t max_c = opts.triple_budget / per_c;
    if (nc <= max_c) {
        c_indices.resize(nc);
        for (std::uint64_t i = 0; i < nc; ++i) c_indices[i] = i;
    } else {
        // Sample intervals deterministically; the result is flagged as a
        // non-certified estimate.
        certified = false;
        RngStream rng(opts.seed, {0x65717063ULL});
        c_indices.resize(max_c);
        for (auto& ci : c_indices) ci = rng.below(nc);
        std::sort(c_indices.begin(), c_indices.end());
        c_indices.erase(std::unique(c_indices.begin(), c_indices.end()), c_indices.end());
    }

    struct PerC {
        long long lower = 0, upper = 0;
        std::uint64_t unknowns = 0, triples = 0;
    };
    std::vector<PerC> partial(c_indices.size());

    parallel_for(c_indices.size(), opts.threads, [&](std::size_t idx) {
        Word c = word_from_index(p.lap, pp, c_indices[idx]);
        detail::ProfileTable table(p, c, q, h0);
        PerC acc;
        for (std::uint64_t ai = 0; ai < nq; ++ai) {
            long long lower = 0, upper = 0;
            for (std::uint64_t bi = 0; bi < nq; ++bi) {
                PairVerdict v = detail::decide_pair(p, table, c, ai, bi, q, opts.max_refine);
                ++acc.triples;
                if (v.status == Verdict::NotTransversal) {
                    ++lower;
                    ++upper;
                } else if (v.status == Verdict::Unknown) {
                    ++upper;
                    ++acc.unknowns;
                }
            }
            acc.lower = std::max(acc.lower, lower);
            acc.upper = std::max(acc.upper, upper);
        }
        partial[idx] = acc;
    });

    EqpReport rep;
    rep.q = q;
    rep.p = pp;
    rep.certified = certified;
    for (const PerC& pc : partial) {
        rep.e_lower = std::max(rep.e_lower, pc.lower);
        rep.e_upper = std::max(rep.e_upper, pc.upper);
        rep.unknown_pairs += pc.unknowns;
        rep.triples_checked += pc.triples;
    }
    rep.intervals_checked = c_indices.size();
    return rep;
}

/// Stabilized estimate of the limiting count: runs e_qp for p = 1..p_max and
/// stops once the bracket repeats for two consecutive p.
struct EqReport {
    int q = 0;
    bool stabilized = false;
    std::vector<EqpReport> history;
    const EqpReport& last() const { return history.back(); }
};

inline EqReport e_q_stabilized(const SystemParams& p, int q, int p_max,
                               EnumerationOptions opts = {}) {
    if (p_max < 2) throw std::invalid_argument("e_q_stabilized: p_max must be >= 2");
    EqReport rep;
    rep.q = q;
    for (int pp = 1; pp <= p_max; ++pp) {
        rep.history.push_back(e_qp(p, q, pp, opts));
        std::size_t n = rep.history.size();
        if (n >= 2) {
            const auto& prev = rep.history[n - 2];
            const auto& cur = rep.history[n - 1];
            if (prev.e_lower == cur.e_lower && prev.e_upper == cur.e_upper) {
                rep.stabilized = true;
                break;
            }
        }
    }
    return rep;
}

/// One row of the growth table reported per q.
struct TransversalityRow {
    int q = 0, p = 0;
    long long e_lower = 0, e_upper = 0;
    bool stabilized = false;
    bool certified = true;
    double criterion = 0.0;   // e_upper / (lambda^(1+2s) lap)^q
    double growth_log = 0.0;  // (1/q) log e_upper
};

inline TransversalityRow row_from(const SystemParams& p, const EqReport& er) {
    TransversalityRow row;
    const EqpReport& last = er.last();
    row.q = er.q;
    row.p = last.p;
    row.e_lower = last.e_lower;
    row.e_upper = last.e_upper;
    row.stabilized = er.stabilized;
    row.certified = last.certified;
    row.criterion = static_cast<double>(last.e_upper) / std::pow(p.regime_product(), er.q);
    row.growth_log = last.e_upper > 0
                         ? std::log(static_cast<double>(last.e_upper)) / static_cast<double>(er.q)
                         : -std::numeric_limits<double>::infinity();
    return row;
}

inline std::vector<TransversalityRow> transversality_sweep(const SystemParams& p, int q_max,
                                                           int p_max,
                                                           EnumerationOptions opts = {}) {
    std::vector<TransversalityRow> rows;
    for (int q = 1; q <= q_max; ++q)
        rows.push_back(row_from(p, e_q_stabilized(p, q, p_max, opts)));
    return rows;
}

}  // namespace solenoid
