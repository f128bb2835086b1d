#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "solenoid/system.hpp"
#include "solenoid/words.hpp"

namespace solenoid {

/// nu-th x-derivative of the branch sum
///   S(x,a) = sum_{i=1..n} lambda^{i-1} f(z_i(x)),  z_i = branch point of the
/// length-i prefix of a. Each z_i depends on x with slope lap^{-i}, so
///   S^(nu)(x,a) = sum lambda^{i-1} lap^{-i nu} f^(nu)(z_i(x)).
/// Satisfies the certified bound lap^nu |S^(nu)| <= alpha0.
inline double branch_sum_deriv(const SystemParams& p, const Word& a, double x, int nu) {
    if (nu < 0 || nu > p.r) throw std::invalid_argument("branch_sum_deriv: order outside [0,r]");
    const TrigPoly& fnu = p.deriv(nu);
    double z = x;
    double lam_pow = 1.0;
    double contraction = std::pow(static_cast<double>(p.lap), -nu);
    double scale = 1.0;
    double acc = 0.0;
    for (Symbol s : a.symbols) {
        z = inverse_branch(p.lap, s, z);
        scale *= contraction;
        acc += lam_pow * scale * fnu.eval(z);
        lam_pow *= p.lambda;
    }
    return acc;
}

inline double branch_sum(const SystemParams& p, const Word& a, double x) {
    return branch_sum_deriv(p, a, x, 0);
}

/// Certified bound on the truncation error of S^(nu)(x, a) when an infinite
/// word is cut at `depth`: the geometric tail sum lambda^depth alpha0 lap^-nu.
inline double tail_bound(const SystemParams& p, int depth, int nu) {
    if (depth < 1) throw std::invalid_argument("tail_bound: depth must be >= 1");
    return std::pow(p.lambda, depth) * p.alpha0 * std::pow(static_cast<double>(p.lap), -nu);
}

/// Truncate an infinite word (given by a finite stem continued with the fixed
/// tail symbol 1,1,1,...) at `depth` and report the rigorous error bound for
/// the nu-th derivative of its branch sum.
inline std::pair<Word, double> tail_truncate(const SystemParams& p, const Word& stem,
                                             int depth, int nu) {
    if (depth < 1) throw std::invalid_argument("tail_truncate: depth must be >= 1");
    Word w = stem;
    if (w.size() > depth) {
        w = w.prefix(depth);
    } else {
        w.symbols.resize(static_cast<std::size_t>(depth), 1);
    }
    return {std::move(w), tail_bound(p, depth, nu)};
}

/// Smallest depth whose tail bound (at derivative order nu) is below `target`.
inline int depth_for_tail(const SystemParams& p, int nu, double target, int max_depth = 4000) {
    for (int n = 1; n <= max_depth; ++n)
        if (tail_bound(p, n, nu) < target) return n;
    return max_depth;
}

/// The C^r extension S_c(.,a) of a branch sum over the starred enlargement of
/// the interval coded by c. The i-th inverse-branch chain is pinned at the
/// left endpoint x_c and continued affinely with slope lap^{-i} across the
/// enlargement, so the extension never wraps at the seam of the circle even
/// when the raw branch sum does.
class BranchExtension {
  public:
    BranchExtension(const SystemParams& p, const Word& c, const Word& a)
        : params_(&p), star_(PartitionInterval::from_word(p.lap, c, true)) {
        check_symbols(p.lap, a);
        anchors_.reserve(a.symbols.size());
        double z = star_.left;
        for (Symbol s : a.symbols) {
            z = inverse_branch(p.lap, s, z);
            anchors_.push_back(z);
        }
    }

    const PartitionInterval& star() const { return star_; }

    /// Evaluate the nu-th derivative at a point of the closed enlargement.
    /// Accepts either lifted coordinates or circle points (shifted as needed);
    /// rejects anything outside the closure.
    double eval(double x, int nu) const {
        auto lifted = star_.lift_into_star(x);
        if (!lifted) throw std::invalid_argument("branch extension: x outside the enlargement");
        return eval_lifted(*lifted, nu);
    }

    /// Same, for x already in the closed lift interval (no membership search).
    double eval_lifted(double x, int nu) const {
        const SystemParams& p = *params_;
        const TrigPoly& fnu = p.deriv(nu);
        double dx = x - star_.left;
        double lam_pow = 1.0;
        double slope = 1.0;
        double contraction = std::pow(static_cast<double>(p.lap), -nu);
        double scale = 1.0;
        double acc = 0.0;
        for (double anchor : anchors_) {
            slope /= p.lap;
            scale *= contraction;
            acc += lam_pow * scale * fnu.eval(anchor + slope * dx);
            lam_pow *= p.lambda;
        }
        return acc;
    }

  private:
    const SystemParams* params_;
    PartitionInterval star_;
    std::vector<double> anchors_;  // branch chain pinned at x_c
};

/// Convenience wrapper matching the one-shot call pattern.
inline double branch_sum_ext(const SystemParams& p, const Word& c, const Word& a,
                             double x, int nu) {
    return BranchExtension(p, c, a).eval(x, nu);
}

}  // namespace solenoid
