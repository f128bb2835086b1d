#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace solenoid {

/// Real trigonometric polynomial on the unit circle,
///   f(x) = c0 + sum_{j=1..K} ( c_j cos(2 pi j x) + s_j sin(2 pi j x) ).
///
/// Closed under differentiation, so derivatives of any order are exact and
/// sup-norms of all derivatives admit certified over-estimates. That is the
/// whole reason this class exists: every bound downstream (trapping region,
/// transversality thresholds, truncation tails) must be rigorous.
class TrigPoly {
  public:
    TrigPoly() : cos_(1, 0.0) {}

    /// cos_coeffs = [c0, c1, ..., cK], sin_coeffs = [s1, ..., sK].
    TrigPoly(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
        : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
        if (cos_.empty()) cos_.push_back(0.0);
        if (sin_.size() > cos_.size() - 1) cos_.resize(sin_.size() + 1, 0.0);
    }

    static TrigPoly zero() { return TrigPoly(); }

    static TrigPoly constant(double c) { return TrigPoly({c}, {}); }

    /// a * cos(2 pi j x) + b * sin(2 pi j x)
    static TrigPoly harmonic(int j, double a, double b) {
        if (j < 1) throw std::invalid_argument("harmonic: j must be >= 1");
        std::vector<double> c(static_cast<std::size_t>(j) + 1, 0.0);
        std::vector<double> s(static_cast<std::size_t>(j), 0.0);
        c[static_cast<std::size_t>(j)] = a;
        s[static_cast<std::size_t>(j) - 1] = b;
        return TrigPoly(std::move(c), std::move(s));
    }

    int degree() const { return static_cast<int>(cos_.size()) - 1; }

    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }

    bool is_zero() const {
        for (double c : cos_)
            if (c != 0.0) return false;
        for (double s : sin_)
            if (s != 0.0) return false;
        return true;
    }

    /// Evaluate at any real x; periodicity is automatic.
    double eval(double x) const {
        double acc = cos_[0];
        for (std::size_t j = 1; j < cos_.size(); ++j) {
            double w = 2.0 * std::numbers::pi * static_cast<double>(j) * x;
            acc += cos_[j] * std::cos(w);
            if (j - 1 < sin_.size()) acc += sin_[j - 1] * std::sin(w);
        }
        return acc;
    }

    double operator()(double x) const { return eval(x); }

    /// d/dx maps (c_j, s_j) -> (2 pi j s_j, -2 pi j c_j); constant term drops.
    TrigPoly derivative() const {
        std::vector<double> c(cos_.size(), 0.0);
        std::vector<double> s(cos_.size() - 1, 0.0);
        for (std::size_t j = 1; j < cos_.size(); ++j) {
            double w = 2.0 * std::numbers::pi * static_cast<double>(j);
            double sj = j - 1 < sin_.size() ? sin_[j - 1] : 0.0;
            c[j] = w * sj;
            s[j - 1] = -w * cos_[j];
        }
        return TrigPoly(std::move(c), std::move(s));
    }

    TrigPoly derivative(int order) const {
        if (order < 0) throw std::invalid_argument("derivative: negative order");
        TrigPoly d = *this;
        for (int k = 0; k < order; ++k) d = d.derivative();
        return d;
    }

    /// Certified bound on sup |f|: minimum of the amplitude sum
    /// |c0| + sum sqrt(c_j^2 + s_j^2) and dense sampling padded by a
    /// Lipschitz bound taken from the derivative's amplitude sum.
    double sup_bound() const {
        double amp = std::abs(cos_[0]);
        for (std::size_t j = 1; j < cos_.size(); ++j) {
            double sj = j - 1 < sin_.size() ? sin_[j - 1] : 0.0;
            amp += std::hypot(cos_[j], sj);
        }
        if (amp == 0.0) return 0.0;
        double lip = 0.0;  // sup|f'| <= sum 2 pi j * amplitude_j
        for (std::size_t j = 1; j < cos_.size(); ++j) {
            double sj = j - 1 < sin_.size() ? sin_[j - 1] : 0.0;
            lip += 2.0 * std::numbers::pi * static_cast<double>(j) * std::hypot(cos_[j], sj);
        }
        int n = 512 * (degree() + 1);
        double h = 1.0 / n;
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = std::abs(eval((i + 0.5) * h));
            if (v > m) m = v;
        }
        double sampled = m + 0.5 * h * lip;
        return sampled < amp ? sampled : amp;
    }

    /// Certified bound on max_{0<=k<=r} sup |f^(k)|.
    double cnorm_bound(int r) const {
        double b = 0.0;
        TrigPoly d = *this;
        for (int k = 0; k <= r; ++k) {
            double s = d.sup_bound();
            if (s > b) b = s;
            if (k < r) d = d.derivative();
        }
        return b;
    }

    TrigPoly scaled(double a) const {
        TrigPoly out = *this;
        for (double& c : out.cos_) c *= a;
        for (double& s : out.sin_) s *= a;
        return out;
    }

    friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
        std::vector<double> c(std::max(a.cos_.size(), b.cos_.size()), 0.0);
        std::vector<double> s(std::max(a.sin_.size(), b.sin_.size()), 0.0);
        for (std::size_t j = 0; j < a.cos_.size(); ++j) c[j] += a.cos_[j];
        for (std::size_t j = 0; j < b.cos_.size(); ++j) c[j] += b.cos_[j];
        for (std::size_t j = 0; j < a.sin_.size(); ++j) s[j] += a.sin_[j];
        for (std::size_t j = 0; j < b.sin_.size(); ++j) s[j] += b.sin_[j];
        return TrigPoly(std::move(c), std::move(s));
    }

  private:
    std::vector<double> cos_;  // c0..cK
    std::vector<double> sin_;  // s1..sK
};

}  // namespace solenoid
