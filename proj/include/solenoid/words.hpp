#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace solenoid {

/// Reduce a real number to the circle [0,1).
inline double wrap01(double x) {
    double y = x - std::floor(x);
    return y < 1.0 ? y : 0.0;
}

using Symbol = int;  // 1..lap

/// Finite word over {1,...,lap} indexing an inverse branch of x -> lap*x.
/// The symbol order is the reverse of the itinerary: a point of the interval
/// coded by (a_1,...,a_n) sits in interval a_n, its image in a_{n-1}, and so
/// on. Equivalently the branch point is built by applying the inverse branch
/// for a_1 first and a_n last.
struct Word {
    std::vector<Symbol> symbols;

    Word() = default;
    explicit Word(std::vector<Symbol> s) : symbols(std::move(s)) {}

    int size() const { return static_cast<int>(symbols.size()); }
    bool empty() const { return symbols.empty(); }
    Symbol operator[](int i) const { return symbols[static_cast<std::size_t>(i)]; }

    Word prefix(int n) const {
        return Word(std::vector<Symbol>(symbols.begin(), symbols.begin() + n));
    }

    bool operator==(const Word& o) const { return symbols == o.symbols; }

    std::string str() const {
        std::string s;
        for (Symbol a : symbols) {
            if (!s.empty()) s.push_back('.');
            s += std::to_string(a);
        }
        return s.empty() ? "-" : s;
    }
};

inline void check_symbols(int lap, const Word& w) {
    for (Symbol a : w.symbols)
        if (a < 1 || a > lap) throw std::invalid_argument("word symbol out of range");
}

/// The branch of the inverse of x -> lap*x whose image is
/// [(k-1)/lap, k/lap): y = (x + k - 1)/lap.
inline double inverse_branch(int lap, Symbol k, double x) {
    return (x + static_cast<double>(k - 1)) / static_cast<double>(lap);
}

/// The unique preimage of x under the n-th iterate of x -> lap*x lying in the
/// interval coded by a. Built by folding inverse branches in symbol order;
/// the intermediate value after i steps is the branch point of the length-i
/// prefix. Verified against the brute-force set definition in the tests.
inline double word_point(int lap, const Word& a, double x) {
    double z = x;
    for (Symbol s : a.symbols) z = inverse_branch(lap, s, z);
    return z;
}

/// Interval index: the word (a_1..a_n) codes [m/lap^n, (m+1)/lap^n) with
/// m = sum (a_i - 1) lap^{i-1} (little-endian base-lap digits).
inline std::uint64_t word_index(int lap, const Word& a) {
    std::uint64_t m = 0, p = 1;
    for (Symbol s : a.symbols) {
        m += static_cast<std::uint64_t>(s - 1) * p;
        p *= static_cast<std::uint64_t>(lap);
    }
    return m;
}

inline Word word_from_index(int lap, int n, std::uint64_t index) {
    std::vector<Symbol> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        s[static_cast<std::size_t>(i)] = static_cast<Symbol>(index % lap) + 1;
        index /= static_cast<std::uint64_t>(lap);
    }
    return Word(std::move(s));
}

inline std::uint64_t pow_u64(int base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::uint64_t>(base);
    return r;
}

/// Half-open dyadic-type interval coded by a word, plus the starred
/// enlargement (the interval together with both same-level neighbours).
/// The enlargement is kept as an interval of the real line (a lift): when the
/// coded interval touches 0 the enlargement crosses the seam of the circle,
/// and branch extensions are affine in the lifted coordinate.
struct PartitionInterval {
    Word word;
    double left = 0.0;   // left endpoint x_c in [0,1)
    double width = 1.0;  // lap^{-n}
    bool star = false;

    static PartitionInterval from_word(int lap, const Word& w, bool star = false) {
        check_symbols(lap, w);
        PartitionInterval p;
        p.word = w;
        p.width = std::pow(static_cast<double>(lap), -w.size());
        p.left = word_point(lap, w, 0.0);
        p.star = star;
        return p;
    }

    double star_left() const { return left - width; }
    double star_right() const { return left + 2.0 * width; }
    double right() const { return left + width; }

    bool contains(double x) const { return x >= left && x < right(); }

    /// Map a circle point into the closure of the starred lift interval,
    /// trying integer shifts. Empty if the point is not covered.
    std::optional<double> lift_into_star(double x, double tol = 1e-12) const {
        for (int k = -1; k <= 1; ++k) {
            double z = x + k;
            if (z >= star_left() - tol && z <= star_right() + tol) return z;
        }
        return std::nullopt;
    }
};

}  // namespace solenoid
