#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pka/error.hpp"
#include "pka/multiset.hpp"
#include "pka/numeric.hpp"

namespace pka {

/// Resource guard for exact evaluation. The semantics itself has no resource
/// model; this only turns runaway enumerations into a clean error.
struct Limits {
    std::size_t max_support = 1'000'000;
};

/**
 * Finitely supported probability distribution over depth-n multisets with
 * exact rational weights: the depth-n fragment of a behaviour.
 *
 * Always canonical: support sorted by the TruncMultiset order, no duplicate
 * points, no zero weights, weights summing to exactly one. Structural
 * equality is therefore equality of fragments.
 */
class FinDist {
public:
    using Point = std::pair<TruncMultiset, Rational>;

    FinDist() : FinDist(dirac(TruncMultiset(0))) {}

    static FinDist dirac(TruncMultiset m) {
        FinDist d(m.depth(), {});
        d.support_.emplace_back(std::move(m), Rational(1));
        return d;
    }

    /// Point mass on the empty multiset.
    static FinDist empty(int depth) { return dirac(TruncMultiset(std::max(depth, 0))); }

    /// Canonicalises arbitrary points; requires total weight one.
    static FinDist from_points(int depth, std::vector<Point> points) {
        std::map<TruncMultiset, Rational> acc;
        for (auto& [m, w] : points) {
            if (m.depth() != depth) throw Error(ErrorKind::DepthMismatch, "support point at wrong depth");
            if (sgn(w) < 0) throw Error(ErrorKind::InvalidArgument, "negative weight");
            acc[std::move(m)] += w;
        }
        return from_map(depth, std::move(acc));
    }

    int depth() const noexcept { return depth_; }
    const std::vector<Point>& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }
    bool is_dirac() const noexcept { return support_.size() == 1; }

    /// Probability of the class with canonical element m (zero if absent).
    Rational weight(const TruncMultiset& m) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), m,
                                   [](const Point& p, const TruncMultiset& k) { return p.first < k; });
        if (it != support_.end() && it->first == m) return it->second;
        return Rational(0);
    }

    friend bool operator==(const FinDist& a, const FinDist& b) {
        return a.depth_ == b.depth_ && a.support_ == b.support_;
    }

    /// Internal constructor path shared by the operations below.
    static FinDist from_map(int depth, std::map<TruncMultiset, Rational> acc) {
        FinDist d(depth, {});
        Rational total(0);
        d.support_.reserve(acc.size());
        for (auto& [m, w] : acc) {
            if (sgn(w) == 0) continue;
            total += w;
            d.support_.emplace_back(m, std::move(w));
        }
        if (total != 1)
            throw Error(ErrorKind::InvalidArgument, "distribution weights sum to " + to_string(total) + ", not 1");
        return d;
    }

private:
    FinDist(int depth, std::vector<Point> s) : depth_(depth), support_(std::move(s)) {}

    int depth_ = 0;
    std::vector<Point> support_;
};

namespace detail {

inline void check_budget(std::size_t n, const Limits& limits, const char* where) {
    if (n > limits.max_support)
        throw Error(ErrorKind::SupportExplosion, std::string(where) + ": support exceeds budget of " +
                                                     std::to_string(limits.max_support) + " points");
}

inline void require_depth(const FinDist& d, int depth, const char* where) {
    if (d.depth() != depth)
        throw Error(ErrorKind::DepthMismatch, std::string(where) + ": expected depth " + std::to_string(depth) +
                                                  ", got " + std::to_string(d.depth()));
}

} // namespace detail

/// Pushforward along alpha -> alpha restricted to m. Negative m collapses to
/// the point mass on the empty multiset at depth 0.
inline FinDist restrict(const FinDist& d, int m) {
    if (m > d.depth())
        throw Error(ErrorKind::DepthMismatch, "restrict: target depth " + std::to_string(m) +
                                                  " exceeds distribution depth " + std::to_string(d.depth()));
    if (m == d.depth()) return d;
    if (m < 0) return FinDist::empty(0);
    std::map<TruncMultiset, Rational> acc;
    for (const auto& [ms, w] : d.support()) acc[ms.restrict(m)] += w;
    return FinDist::from_map(m, std::move(acc));
}

/// Depth-n fragment of x . mu. Needs `d` at depth >= n - |x|.
inline FinDist shift(const Word& x, const FinDist& d, int n) {
    int inner = n - static_cast<int>(x.size());
    if (inner < 0) return FinDist::empty(n);
    FinDist r = restrict(d, inner);
    if (x.empty()) return r;
    std::map<TruncMultiset, Rational> acc;
    for (const auto& [ms, w] : r.support()) acc.emplace(ms.prefixed(x, n), w); // injective
    return FinDist::from_map(n, std::move(acc));
}

/// Convex combination sum_i r_i d_i. Weights must sum to one.
inline FinDist mix(std::span<const std::pair<Rational, FinDist>> branches, const Limits& limits = {}) {
    if (branches.empty()) throw Error(ErrorKind::InvalidArgument, "mix: no branches");
    int depth = branches.front().second.depth();
    Rational total(0);
    std::map<TruncMultiset, Rational> acc;
    for (const auto& [r, d] : branches) {
        detail::require_depth(d, depth, "mix");
        if (sgn(r) < 0) throw Error(ErrorKind::InvalidArgument, "mix: negative weight");
        total += r;
        if (sgn(r) == 0) continue;
        for (const auto& [ms, w] : d.support()) acc[ms] += r * w;
        detail::check_budget(acc.size(), limits, "mix");
    }
    if (total != 1) throw Error(ErrorKind::InvalidArgument, "mix: weights sum to " + to_string(total) + ", not 1");
    return FinDist::from_map(depth, std::move(acc));
}

/// Binary mixture r*a + (1-r)*b.
inline FinDist mix2(const Rational& r, const FinDist& a, const FinDist& b, const Limits& limits = {}) {
    if (r == 1) return a;
    if (sgn(r) == 0) return b;
    std::pair<Rational, FinDist> br[] = {{r, a}, {Rational(1) - r, b}};
    return mix(br, limits);
}

/// Independent sum of two distributions (binary &).
inline FinDist amp2(const FinDist& a, const FinDist& b, const Limits& limits = {}) {
    if (a.depth() != b.depth())
        throw Error(ErrorKind::DepthMismatch, "amp: depths " + std::to_string(a.depth()) + " and " +
                                                  std::to_string(b.depth()));
    const FinDist& big = a.size() >= b.size() ? a : b;
    const FinDist& small = a.size() >= b.size() ? b : a;
    if (small.is_dirac() && small.support().front().first.empty()) return big;
    std::map<TruncMultiset, Rational> acc;
    for (const auto& [m1, w1] : small.support()) {
        for (const auto& [m2, w2] : big.support()) {
            acc[madd(m1, m2)] += w1 * w2;
        }
        detail::check_budget(acc.size(), limits, "amp");
    }
    return FinDist::from_map(a.depth(), std::move(acc));
}

/// k independent copies of d summed together, by repeated squaring.
inline FinDist amp_power(const FinDist& d, const Natural& k, const Limits& limits = {}) {
    if (k.is_zero()) return FinDist::empty(d.depth());
    if (d.is_dirac()) return FinDist::dirac(d.support().front().first.scaled(k));
    auto small = k.to_u64();
    if (!small) throw Error(ErrorKind::SupportExplosion, "amp: multiplicity too large for a non-degenerate distribution");
    std::uint64_t e = *small;
    FinDist result = FinDist::empty(d.depth());
    FinDist base = d;
    bool first = true;
    while (e > 0) {
        if (e & 1u) {
            result = first ? base : amp2(result, base, limits);
            first = false;
        }
        e >>= 1u;
        if (e > 0) base = amp2(base, base, limits);
    }
    return result;
}

/// Generalised &: independent sample of every element, then multiset sum.
/// The empty family yields the point mass on the empty multiset at `depth`.
inline FinDist amp(std::span<const FinDist> ds, int depth, const Limits& limits = {}) {
    FinDist acc = FinDist::empty(depth);
    for (const auto& d : ds) {
        detail::require_depth(d, depth, "amp");
        acc = amp2(acc, d, limits);
    }
    return acc;
}

/// Supplies the continuation distribution at a requested depth.
using DepthProvider = std::function<FinDist(int)>;

/**
 * Depth-n fragment of mu >>= (- . nu): sample beta from mu, then for each
 * word x in beta (with multiplicity) an independent x-shifted sample of nu,
 * and sum everything. `nu` is asked only for the depths n - |x| that occur,
 * so recursive continuations are evaluated strictly below n whenever mu
 * never yields the empty word.
 */
inline FinDist bind(const FinDist& mu, const DepthProvider& nu, const Limits& limits = {}) {
    const int n = mu.depth();
    std::map<int, FinDist> nu_at;   // keyed by depth
    std::map<Word, FinDist> shifted; // x . nu at depth n
    std::map<std::pair<Word, Natural>, FinDist> powered;
    auto shifted_for = [&](const Word& x) -> const FinDist& {
        auto it = shifted.find(x);
        if (it != shifted.end()) return it->second;
        int need = n - static_cast<int>(x.size());
        auto jt = nu_at.find(need);
        if (jt == nu_at.end()) {
            FinDist v = nu(need);
            detail::require_depth(v, need, "bind continuation");
            jt = nu_at.emplace(need, std::move(v)).first;
        }
        return shifted.emplace(x, shift(x, jt->second, n)).first->second;
    };

    std::vector<std::pair<Rational, FinDist>> branches;
    branches.reserve(mu.size());
    for (const auto& [beta, w] : mu.support()) {
        FinDist acc = FinDist::empty(n);
        for (const auto& [x, k] : beta.entries()) {
            auto key = std::make_pair(x, k);
            auto it = powered.find(key);
            if (it == powered.end()) it = powered.emplace(key, amp_power(shifted_for(x), k, limits)).first;
            acc = amp2(acc, it->second, limits);
        }
        branches.emplace_back(w, std::move(acc));
    }
    return mix(branches, limits);
}

inline FinDist bind(const FinDist& mu, const FinDist& nu, const Limits& limits = {}) {
    detail::require_depth(nu, mu.depth(), "bind");
    return bind(mu, [&](int k) { return restrict(nu, k); }, limits);
}

/// Agreement on every depth-m class.
inline bool equiv(const FinDist& a, const FinDist& b, int m) {
    if (m > a.depth() || m > b.depth())
        throw Error(ErrorKind::DepthMismatch, "equiv: depth " + std::to_string(m) + " exceeds an operand depth");
    return restrict(a, m) == restrict(b, m);
}

/**
 * Exact verdict of the ultrametric on depth-n fragments: 2^-k for the least
 * k <= n at which the fragments differ, otherwise only the bound
 * d <= 2^-(n+1) is known.
 */
struct Distance {
    bool exact = false;
    int exponent = 0; ///< k when exact, otherwise n+1 (the bound exponent)

    /// Comparison on the exact values 2^-k; bounded verdicts act as their bound.
    double value() const { return std::ldexp(1.0, -exponent); }

    std::string str() const {
        return exact ? "2^-" + std::to_string(exponent) : "<=2^-" + std::to_string(exponent);
    }

    friend bool operator==(const Distance&, const Distance&) = default;
};

inline Distance distance(const FinDist& a, const FinDist& b) {
    if (a.depth() != b.depth())
        throw Error(ErrorKind::DepthMismatch, "distance: depths " + std::to_string(a.depth()) + " and " +
                                                  std::to_string(b.depth()));
    const int n = a.depth();
    if (a == b) return {false, n + 1};
    // Inequivalence is monotone in depth, so binary search the first failing depth.
    int lo = 0, hi = n;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (equiv(a, b, mid))
            lo = mid + 1;
        else
            hi = mid;
    }
    return {true, lo};
}

/// A depth-k class on which two fragments disagree.
struct Witness {
    int depth = 0;
    TruncMultiset cls;
    Rational left, right;
};

/// Least-depth disagreement between same-depth fragments, if any.
inline std::optional<Witness> first_difference(const FinDist& a, const FinDist& b) {
    Distance d = distance(a, b);
    if (!d.exact) return std::nullopt;
    FinDist ra = restrict(a, d.exponent), rb = restrict(b, d.exponent);
    std::map<TruncMultiset, std::pair<Rational, Rational>> both;
    for (const auto& [m, w] : ra.support()) both[m].first = w;
    for (const auto& [m, w] : rb.support()) both[m].second = w;
    for (const auto& [m, w] : both)
        if (w.first != w.second) return Witness{d.exponent, m, w.first, w.second};
    return std::nullopt;
}

} // namespace pka
