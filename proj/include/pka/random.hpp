#pragma once

#include <string>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/automaton.hpp"
#include "pka/expr.hpp"
#include "pka/expr_eval.hpp"
#include "pka/findist.hpp"
#include "pka/sampler.hpp"
#include "pka/syntax.hpp"

namespace pka::gen {

/// Shape parameters for random expressions.
struct ExprOptions {
    std::size_t max_size = 12;         ///< AST node bound
    int check_depth = 5;               ///< depth used for the support filter
    std::size_t max_support = 4000;    ///< reject terms whose depth-check_depth support is larger
};

inline Rational random_prob(SplitMix64& rng) {
    static const char* table[] = {"1/2", "1/3", "2/3", "1/4", "3/4", "1/5", "2/5", "3/5"};
    return parse_rational(table[rng.below(8)]);
}

namespace detail {

struct ExprBuilder {
    using Scope = std::vector<std::pair<std::string, bool>>; ///< (variable, guarded here)

    SplitMix64& rng;
    const Alphabet& alphabet;
    int next_var = 0;

    Expr letter() { return ex::act(alphabet.name(static_cast<Letter>(rng.below(alphabet.size())))); }

    // variables are only placed where they are guarded, so most draws are valid
    Expr leaf(const Scope& scope) {
        std::vector<std::string> ok;
        for (const auto& [x, g] : scope)
            if (g) ok.push_back(x);
        std::uint64_t k = rng.below(ok.empty() ? 4 : 8);
        if (k >= 4) return ex::var(ok[rng.below(ok.size())]);
        if (k == 0) return ex::skip();
        if (k == 1) return ex::fail();
        return letter();
    }

    // size counts AST nodes
    Expr build(std::size_t size, Scope& scope) {
        if (size <= 2) return leaf(scope);
        std::size_t rest = size - 1;
        switch (rng.below(10)) {
            case 0:
            case 1: {
                std::size_t l = 1 + rng.below(rest - 1);
                return ex::amp(build(l, scope), build(rest - l, scope));
            }
            case 2:
            case 3: {
                std::size_t l = 1 + rng.below(rest - 1);
                Rational r = random_prob(rng);
                return ex::oplus(build(l, scope), r, build(rest - l, scope));
            }
            case 4: {
                std::size_t l = 1 + rng.below(rest - 1);
                Scope none;
                Expr left = build(l, none);
                return ex::seq(left, build(rest - l, scope));
            }
            case 5:
            case 6: {
                Scope guarded = scope;
                for (auto& v : guarded) v.second = true;
                Expr a = letter();
                return ex::seq(a, build(rest - 1, guarded));
            }
            default: {
                std::string x = "x" + std::to_string(next_var++);
                scope.emplace_back(x, false);
                Expr body;
                if (rest >= 5 && rng.below(3) != 0) {
                    // e1 op (a ; e2): the usual shape of a loop
                    std::size_t l = 1 + rng.below(rest - 4);
                    Expr e1 = build(l, scope);
                    Scope guarded = scope;
                    for (auto& v : guarded) v.second = true;
                    Expr a = letter();
                    Expr e2 = build(rest - 3 - l, guarded);
                    Expr loop = ex::seq(a, e2);
                    body = rng.below(2) ? ex::amp(e1, loop) : ex::oplus(e1, random_prob(rng), loop);
                } else {
                    body = build(rest, scope);
                }
                scope.pop_back();
                return ex::fix(x, body);
            }
        }
    }
};

inline bool valid(const Expr& e, const Alphabet& alphabet) {
    try {
        validate(e, alphabet);
        return true;
    } catch (const Error&) {
        return false;
    }
}

} // namespace detail

/// Random closed valid expression whose depth-check_depth support is small.
inline Expr closed_expr(SplitMix64& rng, const Alphabet& alphabet, const ExprOptions& opt = {}) {
    if (alphabet.size() == 0) throw Error(ErrorKind::InvalidArgument, "random expressions need a letter");
    for (;;) {
        detail::ExprBuilder b{rng, alphabet};
        detail::ExprBuilder::Scope scope;
        // skewed towards the larger sizes
        std::size_t size = 1 + std::max(rng.below(opt.max_size), rng.below(opt.max_size));
        Expr e = b.build(size, scope);
        if (!is_closed(e) || !detail::valid(e, alphabet)) continue;
        try {
            Limits lim;
            lim.max_support = opt.max_support;
            eval_closed(e, opt.check_depth, alphabet, lim);
        } catch (const Error&) {
            continue;
        }
        return e;
    }
}

/// Random valid body for `fix x body`, with x occurring guarded.
inline Expr fix_body(SplitMix64& rng, const Alphabet& alphabet, const std::string& x, const ExprOptions& opt = {}) {
    if (alphabet.size() == 0) throw Error(ErrorKind::InvalidArgument, "random expressions need a letter");
    for (;;) {
        detail::ExprBuilder b{rng, alphabet};
        detail::ExprBuilder::Scope scope{{x, false}};
        Expr body = b.build(2 + rng.below(opt.max_size - 1), scope);
        Expr e = ex::fix(x, body);
        if (!free_vars(body).count(x) || !is_closed(e) || !detail::valid(e, alphabet)) continue;
        try {
            Limits lim;
            lim.max_support = opt.max_support;
            eval_closed(e, opt.check_depth, alphabet, lim);
        } catch (const Error&) {
            continue;
        }
        return body;
    }
}

/// Shape parameters for random automata.
struct AutomatonOptions {
    std::size_t max_states = 6;
    int check_depth = 5;
    std::size_t max_support = 4000;
};

/// Random valid automaton whose depth-check_depth fragments are small at
/// every state.
inline Automaton automaton(SplitMix64& rng, const Alphabet& alphabet, const AutomatonOptions& opt = {}) {
    for (;;) {
        Automaton aut;
        aut.alphabet = alphabet;
        std::size_t n = 1 + rng.below(opt.max_states);
        for (std::size_t i = 0; i < n; ++i) {
            std::string name = "s" + std::to_string(i);
            std::uint64_t kind = rng.below(alphabet.size() ? 9 : 6);
            if (kind == 0) {
                aut.add(st::skip(name));
            } else if (kind == 1) {
                aut.add(st::fail(name));
            } else if (kind <= 3) {
                std::map<StateId, Natural> m;
                for (std::uint64_t j = 0, k = rng.below(4); j < k; ++j) m[rng.below(n)] += Natural(1 + rng.below(2));
                aut.add(st::amp({m.begin(), m.end()}, name));
            } else if (kind <= 5) {
                std::map<StateId, Rational> d;
                std::uint64_t k = 1 + rng.below(3);
                std::vector<std::uint64_t> w(k);
                std::uint64_t total = 0;
                for (auto& x : w) total += (x = 1 + rng.below(4));
                for (std::uint64_t j = 0; j < k; ++j) {
                    Rational r(static_cast<long>(w[j]), static_cast<unsigned long>(total));
                    r.canonicalize();
                    d[rng.below(n)] += r;
                }
                aut.add(st::oplus({d.begin(), d.end()}, name));
            } else {
                aut.add(st::act(static_cast<Letter>(rng.below(alphabet.size())), rng.below(n), name));
            }
        }
        aut.start = rng.below(n);
        try {
            validate_automaton(aut);
            Limits lim;
            lim.max_support = opt.max_support;
            AutomatonEvaluator ev(aut, lim);
            for (StateId s = 0; s < aut.size(); ++s) ev.eval(s, opt.check_depth);
            // mostly keep automata whose start state reads letters and branches
            const FinDist& d = ev.eval(aut.start, opt.check_depth);
            bool reads = false;
            for (const auto& [m, w] : d.support())
                for (const auto& e : m.entries()) reads = reads || !e.first.empty();
            if ((!reads || d.size() < 2) && rng.below(8) != 0) continue;
        } catch (const Error&) {
            continue;
        }
        return aut;
    }
}

/// Random depth-n multiset with words over `alphabet`.
inline TruncMultiset multiset(SplitMix64& rng, const Alphabet& alphabet, int n, std::size_t max_entries = 4) {
    std::vector<TruncMultiset::Entry> entries;
    for (std::uint64_t i = 0, k = rng.below(max_entries + 1); i < k; ++i) {
        Word w;
        for (std::uint64_t j = 0, len = rng.below(static_cast<std::uint64_t>(n) + 1); j < len; ++j)
            w.push_back(static_cast<char>(rng.below(std::max<std::size_t>(alphabet.size(), 1))));
        entries.emplace_back(std::move(w), Natural(1 + rng.below(3)));
    }
    return TruncMultiset(n, std::move(entries));
}

/// Random depth-n distribution with at most `max_points` support points.
inline FinDist findist(SplitMix64& rng, const Alphabet& alphabet, int n, std::size_t max_points = 4) {
    std::vector<FinDist::Point> pts;
    std::uint64_t k = 1 + rng.below(max_points);
    std::vector<std::uint64_t> w(k);
    std::uint64_t total = 0;
    for (auto& x : w) total += (x = 1 + rng.below(5));
    for (std::uint64_t i = 0; i < k; ++i) {
        Rational r(static_cast<long>(w[i]), static_cast<unsigned long>(total));
        r.canonicalize();
        pts.emplace_back(multiset(rng, alphabet, n), r);
    }
    return FinDist::from_points(n, std::move(pts));
}

/**
 * A distribution agreeing with `d` on every class of depth k: each support
 * point keeps its words of length <= k and gets fresh longer words.
 */
inline FinDist perturb(SplitMix64& rng, const Alphabet& alphabet, const FinDist& d, int k) {
    std::vector<FinDist::Point> pts;
    for (const auto& [m, w] : d.support()) {
        std::vector<TruncMultiset::Entry> entries;
        for (const auto& e : m.entries())
            if (static_cast<int>(e.first.size()) <= k) entries.push_back(e);
        TruncMultiset fresh = multiset(rng, alphabet, d.depth());
        for (const auto& e : fresh.entries())
            if (static_cast<int>(e.first.size()) > k) entries.push_back(e);
        pts.emplace_back(TruncMultiset(d.depth(), std::move(entries)), w);
    }
    return FinDist::from_points(d.depth(), std::move(pts));
}

/// Seeded corpus of closed expressions.
inline std::vector<Expr> expr_corpus(std::size_t count, std::uint64_t seed, const Alphabet& alphabet,
                                     const ExprOptions& opt = {}) {
    std::vector<Expr> out;
    SplitMix64 rng(seed);
    while (out.size() < count) out.push_back(closed_expr(rng, alphabet, opt));
    return out;
}

/// Seeded corpus of automata.
inline std::vector<Automaton> automaton_corpus(std::size_t count, std::uint64_t seed, const Alphabet& alphabet,
                                               const AutomatonOptions& opt = {}) {
    std::vector<Automaton> out;
    SplitMix64 rng(seed);
    while (out.size() < count) out.push_back(automaton(rng, alphabet, opt));
    return out;
}

} // namespace pka::gen
