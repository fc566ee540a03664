#pragma once

// Shared helpers for the test suite. The enumerators here compute
// distributions by exhaustively exploring every coin outcome of the agent
// semantics; they share nothing with the evaluators under test except the
// AST, substitution and the multiset container.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pka/pka.hpp"

namespace oracle {

using namespace pka;

struct Agent {
    Expr node;
    std::vector<Expr> cont; // pending right operands of ';', innermost last
    Word acc;
};

struct Config {
    std::vector<Agent> pending;
    std::map<Word, std::uint64_t> out;
};

inline void enumerate(Config c, const Rational& w, int n, const Alphabet& A, std::map<TruncMultiset, Rational>& result) {
    while (!c.pending.empty()) {
        Agent ag = std::move(c.pending.back());
        c.pending.pop_back();
        for (bool live = true; live;) {
            const Expr e = ag.node;
            switch (e->kind) {
                case ExprKind::Fail: live = false; break;
                case ExprKind::Act:
                    ag.acc.push_back(static_cast<char>(A.index(e->name)));
                    if (static_cast<int>(ag.acc.size()) > n) {
                        live = false;
                        break;
                    }
                    [[fallthrough]];
                case ExprKind::Skip:
                    if (ag.cont.empty()) {
                        ++c.out[ag.acc];
                        live = false;
                    } else {
                        ag.node = ag.cont.back();
                        ag.cont.pop_back();
                    }
                    break;
                case ExprKind::Amp:
                    c.pending.push_back(Agent{e->right, ag.cont, ag.acc});
                    ag.node = e->left;
                    break;
                case ExprKind::Seq:
                    ag.cont.push_back(e->right);
                    ag.node = e->left;
                    break;
                case ExprKind::Fix: ag.node = substitute(e->left, e, e->name); break;
                case ExprKind::Var: throw Error(ErrorKind::UnboundVariable, "oracle: free variable");
                case ExprKind::OPlus: {
                    for (int side = 0; side < 2; ++side) {
                        Rational p = side == 0 ? e->prob : Rational(1 - e->prob);
                        if (sgn(p) == 0) continue;
                        Config branch = c;
                        Agent a2 = ag;
                        a2.node = side == 0 ? e->left : e->right;
                        branch.pending.push_back(std::move(a2));
                        enumerate(std::move(branch), Rational(w * p), n, A, result);
                    }
                    return;
                }
            }
        }
    }
    std::vector<TruncMultiset::Entry> entries;
    for (const auto& [word, k] : c.out) entries.emplace_back(word, Natural(k));
    result[TruncMultiset(n, std::move(entries))] += w;
}

/// Exact depth-n distribution of a closed expression by exhaustive search.
inline FinDist brute_expr(const Expr& e, int n, const Alphabet& A) {
    std::map<TruncMultiset, Rational> result;
    Config c;
    c.pending.push_back(Agent{e, {}, Word()});
    enumerate(std::move(c), Rational(1), n, A, result);
    std::vector<FinDist::Point> pts(result.begin(), result.end());
    return FinDist::from_points(n, std::move(pts));
}

inline void enumerate_aut(const Automaton& aut, std::vector<std::pair<StateId, Word>> pending,
                          std::map<Word, std::uint64_t> out, const Rational& w, int n,
                          std::map<TruncMultiset, Rational>& result) {
    while (!pending.empty()) {
        auto [q, acc] = pending.back();
        pending.pop_back();
        for (bool live = true; live;) {
            const State& s = aut.states[q];
            switch (s.label) {
                case Label::Fail: live = false; break;
                case Label::Skip:
                    ++out[acc];
                    live = false;
                    break;
                case Label::Act:
                    acc.push_back(static_cast<char>(s.letter));
                    if (static_cast<int>(acc.size()) > n)
                        live = false;
                    else
                        q = s.next;
                    break;
                case Label::Amp:
                    for (const auto& [t, k] : s.multiset)
                        for (std::uint64_t i = 0; i < *k.to_u64(); ++i) pending.emplace_back(t, acc);
                    live = false;
                    break;
                case Label::OPlus:
                    for (const auto& [t, p] : s.dist) {
                        auto branch = pending;
                        branch.emplace_back(t, acc);
                        enumerate_aut(aut, std::move(branch), out, Rational(w * p), n, result);
                    }
                    return;
            }
        }
    }
    std::vector<TruncMultiset::Entry> entries;
    for (const auto& [word, k] : out) entries.emplace_back(word, Natural(k));
    result[TruncMultiset(n, std::move(entries))] += w;
}

/// Exact depth-n distribution of an automaton state by exhaustive search.
inline FinDist brute_state(const Automaton& aut, StateId s, int n) {
    std::map<TruncMultiset, Rational> result;
    enumerate_aut(aut, {{s, Word()}}, {}, Rational(1), n, result);
    std::vector<FinDist::Point> pts(result.begin(), result.end());
    return FinDist::from_points(n, std::move(pts));
}

} // namespace oracle

namespace testutil {

using namespace pka;

inline Rational q(const char* s) { return parse_rational(s); }

/// Multiset from (rendered word, count) pairs.
inline TruncMultiset ms(const Alphabet& A, int n, std::vector<std::pair<std::string, std::uint64_t>> entries) {
    std::vector<TruncMultiset::Entry> es;
    for (auto& [w, k] : entries) es.emplace_back(json_io::parse_word(A, w), Natural(k));
    return TruncMultiset(n, std::move(es));
}

inline FinDist dist(int n, std::vector<std::pair<TruncMultiset, const char*>> pts) {
    std::vector<FinDist::Point> ps;
    for (auto& [m, w] : pts) ps.emplace_back(m, parse_rational(w));
    return FinDist::from_points(n, std::move(ps));
}

inline Expr P(const std::string& text, const Alphabet& A) {
    Expr e = parse(text, A);
    validate(e, A);
    return e;
}

inline const Alphabet& ab() {
    static const Alphabet A({"a", "b"});
    return A;
}

// Fixed seeds shared by the property tests and the acceptance run.
inline constexpr std::uint64_t kExprSeed = 20240611;
inline constexpr std::uint64_t kAutSeed = 20240612;

// The automata of the illustrative figures. State names follow the drawings;
// unnamed intermediate action states get names of the form <letter><target>.

/// Fragment with a probabilistic root over four choice states; t, u, v are skip states.
inline Automaton fig_fragment(const Rational& p, const Rational& q, const Rational& r) {
    Automaton aut;
    aut.alphabet = ab();
    StateId s = aut.add(st::oplus({}, "s"));
    StateId t = aut.add(st::skip("t")), u = aut.add(st::skip("u")), v = aut.add(st::skip("v"));
    StateId k = aut.add(st::skip("k"));
    auto act = [&](Letter a, StateId to) { return aut.add(st::act(a, to)); };
    StateId c1 = aut.add(st::amp({{k, Natural(2)}, {act(0, s), Natural(1)}, {act(1, t), Natural(1)}}));
    StateId c2 = aut.add(st::amp({{k, Natural(1)}, {act(0, u), Natural(1)}, {act(0, v), Natural(1)}}));
    StateId c3 = aut.add(st::amp({{k, Natural(2)}, {act(0, s), Natural(1)}, {act(1, t), Natural(1)}, {act(1, t), Natural(1)}}));
    StateId c4 = aut.add(st::amp({{act(0, s), Natural(1)}, {act(0, s), Natural(1)}, {act(0, t), Natural(1)}, {act(1, t), Natural(1)}}));
    Rational rest = 1 - (p + q + r);
    std::vector<std::pair<StateId, Rational>> d;
    for (auto [c, w] : {std::pair{c1, p}, std::pair{c2, q}, std::pair{c3, r}, std::pair{c4, rest}})
        if (sgn(w) != 0) d.emplace_back(c, w);
    aut.states[s].dist = d;
    aut.start = s;
    for (StateId i = 0; i < aut.size(); ++i)
        if (aut.states[i].name.empty()) aut.states[i].name = "q" + std::to_string(i);
    return aut;
}

/// a*: s = amp{skip, a -> s}
inline Automaton fig_star(const Alphabet& A = Alphabet({"a"})) {
    Automaton aut;
    aut.alphabet = A;
    aut.add(st::amp({{1, Natural(1)}, {2, Natural(1)}}, "s"));
    aut.add(st::skip("k"));
    aut.add(st::act(0, 0, "as"));
    return aut;
}

/// (a;a*)*: s = amp{skip, a -> t}, t = amp{s, a -> t}
inline Automaton fig_double_star() {
    Automaton aut;
    aut.alphabet = Alphabet({"a"});
    aut.add(st::amp({{2, Natural(1)}, {3, Natural(1)}}, "s"));
    aut.add(st::amp({{0, Natural(1)}, {4, Natural(1)}}, "t"));
    aut.add(st::skip("k"));
    aut.add(st::act(0, 1, "as"));
    aut.add(st::act(0, 1, "at"));
    return aut;
}

/// (a +[1/2] b)*: s = amp{skip, t}, t = oplus{a -> s, b -> s}
inline Automaton fig_coin_star() {
    Automaton aut;
    aut.alphabet = ab();
    aut.add(st::amp({{2, Natural(1)}, {1, Natural(1)}}, "s"));
    aut.add(st::oplus({{3, Rational(1, 2)}, {4, Rational(1, 2)}}, "t"));
    aut.add(st::skip("k"));
    aut.add(st::act(0, 0, "as"));
    aut.add(st::act(1, 0, "bs"));
    return aut;
}

inline const std::vector<Expr>& expr_corpus() {
    static const std::vector<Expr> c = gen::expr_corpus(200, kExprSeed, ab());
    return c;
}

inline const std::vector<Automaton>& aut_corpus() {
    static const std::vector<Automaton> c = gen::automaton_corpus(100, kAutSeed, ab());
    return c;
}

} // namespace testutil
