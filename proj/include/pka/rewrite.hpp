#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/expr_eval.hpp"
#include "pka/printer.hpp"
#include "pka/syntax.hpp"

namespace pka {

/// Values for the metavariables of a rule schema.
struct RuleInstance {
    Expr e1, e2, e3;      ///< arbitrary closed expressions
    std::string a;        ///< a letter
    Rational r, s;        ///< probabilities
    std::string x;        ///< fix variable
    Expr body;            ///< fix body, x guarded
};

/**
 * A directed equation. `rewrite` applies it at the root of a term and
 * returns nothing when the left pattern does not match; `instance` builds a
 * matching left-hand side from metavariable values, used by soundness tests.
 */
struct RewriteRule {
    std::string name;
    std::string lhs;
    std::string rhs;
    std::function<std::optional<Expr>(const Expr&)> rewrite;
    std::function<Expr(const RuleInstance&)> instance;
};

namespace detail {

inline bool kind(const Expr& e, ExprKind k) { return is(e, k); }

inline Rational skew_inner(const Rational& r, const Rational& s) {
    Rational rs = r * s;
    if (rs == 1) return Rational(0); // outer branch has weight one; inner weight is irrelevant
    return (s - rs) / (Rational(1) - rs);
}

} // namespace detail

/// The rule set: every equation of the axiom table, with reverse
/// orientations listed as separate rules where they are syntax-directed.
inline const std::vector<RewriteRule>& rules() {
    using namespace ex;
    using detail::kind;
    using K = ExprKind;
    using R = std::optional<Expr>;
    static const std::vector<RewriteRule> all = {
        {"amp-comm", "e1 & e2", "e2 & e1",
         [](const Expr& e) -> R { if (!kind(e, K::Amp)) return {}; return amp(e->right, e->left); },
         [](const RuleInstance& i) { return amp(i.e1, i.e2); }},
        {"amp-assoc", "e1 & (e2 & e3)", "(e1 & e2) & e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::Amp) || !kind(e->right, K::Amp)) return {};
             return amp(amp(e->left, e->right->left), e->right->right);
         },
         [](const RuleInstance& i) { return amp(i.e1, amp(i.e2, i.e3)); }},
        {"amp-assoc-rev", "(e1 & e2) & e3", "e1 & (e2 & e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Amp) || !kind(e->left, K::Amp)) return {};
             return amp(e->left->left, amp(e->left->right, e->right));
         },
         [](const RuleInstance& i) { return amp(amp(i.e1, i.e2), i.e3); }},
        {"amp-identity", "e & fail", "e",
         [](const Expr& e) -> R { if (!kind(e, K::Amp) || !kind(e->right, K::Fail)) return {}; return e->left; },
         [](const RuleInstance& i) { return amp(i.e1, fail()); }},
        {"amp-identity-rev", "e", "e & fail", [](const Expr& e) -> R { return amp(e, fail()); },
         [](const RuleInstance& i) { return i.e1; }},
        {"oplus-skew-comm", "e1 +[r] e2", "e2 +[1-r] e1",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus)) return {};
             return oplus(e->right, Rational(1) - e->prob, e->left);
         },
         [](const RuleInstance& i) { return oplus(i.e1, i.r, i.e2); }},
        {"oplus-skew-assoc", "(e1 +[r] e2) +[s] e3", "e1 +[rs] (e2 +[(s-rs)/(1-rs)] e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !kind(e->left, K::OPlus)) return {};
             const Rational &r = e->left->prob, &s = e->prob;
             return oplus(e->left->left, r * s, oplus(e->left->right, detail::skew_inner(r, s), e->right));
         },
         [](const RuleInstance& i) { return oplus(oplus(i.e1, i.r, i.e2), i.s, i.e3); }},
        {"oplus-skew-assoc-rev", "e1 +[p] (e2 +[q] e3)", "(e1 +[p/(p+q-pq)] e2) +[p+q-pq] e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !kind(e->right, K::OPlus)) return {};
             const Rational &p = e->prob, &q = e->right->prob;
             Rational s = p + q - p * q;
             Rational r = sgn(s) == 0 ? Rational(0) : Rational(p / s);
             return oplus(oplus(e->left, r, e->right->left), s, e->right->right);
         },
         [](const RuleInstance& i) { return oplus(i.e1, i.r, oplus(i.e2, i.s, i.e3)); }},
        {"oplus-elim", "e1 +[1] e2", "e1",
         [](const Expr& e) -> R { if (!kind(e, K::OPlus) || e->prob != 1) return {}; return e->left; },
         [](const RuleInstance& i) { return oplus(i.e1, Rational(1), i.e2); }},
        {"oplus-idem", "e +[r] e", "e",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !alpha_equal(e->left, e->right)) return {};
             return e->left;
         },
         [](const RuleInstance& i) { return oplus(i.e1, i.r, i.e1); }},
        {"seq-assoc", "e1 ; (e2 ; e3)", "(e1 ; e2) ; e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->right, K::Seq)) return {};
             return seq(seq(e->left, e->right->left), e->right->right);
         },
         [](const RuleInstance& i) { return seq(i.e1, seq(i.e2, i.e3)); }},
        {"seq-assoc-rev", "(e1 ; e2) ; e3", "e1 ; (e2 ; e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->left, K::Seq)) return {};
             return seq(e->left->left, seq(e->left->right, e->right));
         },
         [](const RuleInstance& i) { return seq(seq(i.e1, i.e2), i.e3); }},
        {"seq-left-id", "skip ; e", "e",
         [](const Expr& e) -> R { if (!kind(e, K::Seq) || !kind(e->left, K::Skip)) return {}; return e->right; },
         [](const RuleInstance& i) { return seq(skip(), i.e1); }},
        {"seq-left-id-rev", "e", "skip ; e", [](const Expr& e) -> R { return seq(skip(), e); },
         [](const RuleInstance& i) { return i.e1; }},
        {"seq-right-id", "e ; skip", "e",
         [](const Expr& e) -> R { if (!kind(e, K::Seq) || !kind(e->right, K::Skip)) return {}; return e->left; },
         [](const RuleInstance& i) { return seq(i.e1, skip()); }},
        {"seq-right-id-rev", "e", "e ; skip",
         [](const Expr& e) -> R { if (!is_closed(e)) return {}; return seq(e, skip()); },
         [](const RuleInstance& i) { return i.e1; }},
        {"seq-left-abs", "fail ; e", "fail",
         [](const Expr& e) -> R { if (!kind(e, K::Seq) || !kind(e->left, K::Fail)) return {}; return fail(); },
         [](const RuleInstance& i) { return seq(fail(), i.e1); }},
        {"seq-right-abs", "e ; fail", "fail",
         [](const Expr& e) -> R { if (!kind(e, K::Seq) || !kind(e->right, K::Fail)) return {}; return fail(); },
         [](const RuleInstance& i) { return seq(i.e1, fail()); }},
        {"seq-amp-rdist", "(e1 & e2) ; e3", "(e1 ; e3) & (e2 ; e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->left, K::Amp)) return {};
             return amp(seq(e->left->left, e->right), seq(e->left->right, e->right));
         },
         [](const RuleInstance& i) { return seq(amp(i.e1, i.e2), i.e3); }},
        {"seq-amp-rdist-rev", "(e1 ; e3) & (e2 ; e3)", "(e1 & e2) ; e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::Amp) || !kind(e->left, K::Seq) || !kind(e->right, K::Seq)) return {};
             if (!alpha_equal(e->left->right, e->right->right)) return {};
             return seq(amp(e->left->left, e->right->left), e->left->right);
         },
         [](const RuleInstance& i) { return amp(seq(i.e1, i.e3), seq(i.e2, i.e3)); }},
        {"seq-oplus-rdist", "(e1 +[r] e2) ; e3", "(e1 ; e3) +[r] (e2 ; e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->left, K::OPlus)) return {};
             return oplus(seq(e->left->left, e->right), e->left->prob, seq(e->left->right, e->right));
         },
         [](const RuleInstance& i) { return seq(oplus(i.e1, i.r, i.e2), i.e3); }},
        {"seq-oplus-rdist-rev", "(e1 ; e3) +[r] (e2 ; e3)", "(e1 +[r] e2) ; e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !kind(e->left, K::Seq) || !kind(e->right, K::Seq)) return {};
             if (!alpha_equal(e->left->right, e->right->right)) return {};
             return seq(oplus(e->left->left, e->prob, e->right->left), e->left->right);
         },
         [](const RuleInstance& i) { return oplus(seq(i.e1, i.e3), i.r, seq(i.e2, i.e3)); }},
        {"amp-oplus-rdist", "(e1 +[r] e2) & e3", "(e1 & e3) +[r] (e2 & e3)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Amp) || !kind(e->left, K::OPlus)) return {};
             return oplus(amp(e->left->left, e->right), e->left->prob, amp(e->left->right, e->right));
         },
         [](const RuleInstance& i) { return amp(oplus(i.e1, i.r, i.e2), i.e3); }},
        {"amp-oplus-rdist-rev", "(e1 & e3) +[r] (e2 & e3)", "(e1 +[r] e2) & e3",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !kind(e->left, K::Amp) || !kind(e->right, K::Amp)) return {};
             if (!alpha_equal(e->left->right, e->right->right)) return {};
             return amp(oplus(e->left->left, e->prob, e->right->left), e->left->right);
         },
         [](const RuleInstance& i) { return oplus(amp(i.e1, i.e3), i.r, amp(i.e2, i.e3)); }},
        {"act-amp-ldist", "a ; (e1 & e2)", "(a ; e1) & (a ; e2)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->left, K::Act) || !kind(e->right, K::Amp)) return {};
             return amp(seq(e->left, e->right->left), seq(e->left, e->right->right));
         },
         [](const RuleInstance& i) { return seq(act(i.a), amp(i.e1, i.e2)); }},
        {"act-amp-ldist-rev", "(a ; e1) & (a ; e2)", "a ; (e1 & e2)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Amp) || !kind(e->left, K::Seq) || !kind(e->right, K::Seq)) return {};
             const Expr &l = e->left->left, &r = e->right->left;
             if (!kind(l, K::Act) || !kind(r, K::Act) || l->name != r->name) return {};
             return seq(l, amp(e->left->right, e->right->right));
         },
         [](const RuleInstance& i) { return amp(seq(act(i.a), i.e1), seq(act(i.a), i.e2)); }},
        {"act-oplus-ldist", "a ; (e1 +[r] e2)", "(a ; e1) +[r] (a ; e2)",
         [](const Expr& e) -> R {
             if (!kind(e, K::Seq) || !kind(e->left, K::Act) || !kind(e->right, K::OPlus)) return {};
             return oplus(seq(e->left, e->right->left), e->right->prob, seq(e->left, e->right->right));
         },
         [](const RuleInstance& i) { return seq(act(i.a), oplus(i.e1, i.r, i.e2)); }},
        {"act-oplus-ldist-rev", "(a ; e1) +[r] (a ; e2)", "a ; (e1 +[r] e2)",
         [](const Expr& e) -> R {
             if (!kind(e, K::OPlus) || !kind(e->left, K::Seq) || !kind(e->right, K::Seq)) return {};
             const Expr &l = e->left->left, &r = e->right->left;
             if (!kind(l, K::Act) || !kind(r, K::Act) || l->name != r->name) return {};
             return seq(l, oplus(e->left->right, e->prob, e->right->right));
         },
         [](const RuleInstance& i) { return oplus(seq(act(i.a), i.e1), i.r, seq(act(i.a), i.e2)); }},
        {"fixpoint-unfold", "fix x e", "e[fix x e/x]",
         [](const Expr& e) -> R { if (!kind(e, K::Fix)) return {}; return substitute(e->left, e, e->name); },
         [](const RuleInstance& i) { return fix(i.x, i.body); }},
    };
    return all;
}

inline const RewriteRule& rule(const std::string& name) {
    for (const auto& r : rules())
        if (r.name == name) return r;
    throw Error(ErrorKind::InvalidArgument, "unknown rule '" + name + "'");
}

/// Applies `rule` at `position` (a string of L/R child steps; a fix body is L).
inline Expr apply_rule(const Expr& e, const RewriteRule& rule, const std::string& position = "") {
    std::function<Expr(const Expr&, std::size_t)> go = [&](const Expr& n, std::size_t i) -> Expr {
        if (i == position.size()) {
            auto out = rule.rewrite(n);
            if (!out) throw Error(ErrorKind::NoMatch, "rule " + rule.name + " does not match at " + detail::render_path(position));
            return *out;
        }
        char step = position[i];
        const Expr& child = step == 'L' ? n->left : n->right;
        if ((step != 'L' && step != 'R') || !child)
            throw Error(ErrorKind::NoMatch, "no subterm at " + detail::render_path(position));
        Expr c = go(child, i + 1);
        switch (n->kind) {
            case ExprKind::Amp: return step == 'L' ? ex::amp(c, n->right) : ex::amp(n->left, c);
            case ExprKind::Seq: return step == 'L' ? ex::seq(c, n->right) : ex::seq(n->left, c);
            case ExprKind::OPlus: return step == 'L' ? ex::oplus(c, n->prob, n->right) : ex::oplus(n->left, n->prob, c);
            case ExprKind::Fix: return ex::fix(n->name, c);
            default: throw Error(ErrorKind::NoMatch, "no subterm at " + detail::render_path(position));
        }
    };
    Expr out = go(e, 0);
    validate_structure(out);
    return out;
}

/// Resource caps for normalisation.
struct NormalizeLimits {
    std::size_t max_groups = 100'000; ///< &-groups across all probabilistic branches
    std::size_t max_unfolds = 10'000; ///< fix unrollings
};

namespace detail {

// Head normal form: a binary tree of probabilistic choices whose leaves are
// &-groups of skips and letter-guarded continuations (fail leaves dropped).
struct Hnf;
using HnfPtr = std::shared_ptr<const Hnf>;

struct Group {
    Natural skips;
    std::vector<std::pair<std::string, Expr>> conts; ///< (letter, continuation)
};

struct Hnf {
    bool choice = false;
    Rational prob;
    HnfPtr left, right;
    Group group;
};

class HeadNormalizer {
public:
    explicit HeadNormalizer(NormalizeLimits limits) : limits_(limits) {}

    HnfPtr run(const Expr& e) {
        switch (e->kind) {
            case ExprKind::Skip: return leaf(Group{Natural(1), {}});
            case ExprKind::Fail: return leaf(Group{});
            case ExprKind::Act: return leaf(Group{Natural(0), {{e->name, ex::skip()}}});
            case ExprKind::Var: throw Error(ErrorKind::UnboundVariable, "cannot normalise free variable '" + e->name + "'");
            case ExprKind::OPlus: return choice(e->prob, run(e->left), run(e->right));
            case ExprKind::Amp: return amp(run(e->left), run(e->right));
            case ExprKind::Seq:
                if (is(e->left, ExprKind::Act)) return leaf(Group{Natural(0), {{e->left->name, e->right}}});
                return seq(run(e->left), e->right);
            case ExprKind::Fix:
                if (++unfolds_ > limits_.max_unfolds)
                    throw Error(ErrorKind::SupportExplosion, "normalize: fix unrolling cap reached");
                return run(substitute(e->left, e, e->name));
        }
        throw Error(ErrorKind::InvalidArgument, "bad expression node");
    }

private:
    HnfPtr leaf(Group g) {
        if (++groups_ > limits_.max_groups) throw Error(ErrorKind::SupportExplosion, "normalize: term size cap reached");
        auto h = std::make_shared<Hnf>();
        h->group = std::move(g);
        return h;
    }

    HnfPtr choice(const Rational& r, HnfPtr l, HnfPtr rr) {
        auto h = std::make_shared<Hnf>();
        h->choice = true;
        h->prob = r;
        h->left = std::move(l);
        h->right = std::move(rr);
        return h;
    }

    // (f1 +r f2) & g -> (f1 & g) +r (f2 & g), and symmetrically; groups merge.
    HnfPtr amp(const HnfPtr& a, const HnfPtr& b) {
        if (a->choice) return choice(a->prob, amp(a->left, b), amp(a->right, b));
        if (b->choice) return choice(b->prob, amp(a, b->left), amp(a, b->right));
        Group g;
        g.skips = a->group.skips + b->group.skips;
        g.conts = a->group.conts;
        g.conts.insert(g.conts.end(), b->group.conts.begin(), b->group.conts.end());
        return leaf(std::move(g));
    }

    // Distributes `;` over the head form of the left operand: skip;e -> e,
    // fail;e -> fail, (a;d);e -> a;(d;e).
    HnfPtr seq(const HnfPtr& h, const Expr& rhs) {
        if (h->choice) return choice(h->prob, seq(h->left, rhs), seq(h->right, rhs));
        Group g;
        for (const auto& [a, d] : h->group.conts) g.conts.emplace_back(a, is(d, ExprKind::Skip) ? rhs : ex::seq(d, rhs));
        HnfPtr out = leaf(std::move(g));
        auto k = h->group.skips.to_u64();
        if (!k) throw Error(ErrorKind::SupportExplosion, "normalize: multiplicity too large");
        if (*k == 0) return out;
        HnfPtr r = run(rhs);
        for (std::uint64_t i = 0; i < *k; ++i) out = amp(out, r);
        return out;
    }

    NormalizeLimits limits_;
    std::size_t groups_ = 0;
    std::size_t unfolds_ = 0;
};

// continuation lists per letter, in alphabet order
inline std::vector<std::vector<Expr>> by_letter(const Group& g, const Alphabet& alphabet) {
    std::vector<std::vector<Expr>> out(alphabet.size());
    for (const auto& [a, d] : g.conts) out[alphabet.index(a)].push_back(d);
    return out;
}

inline Expr build_group(const Group& g, const Alphabet& alphabet) {
    std::vector<Expr> items;
    auto k = g.skips.to_u64();
    if (!k || *k > 1'000'000) throw Error(ErrorKind::SupportExplosion, "normalize: too many skip leaves");
    for (std::uint64_t i = 0; i < *k; ++i) items.push_back(ex::skip());
    auto per = by_letter(g, alphabet);
    for (std::size_t l = 0; l < per.size(); ++l) {
        Expr cont = per[l].empty() ? ex::fail() : ex::amp_n(per[l]);
        items.push_back(ex::seq(ex::act(alphabet.name(static_cast<Letter>(l))), cont));
    }
    return ex::amp_n(items);
}

inline Expr build(const HnfPtr& h, const Alphabet& alphabet) {
    if (h->choice) return ex::oplus(build(h->left, alphabet), h->prob, build(h->right, alphabet));
    return build_group(h->group, alphabet);
}

} // namespace detail

/**
 * Head normal form of a closed expression:
 *
 *     f ::= f +[r] f | g      g ::= g & g | h      h ::= a ; e | skip
 *
 * Every &-group lists its skips first and then exactly one a ; e per letter in
 * alphabet order, with e = fail for letters the group cannot read. The
 * continuations e are arbitrary expressions.
 */
inline Expr normalize(const Expr& e, const Alphabet& alphabet, NormalizeLimits limits = {}) {
    validate(e, alphabet);
    detail::HeadNormalizer hn(limits);
    return detail::build(hn.run(e), alphabet);
}

/// One outcome of a derivative: empty-word multiplicity and continuation
/// multisets per letter (sorted by printed form).
struct BrzOutcome {
    Natural eps;
    std::vector<std::vector<Expr>> succ;

    std::vector<std::vector<std::string>> key() const {
        std::vector<std::vector<std::string>> k;
        for (const auto& bag : succ) {
            std::vector<std::string> names;
            for (const auto& e : bag) names.push_back(print(e));
            k.push_back(std::move(names));
        }
        return k;
    }
};

/// Distribution over BrzOutcome with positive weights summing to one.
using BrzStep = std::vector<std::pair<BrzOutcome, Rational>>;

/**
 * Syntactic derivative read off the head normal form: each probabilistic
 * leaf contributes its skip count and, per letter, the continuations under
 * that letter. Continuations equal to fail contribute nothing and are
 * dropped. Outcomes with identical printed continuations are merged.
 */
inline BrzStep brzozowski(const Expr& e, const Alphabet& alphabet, NormalizeLimits limits = {}) {
    validate(e, alphabet);
    detail::HeadNormalizer hn(limits);
    detail::HnfPtr h = hn.run(e);
    std::map<std::pair<Natural, std::vector<std::vector<std::string>>>, std::pair<BrzOutcome, Rational>> acc;
    std::function<void(const detail::HnfPtr&, const Rational&)> walk = [&](const detail::HnfPtr& n, const Rational& w) {
        if (sgn(w) == 0) return;
        if (n->choice) {
            walk(n->left, w * n->prob);
            walk(n->right, w * (Rational(1) - n->prob));
            return;
        }
        BrzOutcome o;
        o.eps = n->group.skips;
        o.succ = detail::by_letter(n->group, alphabet);
        for (auto& bag : o.succ) {
            std::erase_if(bag, [](const Expr& d) { return is(d, ExprKind::Fail); });
            std::stable_sort(bag.begin(), bag.end(), [](const Expr& x, const Expr& y) { return print(x) < print(y); });
        }
        auto k = std::make_pair(o.eps, o.key());
        auto it = acc.find(k);
        if (it == acc.end())
            acc.emplace(k, std::make_pair(std::move(o), w));
        else
            it->second.second += w;
    };
    walk(h, Rational(1));
    BrzStep out;
    for (auto& [k, v] : acc) out.push_back(std::move(v));
    return out;
}

/**
 * Rebuilds the depth-n fragment from a derivative: every outcome yields the
 * empty word with its multiplicity plus, for each letter a, the a-shifted
 * independent sum of its continuations evaluated at depth n-1.
 */
inline FinDist reconstruct(const BrzStep& step, int n, const Alphabet& alphabet, const Limits& limits = {}) {
    ExprEvaluator ev(limits);
    ev.set_alphabet(alphabet);
    std::vector<std::pair<Rational, FinDist>> br;
    for (const auto& [o, w] : step) {
        FinDist acc = FinDist::dirac(TruncMultiset(n, {{Word(), o.eps}}));
        if (n > 0) {
            for (std::size_t l = 0; l < o.succ.size(); ++l) {
                if (o.succ[l].empty()) continue;
                FinDist inner = FinDist::empty(n - 1);
                for (const auto& d : o.succ[l]) inner = amp2(inner, ev.eval(d, n - 1), limits);
                acc = amp2(acc, shift(Word(1, static_cast<char>(l)), inner, n), limits);
            }
        }
        br.emplace_back(w, std::move(acc));
    }
    return mix(br, limits);
}

} // namespace pka
