#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "support.hpp"

using namespace pka;
using namespace testutil;

namespace {

const Alphabet& A = ab();

// Target grammar of the normal form:
//   f ::= f +[r] f | g     g ::= g & g | h     h ::= a ; f | skip | fail
bool is_h(const Expr& e, std::vector<int>& letters);
bool is_f(const Expr& e);

bool is_g(const Expr& e, std::vector<int>& letters) {
    if (is(e, ExprKind::Amp)) return is_g(e->left, letters) && is_g(e->right, letters);
    return is_h(e, letters);
}

bool is_h(const Expr& e, std::vector<int>& letters) {
    if (is(e, ExprKind::Skip) || is(e, ExprKind::Fail)) return true;
    if (is(e, ExprKind::Seq) && is(e->left, ExprKind::Act)) {
        ++letters[A.index(e->left->name)];
        return true;
    }
    return false;
}

bool is_f(const Expr& e) {
    if (is(e, ExprKind::OPlus)) return is_f(e->left) && is_f(e->right);
    std::vector<int> letters(A.size(), 0);
    if (!is_g(e, letters)) return false;
    // each maximal group has exactly one continuation per letter
    return std::all_of(letters.begin(), letters.end(), [](int k) { return k == 1; });
}

RewriteRule fake(std::string name, std::function<std::optional<Expr>(const Expr&)> rw, std::function<Expr(const RuleInstance&)> inst) {
    return RewriteRule{std::move(name), "", "", std::move(rw), std::move(inst)};
}

} // namespace

TEST(Rules, Catalogue) {
    const auto& rs = rules();
    EXPECT_EQ(rs.size(), 29u);
    std::set<std::string> names;
    for (const auto& r : rs) {
        EXPECT_TRUE(names.insert(r.name).second) << r.name;
        EXPECT_FALSE(r.lhs.empty());
        EXPECT_FALSE(r.rhs.empty());
    }
    EXPECT_THROW(rule("no-such-rule"), Error);
}

TEST(ApplyRule, Examples) {
    Alphabet abc({"a", "b", "c"});
    EXPECT_TRUE(structurally_equal(apply_rule(P("(a & b) ; c", abc), rule("seq-amp-rdist")), P("(a ; c) & (b ; c)", abc)));
    EXPECT_TRUE(structurally_equal(apply_rule(P("a +[1] b", abc), rule("oplus-elim")), P("a", abc)));
    EXPECT_TRUE(structurally_equal(apply_rule(P("skip ; (a & b)", abc), rule("seq-left-id")), P("a & b", abc)));
    EXPECT_TRUE(structurally_equal(apply_rule(P("a & b", abc), rule("amp-comm")), P("b & a", abc)));
    EXPECT_TRUE(structurally_equal(apply_rule(P("a ; (b +[1/3] c)", abc), rule("act-oplus-ldist")), P("(a ; b) +[1/3] (a ; c)", abc)));
    EXPECT_EQ(print(apply_rule(P("(a +[1/2] b) +[1/3] skip", abc), rule("oplus-skew-assoc"))), "a +[1/6] (b +[1/5] skip)");
}

TEST(ApplyRule, AtPosition) {
    Alphabet abc({"a", "b", "c"});
    Expr e = P("c & ((a & b) ; c)", abc);
    EXPECT_TRUE(structurally_equal(apply_rule(e, rule("seq-amp-rdist"), "R"), P("c & ((a ; c) & (b ; c))", abc)));
    Expr f = P("fix x (skip ; (a ; x))", abc);
    EXPECT_TRUE(structurally_equal(apply_rule(f, rule("seq-left-id"), "L"), P("fix x (a ; x)", abc)));
}

TEST(ApplyRule, NoMatch) {
    auto kind = [](const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidArgument;
    };
    EXPECT_EQ(kind([] { apply_rule(P("a & b", A), rule("seq-amp-rdist")); }), ErrorKind::NoMatch);
    EXPECT_EQ(kind([] { apply_rule(P("a & b", A), rule("amp-comm"), "LL"); }), ErrorKind::NoMatch);
    EXPECT_EQ(kind([] { apply_rule(P("a & b", A), rule("amp-comm"), "X"); }), ErrorKind::NoMatch);
    // the reversed distributivity needs the same right operand on both sides
    EXPECT_EQ(kind([] { apply_rule(P("(a ; b) & (b ; a)", A), rule("seq-amp-rdist-rev")); }), ErrorKind::NoMatch);
    EXPECT_EQ(kind([] { apply_rule(P("a +[1/2] b", A), rule("oplus-elim")); }), ErrorKind::NoMatch);
}

TEST(ApplyRule, FixpointUnfold) {
    Expr e = P("a*", A);
    Expr once = apply_rule(e, rule("fixpoint-unfold"));
    EXPECT_TRUE(structurally_equal(once, substitute(e->left, e, e->name)));
    for (int n = 0; n <= 4; ++n) EXPECT_EQ(eval_closed(once, n, A), eval_closed(e, n, A));
}

TEST(Soundness, EveryRuleOnRandomInstances) {
    for (const auto& rep : check_all_rules(200, 5, 99, A)) {
        EXPECT_EQ(rep.instances, 200u);
        EXPECT_EQ(rep.passed, rep.instances) << rep.rule << ": " << rep.counterexample;
    }
}

TEST(Soundness, UnsoundRulesAreCaught) {
    // & is not idempotent: two agents are not one
    auto amp_idem = fake(
        "amp-idem", [](const Expr& e) -> std::optional<Expr> {
            if (is(e, ExprKind::Amp) && alpha_equal(e->left, e->right)) return e->left;
            return std::nullopt;
        },
        [](const RuleInstance& i) { return ex::amp(i.e1, i.e1); });
    // +[r] is skew-commutative, not commutative
    auto oplus_comm = fake(
        "oplus-comm", [](const Expr& e) -> std::optional<Expr> {
            if (is(e, ExprKind::OPlus)) return ex::oplus(e->right, e->prob, e->left);
            return std::nullopt;
        },
        [](const RuleInstance& i) { return ex::oplus(i.e1, Rational(1, 3), i.e2); });
    // left distributivity of ; over +[r] needs an atomic left operand
    auto seq_ldist = fake(
        "seq-oplus-ldist", [](const Expr& e) -> std::optional<Expr> {
            if (is(e, ExprKind::Seq) && is(e->right, ExprKind::OPlus))
                return ex::oplus(ex::seq(e->left, e->right->left), e->right->prob, ex::seq(e->left, e->right->right));
            return std::nullopt;
        },
        [](const RuleInstance& i) {
            return ex::seq(ex::amp(ex::skip(), ex::seq(ex::act(i.a), i.e1)), ex::oplus(ex::act("a"), Rational(1, 2), ex::act("b")));
        });
    // fail does not absorb & from the right
    auto amp_fail = fake(
        "amp-fail", [](const Expr& e) -> std::optional<Expr> {
            if (is(e, ExprKind::Amp) && is(e->right, ExprKind::Fail)) return ex::fail();
            return std::nullopt;
        },
        [](const RuleInstance& i) { return ex::amp(ex::amp(ex::skip(), i.e1), ex::fail()); });
    for (const auto& r : {amp_idem, oplus_comm, seq_ldist, amp_fail}) {
        RuleReport rep = check_rule(r, 50, 5, 99, A);
        EXPECT_LT(rep.passed, rep.instances) << r.name;
        EXPECT_FALSE(rep.counterexample.empty()) << r.name;
    }
}

TEST(Normalize, Examples) {
    EXPECT_EQ(print(normalize(P("skip", A), A)), "skip & (a ; fail & b ; fail)");
    Expr na = normalize(P("a", A), A);
    EXPECT_TRUE(is_f(na)) << print(na);
    EXPECT_EQ(eval_closed(na, 3, A), eval_closed(P("a", A), 3, A));
    Expr mix = normalize(P("(skip +[1/2] a) & b", A), A);
    ASSERT_TRUE(is(mix, ExprKind::OPlus)) << print(mix);
    EXPECT_EQ(mix->prob, Rational(1, 2));
    EXPECT_TRUE(is_f(mix)) << print(mix);
    EXPECT_EQ(eval_closed(mix, 3, A), eval_closed(P("(skip +[1/2] a) & b", A), 3, A));
    Expr f = normalize(P("fail", A), A);
    EXPECT_TRUE(is_f(f)) << print(f);
}

TEST(Normalize, CorpusStaysInGrammarAndKeepsSemantics) {
    for (const auto& e : expr_corpus()) {
        Expr nf = normalize(e, A);
        ASSERT_TRUE(is_f(nf)) << print(e) << " -> " << print(nf);
        for (int n = 0; n <= 5; ++n) ASSERT_EQ(eval_closed(nf, n, A), eval_closed(e, n, A)) << print(e) << " -> " << print(nf);
    }
}

TEST(Normalize, BudgetIsEnforced) {
    NormalizeLimits tight;
    tight.max_groups = 2;
    try {
        normalize(P("(a +[1/2] b) & (a +[1/2] b) & (a +[1/2] b)", A), A, tight);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SupportExplosion);
    }
}

TEST(Brzozowski, Examples) {
    BrzStep half = brzozowski(P("a +[1/2] skip", A), A);
    ASSERT_EQ(half.size(), 2u);
    Rational total(0);
    for (const auto& [o, w] : half) {
        EXPECT_EQ(w, Rational(1, 2));
        total += w;
        if (o.eps == Natural(1)) {
            EXPECT_TRUE(o.succ[0].empty());
        } else {
            EXPECT_EQ(o.eps, Natural(0));
            ASSERT_EQ(o.succ[0].size(), 1u);
            EXPECT_EQ(print(o.succ[0][0]), "skip");
        }
        EXPECT_TRUE(o.succ[1].empty());
    }
    EXPECT_EQ(total, 1);

    BrzStep f = brzozowski(P("fail", A), A);
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].first.eps, Natural(0));
    EXPECT_TRUE(f[0].first.succ[0].empty() && f[0].first.succ[1].empty());

    BrzStep star = brzozowski(P("a*", A), A);
    ASSERT_EQ(star.size(), 1u);
    EXPECT_EQ(star[0].second, 1);
    EXPECT_EQ(star[0].first.eps, Natural(1));
    ASSERT_EQ(star[0].first.succ[0].size(), 1u);
    EXPECT_EQ(print(star[0].first.succ[0][0]), "a*");
    EXPECT_TRUE(star[0].first.succ[1].empty());
}

TEST(Brzozowski, MergesEqualOutcomes) {
    BrzStep s = brzozowski(P("(a +[1/3] a) & (skip +[1/2] skip)", A), A);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].second, 1);
    EXPECT_EQ(s[0].first.eps, Natural(1));
}

TEST(Brzozowski, DiagramCommutesOnCorpus) {
    for (const auto& e : expr_corpus()) {
        BrzStep step = brzozowski(e, A);
        Rational total(0);
        for (const auto& [o, w] : step) {
            ASSERT_GT(sgn(w), 0);
            total += w;
        }
        ASSERT_EQ(total, 1);
        for (int n = 0; n <= 4; ++n) ASSERT_EQ(reconstruct(step, n, A), eval_closed(e, n, A)) << print(e) << " at " << n;
    }
}

TEST(NaryChoice, PermutationInvariant) {
    SplitMix64 rng(4242);
    const auto& c = expr_corpus();
    for (int t = 0; t < 100; ++t) {
        std::size_t k = 2 + rng.below(3);
        std::vector<std::pair<Expr, Rational>> br;
        std::vector<std::uint64_t> w(k);
        std::uint64_t total = 0;
        for (auto& x : w) total += (x = 1 + rng.below(5));
        for (std::size_t i = 0; i < k; ++i) {
            Rational r(static_cast<long>(w[i]), static_cast<unsigned long>(total));
            r.canonicalize();
            br.emplace_back(c[rng.below(c.size())], r);
        }
        FinDist base = eval_closed(ex::oplus_n(br), 3, A);
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        while (std::next_permutation(perm.begin(), perm.end())) {
            std::vector<std::pair<Expr, Rational>> p;
            for (auto i : perm) p.push_back(br[i]);
            ASSERT_EQ(eval_closed(ex::oplus_n(p), 3, A), base);
        }
    }
}
