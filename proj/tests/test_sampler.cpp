#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace pka;
using namespace testutil;

namespace {

const Alphabet& A = ab();

// 3 times the bound on E[tv] from Jensen: sum_i sqrt(p_i (1 - p_i) / N) / 2.
double tv_tolerance(const FinDist& exact, std::uint64_t trials) {
    double s = 0;
    for (const auto& [m, w] : exact.support()) {
        double p = w.get_d();
        s += std::sqrt(p * (1 - p) / static_cast<double>(trials));
    }
    return 3 * s / 2 + 1e-12;
}

} // namespace

TEST(SplitMix, DeterministicStreams) {
    SplitMix64 a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    std::uint64_t x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
    EXPECT_NE(x, d.next());
}

TEST(SplitMix, BelowStaysInRange) {
    SplitMix64 rng(1);
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 7000; ++i) ++hist[rng.below(std::uint64_t(7))];
    for (int h : hist) EXPECT_NEAR(h, 1000, 4 * std::sqrt(1000.0 * 6 / 7));
    mpz_class big("340282366920938463463374607431768211457"); // 2^128 + 1
    for (int i = 0; i < 200; ++i) {
        mpz_class u = rng.below(big);
        EXPECT_GE(u, 0);
        EXPECT_LT(u, big);
    }
}

TEST(SplitMix, ExactBernoulli) {
    SplitMix64 rng(2);
    for (int i = 0; i < 100; ++i) {
        EXPECT_FALSE(rng.bernoulli(Rational(0)));
        EXPECT_TRUE(rng.bernoulli(Rational(1)));
    }
    const int N = 30000;
    int hits = 0;
    for (int i = 0; i < N; ++i) hits += rng.bernoulli(Rational(1, 3));
    EXPECT_NEAR(hits, N / 3.0, 4 * std::sqrt(N * (1.0 / 3) * (2.0 / 3)));
    // a denominator too wide for 64 bits
    Rational tiny(mpz_class(1), mpz_class("1000000000000000000000000000000"));
    for (int i = 0; i < 100; ++i) EXPECT_FALSE(rng.bernoulli(tiny));
}

TEST(Sample, PointMassesAreHitEveryTime) {
    Alphabet a({"a"});
    struct Case {
        const char* text;
        int n;
    };
    for (auto [text, n] : {Case{"a*", 3}, Case{"(a;a*)*", 4}, Case{"skip & skip", 2}, Case{"fail ; a*", 2}}) {
        Expr e = P(text, a);
        FinDist exact = eval_closed(e, n, a);
        ASSERT_TRUE(exact.is_dirac());
        for (Schedule s : {Schedule::BreadthFirst, Schedule::DepthFirst}) {
            EmpiricalDist emp = empirical(e, n, 50, 9, a, s);
            ASSERT_EQ(emp.counts.size(), 1u) << text;
            EXPECT_EQ(emp.counts.begin()->first, exact.support()[0].first) << text;
            EXPECT_EQ(tv_distance(emp, exact), 0);
        }
    }
    EmpiricalDist viaaut = empirical(fig_double_star(), 4, 20, 3, a);
    EXPECT_EQ(tv_distance(viaaut, eval_closed(P("(a;a*)*", a), 4, a)), 0);
}

TEST(Sample, RunsAreReproducible) {
    Expr e = P("(a +[1/3] b)* & (a +[1/2] skip)", A);
    EmpiricalDist x = empirical(e, 3, 500, 77, A), y = empirical(e, 3, 500, 77, A);
    EXPECT_EQ(x.counts, y.counts);
    SplitMix64 r1(5, 11), r2(5, 11);
    EXPECT_EQ(sample_run(e, 3, r1, A), sample_run(e, 3, r2, A));
}

TEST(Sample, TotalVariationArithmetic) {
    const Alphabet& AB = A;
    TruncMultiset ma = ms(AB, 1, {{"a", 1}}), mb = ms(AB, 1, {{"b", 1}});
    EmpiricalDist emp;
    emp.depth = 1;
    emp.trials = 10;
    emp.counts = {{ma, 6}, {mb, 4}};
    FinDist half = dist(1, {{ma, "1/2"}, {mb, "1/2"}});
    EXPECT_EQ(tv_distance(emp, half), Rational(1, 10));
    FinDist other = FinDist::dirac(ms(AB, 1, {{"", 1}}));
    EXPECT_EQ(tv_distance(emp, other), 1);
    EXPECT_THROW(tv_distance(emp, FinDist::empty(2)), Error);
}

TEST(Sample, CoinFrequencyWithinFourSigma) {
    Expr e = P("a +[1/3] b", A);
    const std::uint64_t N = 9000;
    EmpiricalDist emp = empirical(e, 1, N, 123, A);
    std::uint64_t as = emp.counts[ms(A, 1, {{"a", 1}})];
    double sd = std::sqrt(N * (1.0 / 3) * (2.0 / 3));
    EXPECT_NEAR(static_cast<double>(as), N / 3.0, 4 * sd);
}

TEST(Sample, SchedulesAgreeWithExact) {
    Expr e = P("((a +[1/2] b) & (b +[1/4] a ; a))*", A);
    FinDist exact = eval_closed(e, 2, A);
    for (Schedule s : {Schedule::BreadthFirst, Schedule::DepthFirst}) {
        EmpiricalDist emp = empirical(e, 2, 20000, 31, A, s);
        EXPECT_LE(tv_distance(emp, exact).get_d(), tv_tolerance(exact, 20000));
    }
}

TEST(Sample, AutomataAgreeWithExact) {
    Automaton frag = fig_fragment(q("1/4"), q("1/4"), q("1/4"));
    FinDist exact = eval_state(frag, frag.start, 2);
    EmpiricalDist emp = empirical(frag, 2, 20000, 8, A);
    EXPECT_LE(tv_distance(emp, exact).get_d(), tv_tolerance(exact, 20000));
    int used = 0;
    for (const auto& aut : aut_corpus()) {
        FinDist ex2 = eval_state(aut, aut.start, 2);
        if (ex2.size() > 40) continue;
        EmpiricalDist e2 = empirical(aut, 2, 5000, 40 + used, A);
        EXPECT_LE(tv_distance(e2, ex2).get_d(), tv_tolerance(ex2, 5000)) << json_io::automaton(aut).dump();
        if (++used == 15) break;
    }
    EXPECT_EQ(used, 15);
}

TEST(Sample, CorpusExpressionsAgreeWithExact) {
    int used = 0;
    for (const auto& e : expr_corpus()) {
        FinDist exact = eval_closed(e, 3, A);
        if (exact.size() < 2 || exact.size() > 40) continue;
        EmpiricalDist emp = empirical(e, 3, 5000, 1000 + used, A);
        EXPECT_LE(tv_distance(emp, exact).get_d(), tv_tolerance(exact, 5000)) << print(e);
        if (++used == 20) break;
    }
    EXPECT_EQ(used, 20);
}

TEST(Sample, StepCapRaises) {
    Alphabet a({"a"});
    SampleLimits tiny;
    tiny.max_steps = 10;
    ExprSampler s(P("(a;a*)*", a), a, tiny);
    SplitMix64 rng(1);
    try {
        s.run(6, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SupportExplosion);
    }
}

TEST(Sample, RejectsBadArguments) {
    SplitMix64 rng(1);
    EXPECT_THROW(sample_run(P("a", A), -1, rng, A), Error);
    EXPECT_THROW(empirical(P("a", A), 1, 0, 1, A), Error);
    AutomatonSampler s(fig_star());
    EXPECT_THROW(s.run_from(9, 1, rng), Error);
}
