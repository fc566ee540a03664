#pragma once

#include <string>
#include <vector>

#include "pka/expr_eval.hpp"
#include "pka/printer.hpp"
#include "pka/random.hpp"
#include "pka/rewrite.hpp"

namespace pka {

/// Result of checking one rule on random instances.
struct RuleReport {
    std::string rule;
    std::size_t instances = 0;
    std::size_t passed = 0;
    std::string counterexample; ///< "lhs  =/=  rhs" for the first failure
};

/// Random metavariable values; e1..e3 small closed terms, x guarded in body.
inline RuleInstance random_instance(SplitMix64& rng, const Alphabet& alphabet) {
    gen::ExprOptions small;
    small.max_size = 6;
    small.max_support = 500;
    RuleInstance i;
    i.e1 = gen::closed_expr(rng, alphabet, small);
    i.e2 = gen::closed_expr(rng, alphabet, small);
    i.e3 = gen::closed_expr(rng, alphabet, small);
    i.a = alphabet.name(static_cast<Letter>(rng.below(alphabet.size())));
    // the endpoints exercise the degenerate cases of the skew rules
    auto prob = [&]() -> Rational {
        std::uint64_t k = rng.below(10);
        if (k == 0) return Rational(0);
        if (k == 1) return Rational(1);
        return gen::random_prob(rng);
    };
    i.r = prob();
    i.s = prob();
    i.x = "x";
    i.body = gen::fix_body(rng, alphabet, "x", small);
    return i;
}

/**
 * Instantiates `rule` `count` times from substreams of `seed`, rewrites each
 * left-hand side at the root and compares both sides at depth n.
 */
inline RuleReport check_rule(const RewriteRule& rule, std::size_t count, int n, std::uint64_t seed,
                             const Alphabet& alphabet, const Limits& limits = {}) {
    RuleReport rep;
    rep.rule = rule.name;
    for (std::size_t k = 0; k < count; ++k) {
        SplitMix64 rng(seed, k);
        Expr lhs = rule.instance(random_instance(rng, alphabet));
        Expr rhs = apply_rule(lhs, rule);
        ++rep.instances;
        if (check_axiom_instance(lhs, rhs, n, alphabet, {}, limits))
            ++rep.passed;
        else if (rep.counterexample.empty())
            rep.counterexample = print(lhs) + "  =/=  " + print(rhs);
    }
    return rep;
}

inline std::vector<RuleReport> check_all_rules(std::size_t count, int n, std::uint64_t seed, const Alphabet& alphabet,
                                               const Limits& limits = {}) {
    std::vector<RuleReport> out;
    for (const auto& r : rules()) out.push_back(check_rule(r, count, n, seed, alphabet, limits));
    return out;
}

} // namespace pka
