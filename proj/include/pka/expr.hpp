#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pka/error.hpp"
#include "pka/numeric.hpp"

namespace pka {

enum class ExprKind { Var, Act, Amp, OPlus, Seq, Fix, Skip, Fail };

struct ExprNode;

/// Immutable, structurally shared expression tree.
using Expr = std::shared_ptr<const ExprNode>;

/**
 * One node of the expression language
 *
 *     e ::= x | a | e & e | e +[r] e | e ; e | fix x . e | skip | fail
 *
 * `name` is the variable for Var and Fix and the letter for Act. For Fix the
 * body is `left`. Every node gets a process-unique id on construction, which
 * evaluators use as a memo key.
 */
struct ExprNode {
    ExprKind kind;
    std::string name;
    Rational prob;
    Expr left;
    Expr right;
    std::uint64_t id;

    ExprNode(ExprKind k, std::string n, Rational p, Expr l, Expr r)
        : kind(k), name(std::move(n)), prob(std::move(p)), left(std::move(l)), right(std::move(r)),
          id(next_id()) {}

    const Expr& body() const { return left; }

private:
    static std::uint64_t next_id() {
        static std::atomic<std::uint64_t> counter{1};
        return counter.fetch_add(1, std::memory_order_relaxed);
    }
};

namespace ex {

inline Expr var(std::string x) { return std::make_shared<const ExprNode>(ExprKind::Var, std::move(x), Rational(0), nullptr, nullptr); }
inline Expr act(std::string a) { return std::make_shared<const ExprNode>(ExprKind::Act, std::move(a), Rational(0), nullptr, nullptr); }
inline Expr skip() { return std::make_shared<const ExprNode>(ExprKind::Skip, "", Rational(0), nullptr, nullptr); }
inline Expr fail() { return std::make_shared<const ExprNode>(ExprKind::Fail, "", Rational(0), nullptr, nullptr); }
inline Expr amp(Expr l, Expr r) { return std::make_shared<const ExprNode>(ExprKind::Amp, "", Rational(0), std::move(l), std::move(r)); }
inline Expr seq(Expr l, Expr r) { return std::make_shared<const ExprNode>(ExprKind::Seq, "", Rational(0), std::move(l), std::move(r)); }
inline Expr fix(std::string x, Expr body) { return std::make_shared<const ExprNode>(ExprKind::Fix, std::move(x), Rational(0), std::move(body), nullptr); }

inline Expr oplus(Expr l, Rational r, Expr rhs) {
    if (!is_probability(r)) throw Error(ErrorKind::InvalidArgument, "probability " + to_string(r) + " outside [0,1]");
    return std::make_shared<const ExprNode>(ExprKind::OPlus, "", std::move(r), std::move(l), std::move(rhs));
}

/// e* = fix x . skip & (e ; x); `x` must not occur free in e.
inline Expr star(Expr e, std::string x) { return fix(x, amp(skip(), seq(std::move(e), var(x)))); }

/// Right-nested n-ary &: amp(e1,...,ek) = e1 & amp(e2,...,ek). Zero operands give fail.
inline Expr amp_n(const std::vector<Expr>& es) {
    if (es.empty()) return fail();
    Expr acc = es.back();
    for (auto it = es.rbegin() + 1; it != es.rend(); ++it) acc = amp(*it, acc);
    return acc;
}

/**
 * n-ary probabilistic choice: zero-weight heads are dropped, a weight-one
 * head wins outright, otherwise e1 +[p1] (rest renormalised by 1 - p1).
 */
inline Expr oplus_n(const std::vector<std::pair<Expr, Rational>>& branches) {
    Rational total(0);
    for (const auto& b : branches) {
        if (!is_probability(b.second)) throw Error(ErrorKind::InvalidArgument, "probability outside [0,1]");
        total += b.second;
    }
    if (total != 1) throw Error(ErrorKind::InvalidArgument, "oplus weights sum to " + to_string(total) + ", not 1");
    std::function<Expr(std::size_t, Rational)> go = [&](std::size_t i, Rational mass) -> Expr {
        // `mass` is the unnormalised weight remaining from branch i onward.
        Rational p = branches[i].second / mass;
        if (sgn(p) == 0) return go(i + 1, mass);
        if (p == 1) return branches[i].first;
        Rational rest = mass - branches[i].second;
        return oplus(branches[i].first, p, go(i + 1, rest));
    };
    return go(0, Rational(1));
}

} // namespace ex

inline bool is(const Expr& e, ExprKind k) { return e && e->kind == k; }

/// Number of AST nodes.
inline std::size_t expr_size(const Expr& e) {
    if (!e) return 0;
    return 1 + expr_size(e->left) + expr_size(e->right);
}

/// Exact syntactic identity, including bound variable names.
inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->name != b->name) return false;
    if (a->kind == ExprKind::OPlus && a->prob != b->prob) return false;
    return structurally_equal(a->left, b->left) && structurally_equal(a->right, b->right);
}

namespace detail {
inline bool alpha_eq(const Expr& a, const Expr& b, std::vector<std::pair<std::string, std::string>>& scope) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::Var: {
            for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
                bool l = it->first == a->name, r = it->second == b->name;
                if (l || r) return l && r;
            }
            return a->name == b->name;
        }
        case ExprKind::Act: return a->name == b->name;
        case ExprKind::Skip:
        case ExprKind::Fail: return true;
        case ExprKind::Fix: {
            scope.emplace_back(a->name, b->name);
            bool ok = alpha_eq(a->left, b->left, scope);
            scope.pop_back();
            return ok;
        }
        case ExprKind::OPlus:
            if (a->prob != b->prob) return false;
            [[fallthrough]];
        default: return alpha_eq(a->left, b->left, scope) && alpha_eq(a->right, b->right, scope);
    }
}
} // namespace detail

/// Syntactic identity up to renaming of bound variables.
inline bool alpha_equal(const Expr& a, const Expr& b) {
    std::vector<std::pair<std::string, std::string>> scope;
    return detail::alpha_eq(a, b, scope);
}

/// Free variables.
inline std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    std::vector<std::string> bound;
    std::function<void(const Expr&)> go = [&](const Expr& n) {
        if (!n) return;
        switch (n->kind) {
            case ExprKind::Var:
                if (std::find(bound.begin(), bound.end(), n->name) == bound.end()) out.insert(n->name);
                return;
            case ExprKind::Fix:
                bound.push_back(n->name);
                go(n->left);
                bound.pop_back();
                return;
            default:
                go(n->left);
                go(n->right);
        }
    };
    go(e);
    return out;
}

inline bool is_closed(const Expr& e) { return free_vars(e).empty(); }

/// Every variable name occurring anywhere, bound or free.
inline void collect_names(const Expr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Var || e->kind == ExprKind::Fix) out.insert(e->name);
    collect_names(e->left, out);
    collect_names(e->right, out);
}

/// Letters used by Act nodes.
inline void collect_letters(const Expr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Act) out.insert(e->name);
    collect_letters(e->left, out);
    collect_letters(e->right, out);
}

} // namespace pka
