#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pka/automaton.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/expr_eval.hpp"
#include "pka/parser.hpp"
#include "pka/syntax.hpp"

namespace pka {

/// Number of distinct nodes reachable from e (shared subtrees counted once).
inline std::size_t dag_size(const Expr& e) {
    std::set<std::uint64_t> seen;
    std::function<void(const Expr&)> go = [&](const Expr& n) {
        if (!n || !seen.insert(n->id).second) return;
        go(n->left);
        go(n->right);
    };
    go(e);
    return seen.size();
}

/// Size of e as a tree, saturating at 2^64 - 1. Linear in the DAG size.
inline std::uint64_t tree_size(const Expr& e) {
    std::unordered_map<std::uint64_t, std::uint64_t> memo;
    std::function<std::uint64_t(const Expr&)> go = [&](const Expr& n) -> std::uint64_t {
        if (!n) return 0;
        if (auto it = memo.find(n->id); it != memo.end()) return it->second;
        std::uint64_t s = 1, l = go(n->left), r = go(n->right);
        if (__builtin_add_overflow(s, l, &s) || __builtin_add_overflow(s, r, &s)) s = UINT64_MAX;
        memo.emplace(n->id, s);
        return s;
    };
    return go(e);
}

/**
 * Rewrites every composition into the form a ; d by pushing the right
 * operand into the terminal positions of the left one.
 */
inline Expr eliminate_compositions(const Expr& e) {
    std::unordered_map<std::uint64_t, Expr> memo;
    std::function<Expr(const Expr&)> go = [&](const Expr& n) -> Expr {
        if (auto it = memo.find(n->id); it != memo.end()) return it->second;
        Expr out;
        switch (n->kind) {
            case ExprKind::Seq: out = subst_terminal(go(n->left), go(n->right)); break;
            case ExprKind::Amp: out = ex::amp(go(n->left), go(n->right)); break;
            case ExprKind::OPlus: out = ex::oplus(go(n->left), n->prob, go(n->right)); break;
            case ExprKind::Fix: out = ex::fix(n->name, go(n->left)); break;
            default: out = n; break;
        }
        memo.emplace(n->id, out);
        return out;
    };
    return go(e);
}

/**
 * Builds an automaton whose start state has the semantics of the closed
 * expression e: one state per subexpression after composition
 * elimination, a bare letter a treated as a ; skip, and every variable
 * occurrence a one-successor choice state pointing back at its fix.
 */
inline Automaton expr_to_automaton(const Expr& e, const Alphabet& alphabet) {
    validate(e, alphabet);
    if (!is_closed(e)) throw Error(ErrorKind::Closedness, "expression to convert has free variables");
    Expr core = eliminate_compositions(rename_apart(e));

    Automaton aut;
    aut.alphabet = alphabet;
    std::unordered_map<std::uint64_t, StateId> by_node;
    std::unordered_map<std::uint64_t, StateId> by_binder; // fix node id -> state for its variable
    std::vector<std::pair<std::string, std::pair<std::uint64_t, StateId>>> scope;
    std::optional<StateId> skip_state;

    auto add = [&](State s) {
        s.name = "s" + std::to_string(aut.size());
        return aut.add(std::move(s));
    };
    auto shared_skip = [&]() {
        if (!skip_state) skip_state = add(st::skip());
        return *skip_state;
    };

    std::function<StateId(const Expr&)> go = [&](const Expr& n) -> StateId {
        if (n->kind == ExprKind::Var) {
            for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
                if (it->first != n->name) continue;
                auto [binder, fix_state] = it->second;
                if (auto jt = by_binder.find(binder); jt != by_binder.end()) return jt->second;
                StateId v = add(st::amp({{fix_state, Natural(1)}}));
                by_binder.emplace(binder, v);
                return v;
            }
            throw Error(ErrorKind::UnboundVariable, "unbound variable '" + n->name + "'");
        }
        if (auto it = by_node.find(n->id); it != by_node.end()) return it->second;
        StateId id = 0;
        switch (n->kind) {
            case ExprKind::Skip: id = add(st::skip()); break;
            case ExprKind::Fail: id = add(st::fail()); break;
            case ExprKind::Act: id = add(st::act(alphabet.index(n->name), shared_skip())); break;
            case ExprKind::Seq: {
                if (!is(n->left, ExprKind::Act))
                    throw Error(ErrorKind::MalformedSystem, "composition not of the form a ; e after elimination");
                id = add(st::act(alphabet.index(n->left->name), 0));
                StateId t = go(n->right);
                aut.states[id].next = t;
                break;
            }
            case ExprKind::Amp: {
                id = add(st::amp({}));
                StateId l = go(n->left), r = go(n->right);
                if (l == r)
                    aut.states[id].multiset = {{l, Natural(2)}};
                else
                    aut.states[id].multiset = {{std::min(l, r), Natural(1)}, {std::max(l, r), Natural(1)}};
                break;
            }
            case ExprKind::OPlus: {
                id = add(st::oplus({}));
                const Rational& r = n->prob;
                std::vector<std::pair<StateId, Rational>> d;
                if (sgn(r) == 0) {
                    d = {{go(n->right), Rational(1)}};
                } else if (r == 1) {
                    d = {{go(n->left), Rational(1)}};
                } else {
                    StateId l = go(n->left), rr = go(n->right);
                    if (l == rr)
                        d = {{l, Rational(1)}};
                    else
                        d = {{l, r}, {rr, Rational(1) - r}};
                }
                aut.states[id].dist = std::move(d);
                break;
            }
            case ExprKind::Fix: {
                id = add(st::amp({}));
                scope.emplace_back(n->name, std::make_pair(n->id, id));
                StateId b = go(n->left);
                scope.pop_back();
                aut.states[id].multiset = {{b, Natural(1)}};
                break;
            }
            case ExprKind::Var: break;
        }
        by_node.emplace(n->id, id);
        return id;
    };
    aut.start = go(core);
    validate_automaton(aut);
    return aut;
}

/// Equations x = e with the restricted shape used for automata.
struct EquationSystem {
    std::vector<std::pair<std::string, Expr>> equations;
    std::set<std::string> free; ///< variables without a defining equation

    const Expr* rhs(const std::string& x) const {
        for (const auto& [v, e] : equations)
            if (v == x) return &e;
        return nullptr;
    }
};

/**
 * Checks: no variable defined twice, compositions only of the form a ; e,
 * every right-hand variable defined or declared free, and no cycle of
 * unguarded dependencies between defined variables.
 */
inline void validate_system(const EquationSystem& sys) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        const auto& [x, e] = sys.equations[i];
        if (!index.emplace(x, i).second) throw Error(ErrorKind::MalformedSystem, "variable '" + x + "' defined twice");
        if (sys.free.count(x)) throw Error(ErrorKind::MalformedSystem, "variable '" + x + "' is both defined and free");
    }
    std::function<void(const Expr&)> shape = [&](const Expr& n) {
        if (!n) return;
        if (n->kind == ExprKind::Seq && !is(n->left, ExprKind::Act))
            throw Error(ErrorKind::MalformedSystem, "composition whose left operand is not a letter");
        shape(n->left);
        shape(n->right);
    };
    std::vector<std::vector<std::size_t>> edges(sys.equations.size());
    for (std::size_t i = 0; i < sys.equations.size(); ++i) {
        const Expr& e = sys.equations[i].second;
        shape(e);
        validate_structure(e);
        for (const auto& v : free_vars(e))
            if (!index.count(v) && !sys.free.count(v))
                throw Error(ErrorKind::MalformedSystem, "variable '" + v + "' is neither defined nor free");
        for (const auto& v : var_sets(e).unguarded)
            if (auto it = index.find(v); it != index.end()) edges[i].push_back(it->second);
    }
    std::vector<int> colour(edges.size(), 0);
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        colour[u] = 1;
        for (std::size_t v : edges[u]) {
            if (colour[v] == 1)
                throw Error(ErrorKind::MalformedSystem, "unguarded dependency cycle through '" + sys.equations[v].first + "'");
            if (colour[v] == 0) dfs(v);
        }
        colour[u] = 2;
    };
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (colour[i] == 0) dfs(i);
}

/// Variable name used for each state by automaton_to_system.
inline std::vector<std::string> state_variables(const Automaton& aut) {
    std::set<std::string> taken(aut.alphabet.letters().begin(), aut.alphabet.letters().end());
    std::vector<std::string> out;
    for (StateId i = 0; i < aut.size(); ++i) {
        const std::string& nm = aut.states[i].name;
        bool ok = !nm.empty() && detail::ident_start(nm[0]) && !detail::is_keyword(nm) &&
                  std::all_of(nm.begin(), nm.end(), detail::ident_char);
        std::string v = ok ? nm : "s" + std::to_string(i);
        v = prime_fresh(v, taken);
        taken.insert(v);
        out.push_back(v);
    }
    return out;
}

/// One equation per state, in state order; no fix operators.
inline EquationSystem automaton_to_system(const Automaton& aut) {
    validate_automaton(aut);
    auto vars = state_variables(aut);
    EquationSystem sys;
    for (StateId i = 0; i < aut.size(); ++i) {
        const State& s = aut.states[i];
        Expr rhs;
        switch (s.label) {
            case Label::Skip: rhs = ex::skip(); break;
            case Label::Fail: rhs = ex::fail(); break;
            case Label::Act: rhs = ex::seq(ex::act(aut.alphabet.name(s.letter)), ex::var(vars[s.next])); break;
            case Label::OPlus: {
                std::vector<std::pair<Expr, Rational>> br;
                for (const auto& [t, r] : s.dist) br.emplace_back(ex::var(vars[t]), r);
                rhs = ex::oplus_n(br);
                break;
            }
            case Label::Amp: {
                std::vector<Expr> items;
                for (const auto& [t, k] : s.multiset) {
                    auto small = k.to_u64();
                    if (!small || *small > 1'000'000)
                        throw Error(ErrorKind::SupportExplosion, "multiplicity too large to write as an expression");
                    for (std::uint64_t j = 0; j < *small; ++j) items.push_back(ex::var(vars[t]));
                }
                rhs = ex::amp_n(items);
                break;
            }
        }
        sys.equations.emplace_back(vars[i], rhs);
    }
    return sys;
}

/// Closed solutions of a system together with how they were obtained.
struct SystemSolution {
    std::map<std::string, Expr> solutions;
    std::vector<std::string> order;                 ///< elimination order used
    std::map<std::string, std::size_t> dag_sizes;   ///< distinct nodes per solution
    std::map<std::string, std::uint64_t> tree_sizes; ///< printed size per solution
};

/**
 * Solves a system by nested fixpoints. Forward pass in `order` (declaration
 * order when empty): x is replaced by fix x e, or by e when x does not occur
 * in e, and that term is substituted into every later equation. A backward
 * pass then substitutes the solved later variables into the earlier terms.
 */
inline SystemSolution solve_system(const EquationSystem& sys, std::vector<std::string> order = {}) {
    validate_system(sys);
    if (order.empty())
        for (const auto& eq : sys.equations) order.push_back(eq.first);
    if (order.size() != sys.equations.size())
        throw Error(ErrorKind::InvalidArgument, "elimination order must list every defined variable once");
    std::map<std::string, Expr> cur;
    for (const auto& [x, e] : sys.equations) cur[x] = e;
    std::set<std::string> seen;
    for (const auto& x : order)
        if (!cur.count(x) || !seen.insert(x).second)
            throw Error(ErrorKind::InvalidArgument, "bad elimination order entry '" + x + "'");

    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::string& x = order[i];
        Expr e = cur[x];
        Expr fx = free_vars(e).count(x) ? ex::fix(x, e) : e;
        cur[x] = fx;
        for (std::size_t j = i + 1; j < order.size(); ++j) cur[order[j]] = substitute(cur[order[j]], fx, x);
    }
    SystemSolution out;
    out.order = order;
    for (std::size_t i = order.size(); i-- > 0;) {
        const std::string& x = order[i];
        Expr e = cur[x];
        for (std::size_t j = i + 1; j < order.size(); ++j) e = substitute(e, out.solutions[order[j]], order[j]);
        out.solutions[x] = e;
    }
    for (const auto& [x, e] : out.solutions) {
        out.dag_sizes[x] = dag_size(e);
        out.tree_sizes[x] = tree_size(e);
    }
    return out;
}

/**
 * Direct depth-n evaluation of a system: each defined variable denotes its
 * right-hand side, free variables come from `env`.
 */
class SystemEvaluator {
public:
    SystemEvaluator(const EquationSystem& sys, const Alphabet& alphabet, const ProviderMap& env = {}, Limits limits = {})
        : ev_(limits) {
        validate_system(sys);
        ev_.set_alphabet(alphabet);
        Env chain;
        for (const auto& [x, p] : env) chain = ev_.bind(chain, x, p);
        for (const auto& [x, rhs] : sys.equations) {
            Expr r = rhs;
            chain = ev_.bind(chain, x, [this, r](int k) { return ev_.eval(r, k, env_); });
        }
        env_ = chain;
    }

    // providers refer back to this object
    SystemEvaluator(const SystemEvaluator&) = delete;
    SystemEvaluator& operator=(const SystemEvaluator&) = delete;

    FinDist eval(const std::string& x, int n) { return ev_.eval(ex::var(x), n, env_); }

private:
    ExprEvaluator ev_;
    Env env_;
};

/**
 * Both translations against the evaluator: the expression, its automaton,
 * and the expression solved back from that automaton agree at depth n.
 */
inline bool round_trip_check(const Expr& e, int n, const Alphabet& alphabet, const Limits& limits = {}) {
    FinDist direct = eval_closed(e, n, alphabet, limits);
    Automaton aut = expr_to_automaton(e, alphabet);
    if (eval_state(aut, aut.start, n, limits) != direct) return false;
    EquationSystem sys = automaton_to_system(aut);
    SystemSolution sol = solve_system(sys);
    const Expr& back = sol.solutions.at(sys.equations[aut.start].first);
    return eval_closed(back, n, alphabet, limits) == direct;
}

} // namespace pka
