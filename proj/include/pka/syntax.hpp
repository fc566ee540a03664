#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"

namespace pka {

/// Free variables split by occurrence kind. A variable with occurrences of
/// both kinds is in both sets.
struct VarSets {
    std::set<std::string> unguarded;
    std::set<std::string> guarded;
    bool skip_unguarded = false; ///< whether `skip` itself occurs unguarded

    friend bool operator==(const VarSets&, const VarSets&) = default;
};

namespace detail {

inline VarSets var_sets_rec(const Expr& e, std::unordered_map<std::uint64_t, VarSets>& memo) {
    if (auto it = memo.find(e->id); it != memo.end()) return it->second;
    VarSets r;
    switch (e->kind) {
        case ExprKind::Var: r.unguarded.insert(e->name); break;
        case ExprKind::Skip: r.skip_unguarded = true; break;
        case ExprKind::Act:
        case ExprKind::Fail: break;
        case ExprKind::Amp:
        case ExprKind::OPlus: {
            VarSets a = var_sets_rec(e->left, memo), b = var_sets_rec(e->right, memo);
            r.unguarded = std::move(a.unguarded);
            r.unguarded.insert(b.unguarded.begin(), b.unguarded.end());
            r.guarded = std::move(a.guarded);
            r.guarded.insert(b.guarded.begin(), b.guarded.end());
            r.skip_unguarded = a.skip_unguarded || b.skip_unguarded;
            break;
        }
        case ExprKind::Seq: {
            VarSets a = var_sets_rec(e->left, memo), b = var_sets_rec(e->right, memo);
            // nothing in the left operand is reached without passing its end
            r.guarded = a.guarded;
            r.guarded.insert(a.unguarded.begin(), a.unguarded.end());
            r.guarded.insert(b.guarded.begin(), b.guarded.end());
            if (a.skip_unguarded)
                r.unguarded = b.unguarded;
            else
                r.guarded.insert(b.unguarded.begin(), b.unguarded.end());
            r.skip_unguarded = a.skip_unguarded && b.skip_unguarded;
            break;
        }
        case ExprKind::Fix: {
            r = var_sets_rec(e->left, memo);
            r.unguarded.erase(e->name);
            r.guarded.erase(e->name);
            break;
        }
    }
    memo.emplace(e->id, r);
    return r;
}

} // namespace detail

/// Guarded/unguarded free variables: an occurrence is guarded once it sits
/// behind an action on every path from the root.
inline VarSets var_sets(const Expr& e) {
    std::unordered_map<std::uint64_t, VarSets> memo;
    return detail::var_sets_rec(e, memo);
}

namespace detail {

inline std::string render_path(const std::string& path) { return path.empty() ? "root" : path; }

struct Validator {
    const Alphabet* alphabet;
    std::unordered_map<std::uint64_t, VarSets> sets;
    std::set<std::uint64_t> done;

    void run(const Expr& e, std::string& path) {
        if (!done.insert(e->id).second) return;
        switch (e->kind) {
            case ExprKind::Act:
                if (alphabet && !alphabet->contains(e->name))
                    throw Error(ErrorKind::UnknownIdentifier,
                                "letter '" + e->name + "' at " + render_path(path) + " is not in the alphabet");
                return;
            case ExprKind::OPlus:
                if (!is_probability(e->prob))
                    throw Error(ErrorKind::InvalidArgument, "probability outside [0,1] at " + render_path(path));
                break;
            case ExprKind::Seq: {
                VarSets l = var_sets_rec(e->left, sets);
                if (!l.unguarded.empty() || !l.guarded.empty()) {
                    std::string v = !l.unguarded.empty() ? *l.unguarded.begin() : *l.guarded.begin();
                    throw Error(ErrorKind::Closedness, "left operand of ';' at " + render_path(path) +
                                                           " has free variable '" + v + "'");
                }
                break;
            }
            case ExprKind::Fix: {
                VarSets b = var_sets_rec(e->left, sets);
                if (b.unguarded.count(e->name))
                    throw Error(ErrorKind::Productivity, "variable '" + e->name + "' bound at " + render_path(path) +
                                                             " occurs unguarded in its fix body");
                break;
            }
            default: break;
        }
        if (e->left) {
            path.push_back('L');
            run(e->left, path);
            path.pop_back();
        }
        if (e->right) {
            path.push_back('R');
            run(e->right, path);
            path.pop_back();
        }
    }
};

} // namespace detail

/**
 * Checks the well-formedness restrictions: letters belong to the alphabet,
 * every left operand of `;` is closed, and every fix variable is guarded in
 * its body. Paths in error messages are strings of L/R child steps.
 */
inline void validate(const Expr& e, const Alphabet& alphabet) {
    detail::Validator v{&alphabet, {}, {}};
    std::string path;
    v.run(e, path);
}

/// As `validate`, without the alphabet check.
inline void validate_structure(const Expr& e) {
    detail::Validator v{nullptr, {}, {}};
    std::string path;
    v.run(e, path);
}

/// `base` followed by primes until it avoids `taken`.
inline std::string prime_fresh(std::string base, const std::set<std::string>& taken) {
    while (taken.count(base)) base += '\'';
    return base;
}

namespace detail {

struct Substituter {
    const Expr& d;
    const std::string& x;
    std::set<std::string> fv_d;
    std::unordered_map<std::uint64_t, std::set<std::string>> fv_memo;
    std::unordered_map<std::uint64_t, Expr> memo;

    const std::set<std::string>& fv(const Expr& e) {
        auto it = fv_memo.find(e->id);
        if (it != fv_memo.end()) return it->second;
        std::set<std::string> s;
        switch (e->kind) {
            case ExprKind::Var: s.insert(e->name); break;
            case ExprKind::Fix:
                s = fv(e->left);
                s.erase(e->name);
                break;
            default:
                if (e->left) s = fv(e->left);
                if (e->right) {
                    const auto& r = fv(e->right);
                    s.insert(r.begin(), r.end());
                }
        }
        return fv_memo.emplace(e->id, std::move(s)).first->second;
    }

    Expr run(const Expr& e) {
        if (!fv(e).count(x)) return e;
        if (auto it = memo.find(e->id); it != memo.end()) return it->second;
        Expr out;
        switch (e->kind) {
            case ExprKind::Var: out = d; break;
            case ExprKind::Amp: out = ex::amp(run(e->left), run(e->right)); break;
            case ExprKind::Seq: out = ex::seq(run(e->left), run(e->right)); break;
            case ExprKind::OPlus: out = ex::oplus(run(e->left), e->prob, run(e->right)); break;
            case ExprKind::Fix: {
                Expr body = e->left;
                std::string y = e->name;
                if (fv_d.count(y)) {
                    std::set<std::string> taken = fv_d;
                    const auto& fb = fv(body);
                    taken.insert(fb.begin(), fb.end());
                    taken.insert(x);
                    std::string y2 = prime_fresh(y, taken);
                    Expr yv = ex::var(y2);
                    Substituter inner{yv, y, {y2}, {}, {}};
                    body = inner.run(body);
                    y = y2;
                }
                out = ex::fix(y, run(body));
                break;
            }
            default: out = e; break;
        }
        memo.emplace(e->id, out);
        return out;
    }
};

} // namespace detail

/// Capture-avoiding e[d/x]. Bound variables that would capture a free
/// variable of d are renamed by appending primes.
inline Expr substitute(const Expr& e, const Expr& d, const std::string& x) {
    detail::Substituter s{d, x, free_vars(d), {}, {}};
    return s.run(e);
}

/**
 * The terminal substitution e1[e]: every skip in terminal position becomes
 * e and every letter a in terminal position becomes a ; e. Afterwards the
 * result behaves like e1 ; e. A fix binder of e1 that is free in e is
 * renamed first, so the precondition on bound names is not required.
 */
inline Expr subst_terminal(const Expr& e1, const Expr& e) {
    const std::set<std::string> fv_e = free_vars(e);
    std::unordered_map<std::uint64_t, Expr> memo;
    std::function<Expr(const Expr&)> go = [&](const Expr& n) -> Expr {
        if (auto it = memo.find(n->id); it != memo.end()) return it->second;
        Expr out;
        switch (n->kind) {
            case ExprKind::Skip: out = e; break;
            case ExprKind::Fail: out = n; break;
            case ExprKind::Act: out = ex::seq(n, e); break;
            case ExprKind::Var: out = n; break;
            case ExprKind::OPlus: out = ex::oplus(go(n->left), n->prob, go(n->right)); break;
            case ExprKind::Amp: out = ex::amp(go(n->left), go(n->right)); break;
            case ExprKind::Seq: out = ex::seq(n->left, go(n->right)); break;
            case ExprKind::Fix: {
                if (fv_e.count(n->name)) {
                    std::set<std::string> taken = fv_e;
                    collect_names(n, taken);
                    std::string y = prime_fresh(n->name, taken);
                    out = ex::fix(y, go(substitute(n->left, ex::var(y), n->name)));
                } else {
                    out = ex::fix(n->name, go(n->left));
                }
                break;
            }
        }
        memo.emplace(n->id, out);
        return out;
    };
    return go(e1);
}

/// if b then e else f, with tests modelled as expressions: (b;e) & (nb;f).
inline Expr if_then_else(const Expr& b, const Expr& e, const Expr& nb, const Expr& f) {
    return ex::amp(ex::seq(b, e), ex::seq(nb, f));
}

/// while b do e: fix g ((b;e;g) & nb), with g fresh for b, e and nb.
inline Expr while_loop(const Expr& b, const Expr& e, const Expr& nb) {
    std::set<std::string> taken;
    collect_names(b, taken);
    collect_names(e, taken);
    collect_names(nb, taken);
    std::string g = prime_fresh("g", taken);
    return ex::fix(g, ex::amp(ex::seq(b, ex::seq(e, ex::var(g))), nb));
}

/**
 * Renames bound variables so that all binders are pairwise distinct and
 * distinct from the free variables. A binder keeps its name while that name
 * is unused, otherwise it becomes name_k for the least unused k; the result
 * depends only on the input. Binder-free subtrees are shared, not copied.
 */
inline Expr rename_apart(const Expr& e) {
    std::set<std::string> used = free_vars(e);
    std::unordered_map<std::uint64_t, bool> has_binder;
    std::function<bool(const Expr&)> binders = [&](const Expr& n) -> bool {
        if (!n) return false;
        if (auto it = has_binder.find(n->id); it != has_binder.end()) return it->second;
        bool b = n->kind == ExprKind::Fix || binders(n->left) || binders(n->right);
        has_binder.emplace(n->id, b);
        return b;
    };
    std::vector<std::pair<std::string, std::string>> scope; // original -> new
    std::function<Expr(const Expr&)> go = [&](const Expr& n) -> Expr {
        switch (n->kind) {
            case ExprKind::Var:
                for (auto it = scope.rbegin(); it != scope.rend(); ++it)
                    if (it->first == n->name) return it->second == n->name ? n : ex::var(it->second);
                return n;
            case ExprKind::Fix: {
                std::string name = n->name;
                if (used.count(name)) {
                    for (int k = 1;; ++k) {
                        std::string cand = n->name + "_" + std::to_string(k);
                        if (!used.count(cand)) {
                            name = cand;
                            break;
                        }
                    }
                }
                used.insert(name);
                scope.emplace_back(n->name, name);
                Expr body = go(n->left);
                scope.pop_back();
                return ex::fix(name, body);
            }
            default:
                break;
        }
        if (!binders(n)) {
            // free variables here may still need renaming via the scope
            bool touched = false;
            std::set<std::string> fv = free_vars(n);
            for (const auto& [from, to] : scope)
                if (from != to && fv.count(from)) touched = true;
            if (!touched) return n;
        }
        switch (n->kind) {
            case ExprKind::Amp: return ex::amp(go(n->left), go(n->right));
            case ExprKind::Seq: return ex::seq(go(n->left), go(n->right));
            case ExprKind::OPlus: return ex::oplus(go(n->left), n->prob, go(n->right));
            default: return n;
        }
    };
    return go(e);
}

/// True when all fix binders are pairwise distinct and distinct from free variables.
inline bool binders_distinct(const Expr& e) {
    std::set<std::string> seen = free_vars(e);
    bool ok = true;
    std::function<void(const Expr&)> go = [&](const Expr& n) {
        if (!n || !ok) return;
        if (n->kind == ExprKind::Fix && !seen.insert(n->name).second) ok = false;
        go(n->left);
        go(n->right);
    };
    go(e);
    return ok;
}

} // namespace pka
