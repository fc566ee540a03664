#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>

#include "pka/alphabet.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/findist.hpp"

namespace pka {

/**
 * One binding in an environment chain. A variable is bound either to the
 * fix expression that introduced it (evaluated in the frame's parent) or to
 * an external depth-indexed provider.
 */
struct Frame {
    std::string name;
    Expr fix;               ///< binding fix node, or null for a provider
    DepthProvider provider; ///< used when `fix` is null
    std::shared_ptr<const Frame> parent;
    std::uint64_t id = 0;
};

using Env = std::shared_ptr<const Frame>;

inline std::uint64_t env_id(const Env& e) { return e ? e->id : 0; }

/**
 * Depth-n evaluator for expressions. All results are memoised on
 * (node id, environment id, depth); environments for fix bodies are interned
 * so re-entering a fix at a lower depth reuses earlier work.
 */
class ExprEvaluator {
public:
    explicit ExprEvaluator(Limits limits = {}) : limits_(limits) {}

    const Limits& limits() const { return limits_; }

    /// Extends `env` with x bound to an external provider.
    Env bind(const Env& env, std::string x, DepthProvider p) {
        auto f = std::make_shared<Frame>();
        f->name = std::move(x);
        f->provider = std::move(p);
        f->parent = env;
        f->id = ++next_env_;
        return f;
    }

    FinDist eval(const Expr& e, int n, const Env& env = nullptr) {
        if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
        Key key{e->id, env_id(env), n};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (!active_.insert(key).second)
            throw Error(ErrorKind::Productivity, "unguarded recursion while evaluating at depth " + std::to_string(n));
        struct Leave {
            std::set<Key>& s;
            Key k;
            ~Leave() { s.erase(k); }
        } leave{active_, key};
        FinDist r = compute(e, n, env);
        return memo_.emplace(key, std::move(r)).first->second;
    }

private:
    using Key = std::tuple<std::uint64_t, std::uint64_t, int>;

    FinDist lookup(const std::string& x, int n, const Env& env) {
        for (const Frame* f = env.get(); f; f = f->parent.get()) {
            if (f->name != x) continue;
            if (f->fix) return eval(f->fix, n, f->parent);
            Key key{0, f->id, n};
            if (auto it = memo_.find(key); it != memo_.end()) return it->second;
            FinDist v = f->provider(n);
            detail::require_depth(v, n, "environment");
            return memo_.emplace(key, std::move(v)).first->second;
        }
        throw Error(ErrorKind::UnboundVariable, "unbound variable '" + x + "'");
    }

    Env fix_env(const Expr& fix, const Env& env) {
        auto k = std::make_pair(env_id(env), fix->id);
        if (auto it = interned_.find(k); it != interned_.end()) return it->second;
        auto f = std::make_shared<Frame>();
        f->name = fix->name;
        f->fix = fix;
        f->parent = env;
        f->id = ++next_env_;
        return interned_.emplace(k, f).first->second;
    }

    FinDist compute(const Expr& e, int n, const Env& env) {
        switch (e->kind) {
            case ExprKind::Skip: return FinDist::dirac(TruncMultiset(n, {{Word(), Natural(1)}}));
            case ExprKind::Fail: return FinDist::empty(n);
            case ExprKind::Act: return FinDist::dirac(TruncMultiset(n, {{Word(1, static_cast<char>(letter(e->name))), Natural(1)}}));
            case ExprKind::Var: return lookup(e->name, n, env);
            case ExprKind::OPlus:
                if (e->prob == 1) return eval(e->left, n, env);
                if (sgn(e->prob) == 0) return eval(e->right, n, env);
                return mix2(e->prob, eval(e->left, n, env), eval(e->right, n, env), limits_);
            case ExprKind::Amp: return amp2(eval(e->left, n, env), eval(e->right, n, env), limits_);
            case ExprKind::Seq: {
                // the left operand is closed, so it is evaluated without the environment
                FinDist mu = eval(e->left, n, nullptr);
                const Expr& rhs = e->right;
                return pka::bind(mu, [&](int k) { return eval(rhs, k, env); }, limits_);
            }
            case ExprKind::Fix: return eval(e->left, n, fix_env(e, env));
        }
        throw Error(ErrorKind::InvalidArgument, "bad expression node");
    }

public:
    /// Needed before evaluating any expression that mentions a letter.
    void set_alphabet(const Alphabet& a) { alphabet_ = a; }

private:
    Letter letter(const std::string& name) {
        if (alphabet_) return alphabet_->index(name);
        throw Error(ErrorKind::UnknownIdentifier, "no alphabet for letter '" + name + "'");
    }

    Limits limits_;
    std::optional<Alphabet> alphabet_;
    std::map<Key, FinDist> memo_;
    std::set<Key> active_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Env> interned_;
    std::uint64_t next_env_ = 0;
};

/// Variable environment given as depth-indexed providers.
using ProviderMap = std::map<std::string, DepthProvider>;

/// Depth-n fragment of e under the given environment.
inline FinDist eval_expr(const Expr& e, int n, const Alphabet& alphabet, const ProviderMap& env = {},
                         const Limits& limits = {}) {
    ExprEvaluator ev(limits);
    ev.set_alphabet(alphabet);
    Env chain;
    for (const auto& [x, p] : env) chain = ev.bind(chain, x, p);
    return ev.eval(e, n, chain);
}

/// Depth-n fragment of a closed expression.
inline FinDist eval_closed(const Expr& e, int n, const Alphabet& alphabet, const Limits& limits = {}) {
    return eval_expr(e, n, alphabet, {}, limits);
}

/// Whether lhs and rhs agree at depth n under a shared environment.
inline bool check_axiom_instance(const Expr& lhs, const Expr& rhs, int n, const Alphabet& alphabet,
                                 const ProviderMap& env = {}, const Limits& limits = {}) {
    ExprEvaluator ev(limits);
    ev.set_alphabet(alphabet);
    Env chain;
    for (const auto& [x, p] : env) chain = ev.bind(chain, x, p);
    return equiv(ev.eval(lhs, n, chain), ev.eval(rhs, n, chain), n);
}

} // namespace pka
