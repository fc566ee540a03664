#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/error.hpp"
#include "pka/findist.hpp"
#include "pka/multiset.hpp"
#include "pka/numeric.hpp"

namespace pka {

using StateId = std::size_t;

enum class Label { Amp, OPlus, Skip, Fail, Act };

inline const char* to_string(Label l) {
    switch (l) {
        case Label::Amp: return "amp";
        case Label::OPlus: return "oplus";
        case Label::Skip: return "skip";
        case Label::Fail: return "fail";
        case Label::Act: return "act";
    }
    return "?";
}

/// One state. Only the fields matching `label` are meaningful.
struct State {
    std::string name;
    Label label = Label::Fail;
    std::vector<std::pair<StateId, Natural>> multiset; ///< Amp successors
    std::vector<std::pair<StateId, Rational>> dist;    ///< OPlus successors
    Letter letter = 0;                                  ///< Act
    StateId next = 0;                                   ///< Act successor
};

/// Finite automaton over `alphabet` with choice, probabilistic, action and
/// terminal states. States are addressed by index.
struct Automaton {
    Alphabet alphabet;
    std::vector<State> states;
    StateId start = 0;

    std::size_t size() const noexcept { return states.size(); }

    StateId add(State s) {
        states.push_back(std::move(s));
        return states.size() - 1;
    }

    std::optional<StateId> find(const std::string& name) const {
        for (StateId i = 0; i < states.size(); ++i)
            if (states[i].name == name) return i;
        return std::nullopt;
    }
};

namespace st {
inline State skip(std::string name = {}) { return State{std::move(name), Label::Skip, {}, {}, 0, 0}; }
inline State fail(std::string name = {}) { return State{std::move(name), Label::Fail, {}, {}, 0, 0}; }
inline State act(Letter a, StateId next, std::string name = {}) { return State{std::move(name), Label::Act, {}, {}, a, next}; }
inline State amp(std::vector<std::pair<StateId, Natural>> m, std::string name = {}) {
    return State{std::move(name), Label::Amp, std::move(m), {}, 0, 0};
}
inline State oplus(std::vector<std::pair<StateId, Rational>> d, std::string name = {}) {
    return State{std::move(name), Label::OPlus, {}, std::move(d), 0, 0};
}
} // namespace st

/**
 * Checks transition shapes and productivity. Productivity holds iff the
 * graph of edges leaving non-action states is acyclic; the error message
 * lists a cycle.
 */
inline void validate_automaton(const Automaton& aut) {
    const std::size_t n = aut.size();
    if (n == 0) throw Error(ErrorKind::Shape, "automaton has no states");
    if (aut.start >= n) throw Error(ErrorKind::Shape, "start state out of range");
    auto sname = [&](StateId i) { return aut.states[i].name.empty() ? "#" + std::to_string(i) : aut.states[i].name; };
    for (StateId i = 0; i < n; ++i) {
        const State& s = aut.states[i];
        auto check = [&](StateId t) {
            if (t >= n) throw Error(ErrorKind::Shape, "state " + sname(i) + " has a successor out of range");
        };
        switch (s.label) {
            case Label::Amp:
                for (const auto& [t, k] : s.multiset) {
                    check(t);
                    if (k.is_zero()) throw Error(ErrorKind::Shape, "state " + sname(i) + " has a zero multiplicity");
                }
                break;
            case Label::OPlus: {
                Rational total(0);
                for (const auto& [t, r] : s.dist) {
                    check(t);
                    if (sgn(r) <= 0) throw Error(ErrorKind::Shape, "state " + sname(i) + " has a non-positive weight");
                    total += r;
                }
                if (total != 1)
                    throw Error(ErrorKind::Shape, "weights of state " + sname(i) + " sum to " + to_string(total));
                break;
            }
            case Label::Act:
                check(s.next);
                if (s.letter >= aut.alphabet.size())
                    throw Error(ErrorKind::Shape, "state " + sname(i) + " uses a letter outside the alphabet");
                break;
            case Label::Skip:
            case Label::Fail: break;
        }
    }
    // DFS over non-action edges; colour 1 = on stack.
    std::vector<int> colour(n, 0);
    std::vector<StateId> stack;
    std::function<void(StateId)> dfs = [&](StateId u) {
        colour[u] = 1;
        stack.push_back(u);
        const State& s = aut.states[u];
        std::vector<StateId> succ;
        if (s.label == Label::Amp)
            for (const auto& e : s.multiset) succ.push_back(e.first);
        if (s.label == Label::OPlus)
            for (const auto& e : s.dist) succ.push_back(e.first);
        for (StateId v : succ) {
            if (colour[v] == 1) {
                std::string cyc;
                auto it = std::find(stack.begin(), stack.end(), v);
                for (; it != stack.end(); ++it) cyc += sname(*it) + " -> ";
                throw Error(ErrorKind::Productivity, "cycle without an action state: " + cyc + sname(v));
            }
            if (colour[v] == 0) dfs(v);
        }
        stack.pop_back();
        colour[u] = 2;
    };
    for (StateId i = 0; i < n; ++i)
        if (colour[i] == 0) dfs(i);
}

/// A multiset of states: sorted (state, multiplicity) pairs, no zeros.
using StateBag = std::vector<std::pair<StateId, Natural>>;

inline StateBag bag_add(const StateBag& a, const StateBag& b) {
    StateBag out;
    out.reserve(a.size() + b.size());
    auto i = a.begin(), j = b.begin();
    while (i != a.end() || j != b.end()) {
        if (j == b.end() || (i != a.end() && i->first < j->first))
            out.push_back(*i++);
        else if (i == a.end() || j->first < i->first)
            out.push_back(*j++);
        else {
            out.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    return out;
}

/// One observation step: how often the empty word is accepted, and for each
/// letter the multiset of states reached after reading it.
struct StepOutcome {
    Natural eps;
    std::vector<StateBag> succ; ///< indexed by letter

    friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
    friend bool operator<(const StepOutcome& a, const StepOutcome& b) {
        if (a.eps != b.eps) return a.eps < b.eps;
        return a.succ < b.succ;
    }
};

/// Distribution over StepOutcome; canonical (sorted, merged, positive weights).
using OneStep = std::vector<std::pair<StepOutcome, Rational>>;

namespace detail {

inline OneStep onestep_from_map(std::map<StepOutcome, Rational> m) {
    OneStep out;
    out.reserve(m.size());
    for (auto& [o, w] : m)
        if (sgn(w) != 0) out.emplace_back(o, std::move(w));
    return out;
}

inline OneStep onestep_conv(const OneStep& a, const OneStep& b, const Limits& limits) {
    std::map<StepOutcome, Rational> acc;
    for (const auto& [oa, wa] : a) {
        for (const auto& [ob, wb] : b) {
            StepOutcome o;
            o.eps = oa.eps + ob.eps;
            o.succ.resize(oa.succ.size());
            for (std::size_t l = 0; l < oa.succ.size(); ++l) o.succ[l] = bag_add(oa.succ[l], ob.succ[l]);
            acc[std::move(o)] += wa * wb;
        }
        check_budget(acc.size(), limits, "coalg_unfold");
    }
    return onestep_from_map(std::move(acc));
}

inline OneStep onestep_dirac(StepOutcome o) { return OneStep{{std::move(o), Rational(1)}}; }

} // namespace detail

/// Optional instrumentation for coalg_unfold.
struct UnfoldStats {
    std::size_t max_recursion = 0;
};

/**
 * The one-step normal form of a state: probabilistic choices first, then
 * the independent sum over choice branches, ending at actions and
 * terminals. Results for every state visited are cached in `cache`.
 */
class Unfolder {
public:
    explicit Unfolder(const Automaton& aut, Limits limits = {}) : aut_(aut), limits_(limits), cache_(aut.size()) {}

    const OneStep& unfold(StateId s, UnfoldStats* stats = nullptr) { return go(s, 1, stats); }

private:
    const OneStep& go(StateId s, std::size_t depth, UnfoldStats* stats) {
        if (stats) stats->max_recursion = std::max(stats->max_recursion, depth);
        if (cache_[s]) return *cache_[s];
        const State& st = aut_.states[s];
        const std::size_t L = aut_.alphabet.size();
        StepOutcome zero;
        zero.succ.resize(L);
        OneStep r;
        switch (st.label) {
            case Label::Skip:
                zero.eps = 1;
                r = detail::onestep_dirac(std::move(zero));
                break;
            case Label::Fail: r = detail::onestep_dirac(std::move(zero)); break;
            case Label::Act:
                zero.succ[st.letter] = {{st.next, Natural(1)}};
                r = detail::onestep_dirac(std::move(zero));
                break;
            case Label::OPlus: {
                std::map<StepOutcome, Rational> acc;
                for (const auto& [t, w] : st.dist)
                    for (const auto& [o, v] : go(t, depth + 1, stats)) acc[o] += w * v;
                r = detail::onestep_from_map(std::move(acc));
                detail::check_budget(r.size(), limits_, "coalg_unfold");
                break;
            }
            case Label::Amp: {
                r = detail::onestep_dirac(zero);
                for (const auto& [t, k] : st.multiset) r = detail::onestep_conv(r, power(go(t, depth + 1, stats), k), limits_);
                break;
            }
        }
        cache_[s] = std::move(r);
        return *cache_[s];
    }

    OneStep power(const OneStep& d, const Natural& k) {
        if (d.size() == 1) {
            StepOutcome o = d.front().first;
            o.eps = o.eps * k;
            for (auto& bag : o.succ)
                for (auto& e : bag) e.second = e.second * k;
            return detail::onestep_dirac(std::move(o));
        }
        auto small = k.to_u64();
        if (!small) throw Error(ErrorKind::SupportExplosion, "coalg_unfold: multiplicity too large");
        std::uint64_t e = *small;
        std::optional<OneStep> result;
        OneStep base = d;
        while (e > 0) {
            if (e & 1u) result = result ? detail::onestep_conv(*result, base, limits_) : base;
            e >>= 1u;
            if (e > 0) base = detail::onestep_conv(base, base, limits_);
        }
        return *result;
    }

    const Automaton& aut_;
    Limits limits_;
    std::vector<std::optional<OneStep>> cache_;
};

/// One-step normal form of state s.
inline OneStep coalg_unfold(const Automaton& aut, StateId s, const Limits& limits = {}) {
    Unfolder u(aut, limits);
    return u.unfold(s);
}

/**
 * Depth-n fragments of state behaviours, computed by recursion on depth
 * through the one-step normal form. Memoised on (state, depth) for the
 * lifetime of the evaluator.
 */
class AutomatonEvaluator {
public:
    explicit AutomatonEvaluator(const Automaton& aut, Limits limits = {})
        : aut_(aut), limits_(limits), unfolder_(aut, limits) {}

    const FinDist& eval(StateId s, int n) {
        if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
        auto key = std::make_pair(s, n);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const OneStep& step = unfolder_.unfold(s);
        std::vector<std::pair<Rational, FinDist>> branches;
        branches.reserve(step.size());
        for (const auto& [o, w] : step) {
            FinDist acc = FinDist::dirac(TruncMultiset(n, {{Word(), o.eps}}));
            if (n > 0) {
                for (std::size_t l = 0; l < o.succ.size(); ++l) {
                    if (o.succ[l].empty()) continue;
                    acc = amp2(acc, letter_part(static_cast<Letter>(l), o.succ[l], n), limits_);
                }
            }
            branches.emplace_back(w, std::move(acc));
        }
        FinDist r = mix(branches, limits_);
        return memo_.emplace(key, std::move(r)).first->second;
    }

private:
    // a . (& of eval(t, n-1) over the bag), at depth n
    FinDist letter_part(Letter a, const StateBag& bag, int n) {
        FinDist inner = FinDist::empty(n - 1);
        for (const auto& [t, k] : bag) inner = amp2(inner, amp_power(eval(t, n - 1), k, limits_), limits_);
        return shift(Word(1, static_cast<char>(a)), inner, n);
    }

    const Automaton& aut_;
    Limits limits_;
    Unfolder unfolder_;
    std::map<std::pair<StateId, int>, FinDist> memo_;
};

inline FinDist eval_state(const Automaton& aut, StateId s, int n, const Limits& limits = {}) {
    AutomatonEvaluator ev(aut, limits);
    return ev.eval(s, n);
}

/// Outcome of iterating the labelling transformer.
struct TauResult {
    std::vector<FinDist> labelling; ///< value at every state, depth n
    std::size_t iterations = 0;     ///< iterations performed
    std::size_t bound = 0;          ///< (n+2)|S|
    bool stabilized = false;        ///< iterate k equals iterate k+1 at the end
};

/// One application of the labelling transformer at depth n.
inline std::vector<FinDist> tau_step(const Automaton& aut, const std::vector<FinDist>& L, int n, const Limits& limits = {}) {
    std::vector<FinDist> out;
    out.reserve(aut.size());
    for (const State& s : aut.states) {
        switch (s.label) {
            case Label::Skip: out.push_back(FinDist::dirac(TruncMultiset(n, {{Word(), Natural(1)}}))); break;
            case Label::Fail: out.push_back(FinDist::empty(n)); break;
            case Label::Act: out.push_back(shift(Word(1, static_cast<char>(s.letter)), L[s.next], n)); break;
            case Label::OPlus: {
                std::vector<std::pair<Rational, FinDist>> br;
                for (const auto& [t, w] : s.dist) br.emplace_back(w, L[t]);
                out.push_back(mix(br, limits));
                break;
            }
            case Label::Amp: {
                FinDist acc = FinDist::empty(n);
                for (const auto& [t, k] : s.multiset) acc = amp2(acc, amp_power(L[t], k, limits), limits);
                out.push_back(std::move(acc));
                break;
            }
        }
    }
    return out;
}

/**
 * Iterates the labelling transformer from the all-empty labelling for
 * (n+2)|S| rounds, stopping early once an iterate is an exact fixed point
 * (every later iterate is then identical), and records whether one further
 * application leaves the result unchanged.
 */
inline TauResult tau_iterate(const Automaton& aut, int n, const Limits& limits = {}) {
    TauResult r;
    r.bound = static_cast<std::size_t>(n + 2) * aut.size();
    std::vector<FinDist> L(aut.size(), FinDist::empty(n));
    for (; r.iterations < r.bound; ++r.iterations) {
        auto next = tau_step(aut, L, n, limits);
        if (next == L) break;
        L = std::move(next);
    }
    r.stabilized = tau_step(aut, L, n, limits) == L;
    r.labelling = std::move(L);
    return r;
}

inline FinDist eval_state_tau(const Automaton& aut, StateId s, int n, const Limits& limits = {}) {
    TauResult r = tau_iterate(aut, n, limits);
    if (!r.stabilized)
        throw Error(ErrorKind::Productivity, "labelling iteration did not stabilise within " + std::to_string(r.bound) + " steps");
    return r.labelling.at(s);
}

} // namespace pka
