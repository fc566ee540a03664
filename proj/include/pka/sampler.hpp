#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/automaton.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/findist.hpp"
#include "pka/multiset.hpp"
#include "pka/numeric.hpp"
#include "pka/syntax.hpp"

namespace pka {

/**
 * SplitMix64 used as a counter-based generator: output i of the stream for
 * (seed, trial) is mix(base + (i+1)·γ) with base = mix(seed ⊕ mix(trial·γ)).
 * Streams for distinct trial indices are independent for practical purposes,
 * so trials can run in any order or in parallel with identical results.
 */
class SplitMix64 {
public:
    static constexpr std::uint64_t gamma = 0x9e3779b97f4a7c15ULL;

    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0) : state_(mix(seed ^ mix(stream * gamma + gamma))) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return mix(state_ += gamma); }

    /// Uniform on [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        for (;;) {
            std::uint64_t u = next();
            if (u < limit) return u % bound;
        }
    }

    /// Uniform on [0, bound) for arbitrary positive bound.
    mpz_class below(const mpz_class& bound) {
        if (bound.fits_ulong_p()) return mpz_class(static_cast<unsigned long>(below(bound.get_ui())));
        std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
        for (;;) {
            mpz_class u = 0;
            for (std::size_t got = 0; got < bits; got += 64) {
                u <<= 64;
                std::uint64_t w = next();
                u += mpz_class(static_cast<unsigned long>(w));
            }
            std::size_t excess = ((bits + 63) / 64) * 64 - bits;
            u >>= static_cast<mp_bitcnt_t>(excess);
            if (u < bound) return u;
        }
    }

    /// True with probability exactly p, p in [0,1].
    bool bernoulli(const Rational& p) {
        if (sgn(p) <= 0) return false;
        if (p >= 1) return true;
        return below(mpz_class(p.get_den())) < p.get_num();
    }

private:
    std::uint64_t state_;
};

/// Order in which pending agents are advanced. Agents are independent, so
/// the output distribution does not depend on it.
enum class Schedule { BreadthFirst, DepthFirst };

namespace detail {

// Closed expression compiled to a flat graph: a variable jumps to its binder.
struct Program {
    struct Node {
        ExprKind kind;
        int left = -1, right = -1;
        Letter letter = 0;
        Rational prob;
    };
    std::vector<Node> nodes;
    int root = -1;
};

inline Program compile(const Expr& e, const Alphabet& alphabet) {
    validate(e, alphabet);
    if (!is_closed(e)) throw Error(ErrorKind::UnboundVariable, "sampling needs a closed expression");
    Program p;
    std::unordered_map<const ExprNode*, int> seen;
    std::vector<std::pair<std::string, int>> scope;
    std::unordered_map<const ExprNode*, std::set<std::string>> fv;
    std::function<const std::set<std::string>&(const Expr&)> free = [&](const Expr& n) -> const std::set<std::string>& {
        if (auto it = fv.find(n.get()); it != fv.end()) return it->second;
        std::set<std::string> out;
        if (n->kind == ExprKind::Var) out.insert(n->name);
        if (n->left) out = free(n->left);
        if (n->right) {
            const auto& r = free(n->right);
            out.insert(r.begin(), r.end());
        }
        if (n->kind == ExprKind::Fix) out.erase(n->name);
        return fv.emplace(n.get(), std::move(out)).first->second;
    };
    std::function<int(const Expr&)> go = [&](const Expr& n) -> int {
        if (n->kind == ExprKind::Var) {
            for (auto it = scope.rbegin(); it != scope.rend(); ++it)
                if (it->first == n->name) return it->second;
            throw Error(ErrorKind::UnboundVariable, "unbound variable '" + n->name + "'");
        }
        // closed subterms compile the same wherever they occur
        bool closed = free(n).empty();
        if (closed)
            if (auto it = seen.find(n.get()); it != seen.end()) return it->second;
        int id = static_cast<int>(p.nodes.size());
        p.nodes.push_back({n->kind});
        if (n->kind == ExprKind::Act) p.nodes[id].letter = alphabet.index(n->name);
        if (n->kind == ExprKind::OPlus) p.nodes[id].prob = n->prob;
        if (n->kind == ExprKind::Fix) {
            scope.emplace_back(n->name, id);
            int b = go(n->left);
            scope.pop_back();
            p.nodes[id].left = b;
        } else {
            if (n->left) {
                int l = go(n->left);
                p.nodes[id].left = l;
            }
            if (n->right) {
                int r = go(n->right);
                p.nodes[id].right = r;
            }
        }
        if (closed) seen.emplace(n.get(), id);
        return id;
    };
    p.root = go(e);
    return p;
}

inline TruncMultiset collect(int n, std::map<Word, std::uint64_t>& out) {
    std::vector<TruncMultiset::Entry> entries;
    for (auto& [w, k] : out) entries.emplace_back(w, Natural(k));
    return TruncMultiset(n, std::move(entries));
}

} // namespace detail

/// Caps the number of agent steps in one run.
struct SampleLimits {
    std::uint64_t max_steps = 50'000'000;
};

/**
 * Agent simulation of a closed expression. An agent holds a program point,
 * the string read so far and a stack of pending right operands of `;`. At
 * `&` it forks, at `+[r]` it flips an exact coin, at a letter it extends its
 * string (agents whose string exceeds n are dropped), at skip it resumes the
 * innermost pending operand or emits its string, at fail it stops.
 */
class ExprSampler {
public:
    ExprSampler(const Expr& e, const Alphabet& alphabet, SampleLimits limits = {})
        : prog_(detail::compile(e, alphabet)), limits_(limits) {}

    TruncMultiset run(int n, SplitMix64& rng, Schedule sched = Schedule::BreadthFirst) {
        if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
        stack_.clear();
        std::map<Word, std::uint64_t> out;
        std::deque<Agent> work;
        work.push_back(Agent{prog_.root, -1, Word()});
        std::uint64_t steps = 0;
        while (!work.empty()) {
            Agent ag;
            if (sched == Schedule::BreadthFirst) {
                ag = std::move(work.front());
                work.pop_front();
            } else {
                ag = std::move(work.back());
                work.pop_back();
            }
            for (bool live = true; live;) {
                if (++steps > limits_.max_steps) throw Error(ErrorKind::SupportExplosion, "sampler step cap reached");
                const auto& node = prog_.nodes[ag.pc];
                switch (node.kind) {
                    case ExprKind::Fail: live = false; break;
                    case ExprKind::Act:
                        ag.acc.push_back(static_cast<char>(node.letter));
                        if (static_cast<int>(ag.acc.size()) > n) {
                            live = false;
                            break;
                        }
                        [[fallthrough]];
                    case ExprKind::Skip:
                        if (ag.k < 0) {
                            ++out[ag.acc];
                            live = false;
                        } else {
                            ag.pc = stack_[ag.k].first;
                            ag.k = stack_[ag.k].second;
                        }
                        break;
                    case ExprKind::Amp:
                        work.push_back(Agent{node.right, ag.k, ag.acc});
                        ag.pc = node.left;
                        break;
                    case ExprKind::OPlus: ag.pc = rng.bernoulli(node.prob) ? node.left : node.right; break;
                    case ExprKind::Seq:
                        stack_.emplace_back(node.right, ag.k);
                        ag.k = static_cast<int>(stack_.size()) - 1;
                        ag.pc = node.left;
                        break;
                    case ExprKind::Fix: ag.pc = node.left; break;
                    case ExprKind::Var: throw Error(ErrorKind::UnboundVariable, "unresolved variable");
                }
            }
        }
        return detail::collect(n, out);
    }

private:
    struct Agent {
        int pc = 0;
        int k = -1; ///< top of the continuation stack (shared, persistent)
        Word acc;
    };

    detail::Program prog_;
    SampleLimits limits_;
    std::vector<std::pair<int, int>> stack_;
};

/// Agent simulation of an automaton: amp states fork once per successor
/// occurrence, oplus states sample a successor exactly.
class AutomatonSampler {
public:
    explicit AutomatonSampler(const Automaton& aut, SampleLimits limits = {}) : aut_(aut), limits_(limits) {
        validate_automaton(aut_);
    }

    TruncMultiset run(int n, SplitMix64& rng, Schedule sched = Schedule::BreadthFirst) const {
        return run_from(aut_.start, n, rng, sched);
    }

    TruncMultiset run_from(StateId s, int n, SplitMix64& rng, Schedule sched = Schedule::BreadthFirst) const {
        if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
        if (s >= aut_.size()) throw Error(ErrorKind::InvalidArgument, "state out of range");
        std::map<Word, std::uint64_t> out;
        std::deque<std::pair<StateId, Word>> work;
        work.emplace_back(s, Word());
        std::uint64_t steps = 0;
        while (!work.empty()) {
            auto [q, acc] = sched == Schedule::BreadthFirst ? std::move(work.front()) : std::move(work.back());
            if (sched == Schedule::BreadthFirst)
                work.pop_front();
            else
                work.pop_back();
            for (bool live = true; live;) {
                if (++steps > limits_.max_steps) throw Error(ErrorKind::SupportExplosion, "sampler step cap reached");
                const State& st = aut_.states[q];
                switch (st.label) {
                    case Label::Fail: live = false; break;
                    case Label::Skip:
                        ++out[acc];
                        live = false;
                        break;
                    case Label::Act:
                        acc.push_back(static_cast<char>(st.letter));
                        if (static_cast<int>(acc.size()) > n)
                            live = false;
                        else
                            q = st.next;
                        break;
                    case Label::OPlus: q = pick(st.dist, rng); break;
                    case Label::Amp: {
                        bool first = true;
                        StateId keep = 0;
                        for (const auto& [t, k] : st.multiset) {
                            auto copies = k.to_u64();
                            if (!copies || *copies > limits_.max_steps)
                                throw Error(ErrorKind::SupportExplosion, "multiplicity too large to simulate");
                            for (std::uint64_t i = 0; i < *copies; ++i) {
                                if (first) {
                                    keep = t;
                                    first = false;
                                } else {
                                    work.emplace_back(t, acc);
                                }
                            }
                        }
                        if (first)
                            live = false; // empty multiset behaves as fail
                        else
                            q = keep;
                        break;
                    }
                }
            }
        }
        return detail::collect(n, out);
    }

private:
    // sequential conditional coins keep the draw exact
    static StateId pick(const std::vector<std::pair<StateId, Rational>>& dist, SplitMix64& rng) {
        Rational rest(1);
        for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
            if (rng.bernoulli(Rational(dist[i].second / rest))) return dist[i].first;
            rest -= dist[i].second;
        }
        return dist.back().first;
    }

    Automaton aut_;
    SampleLimits limits_;
};

/// Counts of sampled depth-n multisets.
struct EmpiricalDist {
    int depth = 0;
    std::uint64_t trials = 0;
    std::map<TruncMultiset, std::uint64_t> counts;
};

/// Either kind of sampling target.
using SampleTarget = std::variant<Expr, Automaton>;

/// One run on `target`; deterministic given the generator state.
inline TruncMultiset sample_run(const SampleTarget& target, int n, SplitMix64& rng, const Alphabet& alphabet,
                                Schedule sched = Schedule::BreadthFirst) {
    if (const Expr* e = std::get_if<Expr>(&target)) return ExprSampler(*e, alphabet).run(n, rng, sched);
    return AutomatonSampler(std::get<Automaton>(target)).run(n, rng, sched);
}

/// `trials` runs, run i drawing from substream (seed, i).
inline EmpiricalDist empirical(const SampleTarget& target, int n, std::uint64_t trials, std::uint64_t seed,
                               const Alphabet& alphabet, Schedule sched = Schedule::BreadthFirst) {
    if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
    EmpiricalDist out;
    out.depth = n;
    out.trials = trials;
    auto tally = [&](auto&& one) {
        for (std::uint64_t i = 0; i < trials; ++i) {
            SplitMix64 rng(seed, i);
            ++out.counts[one(rng)];
        }
    };
    if (const Expr* e = std::get_if<Expr>(&target)) {
        ExprSampler s(*e, alphabet);
        tally([&](SplitMix64& rng) { return s.run(n, rng, sched); });
    } else {
        AutomatonSampler s(std::get<Automaton>(target));
        tally([&](SplitMix64& rng) { return s.run(n, rng, sched); });
    }
    return out;
}

/// Exact total variation distance between relative frequencies and `exact`.
inline Rational tv_distance(const EmpiricalDist& emp, const FinDist& exact) {
    if (emp.depth != exact.depth()) throw Error(ErrorKind::DepthMismatch, "empirical and exact depths differ");
    if (emp.trials == 0) throw Error(ErrorKind::InvalidArgument, "no trials");
    Rational total(0);
    mpz_class t(static_cast<unsigned long>(emp.trials));
    std::map<TruncMultiset, Rational> diff;
    for (const auto& [m, c] : emp.counts) {
        Rational f(mpz_class(static_cast<unsigned long>(c)), t);
        f.canonicalize();
        diff[m] += f;
    }
    for (const auto& [m, w] : exact.support()) diff[m] -= w;
    for (const auto& [m, d] : diff) total += abs(d);
    return total / 2;
}

} // namespace pka
