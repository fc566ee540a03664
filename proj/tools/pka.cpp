// pka: command-line front end for probabilistic Kleene algebra expressions.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pka/pka.hpp"

namespace {

using namespace pka;
using json = nlohmann::json;

enum Exit { Ok = 0, Inequivalent = 1, Usage = 2, Invalid = 3, Budget = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Syntax:
        case ErrorKind::UnknownIdentifier: return Usage;
        case ErrorKind::SupportExplosion: return Budget;
        default: return Invalid;
    }
}

int report(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
}

struct Options {
    std::string alphabet;
    std::uint64_t seed = 0;
    std::size_t budget = 1'000'000;
    std::string format = "json";

    std::string e, e1, e2, automaton, order, state, schedule = "bfs", rule;
    int n = 3;
    std::uint64_t trials = 10'000, instances = 200;
    bool compare_exact = false;
};

Limits limits(const Options& o) {
    Limits l;
    l.max_support = o.budget;
    return l;
}

Alphabet alphabet_for(const Options& o, const std::vector<std::string>& texts) {
    if (!o.alphabet.empty()) {
        std::vector<std::string> letters;
        std::stringstream ss(o.alphabet);
        for (std::string l; std::getline(ss, l, ',');)
            if (!l.empty()) letters.push_back(l);
        return Alphabet(letters);
    }
    std::set<std::string> all;
    for (const auto& t : texts) {
        Alphabet a = infer_alphabet(t);
        all.insert(a.letters().begin(), a.letters().end());
    }
    return Alphabet(std::vector<std::string>(all.begin(), all.end()));
}

Expr parse_valid(const std::string& text, const Alphabet& a) {
    Expr e = parse(text, a);
    validate(e, a);
    return e;
}

Expr parse_closed(const std::string& text, const Alphabet& a) {
    Expr e = parse_valid(text, a);
    if (!is_closed(e)) throw Error(ErrorKind::UnboundVariable, "expression has free variables");
    return e;
}

Automaton read_automaton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::ordered_json::exception& ex) {
        throw Error(ErrorKind::Syntax, std::string("bad JSON: ") + ex.what());
    }
    return json_io::automaton(j);
}

std::string render_multiset(const TruncMultiset& m, const Alphabet& a) {
    std::string out = "{";
    for (std::size_t i = 0; i < m.entries().size(); ++i) {
        const auto& [w, k] = m.entries()[i];
        if (i) out += ", ";
        out += (w.empty() ? std::string("ε") : a.render(w)) + ":" + k.str();
    }
    return out + "}";
}

void print_dist(const FinDist& d, const Alphabet& a, const Options& o) {
    if (o.format == "json") {
        std::cout << json_io::findist(d, a).dump() << "\n";
        return;
    }
    for (const auto& [m, w] : d.support()) std::cout << to_string(w) << "\t" << render_multiset(m, a) << "\n";
}

// An automaton state's depth-n fragment, or an expression's.
FinDist eval_target(const Options& o, Alphabet& a) {
    if (!o.automaton.empty()) {
        Automaton aut = read_automaton(o.automaton);
        a = aut.alphabet;
        StateId s = aut.start;
        if (!o.state.empty()) {
            auto f = aut.find(o.state);
            if (!f) throw Error(ErrorKind::InvalidArgument, "no state named '" + o.state + "'");
            s = *f;
        }
        return eval_state(aut, s, o.n, limits(o));
    }
    a = alphabet_for(o, {o.e});
    return eval_closed(parse_closed(o.e, a), o.n, a, limits(o));
}

int cmd_parse(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e});
    Expr e = parse_valid(o.e, a);
    if (o.format == "json")
        std::cout << json{{"expr", print(e)}, {"alphabet", a.letters()}, {"size", expr_size(e)}, {"closed", is_closed(e)}}.dump()
                  << "\n";
    else
        std::cout << print(e) << "\n";
    return Ok;
}

int cmd_eval(const Options& o) {
    Alphabet a;
    FinDist d = eval_target(o, a);
    print_dist(d, a, o);
    return Ok;
}

int cmd_equiv(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e1, o.e2});
    FinDist d1 = eval_closed(parse_closed(o.e1, a), o.n, a, limits(o));
    FinDist d2 = eval_closed(parse_closed(o.e2, a), o.n, a, limits(o));
    auto w = first_difference(d1, d2);
    if (o.format == "json") {
        json out{{"equivalent", !w}, {"depth", o.n}};
        if (w)
            out["witness"] = {{"depth", w->depth},
                              {"class", json_io::multiset(w->cls, a)},
                              {"left", to_string(w->left)},
                              {"right", to_string(w->right)}};
        std::cout << out.dump() << "\n";
    } else if (!w) {
        std::cout << "equivalent at depth " << o.n << "\n";
    } else {
        std::cout << "differ at depth " << w->depth << " on class " << render_multiset(w->cls, a) << ": "
                  << to_string(w->left) << " vs " << to_string(w->right) << "\n";
    }
    return w ? Inequivalent : Ok;
}

int cmd_distance(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e1, o.e2});
    FinDist d1 = eval_closed(parse_closed(o.e1, a), o.n, a, limits(o));
    FinDist d2 = eval_closed(parse_closed(o.e2, a), o.n, a, limits(o));
    Distance d = distance(d1, d2);
    if (o.format == "json")
        std::cout << json{{"distance", d.str()}, {"exact", d.exact}, {"exponent", d.exponent}}.dump() << "\n";
    else
        std::cout << d.str() << "\n";
    return Ok;
}

int cmd_to_automaton(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e});
    Automaton aut = expr_to_automaton(parse_closed(o.e, a), a);
    std::cout << json_io::automaton(aut).dump(o.format == "json" ? -1 : 2) << "\n";
    return Ok;
}

int cmd_to_expression(const Options& o) {
    if (o.automaton.empty()) throw Error(ErrorKind::InvalidArgument, "--automaton is required");
    Automaton aut = read_automaton(o.automaton);
    EquationSystem sys = automaton_to_system(aut);
    std::vector<std::string> order;
    if (!o.order.empty()) {
        // the order names states; map them to their equation variables
        std::stringstream ss(o.order);
        for (std::string s; std::getline(ss, s, ',');) {
            auto id = aut.find(s);
            if (!id) throw Error(ErrorKind::InvalidArgument, "no state named '" + s + "'");
            order.push_back(sys.equations[*id].first);
        }
    }
    SystemSolution sol = solve_system(sys, order);
    const std::string& start = sys.equations[aut.start].first;
    if (o.format != "json") {
        std::cout << print(sol.solutions.at(start)) << "\n";
        return Ok;
    }
    nlohmann::ordered_json states = nlohmann::ordered_json::object(), sizes = nlohmann::ordered_json::object();
    for (StateId i = 0; i < aut.size(); ++i) {
        const std::string& x = sys.equations[i].first;
        states[json_io::state_name(aut, i)] = print(sol.solutions.at(x));
        sizes[json_io::state_name(aut, i)] = {{"dag", sol.dag_sizes.at(x)}, {"tree", sol.tree_sizes.at(x)}};
    }
    nlohmann::ordered_json out;
    out["start"] = print(sol.solutions.at(start));
    out["alphabet"] = aut.alphabet.letters();
    out["order"] = sol.order;
    out["states"] = states;
    out["sizes"] = sizes;
    std::cout << out.dump() << "\n";
    return Ok;
}

int cmd_normalize(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e});
    NormalizeLimits nl;
    nl.max_groups = o.budget;
    Expr e = normalize(parse_closed(o.e, a), a, nl);
    if (o.format == "json")
        std::cout << json{{"expr", print(e)}}.dump() << "\n";
    else
        std::cout << print(e) << "\n";
    return Ok;
}

int cmd_derivative(const Options& o) {
    Alphabet a = alphabet_for(o, {o.e});
    NormalizeLimits nl;
    nl.max_groups = o.budget;
    BrzStep step = brzozowski(parse_closed(o.e, a), a, nl);
    if (o.format == "json") {
        std::cout << json_io::brz_step(step, a).dump() << "\n";
        return Ok;
    }
    for (const auto& [out, w] : step) {
        std::cout << to_string(w) << "\teps=" << out.eps.str();
        for (std::size_t l = 0; l < out.succ.size(); ++l) {
            std::cout << "  " << a.name(static_cast<Letter>(l)) << "->{";
            for (std::size_t i = 0; i < out.succ[l].size(); ++i) std::cout << (i ? ", " : "") << print(out.succ[l][i]);
            std::cout << "}";
        }
        std::cout << "\n";
    }
    return Ok;
}

int cmd_sample(const Options& o) {
    if (o.trials == 0) throw Error(ErrorKind::InvalidArgument, "--trials must be positive");
    Schedule sched = o.schedule == "dfs" ? Schedule::DepthFirst : Schedule::BreadthFirst;
    Alphabet a;
    EmpiricalDist emp;
    FinDist exact;
    if (!o.automaton.empty()) {
        Automaton aut = read_automaton(o.automaton);
        a = aut.alphabet;
        emp = empirical(aut, o.n, o.trials, o.seed, a, sched);
        if (o.compare_exact) exact = eval_state(aut, aut.start, o.n, limits(o));
    } else {
        a = alphabet_for(o, {o.e});
        Expr e = parse_closed(o.e, a);
        emp = empirical(e, o.n, o.trials, o.seed, a, sched);
        if (o.compare_exact) exact = eval_closed(e, o.n, a, limits(o));
    }
    json out = json_io::empirical(emp, a);
    if (o.compare_exact) out["tv_distance"] = to_string(tv_distance(emp, exact));
    if (o.format == "json") {
        std::cout << out.dump() << "\n";
        return Ok;
    }
    for (const auto& [m, c] : emp.counts) std::cout << c << "\t" << render_multiset(m, a) << "\n";
    if (o.compare_exact) std::cout << "tv_distance " << out["tv_distance"].get<std::string>() << "\n";
    return Ok;
}

int cmd_axioms(const Options& o) {
    Alphabet a = o.alphabet.empty() ? Alphabet({"a", "b"}) : alphabet_for(o, {});
    std::vector<RuleReport> reps;
    if (o.rule.empty())
        reps = check_all_rules(o.instances, o.n, o.seed, a, limits(o));
    else
        reps.push_back(check_rule(pka::rule(o.rule), o.instances, o.n, o.seed, a, limits(o)));
    bool ok = true;
    json arr = json::array();
    for (const auto& r : reps) {
        ok = ok && r.passed == r.instances;
        json j{{"rule", r.rule}, {"instances", r.instances}, {"passed", r.passed}};
        if (!r.counterexample.empty()) j["counterexample"] = r.counterexample;
        arr.push_back(j);
        if (o.format != "json")
            std::cout << (r.passed == r.instances ? "ok   " : "FAIL ") << r.rule << " " << r.passed << "/" << r.instances
                      << (r.counterexample.empty() ? "" : "  " + r.counterexample) << "\n";
    }
    if (o.format == "json") std::cout << json{{"depth", o.n}, {"seed", o.seed}, {"rules", arr}}.dump() << "\n";
    return ok ? Ok : Inequivalent;
}

} // namespace

int main(int argc, char** argv) {
    // -e1/-e2 are accepted as spelled in the usage text
    std::vector<std::string> args(argv, argv + argc);
    for (auto& s : args)
        if (s == "-e1" || s == "-e2") s = "-" + s;
    std::vector<char*> argp;
    for (auto& s : args) argp.push_back(s.data());

    Options o;
    CLI::App app{"Probabilistic Kleene algebra with angelic nondeterminism"};
    app.require_subcommand(1);
    app.add_option("--alphabet", o.alphabet, "comma-separated letters (default: inferred)");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--budget", o.budget, "support size budget")->check(CLI::PositiveNumber);
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "text"}));

    auto depth = [&](CLI::App* c) { c->add_option("-n,--depth", o.n, "observation depth")->check(CLI::NonNegativeNumber); };
    auto expr = [&](CLI::App* c, bool required) {
        auto* opt = c->add_option("-e,--expr", o.e, "expression");
        if (required) opt->required();
    };
    auto pair = [&](CLI::App* c) {
        c->add_option("--e1", o.e1, "first expression")->required();
        c->add_option("--e2", o.e2, "second expression")->required();
    };
    auto global = [&](CLI::App* c) {
        c->fallthrough();
        return c;
    };

    auto* p = global(app.add_subcommand("parse", "parse, validate and print an expression"));
    expr(p, true);
    auto* ev = global(app.add_subcommand("eval", "depth-n distribution of an expression or automaton"));
    expr(ev, false);
    ev->add_option("--automaton", o.automaton, "automaton JSON file");
    ev->add_option("--state", o.state, "state to evaluate (default: start)");
    depth(ev);
    auto* eq = global(app.add_subcommand("equiv", "compare two expressions at depth n"));
    pair(eq);
    depth(eq);
    auto* di = global(app.add_subcommand("distance", "ultrametric distance at depth n"));
    pair(di);
    depth(di);
    auto* ta = global(app.add_subcommand("to-automaton", "expression to automaton JSON"));
    expr(ta, true);
    auto* te = global(app.add_subcommand("to-expression", "automaton JSON to expression"));
    te->add_option("--automaton", o.automaton, "automaton JSON file")->required();
    te->add_option("--order", o.order, "comma-separated state elimination order");
    auto* nz = global(app.add_subcommand("normalize", "head normal form"));
    expr(nz, true);
    auto* dv = global(app.add_subcommand("derivative", "syntactic derivative"));
    expr(dv, true);
    auto* sa = global(app.add_subcommand("sample", "Monte-Carlo estimate by agent simulation"));
    expr(sa, false);
    sa->add_option("--automaton", o.automaton, "automaton JSON file");
    depth(sa);
    sa->add_option("--trials", o.trials, "number of runs")->check(CLI::PositiveNumber);
    sa->add_option("--schedule", o.schedule, "agent order")->check(CLI::IsMember({"bfs", "dfs"}));
    sa->add_flag("--compare-exact", o.compare_exact, "also report the total variation distance to the exact fragment");
    auto* ax = global(app.add_subcommand("axioms-check", "seeded soundness check of the rewrite rules"));
    depth(ax);
    ax->add_option("--instances", o.instances, "instances per rule")->check(CLI::PositiveNumber);
    ax->add_option("--rule", o.rule, "check a single rule");

    // the axiom check defaults to depth 5
    ax->preparse_callback([&](std::size_t) { o.n = 5; });

    try {
        app.parse(static_cast<int>(argp.size()), argp.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("usage", e.what(), Usage);
    }

    try {
        for (auto* c : {ev, sa})
            if (c->parsed() && o.e.empty() == o.automaton.empty())
                return report("usage", "give exactly one of --expr and --automaton", Usage);
        if (p->parsed()) return cmd_parse(o);
        if (ev->parsed()) return cmd_eval(o);
        if (eq->parsed()) return cmd_equiv(o);
        if (di->parsed()) return cmd_distance(o);
        if (ta->parsed()) return cmd_to_automaton(o);
        if (te->parsed()) return cmd_to_expression(o);
        if (nz->parsed()) return cmd_normalize(o);
        if (dv->parsed()) return cmd_derivative(o);
        if (sa->parsed()) return cmd_sample(o);
        if (ax->parsed()) return cmd_axioms(o);
    } catch (const Error& e) {
        return report(to_string(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return report("internal", e.what(), Invalid);
    }
    return Usage;
}
