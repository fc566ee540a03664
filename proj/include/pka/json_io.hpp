#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "pka/alphabet.hpp"
#include "pka/automaton.hpp"
#include "pka/error.hpp"
#include "pka/findist.hpp"
#include "pka/printer.hpp"
#include "pka/rewrite.hpp"
#include "pka/sampler.hpp"

namespace pka::json_io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Multiplicities are JSON integers when they fit in 64 bits, else decimal strings.
inline json natural(const Natural& k) {
    if (auto v = k.to_u64()) return *v;
    return k.str();
}

inline Natural natural(const json& j) {
    if (j.is_number_unsigned()) return Natural(j.get<std::uint64_t>());
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return Natural(static_cast<std::uint64_t>(j.get<std::int64_t>()));
    if (j.is_string()) return Natural::from_string(j.get<std::string>());
    throw Error(ErrorKind::Syntax, "expected a nonnegative integer");
}

/// Inverse of Alphabet::render.
inline Word parse_word(const Alphabet& alphabet, const std::string& text) {
    Word w;
    if (text.empty()) return w;
    bool single = true;
    for (const auto& l : alphabet.letters()) single = single && l.size() == 1;
    if (single) {
        for (char c : text) w.push_back(static_cast<char>(alphabet.index(std::string(1, c))));
        return w;
    }
    std::size_t start = 0;
    for (;;) {
        std::size_t dot = text.find('.', start);
        w.push_back(static_cast<char>(alphabet.index(text.substr(start, dot - start))));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return w;
}

inline json multiset(const TruncMultiset& m, const Alphabet& alphabet) {
    json arr = json::array();
    for (const auto& [w, k] : m.entries()) arr.push_back(json::array({alphabet.render(w), natural(k)}));
    return arr;
}

inline TruncMultiset multiset(const json& j, int depth, const Alphabet& alphabet) {
    std::vector<TruncMultiset::Entry> entries;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string()) throw Error(ErrorKind::Syntax, "bad multiset entry");
        entries.emplace_back(parse_word(alphabet, e[0].get<std::string>()), natural(e[1]));
    }
    return TruncMultiset(depth, std::move(entries));
}

/// {"depth":N,"support":[{"multiset":[["",1],["a",2]],"prob":"1/4"}, ...]}
inline json findist(const FinDist& d, const Alphabet& alphabet) {
    json sup = json::array();
    for (const auto& [m, w] : d.support()) sup.push_back({{"multiset", multiset(m, alphabet)}, {"prob", to_string(w)}});
    return {{"depth", d.depth()}, {"support", sup}};
}

inline FinDist findist(const json& j, const Alphabet& alphabet) {
    try {
        int depth = j.at("depth").get<int>();
        std::vector<FinDist::Point> pts;
        for (const auto& p : j.at("support"))
            pts.emplace_back(multiset(p.at("multiset"), depth, alphabet), parse_rational(p.at("prob").get<std::string>()));
        return FinDist::from_points(depth, std::move(pts));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Syntax, std::string("bad distribution JSON: ") + e.what());
    }
}

inline std::string state_name(const Automaton& aut, StateId i) {
    const std::string& n = aut.states[i].name;
    return n.empty() ? "s" + std::to_string(i) : n;
}

/// Automaton in the interchange format; states appear in index order.
inline ordered_json automaton(const Automaton& aut) {
    ordered_json states = ordered_json::object();
    for (StateId i = 0; i < aut.size(); ++i) {
        const State& s = aut.states[i];
        ordered_json o;
        o["label"] = to_string(s.label);
        switch (s.label) {
            case Label::Amp: {
                ordered_json m = ordered_json::array();
                for (const auto& [t, k] : s.multiset) m.push_back(ordered_json::array({state_name(aut, t), natural(k)}));
                o["multiset"] = m;
                break;
            }
            case Label::OPlus: {
                ordered_json d = ordered_json::array();
                for (const auto& [t, r] : s.dist) d.push_back(ordered_json::array({state_name(aut, t), to_string(r)}));
                o["dist"] = d;
                break;
            }
            case Label::Act:
                o["letter"] = aut.alphabet.name(s.letter);
                o["next"] = state_name(aut, s.next);
                break;
            default: break;
        }
        states[state_name(aut, i)] = o;
    }
    ordered_json out;
    out["alphabet"] = aut.alphabet.letters();
    out["start"] = state_name(aut, aut.start);
    out["states"] = states;
    return out;
}

/// Parses and validates an automaton; state indices follow the file order.
inline Automaton automaton(const ordered_json& j) {
    Automaton aut;
    try {
        aut.alphabet = Alphabet(j.at("alphabet").get<std::vector<std::string>>());
        const auto& states = j.at("states");
        if (!states.is_object()) throw Error(ErrorKind::Shape, "states must be an object");
        std::map<std::string, StateId> index;
        for (const auto& [name, _] : states.items()) index.emplace(name, index.size());
        auto ref = [&](const ordered_json& v) {
            auto it = index.find(v.get<std::string>());
            if (it == index.end()) throw Error(ErrorKind::Shape, "reference to unknown state '" + v.get<std::string>() + "'");
            return it->second;
        };
        for (const auto& [name, o] : states.items()) {
            std::string label = o.at("label").get<std::string>();
            if (label == "skip") {
                aut.add(st::skip(name));
            } else if (label == "fail") {
                aut.add(st::fail(name));
            } else if (label == "act") {
                aut.add(st::act(aut.alphabet.index(o.at("letter").get<std::string>()), ref(o.at("next")), name));
            } else if (label == "amp") {
                std::vector<std::pair<StateId, Natural>> m;
                for (const auto& e : o.at("multiset")) m.emplace_back(ref(e.at(0)), natural(json(e.at(1))));
                aut.add(st::amp(std::move(m), name));
            } else if (label == "oplus") {
                std::vector<std::pair<StateId, Rational>> d;
                for (const auto& e : o.at("dist")) d.emplace_back(ref(e.at(0)), parse_rational(e.at(1).get<std::string>()));
                aut.add(st::oplus(std::move(d), name));
            } else {
                throw Error(ErrorKind::Shape, "unknown label '" + label + "' on state " + name);
            }
        }
        aut.start = ref(j.at("start"));
    } catch (const ordered_json::exception& e) {
        throw Error(ErrorKind::Shape, std::string("bad automaton JSON: ") + e.what());
    }
    validate_automaton(aut);
    return aut;
}

/// {"outcomes":[{"prob":"1/2","eps":1,"succ":{"a":["skip"],"b":[]}}, ...]}
inline json brz_step(const BrzStep& step, const Alphabet& alphabet) {
    json outs = json::array();
    for (const auto& [o, w] : step) {
        json succ = json::object();
        for (std::size_t l = 0; l < o.succ.size(); ++l) {
            json bag = json::array();
            for (const auto& e : o.succ[l]) bag.push_back(print(e));
            succ[alphabet.name(static_cast<Letter>(l))] = bag;
        }
        outs.push_back({{"prob", to_string(w)}, {"eps", natural(o.eps)}, {"succ", succ}});
    }
    return {{"outcomes", outs}};
}

/// {"depth":N,"trials":T,"support":[{"multiset":[...],"count":k}, ...]}
inline json empirical(const EmpiricalDist& emp, const Alphabet& alphabet) {
    json sup = json::array();
    for (const auto& [m, c] : emp.counts) sup.push_back({{"multiset", multiset(m, alphabet)}, {"count", c}});
    return {{"depth", emp.depth}, {"trials", emp.trials}, {"support", sup}};
}

} // namespace pka::json_io
