#include <gtest/gtest.h>

#include "support.hpp"

using namespace pka;
using namespace testutil;
using json_io::json;
using json_io::ordered_json;

namespace {

const Alphabet& A = ab();

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidArgument;
}

} // namespace

TEST(Json, FinDistFormat) {
    FinDist d = dist(1, {{ms(A, 1, {{"", 1}, {"a", 2}}), "1/4"}, {ms(A, 1, {{"b", 1}}), "3/4"}});
    json j = json_io::findist(d, A);
    EXPECT_EQ(j["depth"], 1);
    ASSERT_EQ(j["support"].size(), 2u);
    for (const auto& p : j["support"]) {
        EXPECT_TRUE(p["prob"].is_string());
        EXPECT_TRUE(p["multiset"].is_array());
    }
    EXPECT_EQ(j.dump(), json_io::findist(d, A).dump());
    EXPECT_EQ(json_io::findist(j, A), d);
}

TEST(Json, BigMultiplicitiesAreStrings) {
    Alphabet a({"a"});
    FinDist d = eval_closed(P("(a;a*)*", a), 70, a);
    json j = json_io::findist(d, a);
    const json& ms70 = j["support"][0]["multiset"].back();
    EXPECT_EQ(ms70[0].get<std::string>(), std::string(70, 'a'));
    EXPECT_EQ(ms70[1], "590295810358705651712"); // 2^69
    EXPECT_EQ(json_io::findist(j, a), d);
}

TEST(Json, MultiLetterWordsUseDots) {
    Alphabet L({"go", "stop"});
    FinDist d = eval_closed(P("go ; stop", L), 2, L);
    json j = json_io::findist(d, L);
    EXPECT_EQ(j["support"][0]["multiset"][0][0], "go.stop");
    EXPECT_EQ(json_io::findist(j, L), d);
}

TEST(Json, FinDistErrors) {
    EXPECT_EQ(kind_of([] { json_io::findist(json::parse(R"({"support":[]})"), A); }), ErrorKind::Syntax);
    EXPECT_EQ(kind_of([] { json_io::findist(json::parse(R"({"depth":1,"support":[{"multiset":[["a",-1]],"prob":"1"}]})"), A); }),
              ErrorKind::Syntax);
    EXPECT_THROW(json_io::findist(json::parse(R"({"depth":1,"support":[{"multiset":[["c",1]],"prob":"1"}]})"), A), Error);
}

TEST(Json, AutomatonFormatAndRoundTrip) {
    Automaton aut = fig_coin_star();
    ordered_json j = json_io::automaton(aut);
    EXPECT_EQ(j["start"], "s");
    EXPECT_EQ(j["alphabet"], json::parse(R"(["a","b"])"));
    EXPECT_EQ(j["states"]["t"]["label"], "oplus");
    EXPECT_EQ(j["states"]["t"]["dist"][0][1], "1/2");
    EXPECT_EQ(j["states"]["as"]["letter"], "a");
    EXPECT_EQ(j["states"]["as"]["next"], "s");
    EXPECT_EQ(j["states"]["s"]["multiset"][0][1], 1);
    Automaton back = json_io::automaton(j);
    EXPECT_EQ(json_io::automaton(back).dump(), j.dump());
    for (int n = 0; n <= 3; ++n) EXPECT_EQ(eval_state(back, back.start, n), eval_state(aut, aut.start, n));
}

TEST(Json, CorpusAutomataRoundTrip) {
    for (const auto& aut : aut_corpus()) {
        ordered_json j = json_io::automaton(aut);
        Automaton back = json_io::automaton(ordered_json::parse(j.dump()));
        ASSERT_EQ(json_io::automaton(back).dump(), j.dump());
        ASSERT_EQ(eval_state(back, back.start, 3), eval_state(aut, aut.start, 3));
    }
}

TEST(Json, AutomatonErrors) {
    auto load = [](const char* text) { return [text] { json_io::automaton(ordered_json::parse(text)); }; };
    EXPECT_EQ(kind_of(load(R"({"alphabet":["a"],"start":"s","states":{"s":{"label":"act","letter":"a","next":"q"}}})")),
              ErrorKind::Shape);
    EXPECT_EQ(kind_of(load(R"({"alphabet":["a"],"start":"s","states":{"s":{"label":"loop"}}})")), ErrorKind::Shape);
    EXPECT_EQ(kind_of(load(R"({"alphabet":["a"],"states":{"s":{"label":"skip"}}})")), ErrorKind::Shape);
    EXPECT_EQ(kind_of(load(R"({"alphabet":["a"],"start":"s","states":{"s":{"label":"amp","multiset":[["s",1]]}}})")),
              ErrorKind::Productivity);
    EXPECT_EQ(kind_of(load(R"({"alphabet":["a"],"start":"s","states":{"s":{"label":"oplus","dist":[["k","1/3"]]},"k":{"label":"skip"}}})")),
              ErrorKind::Shape);
}

TEST(Json, BrzStepFormat) {
    json j = json_io::brz_step(brzozowski(P("a +[1/2] skip", A), A), A);
    ASSERT_EQ(j["outcomes"].size(), 2u);
    for (const auto& o : j["outcomes"]) {
        EXPECT_EQ(o["prob"], "1/2");
        EXPECT_TRUE(o["succ"].contains("a"));
        EXPECT_TRUE(o["succ"].contains("b"));
        EXPECT_EQ(o["succ"]["b"], json::array());
        if (o["eps"] == 0)
            EXPECT_EQ(o["succ"]["a"], json::parse(R"(["skip"])"));
        else
            EXPECT_EQ(o["succ"]["a"], json::array());
    }
}

TEST(Json, EmpiricalFormat) {
    EmpiricalDist emp = empirical(P("a +[1/2] b", A), 1, 100, 5, A);
    json j = json_io::empirical(emp, A);
    EXPECT_EQ(j["depth"], 1);
    EXPECT_EQ(j["trials"], 100);
    std::uint64_t total = 0;
    for (const auto& p : j["support"]) total += p["count"].get<std::uint64_t>();
    EXPECT_EQ(total, 100u);
}
