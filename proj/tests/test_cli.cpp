#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct CliResult {
    int code = -1;
    std::string out, err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult pka(const std::vector<std::string>& args) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("pka_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    fs::path out = dir / ("out" + std::to_string(counter));
    fs::path err = dir / ("err" + std::to_string(counter++));
    std::string cmd = quote(PKA_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

TEST(Cli, EvalDoubleStarIsPointMass) {
    CliResult r = pka({"eval", "-e", "(a;a*)*", "-n", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    EXPECT_EQ(j["depth"], 3);
    ASSERT_EQ(j["support"].size(), 1u);
    EXPECT_EQ(j["support"][0]["prob"], "1");
    EXPECT_EQ(j["support"][0]["multiset"], json::parse(R"([["",1],["a",1],["aa",2],["aaa",4]])"));
}

TEST(Cli, OutputIsByteStable) {
    CliResult a = pka({"eval", "-e", "(a +[1/2] b)*", "-n", "2"});
    CliResult b = pka({"eval", "-e", "(a +[1/2] b)*", "-n", "2"});
    EXPECT_EQ(a.out, b.out);
    CliResult s1 = pka({"sample", "-e", "(a +[1/3] b) & a", "-n", "1", "--trials", "200", "--seed", "11"});
    CliResult s2 = pka({"sample", "-e", "(a +[1/3] b) & a", "-n", "1", "--trials", "200", "--seed", "11"});
    EXPECT_EQ(s1.out, s2.out);
}

TEST(Cli, EquivExitCodes) {
    CliResult same = pka({"equiv", "-e1", "skip;a", "-e2", "a", "-n", "5"});
    EXPECT_EQ(same.code, 0) << same.err;
    EXPECT_TRUE(json::parse(same.out)["equivalent"].get<bool>());

    CliResult diff = pka({"equiv", "-e1", "a +[1/2] b", "-e2", "a", "-n", "1"});
    EXPECT_EQ(diff.code, 1);
    json j = json::parse(diff.out);
    EXPECT_FALSE(j["equivalent"].get<bool>());
    EXPECT_EQ(j["witness"]["depth"], 1);
    EXPECT_TRUE(j["witness"].contains("class"));
    EXPECT_NE(j["witness"]["left"], j["witness"]["right"]);
}

TEST(Cli, Distance) {
    EXPECT_EQ(pka({"distance", "--e1", "a +[1/2] b", "--e2", "a", "-n", "3", "--format", "text"}).out, "2^-1\n");
    EXPECT_EQ(pka({"distance", "--e1", "skip;a", "--e2", "a", "-n", "3", "--format", "text"}).out, "<=2^-4\n");
    EXPECT_EQ(pka({"distance", "--e1", "a;a", "--e2", "a;b", "-n", "3", "--format", "text"}).out, "2^-2\n");
}

TEST(Cli, ErrorsAreJsonWithExitCodes) {
    struct Case {
        std::vector<std::string> args;
        int code;
        const char* kind;
    };
    std::vector<Case> cases = {
        {{"parse", "-e", "a +[1/2] b +[1/2] c"}, 2, "syntax"},
        {{"parse", "-e", "a & c", "--alphabet", "a,b"}, 2, "unknown_identifier"},
        {{"eval", "-e", "fix x (skip & x)", "-n", "2"}, 3, "productivity_violation"},
        {{"parse", "-e", "fix x (x ; a)"}, 3, "closedness_violation"},
        {{"eval", "-e", "(a +[1/2] b)*", "-n", "6", "--budget", "10"}, 4, "support_explosion"},
        {{"eval", "-e", "a", "--no-such-flag"}, 2, "usage"},
        {{"eval", "-n", "2"}, 2, "usage"},
    };
    for (const auto& c : cases) {
        CliResult r = pka(c.args);
        EXPECT_EQ(r.code, c.code) << c.args[2];
        json j = json::parse(r.err);
        EXPECT_EQ(j["error"], c.kind) << r.err;
        EXPECT_TRUE(j.contains("message"));
    }
}

TEST(Cli, NormalizeAndDerivative) {
    CliResult n = pka({"normalize", "-e", "skip", "--alphabet", "a,b", "--format", "text"});
    ASSERT_EQ(n.code, 0) << n.err;
    EXPECT_EQ(n.out, "skip & (a ; fail & b ; fail)\n");

    CliResult d = pka({"derivative", "-e", "a*", "--alphabet", "a,b"});
    ASSERT_EQ(d.code, 0) << d.err;
    json j = json::parse(d.out);
    ASSERT_EQ(j["outcomes"].size(), 1u);
    EXPECT_EQ(j["outcomes"][0]["eps"], 1);
    EXPECT_EQ(j["outcomes"][0]["prob"], "1");
    EXPECT_EQ(j["outcomes"][0]["succ"]["a"], json::parse(R"(["a*"])"));
    EXPECT_EQ(j["outcomes"][0]["succ"]["b"], json::array());
}

TEST(Cli, SampleReportsCountsAndDistance) {
    CliResult r = pka({"sample", "-e", "a*", "-n", "2", "--trials", "50", "--seed", "7", "--compare-exact"});
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    EXPECT_EQ(j["trials"], 50);
    ASSERT_EQ(j["support"].size(), 1u);
    EXPECT_EQ(j["support"][0]["count"], 50);
    EXPECT_EQ(j["tv_distance"], "0");
}

TEST(Cli, AxiomsCheckSingleRule) {
    CliResult r = pka({"axioms-check", "--rule", "seq-amp-rdist", "--instances", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    EXPECT_EQ(j["depth"], 5);
    EXPECT_EQ(j["rules"][0]["passed"], 20);
}

// to-automaton, then to-expression, then eval agrees with direct eval
TEST(Cli, AutomatonRoundTrip) {
    for (std::string e : {"(a +[1/2] b)*", "fix x (a ; x +[1/3] (b & skip))", "(a;a*)*"}) {
        CliResult aut = pka({"to-automaton", "-e", e, "--alphabet", "a,b"});
        ASSERT_EQ(aut.code, 0) << aut.err;
        fs::path file = fs::temp_directory_path() / ("pka_cli_aut_" + std::to_string(::getpid()) + ".json");
        std::ofstream(file) << aut.out;

        CliResult direct = pka({"eval", "-e", e, "-n", "3", "--alphabet", "a,b"});
        CliResult via_aut = pka({"eval", "--automaton", file.string(), "-n", "3"});
        EXPECT_EQ(direct.out, via_aut.out) << e;

        CliResult back = pka({"to-expression", "--automaton", file.string(), "--format", "text"});
        ASSERT_EQ(back.code, 0) << back.err;
        std::string text = back.out.substr(0, back.out.size() - 1);
        CliResult solved = pka({"eval", "-e", text, "-n", "3", "--alphabet", "a,b"});
        EXPECT_EQ(direct.out, solved.out) << e << " -> " << text;
        fs::remove(file);
    }
}

TEST(Cli, ToExpressionReportsOrderAndSizes) {
    fs::path file = fs::temp_directory_path() / ("pka_cli_fig2_" + std::to_string(::getpid()) + ".json");
    std::ofstream(file) << R"({"alphabet":["a"],"start":"s","states":{
        "s":{"label":"amp","multiset":[["k",1],["as",1]]},
        "t":{"label":"amp","multiset":[["s",1],["at",1]]},
        "k":{"label":"skip"},
        "as":{"label":"act","letter":"a","next":"t"},
        "at":{"label":"act","letter":"a","next":"t"}}})";
    CliResult r = pka({"to-expression", "--automaton", file.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    EXPECT_EQ(j["order"].size(), 5u);
    EXPECT_TRUE(j["sizes"].contains("s"));
    CliResult other = pka({"to-expression", "--automaton", file.string(), "--order", "at,as,k,t,s"});
    ASSERT_EQ(other.code, 0) << other.err;
    EXPECT_EQ(json::parse(other.out)["order"][0], "at");
    fs::remove(file);
}

} // namespace
