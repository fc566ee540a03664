#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pka/alphabet.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/numeric.hpp"

namespace pka {

namespace detail {

enum class Tok { Ident, Number, Amp, Semi, Star, LParen, RParen, Dot, LBrace, RBrace, Comma, Colon, Plus, LBracket, RBracket, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        std::size_t start = i;
        if (ident_start(c)) {
            while (i < src.size() && ident_char(src[i])) ++i;
            out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '/' || src[i] == '.'))
                ++i;
            // a trailing '.' belongs to `fix x .`, never to a number
            if (src[i - 1] == '.') --i;
            out.push_back({Tok::Number, std::string(src.substr(start, i - start)), start});
            continue;
        }
        Tok k;
        switch (c) {
            case '&': k = Tok::Amp; break;
            case ';': k = Tok::Semi; break;
            case '*': k = Tok::Star; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case '.': k = Tok::Dot; break;
            case '{': k = Tok::LBrace; break;
            case '}': k = Tok::RBrace; break;
            case ',': k = Tok::Comma; break;
            case ':': k = Tok::Colon; break;
            case '+': k = Tok::Plus; break;
            case '[': k = Tok::LBracket; break;
            case ']': k = Tok::RBracket; break;
            default: throw SyntaxError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({k, std::string(1, c), i});
        ++i;
    }
    out.push_back({Tok::End, "", src.size()});
    return out;
}

inline bool is_keyword(std::string_view s) {
    return s == "fix" || s == "skip" || s == "fail" || s == "amp" || s == "oplus";
}

class Parser {
public:
    Parser(std::string_view src, const Alphabet* alphabet) : toks_(lex(src)), alphabet_(alphabet) {
        for (const auto& t : toks_)
            if (t.kind == Tok::Ident) taken_.insert(t.text);
        if (alphabet_)
            for (const auto& l : alphabet_->letters()) taken_.insert(l);
    }

    Expr parse_all() {
        Expr e = choice();
        if (peek().kind != Tok::End) fail_at("unexpected '" + peek().text + "'");
        return e;
    }

    /// Identifiers used as letters, in first-occurrence order.
    const std::vector<std::string>& letters_seen() const { return letters_seen_; }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& next() { return toks_[i_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        ++i_;
        return true;
    }
    [[noreturn]] void fail_at(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }
    const Token& expect(Tok k, const char* what) {
        if (peek().kind != k) fail_at(std::string("expected ") + what);
        return next();
    }

    Rational rational(const Token& t) {
        try {
            return parse_rational(t.text);
        } catch (const Error& err) {
            throw SyntaxError(err.what(), t.pos);
        }
    }

    Rational bracket_prob() {
        expect(Tok::LBracket, "'[' after '+'");
        const Token& t = expect(Tok::Number, "probability");
        Rational r = rational(t);
        if (!is_probability(r)) throw SyntaxError("probability " + to_string(r) + " outside [0,1]", t.pos);
        expect(Tok::RBracket, "']'");
        return r;
    }

    Expr choice() {
        Expr l = amp_level();
        if (!accept(Tok::Plus)) return l;
        Rational r = bracket_prob();
        Expr rhs = amp_level();
        if (peek().kind == Tok::Plus) fail_at("nested '+[r]' needs parentheses");
        return ex::oplus(std::move(l), std::move(r), std::move(rhs));
    }

    Expr amp_level() {
        Expr l = seq_level();
        while (accept(Tok::Amp)) l = ex::amp(std::move(l), seq_level());
        return l;
    }

    Expr seq_level() {
        Expr l = postfix();
        if (accept(Tok::Semi)) return ex::seq(std::move(l), seq_level());
        return l;
    }

    Expr postfix() {
        Expr e = atom();
        while (accept(Tok::Star)) e = ex::star(std::move(e), fresh());
        return e;
    }

    std::string fresh() {
        for (int k = 0;; ++k) {
            std::string cand = k == 0 ? "x" : "x" + std::to_string(k);
            if (taken_.insert(cand).second) return cand;
        }
    }

    Expr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::LParen: {
                next();
                Expr e = choice();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident: break;
            case Tok::End: fail_at("unexpected end of input");
            default: fail_at("unexpected '" + t.text + "'");
        }
        next();
        if (t.text == "skip") return ex::skip();
        if (t.text == "fail") return ex::fail();
        if (t.text == "fix") return fix_form();
        if (t.text == "amp") return amp_sugar();
        if (t.text == "oplus") return oplus_sugar();
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (*it == t.text) return ex::var(t.text);
        if (alphabet_) {
            if (!alphabet_->contains(t.text))
                throw Error(ErrorKind::UnknownIdentifier,
                            "unknown identifier '" + t.text + "' at offset " + std::to_string(t.pos));
        } else if (std::find(letters_seen_.begin(), letters_seen_.end(), t.text) == letters_seen_.end()) {
            letters_seen_.push_back(t.text);
        }
        return ex::act(t.text);
    }

    Expr fix_form() {
        const Token& v = expect(Tok::Ident, "variable after 'fix'");
        if (is_keyword(v.text)) throw SyntaxError("keyword '" + v.text + "' used as variable", v.pos);
        if (alphabet_ && alphabet_->contains(v.text))
            throw SyntaxError("fix variable '" + v.text + "' clashes with a letter", v.pos);
        scope_.push_back(v.text);
        Expr body;
        if (accept(Tok::Dot)) {
            body = choice();
        } else if (accept(Tok::LParen)) {
            body = choice();
            expect(Tok::RParen, "')'");
        } else {
            fail_at("expected '.' or '(' after fix variable");
        }
        scope_.pop_back();
        return ex::fix(v.text, std::move(body));
    }

    Expr amp_sugar() {
        expect(Tok::LBrace, "'{' after amp");
        std::vector<Expr> items;
        if (peek().kind == Tok::RBrace) fail_at("amp{} needs at least one operand");
        do items.push_back(choice());
        while (accept(Tok::Comma));
        expect(Tok::RBrace, "'}'");
        return ex::amp_n(items);
    }

    Expr oplus_sugar() {
        std::size_t pos = expect(Tok::LBrace, "'{' after oplus").pos;
        std::vector<std::pair<Expr, Rational>> items;
        do {
            Expr e = choice();
            expect(Tok::Colon, "':' before branch weight");
            const Token& t = expect(Tok::Number, "branch weight");
            items.emplace_back(std::move(e), rational(t));
        } while (accept(Tok::Comma));
        expect(Tok::RBrace, "'}'");
        try {
            return ex::oplus_n(items);
        } catch (const Error& err) {
            throw SyntaxError(err.what(), pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const Alphabet* alphabet_;
    std::vector<std::string> scope_;
    std::set<std::string> taken_;
    std::vector<std::string> letters_seen_;
};

} // namespace detail

/**
 * Parses expression text. Identifiers bound by an enclosing `fix` are
 * variables; every other identifier must be a letter of `alphabet`.
 *
 *     e  ::= a1 ('+[' r ']' a1)?         non-associative
 *     a1 ::= s1 ('&' s1)*                left-associative
 *     s1 ::= p (';' s1)?                 right-associative
 *     p  ::= atom '*'*
 *     atom ::= x | a | skip | fail | '(' e ')'
 *            | fix x '.' e | fix x '(' e ')'
 *            | amp '{' e, ... '}' | oplus '{' e ':' r, ... '}'
 */
inline Expr parse(std::string_view text, const Alphabet& alphabet) {
    return detail::Parser(text, &alphabet).parse_all();
}

/// Alphabet of the identifiers that are not bound by any fix, sorted.
inline Alphabet infer_alphabet(std::string_view text) {
    detail::Parser p(text, nullptr);
    p.parse_all();
    std::vector<std::string> ls = p.letters_seen();
    std::sort(ls.begin(), ls.end());
    return Alphabet(std::move(ls));
}

} // namespace pka
