#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "pka/error.hpp"

namespace pka {

/// Exact probabilities. mpq_class keeps values gcd-reduced after every
/// arithmetic operation as long as the inputs were canonical.
using Rational = mpq_class;

/**
 * Arbitrary-precision natural number with an inline 64-bit fast path.
 *
 * Multiplicities are almost always tiny, so heap-allocating an mpz for each
 * would dominate evaluation cost. Values that do not fit in 64 bits are held
 * in a shared immutable mpz.
 */
class Natural {
public:
    Natural() = default;
    Natural(std::uint64_t v) : small_(v) {} // NOLINT(google-explicit-constructor)

    explicit Natural(const mpz_class& v) { assign(v); }

    static Natural from_string(std::string_view text) {
        if (text.empty()) throw Error(ErrorKind::Syntax, "empty natural number");
        for (char c : text)
            if (c < '0' || c > '9')
                throw Error(ErrorKind::Syntax, "invalid natural number '" + std::string(text) + "'");
        return Natural(mpz_class(std::string(text), 10));
    }

    bool is_zero() const noexcept { return !big_ && small_ == 0; }
    bool is_small() const noexcept { return !big_; }

    std::optional<std::uint64_t> to_u64() const noexcept {
        if (big_) return std::nullopt;
        return small_;
    }

    mpz_class to_mpz() const {
        if (big_) return *big_;
        mpz_class r;
        mpz_import(r.get_mpz_t(), 1, 1, sizeof(small_), 0, 0, &small_);
        return r;
    }

    std::string str() const { return big_ ? big_->get_str() : std::to_string(small_); }

    Natural& operator+=(const Natural& o) {
        if (!big_ && !o.big_) {
            std::uint64_t r;
            if (!__builtin_add_overflow(small_, o.small_, &r)) {
                small_ = r;
                return *this;
            }
        }
        assign(to_mpz() + o.to_mpz());
        return *this;
    }

    friend Natural operator+(Natural a, const Natural& b) { return a += b; }

    friend Natural operator*(const Natural& a, const Natural& b) {
        if (!a.big_ && !b.big_) {
            std::uint64_t r;
            if (!__builtin_mul_overflow(a.small_, b.small_, &r)) return Natural(r);
        }
        return Natural(mpz_class(a.to_mpz() * b.to_mpz()));
    }

    friend bool operator==(const Natural& a, const Natural& b) {
        if (!a.big_ && !b.big_) return a.small_ == b.small_;
        if (a.big_ && b.big_) return *a.big_ == *b.big_;
        return false; // representation is canonical
    }

    friend std::strong_ordering operator<=>(const Natural& a, const Natural& b) {
        if (!a.big_ && !b.big_) return a.small_ <=> b.small_;
        if (!a.big_) return std::strong_ordering::less;
        if (!b.big_) return std::strong_ordering::greater;
        int c = cmp(*a.big_, *b.big_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    void assign(const mpz_class& v) {
        if (sgn(v) < 0) throw Error(ErrorKind::InvalidArgument, "negative natural number");
        if (mpz_sizeinbase(v.get_mpz_t(), 2) <= 64) {
            std::uint64_t out = 0;
            mpz_export(&out, nullptr, 1, sizeof(out), 0, 0, v.get_mpz_t());
            small_ = out;
            big_.reset();
        } else {
            small_ = 0;
            big_ = std::make_shared<const mpz_class>(v);
        }
    }

    std::uint64_t small_ = 0;
    std::shared_ptr<const mpz_class> big_;
};

/// "p/q" in lowest terms, or "p" for integers.
inline std::string to_string(const Rational& r) { return r.get_str(); }

/**
 * Parses `p/q`, an integer, or a finite decimal such as `0.25` into an exact
 * rational. Decimals are converted exactly (0.1 is 1/10).
 */
inline Rational parse_rational(std::string_view text) {
    auto bad = [&] { return Error(ErrorKind::Syntax, "invalid rational '" + std::string(text) + "'"); };
    if (text.empty()) throw bad();
    auto digits = [](std::string_view s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto num = text.substr(0, slash), den = text.substr(slash + 1);
        if (!digits(num) || !digits(den)) throw bad();
        mpz_class d(std::string{den}, 10);
        if (d == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator in '" + std::string(text) + "'");
        Rational r(mpz_class(std::string{num}, 10), d);
        r.canonicalize();
        return r;
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto ip = text.substr(0, dot), fp = text.substr(dot + 1);
        if (ip.empty()) ip = "0";
        if (!digits(ip) || !digits(fp)) throw bad();
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
        Rational r(mpz_class(std::string{ip} + std::string{fp}, 10), den);
        r.canonicalize();
        return r;
    }
    if (!digits(text)) throw bad();
    return Rational(mpz_class(std::string{text}, 10));
}

inline bool is_probability(const Rational& r) { return sgn(r) >= 0 && r <= 1; }

} // namespace pka
