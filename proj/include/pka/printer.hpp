#pragma once

#include <string>

#include "pka/expr.hpp"

namespace pka {

namespace detail {

// Binding strength, loosest first. Operands are printed with the minimum
// level their position requires and parenthesised when they bind looser.
enum PrintLevel { kChoice = 0, kAmp = 1, kSeq = 2, kPostfix = 3 };

/// Recognises fix x (skip & (e ; x)) with x not free in e.
inline const Expr* star_body(const Expr& e) {
    if (!is(e, ExprKind::Fix)) return nullptr;
    const Expr& b = e->left;
    if (!is(b, ExprKind::Amp) || !is(b->left, ExprKind::Skip)) return nullptr;
    const Expr& s = b->right;
    if (!is(s, ExprKind::Seq) || !is(s->right, ExprKind::Var) || s->right->name != e->name) return nullptr;
    if (free_vars(s->left).count(e->name)) return nullptr;
    return &s->left;
}

inline void print_rec(const Expr& e, int level, std::string& out) {
    auto open = [&](int need) {
        bool p = level > need;
        if (p) out += '(';
        return p;
    };
    switch (e->kind) {
        case ExprKind::Var:
        case ExprKind::Act: out += e->name; return;
        case ExprKind::Skip: out += "skip"; return;
        case ExprKind::Fail: out += "fail"; return;
        case ExprKind::OPlus: {
            bool p = open(kChoice);
            print_rec(e->left, kAmp, out);
            out += " +[" + to_string(e->prob) + "] ";
            print_rec(e->right, kAmp, out);
            if (p) out += ')';
            return;
        }
        case ExprKind::Amp: {
            bool p = open(kAmp);
            print_rec(e->left, kAmp, out);
            out += " & ";
            print_rec(e->right, kSeq, out);
            if (p) out += ')';
            return;
        }
        case ExprKind::Seq: {
            bool p = open(kSeq);
            print_rec(e->left, kPostfix, out);
            out += " ; ";
            print_rec(e->right, kSeq, out);
            if (p) out += ')';
            return;
        }
        case ExprKind::Fix: {
            if (const Expr* body = star_body(e)) {
                print_rec(*body, kPostfix, out);
                out += '*';
                return;
            }
            out += "fix " + e->name + " (";
            print_rec(e->left, kChoice, out);
            out += ')';
            return;
        }
    }
}

} // namespace detail

/// Concrete syntax accepted back by `parse`.
inline std::string print(const Expr& e) {
    std::string out;
    detail::print_rec(e, detail::kChoice, out);
    return out;
}

} // namespace pka
