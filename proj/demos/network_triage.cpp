// Defender guards two of three servers (each guarded server is hit twice),
// the attacker hits one. A server is compromised when some letter ends up
// with multiplicity one.

#include <iostream>

#include "pka/pka.hpp"

using namespace pka;

int main(int argc, char** argv) {
    std::vector<std::string> w{"1/4", "1/4", "1/2", "1/3", "1/3", "1/3"};
    for (int i = 1; i < argc && i <= 6; ++i) w[i - 1] = argv[i];
    Alphabet abc({"a", "b", "c"});

    std::string text = "oplus{amp{a, a, b, b} : " + w[0] + ", amp{a, a, c, c} : " + w[1] + ", amp{b, b, c, c} : " + w[2] +
                       "} & oplus{a : " + w[3] + ", b : " + w[4] + ", c : " + w[5] + "}";
    Expr e = parse(text, abc);
    validate(e, abc);

    FinDist d = eval_closed(e, 1, abc);
    Rational hit(0);
    for (const auto& [m, p] : d.support()) {
        std::cout << json_io::multiset(m, abc).dump() << "  " << p << "\n";
        for (const auto& [word, k] : m.entries())
            if (!word.empty() && k == Natural(1)) {
                hit += p;
                break;
            }
    }
    std::vector<Rational> q;
    for (const auto& s : w) q.push_back(parse_rational(s));
    Rational dot = q[0] * q[5] + q[1] * q[4] + q[2] * q[3];
    std::cout << "P(compromised) = " << hit << " (dot product " << dot << ")\n";
    return hit == dot ? 0 : 1;
}
