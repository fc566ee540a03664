// Simulating a fair coin with a biased one: flip twice, keep the outcome when
// the flips differ, retry (emitting c) when they agree. Both sides are
// evaluated exactly and compared at increasing depth.

#include <iostream>

#include "pka/pka.hpp"

using namespace pka;

int main(int argc, char** argv) {
    Alphabet abc({"a", "b", "c"});
    std::string r = argc > 1 ? argv[1] : "1/3";
    int depth = argc > 2 ? std::stoi(argv[2]) : 5;

    Rational rr = parse_rational(r);
    Rational stop = 2 * rr * (1 - rr);
    Expr biased = parse("fix x (((c ; x) +[" + r + "] a) +[" + r + "] (b +[" + r + "] (c ; x)))", abc);
    Expr fair = parse("(fix x (skip +[" + stop.get_str() + "] (c ; x))) ; (a +[1/2] b)", abc);
    validate(biased, abc);
    validate(fair, abc);

    std::cout << "biased: " << print(biased) << "\n"
              << "fair:   " << print(fair) << "\n";
    for (int n = 0; n <= depth; ++n) {
        FinDist x = eval_closed(biased, n, abc), y = eval_closed(fair, n, abc);
        std::cout << "depth " << n << ": " << x.size() << " outcomes, " << (x == y ? "equal" : "DIFFERENT") << "\n";
        if (x != y) return 1;
    }
    std::cout << json_io::findist(eval_closed(fair, 2, abc), abc).dump(2) << "\n";
    return 0;
}
