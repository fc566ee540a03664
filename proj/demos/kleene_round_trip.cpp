// Expression -> automaton -> equations -> expression, checked by evaluation.

#include <iostream>

#include "pka/pka.hpp"

using namespace pka;

int main(int argc, char** argv) {
    std::string text = argc > 1 ? argv[1] : "(a +[1/2] b)* & (a ; b)*";
    int depth = argc > 2 ? std::stoi(argv[2]) : 4;
    Alphabet alphabet({"a", "b"});
    Expr e = parse(text, alphabet);
    validate(e, alphabet);

    Automaton aut = expr_to_automaton(e, alphabet);
    std::cout << "automaton with " << aut.size() << " states\n" << json_io::automaton(aut).dump(2) << "\n";

    EquationSystem sys = automaton_to_system(aut);
    for (const auto& [x, rhs] : sys.equations) std::cout << x << " = " << print(rhs) << "\n";

    SystemSolution sol = solve_system(sys);
    const std::string& start = sys.equations[aut.start].first;
    const Expr& back = sol.solutions.at(start);
    std::cout << "solution: " << print(back) << "\n"
              << "sizes: tree " << sol.tree_sizes.at(start) << ", dag " << sol.dag_sizes.at(start) << "\n";

    for (int n = 0; n <= depth; ++n) {
        bool same = eval_closed(e, n, alphabet) == eval_closed(back, n, alphabet);
        std::cout << "depth " << n << ": " << (same ? "equal" : "DIFFERENT") << "\n";
        if (!same) return 1;
    }
    return 0;
}
