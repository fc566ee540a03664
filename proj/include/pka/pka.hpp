#pragma once

#include "pka/alphabet.hpp"
#include "pka/automaton.hpp"
#include "pka/error.hpp"
#include "pka/expr.hpp"
#include "pka/expr_eval.hpp"
#include "pka/findist.hpp"
#include "pka/json_io.hpp"
#include "pka/kleene.hpp"
#include "pka/multiset.hpp"
#include "pka/numeric.hpp"
#include "pka/parser.hpp"
#include "pka/printer.hpp"
#include "pka/random.hpp"
#include "pka/rewrite.hpp"
#include "pka/sampler.hpp"
#include "pka/soundness.hpp"
#include "pka/syntax.hpp"
