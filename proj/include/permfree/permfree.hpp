#pragma once

// Umbrella header.

#include "permfree/cpolynomial.hpp"
#include "permfree/errors.hpp"
#include "permfree/exact_expectation.hpp"
#include "permfree/free_word.hpp"
#include "permfree/limit_moments.hpp"
#include "permfree/matrix_sim.hpp"
#include "permfree/monomial.hpp"
#include "permfree/parser.hpp"
#include "permfree/perm.hpp"
#include "permfree/rational.hpp"
#include "permfree/report.hpp"
#include "permfree/rng.hpp"
#include "permfree/studies.hpp"
#include "permfree/wick_oracle.hpp"
#include "permfree/word_cycles.hpp"
