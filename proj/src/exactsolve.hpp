#pragma once

#include <vector>

#include "core.hpp"

namespace mbar {

// Full boundary-matching solution for a finite array: reflection and
// transmission amplitudes plus every interior coefficient, ordered as
// (r, C1, D1, A1, B1, ..., C_N, D_N, t).
struct ExactSolution {
    cplx reflection{};
    cplx transmission{};
    std::vector<cplx> coefficients;
    double residual_inf = 0.0;
    // Set when a single-barrier spec carries a positive gap budget, which the
    // geometry ignores.
    bool gap_ignored = false;
};

// Assembles and solves the 4N x 4N matching system with partial-pivot LU.
// When check_conditioning is true, a reciprocal-condition estimate is made
// first and estimates above 1e12 raise IllConditionedError.
ExactSolution exact_solve(const BarrierSpec& spec, double e,
                          bool check_conditioning = false);

double transmission_exact(const BarrierSpec& spec, double e);

// Condition-number estimate of the matching matrix (1 / LU rcond).
double condition_estimate(const BarrierSpec& spec, double e);

} // namespace mbar
