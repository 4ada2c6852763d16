#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "core.hpp"

namespace mbar {

enum class RegimeFilter { Both, OverOnly, UnderOnly };

// Bound-region setup: the array sits at the center of a periodic box of
// half-width C (boundary conditions tie x = -C to x = +C).
struct QuantizationProblem {
    BarrierSpec spec;            // infinite-count limit form
    double box_half_width_c = 90.0;
    double e_min = 1.0;
    double e_max = 600.0;
    RegimeFilter filter = RegimeFilter::Both;
};

struct LevelSet {
    std::vector<double> energies;  // strictly increasing
    std::vector<double> unfolded;  // populated by unfold()
    std::vector<double> spacings;  // normalized to mean 1
};

void validate(const QuantizationProblem& problem);

// Determinant residual of the periodic-box matching condition; levels are the
// energies where both parts vanish simultaneously.
cplx quantization_residual(const QuantizationProblem& problem, double e);

// Grid bracketing on |residual|^2 minima followed by golden-section
// refinement; minima are accepted as roots only when the refined residual is
// below 1e-8 relative to the bracket scale. Duplicates within 1e-8 merge.
LevelSet find_levels(const QuantizationProblem& problem);

// Smooth-staircase unfolding: cumulative count fitted by a polynomial (degree
// 5 by default) on a normalized domain; spacings rescaled to mean exactly 1.
LevelSet unfold(const LevelSet& levels, int degree = 5);

struct SpacingStatistics {
    std::vector<double> bin_left;
    std::vector<double> bin_right;
    std::vector<double> density;   // integrates to 1
    double wigner_distance = 0.0;  // KS distance against the Wigner surmise
    double poisson_distance = 0.0; // KS distance against exp(-s)
};

SpacingStatistics spacing_statistics(const LevelSet& levels, int bins);

// Reference cumulative distributions and matching inverse-CDF samplers.
double wigner_cdf(double s);
double poisson_cdf(double s);
std::vector<double> sample_wigner(std::size_t n, std::uint64_t seed);
std::vector<double> sample_poisson(std::size_t n, std::uint64_t seed);

// KS distance between an arbitrary spacing sample and a reference CDF.
double ks_distance(std::vector<double> sample, double (*cdf)(double));

} // namespace mbar
