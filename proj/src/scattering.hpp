#pragma once

#include <vector>

#include "core.hpp"
#include "mat2.hpp"

namespace mbar {

// Scattering matrix of the infinite-count array in the fixed interval,
// built from the limit matrix. Raises PoleProximityError when the matrix
// element it divides by is below 1e-14 in magnitude.
struct SMatrix {
    cplx s11{};
    cplx s12{};
    cplx s21{};
    cplx s22{};
};

SMatrix s_matrix(const BarrierSpec& spec, double e);

// Eigenvalues of the scattering matrix written as exp(2 i delta). The +/-
// labels follow lambda = (1 +/- i |d sinc(phi)|) / q22, which orders the two
// phases consistently across the sweep.
struct EigenPhases {
    cplx lambda_plus{};
    cplx lambda_minus{};
    double cos2d_plus = 0.0;
    double sin2d_plus = 0.0;
    double cos2d_minus = 0.0;
    double sin2d_minus = 0.0;
    double delta_plus = 0.0;   // half-argument, reported in (-pi/2, pi/2]
    double delta_minus = 0.0;
    double sigma_plus = 0.0;   // |1 - lambda|^2 = 4 sin^2(delta)
    double sigma_minus = 0.0;
    double sigma_total = 0.0;
};

EigenPhases eigen_phases(const BarrierSpec& spec, double e);

// Closed-form cos(2 delta) / sin(2 delta) for one branch, keeping the sign of
// the d-term as given (branch = +1 or -1). Uses scaled hyperbolic forms once
// the evanescent argument exceeds 300 so nothing overflows.
struct PhaseComponents {
    double cos2d = 0.0;
    double sin2d = 0.0;
};

PhaseComponents eigenphase_components(const WaveParams& p, int branch);

struct Peak {
    double energy = 0.0;
    double value = 0.0;
    double prominence = 0.0;
};

// Local maxima of sigma_plus (branch=+1) or sigma_minus (branch=-1) over
// [e_min, e_max], refined by a three-point parabola and filtered by
// topographic prominence. The sample step is derived from the local phase
// derivative so each oscillation is sampled at least twenty times.
std::vector<Peak> find_sigma_peaks(const BarrierSpec& spec, double e_min,
                                   double e_max, int branch = +1,
                                   double min_prominence = 0.5);

// Smallest total gap width beyond which the cross-section curve stops
// changing: scans b in steps of 0.1*a, compares successive sigma curves over
// the energy grid in the pointwise max norm, and returns the start of the
// final stretch where that metric stays below tol all the way to the horizon.
struct SaturationResult {
    double b_star = 0.0;
    bool saturated = false;
    double last_delta = 0.0;
    std::vector<double> b_samples;  // b = 0.1*a, 0.2*a, ...
    std::vector<double> metric;     // max-norm delta against the previous b
};

SaturationResult saturation_gap(double a, double v,
                                const std::vector<double>& energies,
                                double tol = 1e-3, double b_max_over_a = 60.0,
                                int branch = +1);

} // namespace mbar
