#pragma once

#include <cstdint>

#include "core.hpp"
#include "mat2.hpp"

namespace mbar {

// Barrier-slice matrix shared by every cell (independent of the cell index).
Mat2 middle_matrix(const BarrierSpec& spec, double e);

// Full cell matrix: outer free-propagation phases around the barrier slice.
// n is 1-based, 1 <= n <= N.
Mat2 cell_matrix(const BarrierSpec& spec, double e, std::int64_t n);

// Ordered product over all N cells, rightmost factor first. If det_warning is
// non-null it is set when the accumulated determinant drifts from 1 beyond
// 1e-10 per factor (checked in chunks for large N).
Mat2 finite_product(const BarrierSpec& spec, double e, bool* det_warning = nullptr);

// Closed-form limit of the product for infinitely many barriers in the fixed
// interval. Requires an infinite spec.
Mat2 limit_matrix(const BarrierSpec& spec, double e);

double transmission_from_product(const Mat2& p);

// 1 / (1 + d^2 sin^2(phi)/phi^2), the limit transmission probability.
double transmission_limit(const BarrierSpec& spec, double e);

// exp(sign * i * t * (f*sigma3 + i*d_eff*sigma2)) via the closed form
// cos(t*phi)*I + sign*i*t*sinc(t*phi)*G. sign is +1 or -1.
Mat2 interior_propagator(const WaveParams& p, double t, int sign);

// Amplitude pair at interior position x (measured from the array center),
// |x| < (a+b)/2, propagated from the boundary pair. The outer phase
// diag(e^{-iz}, e^{iz}) is applied after the interior exponential.
AmplitudePair interior_amplitudes(const BarrierSpec& spec, double e, double x,
                                  int sign, const AmplitudePair& boundary);

} // namespace mbar
