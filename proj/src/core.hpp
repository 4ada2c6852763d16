#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "errors.hpp"

namespace mbar {

using cplx = std::complex<double>;

// Sentinel barrier count for the closed-form limit of infinitely many barriers.
inline constexpr std::int64_t kInfiniteBarriers = -1;

// Geometry and physics of the barrier array: N identical barriers of total
// width a, separated by N-1 gaps of total width b, height v.
struct BarrierSpec {
    std::int64_t n_barriers = 1;   // >= 1, or kInfiniteBarriers
    double total_width_a = 1.0;    // > 0
    double total_gap_b = 0.0;      // >= 0
    double height_v = 1.0;         // > 0
    double mass_m = 0.5;
    double hbar = 1.0;

    bool infinite() const { return n_barriers == kInfiniteBarriers; }
    double span() const { return total_width_a + total_gap_b; }
    double ratio_c() const { return total_gap_b / total_width_a; }
};

enum class Regime { Over, Under };  // e > v (oscillatory) vs v > e (evanescent)

// Per-energy derived quantities shared by every computation path.
struct WaveParams {
    double energy_e = 0.0;
    double k = 0.0;       // free-region wavenumber
    double q = 0.0;       // interior wavenumber, real in both regimes (from |e-v|)
    Regime regime = Regime::Over;
    double xi = 0.0;      // q/k + k/q
    double eta = 0.0;     // q/k - k/q
    double f = 0.0;
    double d = 0.0;
    cplx phi{0.0, 0.0};   // principal branch of sqrt(f^2 - d^2)
    double z = 0.0;       // k * (a + b)
};

BarrierSpec make_spec(std::int64_t n_barriers, double a, double b, double v,
                      double m = 0.5, double hbar = 1.0);

// Alternative construction from total length L = a + b and ratio c = b/a.
BarrierSpec spec_from_length_ratio(double L, double c, std::int64_t n_barriers,
                                   double v, double m = 0.5, double hbar = 1.0);

WaveParams derive_params(const BarrierSpec& spec, double e);

// sin(phi)/phi with a series fallback near zero; even in phi, complex-safe.
cplx sinc_phi(cplx phi);

} // namespace mbar
