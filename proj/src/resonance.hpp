#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core.hpp"

namespace mbar {

// The pole equations keep (a, c, L) as three independent inputs even though
// presets derive a from (L, c); the redundancy is part of the published form.
struct ResonanceParams {
    double a = 1.0;
    double c = 1.0;
    double L = 2.0;
    double v = 1.0;
};

// Shared scale factors of the pole system.
struct ResonanceScales {
    double g = 0.0;   // a + a*c + c*L
    double vv = 0.0;  // a*v*(1+c)
    double u = 0.0;   // g / (1+c)^2
    double c2 = 0.0;  // 4 / (a*v*(1+c))^2
};

ResonanceScales resonance_scales(const ResonanceParams& p);

struct ComplexEnergy {
    double e1 = 0.0;
    double e2 = 0.0;
};

enum class PolarVariant { Over, Under };
enum class PoleCase { Over, UnderNeg, UnderPos };

// Polar pieces of the decomposed pole system, published form: the Under
// variant applies the accent map (phi1 -> phi1 + pi, phi2 -> phi2 + pi/2)
// to the Over values.
struct PolarComponents {
    double r1 = 0.0;
    double r2 = 0.0;
    double cos_phi1 = 0.0;
    double sin_phi1 = 0.0;
    double cos_phi2 = 0.0;
    double sin_phi2 = 0.0;
    int branch_k = 0;
};

PolarComponents polar_components(const ResonanceParams& p, double e1, double e2,
                                 PolarVariant variant, int branch_k = 0);

// Square root with the explicit de Moivre branch index k in {0, 1}.
cplx de_moivre_sqrt(cplx w, int branch_k);

// Residuals of the two simultaneous real equations whose common zeros are the
// cross-section poles. sign is the +/- of the right-hand side.
std::pair<double, double> pole_residual(const ResonanceParams& p, ComplexEnergy e,
                                        int branch_k, int sign, PoleCase pole_case);

// 1 + d^2 sin^2(phi)/phi^2 continued to complex energy; vanishes at a pole.
cplx pole_condition_value(const ResonanceParams& p, ComplexEnergy e);

struct SearchRectangle {
    double e1_min = 0.0;
    double e1_max = 1.0;
    double e2_min = -1.0;
    double e2_max = 1.0;
    int n1 = 20;
    int n2 = 20;
};

struct PoleHit {
    ComplexEnergy e;
    int branch_k = 0;
    int sign = +1;
    double residual_norm = 0.0;
};

struct PoleDiagnostics {
    std::int64_t seeds = 0;
    std::int64_t converged = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected_filter = 0;
    std::int64_t rejected_condition = 0;
    std::int64_t skipped_degenerate = 0;
    std::int64_t skipped_nonfinite = 0;
};

struct PoleSearchResult {
    std::vector<PoleHit> poles;  // sorted by e1 then e2
    PoleDiagnostics diagnostics;
};

// Damped Newton from every grid seed, both branch indices and both signs.
// Accepted poles satisfy the case inequality, the |e|-vs-v classification,
// and re-substitution into the pole condition below 1e-6.
PoleSearchResult find_poles(const ResonanceParams& p, const SearchRectangle& rect,
                            PoleCase pole_case);

struct ExclusionVerdict {
    bool confirmed = true;
    PoleHit offending;
};

// Asymptotic sweep: e1 >= e_big with |e2| <= 0.01 e1, and e1 ~ e2 >= e_big.
// Confirmed when neither region contains a pole.
ExclusionVerdict large_energy_exclusion(const ResonanceParams& p, PoleCase pole_case,
                                        double e_big = 1e6);

} // namespace mbar
