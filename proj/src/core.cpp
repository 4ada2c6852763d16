#include "core.hpp"

#include <cmath>

namespace mbar {

namespace {

void check_common(double a, double b, double v, double m, double hbar) {
    if (!std::isfinite(a) || a <= 0.0) throw DomainError("total barrier width a must be finite and > 0");
    if (!std::isfinite(b) || b < 0.0) throw DomainError("total gap width b must be finite and >= 0");
    if (!std::isfinite(v) || v <= 0.0) throw DomainError("barrier height v must be finite and > 0");
    if (!std::isfinite(m) || m <= 0.0) throw DomainError("mass must be finite and > 0");
    if (!std::isfinite(hbar) || hbar <= 0.0) throw DomainError("hbar must be finite and > 0");
}

} // namespace

BarrierSpec make_spec(std::int64_t n_barriers, double a, double b, double v,
                      double m, double hbar) {
    check_common(a, b, v, m, hbar);
    if (n_barriers != kInfiniteBarriers && n_barriers < 1)
        throw DomainError("barrier count must be >= 1 (or the infinite sentinel)");
    BarrierSpec s;
    s.n_barriers = n_barriers;
    s.total_width_a = a;
    s.total_gap_b = b;
    s.height_v = v;
    s.mass_m = m;
    s.hbar = hbar;
    return s;
}

BarrierSpec spec_from_length_ratio(double L, double c, std::int64_t n_barriers,
                                   double v, double m, double hbar) {
    if (!std::isfinite(L) || L <= 0.0) throw DomainError("total length L must be finite and > 0");
    if (!std::isfinite(c) || c < 0.0) throw DomainError("gap ratio c must be finite and >= 0");
    const double a = L / (1.0 + c);
    const double b = L * c / (1.0 + c);
    return make_spec(n_barriers, a, b, v, m, hbar);
}

WaveParams derive_params(const BarrierSpec& spec, double e) {
    if (!std::isfinite(e) || e <= 0.0) throw DomainError("energy must be finite and > 0");
    if (e == spec.height_v)
        throw SingularParameterError("e = v is singular: q = 0 makes xi and eta undefined");

    WaveParams p;
    p.energy_e = e;
    const double v = spec.height_v;
    p.k = std::sqrt(2.0 * spec.mass_m * e) / spec.hbar;
    p.q = std::sqrt(2.0 * spec.mass_m * std::fabs(e - v)) / spec.hbar;
    p.regime = (e > v) ? Regime::Over : Regime::Under;
    p.xi = p.q / p.k + p.k / p.q;
    p.eta = p.q / p.k - p.k / p.q;

    const double a = spec.total_width_a;
    const double b = spec.total_gap_b;
    if (p.regime == Regime::Over) {
        p.f = p.k * b + a * p.q * p.xi / 2.0;
        p.d = a * p.q * p.eta / 2.0;
    } else {
        p.f = p.k * b - a * p.q * p.eta / 2.0;
        p.d = a * p.q * p.xi / 2.0;
    }
    const double phi2 = p.f * p.f - p.d * p.d;
    p.phi = (phi2 >= 0.0) ? cplx(std::sqrt(phi2), 0.0)
                          : cplx(0.0, std::sqrt(-phi2));
    p.z = p.k * (a + b);
    return p;
}

cplx sinc_phi(cplx phi) {
    if (std::abs(phi) < 1e-4) {
        const cplx p2 = phi * phi;
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
    }
    return std::sin(phi) / phi;
}

} // namespace mbar
