#include "transfer.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace mbar {

namespace {

constexpr double kSliceArgOverflow = 700.0;

struct CellGeometry {
    double barrier_width;
    double gap_width;
};

CellGeometry cell_geometry(const BarrierSpec& spec) {
    const double wb = spec.total_width_a / static_cast<double>(spec.n_barriers);
    const double wg = spec.n_barriers > 1
                          ? spec.total_gap_b / static_cast<double>(spec.n_barriers - 1)
                          : 0.0;
    return {wb, wg};
}

void require_finite(const BarrierSpec& spec, const char* what) {
    if (spec.infinite()) {
        throw DomainError(std::string(what) + " requires a finite barrier count");
    }
}

} // namespace

Mat2 middle_matrix(const BarrierSpec& spec, double e) {
    require_finite(spec, "middle_matrix");
    const WaveParams p = derive_params(spec, e);
    const double w = spec.total_width_a * p.q / static_cast<double>(spec.n_barriers);
    if (p.regime == Regime::Under && w > kSliceArgOverflow) {
        throw OverflowError("barrier slice argument " + std::to_string(w) +
                            " overflows cosh/sinh; use the limit-matrix route");
    }
    const cplx i{0.0, 1.0};
    if (p.regime == Regime::Over) {
        const double cw = std::cos(w);
        const double sw = std::sin(w);
        return Mat2{cw + i * (p.xi / 2.0) * sw, i * (p.eta / 2.0) * sw,
                    -i * (p.eta / 2.0) * sw, cw - i * (p.xi / 2.0) * sw};
    }
    const double ch = std::cosh(w);
    const double sh = std::sinh(w);
    return Mat2{ch - i * (p.eta / 2.0) * sh, -i * (p.xi / 2.0) * sh,
                i * (p.xi / 2.0) * sh, ch + i * (p.eta / 2.0) * sh};
}

Mat2 cell_matrix(const BarrierSpec& spec, double e, std::int64_t n) {
    require_finite(spec, "cell_matrix");
    if (n < 1 || n > spec.n_barriers) {
        throw DomainError("cell index " + std::to_string(n) + " outside 1.." +
                          std::to_string(spec.n_barriers));
    }
    const WaveParams p = derive_params(spec, e);
    const auto [wb, wg] = cell_geometry(spec);
    const Mat2 t = middle_matrix(spec, e);
    // Phase reference points: barrier-n midpoint on the outgoing side, and the
    // same point shifted back by one barrier width on the incoming side.
    const double xn = static_cast<double>(n - 1) * wg +
                      (2.0 * static_cast<double>(n) - 1.0) * wb / 2.0;
    const double yn = xn - wb;
    const cplx i{0.0, 1.0};
    const cplx mr = std::exp(-i * p.k * xn);
    const cplx ml = std::exp(i * p.k * yn);
    return Mat2{mr * t.m11 * ml, mr * t.m12 / ml,
                t.m21 * ml / mr, t.m22 / (mr * ml)};
}

Mat2 finite_product(const BarrierSpec& spec, double e, bool* det_warning) {
    require_finite(spec, "finite_product");
    if (det_warning != nullptr) {
        *det_warning = false;
    }
    const WaveParams p = derive_params(spec, e);
    const auto [wb, wg] = cell_geometry(spec);
    const Mat2 t = middle_matrix(spec, e);
    const cplx i{0.0, 1.0};

    Mat2 acc = Mat2::identity();
    constexpr std::int64_t kChunk = 1024;
    for (std::int64_t n = 1; n <= spec.n_barriers; ++n) {
        const double xn = static_cast<double>(n - 1) * wg +
                          (2.0 * static_cast<double>(n) - 1.0) * wb / 2.0;
        const cplx mr = std::exp(-i * p.k * xn);
        const cplx ml = std::exp(i * p.k * (xn - wb));
        const Mat2 cell{mr * t.m11 * ml, mr * t.m12 / ml,
                        t.m21 * ml / mr, t.m22 / (mr * ml)};
        acc = cell * acc;
        if (n % kChunk == 0 || n == spec.n_barriers) {
            if (!acc.finite()) {
                throw OverflowError("cell product overflowed after " +
                                    std::to_string(n) + " factors");
            }
            // Compare the unit-determinant invariant against the cancellation
            // floor of the entries, so large evanescent products do not warn.
            const double big = std::max({std::abs(acc.m11), std::abs(acc.m12),
                                         std::abs(acc.m21), std::abs(acc.m22)});
            const double floor = std::max(1.0, big * big) * 1e-12;
            const double drift = std::abs(acc.det() - 1.0);
            if (drift > 1e2 * static_cast<double>(n) * floor && det_warning != nullptr) {
                *det_warning = true;
            }
        }
    }
    return acc;
}

Mat2 limit_matrix(const BarrierSpec& spec, double e) {
    if (!spec.infinite()) {
        throw DomainError("limit_matrix requires an infinite barrier count");
    }
    const WaveParams p = derive_params(spec, e);
    const cplx i{0.0, 1.0};
    const cplx s = sinc_phi(p.phi);
    const cplx cphi = std::cos(p.phi);
    const double deff = p.regime == Regime::Over ? p.d : -p.d;
    const cplx phase = std::exp(-i * p.z);
    return Mat2{phase * (cphi + i * p.f * s), phase * (i * deff * s),
                (-i * deff * s) / phase, (cphi - i * p.f * s) / phase};
}

double transmission_from_product(const Mat2& p) {
    const double m = std::abs(p.m22);
    return 1.0 / (m * m);
}

double transmission_limit(const BarrierSpec& spec, double e) {
    const WaveParams p = derive_params(spec, e);
    const double ds = p.d * std::real(sinc_phi(p.phi));
    return 1.0 / (1.0 + ds * ds);
}

Mat2 interior_propagator(const WaveParams& p, double t, int sign) {
    if (sign != 1 && sign != -1) {
        throw DomainError("propagator sign must be +1 or -1");
    }
    const cplx i{0.0, 1.0};
    const double deff = p.regime == Regime::Over ? p.d : -p.d;
    const cplx arg = t * p.phi;
    const cplx c = std::cos(arg);
    const cplx scale = static_cast<double>(sign) * i * t * sinc_phi(arg);
    return Mat2{c + scale * p.f, scale * deff,
                -scale * deff, c - scale * p.f};
}

AmplitudePair interior_amplitudes(const BarrierSpec& spec, double e, double x,
                                  int sign, const AmplitudePair& boundary) {
    if (!spec.infinite()) {
        throw DomainError("interior_amplitudes requires an infinite barrier count");
    }
    const double half_span = spec.span() / 2.0;
    if (!(std::abs(x) < half_span)) {
        throw DomainError("interior position " + std::to_string(x) +
                          " outside (-" + std::to_string(half_span) + ", " +
                          std::to_string(half_span) + ")");
    }
    const WaveParams p = derive_params(spec, e);
    const Mat2 prop = interior_propagator(p, x / spec.span(), sign);
    const AmplitudePair mid = prop * boundary;
    const cplx i{0.0, 1.0};
    const cplx phase = std::exp(-i * p.z);
    return AmplitudePair{phase * mid.right, mid.left / phase};
}

} // namespace mbar
