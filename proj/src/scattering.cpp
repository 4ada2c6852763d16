#include "scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "transfer.hpp"

namespace mbar {

namespace {

constexpr double kPoleTol = 1e-14;
constexpr double kEvanescentSwitch = 300.0;

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

} // namespace

SMatrix s_matrix(const BarrierSpec& spec, double e) {
    const Mat2 q = limit_matrix(spec, e);
    if (std::abs(q.m22) < kPoleTol) {
        throw PoleProximityError("scattering matrix undefined: |q22| = " +
                                 std::to_string(std::abs(q.m22)) +
                                 " is inside the pole guard");
    }
    return SMatrix{1.0 / q.m22, q.m12 / q.m22, -q.m21 / q.m22, 1.0 / q.m22};
}

PhaseComponents eigenphase_components(const WaveParams& p, int branch) {
    if (branch != 1 && branch != -1) {
        throw DomainError("branch must be +1 or -1");
    }
    const double bb = static_cast<double>(branch);
    const double cz = std::cos(p.z);
    const double sz = std::sin(p.z);

    double a_term = 0.0;
    double b_term = 0.0;
    double denom = 1.0;
    if (p.regime == Regime::Under && p.phi.imag() > kEvanescentSwitch) {
        // Everything divided by cosh^2 so the pieces stay representable.
        const double big = p.phi.imag();
        const double th = std::tanh(big);
        const double sech = 1.0 / std::cosh(big);
        a_term = sech - bb * (p.f * p.d / (big * big)) * th * th;
        b_term = (p.f / big) * th * sech + bb * (p.d / big) * th;
        denom = sech * sech + (p.d / big) * (p.d / big) * th * th;
    } else {
        const double c = std::real(std::cos(p.phi));
        const double s = std::real(sinc_phi(p.phi));
        const double ds = p.d * s;
        const double fs = p.f * s;
        a_term = c - bb * fs * ds;
        b_term = fs + bb * ds * c;
        denom = 1.0 + ds * ds;
    }
    return PhaseComponents{(cz * a_term + sz * b_term) / denom,
                           (cz * b_term - sz * a_term) / denom};
}

EigenPhases eigen_phases(const BarrierSpec& spec, double e) {
    if (!spec.infinite()) {
        throw DomainError("eigen_phases requires an infinite barrier count");
    }
    const WaveParams p = derive_params(spec, e);
    // lambda_+/- is defined through +/-|d sinc(phi)|; map that onto the raw
    // sign carried by d.
    const double s = std::real(sinc_phi(p.phi));
    const int sgn = sign_of(p.d * (std::isfinite(s) ? s : 1.0)) >= 0.0 ? 1 : -1;
    const PhaseComponents plus = eigenphase_components(p, sgn);
    const PhaseComponents minus = eigenphase_components(p, -sgn);

    EigenPhases out;
    out.cos2d_plus = plus.cos2d;
    out.sin2d_plus = plus.sin2d;
    out.cos2d_minus = minus.cos2d;
    out.sin2d_minus = minus.sin2d;
    out.lambda_plus = cplx{plus.cos2d, plus.sin2d};
    out.lambda_minus = cplx{minus.cos2d, minus.sin2d};
    out.delta_plus = 0.5 * std::atan2(plus.sin2d, plus.cos2d);
    out.delta_minus = 0.5 * std::atan2(minus.sin2d, minus.cos2d);
    out.sigma_plus = 2.0 * (1.0 - plus.cos2d);
    out.sigma_minus = 2.0 * (1.0 - minus.cos2d);
    out.sigma_total = out.sigma_plus + out.sigma_minus;
    return out;
}

namespace {

double sigma_branch(const BarrierSpec& spec, double e, int branch) {
    const EigenPhases ph = eigen_phases(spec, e);
    return branch > 0 ? ph.sigma_plus : ph.sigma_minus;
}

// Topographic prominence: drop to the highest saddle separating the peak from
// any higher terrain (or from the window edge).
double prominence_at(const std::vector<double>& y, std::size_t i) {
    double left_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
        left_min = std::min(left_min, y[j]);
        if (y[j] > y[i]) break;
    }
    double right_min = y[i];
    for (std::size_t j = i + 1; j < y.size(); ++j) {
        right_min = std::min(right_min, y[j]);
        if (y[j] > y[i]) break;
    }
    return y[i] - std::max(left_min, right_min);
}

} // namespace

std::vector<Peak> find_sigma_peaks(const BarrierSpec& spec, double e_min,
                                   double e_max, int branch,
                                   double min_prominence) {
    if (!(e_min > 0.0) || !(e_max > e_min)) {
        throw DomainError("peak search needs 0 < e_min < e_max");
    }
    if (branch != 1 && branch != -1) {
        throw DomainError("branch must be +1 or -1");
    }
    // Local oscillation rate of the combined phase sets the sample density.
    const double h = 1e-5 * e_min;
    const WaveParams lo = derive_params(spec, e_min - h);
    const WaveParams hi = derive_params(spec, e_min + h);
    const double z_rate = (hi.z - lo.z) / (2.0 * h);
    const double phi_rate = std::abs(hi.phi - lo.phi) / (2.0 * h);
    const double rate = std::max(std::abs(z_rate - phi_rate), 1e-12);
    double step = 2.0 * std::numbers::pi / (20.0 * rate);
    step = std::min(step, (e_max - e_min) / 200.0);

    std::vector<double> es;
    std::vector<double> ys;
    const double v = spec.height_v;
    for (double e = e_min; e <= e_max + step / 2.0; e += step) {
        double ee = std::min(e, e_max);
        if (std::abs(ee - v) < 1e-12 * std::max(1.0, v)) {
            ee += 1e-9 * std::max(1.0, v);
        }
        es.push_back(ee);
        ys.push_back(sigma_branch(spec, ee, branch));
    }

    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
        if (!(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])) continue;
        const double prom = prominence_at(ys, i);
        if (prom < min_prominence) continue;
        // Parabolic refinement through the three samples around the maximum,
        // then a true curve sample at the refined abscissa so the reported
        // height respects the hard sigma ceiling instead of the fit vertex.
        const double denom = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
        double de = 0.0;
        if (denom < 0.0) {
            de = 0.5 * (ys[i - 1] - ys[i + 1]) / denom;
            de = std::clamp(de, -1.0, 1.0);
        }
        double e_peak = es[i] + de * step;
        if (std::abs(e_peak - v) < 1e-12 * std::max(1.0, v)) {
            e_peak += 1e-9 * std::max(1.0, v);
        }
        double y_peak = sigma_branch(spec, e_peak, branch);
        if (y_peak < ys[i]) {
            e_peak = es[i];
            y_peak = ys[i];
        }
        peaks.push_back(Peak{e_peak, y_peak, prom});
    }
    return peaks;
}

SaturationResult saturation_gap(double a, double v,
                                const std::vector<double>& energies,
                                double tol, double b_max_over_a, int branch) {
    if (energies.empty()) {
        throw DomainError("saturation scan needs a non-empty energy grid");
    }
    if (!(tol > 0.0) || !(b_max_over_a > 0.0)) {
        throw DomainError("saturation scan needs tol > 0 and b_max_over_a > 0");
    }
    const double db = 0.1 * a;
    auto curve = [&](double b) {
        const BarrierSpec spec = make_spec(kInfiniteBarriers, a, b, v);
        std::vector<double> t(energies.size());
        for (std::size_t i = 0; i < energies.size(); ++i) {
            t[i] = sigma_branch(spec, energies[i], branch);
        }
        return t;
    };

    std::vector<double> prev = curve(0.0);
    SaturationResult out;
    const auto steps = static_cast<std::int64_t>(std::llround(b_max_over_a * a / db));
    std::int64_t last_exceeding = 0;
    for (std::int64_t j = 1; j <= steps; ++j) {
        const double b = static_cast<double>(j) * db;
        const std::vector<double> cur = curve(b);
        double delta = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            delta = std::max(delta, std::abs(cur[i] - prev[i]));
        }
        out.b_samples.push_back(b);
        out.metric.push_back(delta);
        out.last_delta = delta;
        if (delta >= tol) {
            last_exceeding = j;
        }
        prev = std::move(cur);
    }
    out.saturated = last_exceeding < steps;
    out.b_star = static_cast<double>(last_exceeding + 1) * db;
    return out;
}

} // namespace mbar
