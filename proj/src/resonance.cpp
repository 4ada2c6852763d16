#include "resonance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "errors.hpp"
#include "parallel.hpp"

namespace mbar {

namespace {

constexpr double kDegenerateRel = 1e-12;
constexpr double kSeedMarginRel = 1e-8;
constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 100;
constexpr int kMaxHalvings = 20;
constexpr double kConditionTol = 1e-6;
constexpr double kDedupTol = 1e-6;

struct Factors {
    cplx w1;
    cplx zeta0;
    double w1_scale;
    double zeta0_scale;
};

Factors factors_at(const ResonanceScales& s, cplx e) {
    Factors f;
    f.w1 = e * s.g - s.vv;
    f.zeta0 = e * s.g * f.w1;
    f.w1_scale = std::abs(e) * s.g + s.vv;
    f.zeta0_scale = std::abs(e) * s.g * f.w1_scale + 1e-300;
    return f;
}

void require_nondegenerate(const Factors& f) {
    if (std::abs(f.w1) < kDegenerateRel * f.w1_scale) {
        throw SingularParameterError(
            "degenerate direction: e*(a+ac+cL) equals av(1+c)");
    }
    if (std::abs(f.zeta0) < kDegenerateRel * f.zeta0_scale) {
        throw SingularParameterError(
            "degenerate direction: e*(a+ac+cL)*(e*(a+ac+cL)-av(1+c)) vanishes");
    }
}

} // namespace

ResonanceScales resonance_scales(const ResonanceParams& p) {
    if (!(p.a > 0.0) || !(p.v > 0.0) || !(p.L > 0.0) || !(p.c >= 0.0) ||
        !std::isfinite(p.a + p.c + p.L + p.v)) {
        throw DomainError("pole parameters need a > 0, v > 0, L > 0, c >= 0");
    }
    ResonanceScales s;
    s.g = p.a + p.a * p.c + p.c * p.L;
    s.vv = p.a * p.v * (1.0 + p.c);
    s.u = s.g / ((1.0 + p.c) * (1.0 + p.c));
    s.c2 = 4.0 / (s.vv * s.vv);
    return s;
}

cplx de_moivre_sqrt(cplx w, int branch_k) {
    if (branch_k != 0 && branch_k != 1) {
        throw DomainError("square-root branch index must be 0 or 1");
    }
    const double r = std::sqrt(std::abs(w));
    const double th = (std::atan2(w.imag(), w.real()) +
                       2.0 * std::numbers::pi * branch_k) / 2.0;
    return cplx{r * std::cos(th), r * std::sin(th)};
}

PolarComponents polar_components(const ResonanceParams& p, double e1, double e2,
                                 PolarVariant variant, int branch_k) {
    if (branch_k != 0 && branch_k != 1) {
        throw DomainError("branch index must be 0 or 1");
    }
    const ResonanceScales s = resonance_scales(p);
    const Factors f = factors_at(s, cplx{e1, e2});
    require_nondegenerate(f);

    PolarComponents out;
    out.branch_k = branch_k;
    out.r1 = s.u * std::abs(f.w1);
    out.r2 = s.c2 * std::abs(f.zeta0);
    out.cos_phi1 = f.w1.real() / std::abs(f.w1);
    out.sin_phi1 = f.w1.imag() / std::abs(f.w1);
    // Published direction cosines of the second radius.
    out.cos_phi2 = -f.zeta0.imag() / std::abs(f.zeta0);
    out.sin_phi2 = f.zeta0.real() / std::abs(f.zeta0);
    if (variant == PolarVariant::Under) {
        out.cos_phi1 = -out.cos_phi1;
        out.sin_phi1 = -out.sin_phi1;
        const double c2v = out.cos_phi2;
        out.cos_phi2 = -out.sin_phi2;
        out.sin_phi2 = c2v;
    }
    return out;
}

std::pair<double, double> pole_residual(const ResonanceParams& p, ComplexEnergy e,
                                        int branch_k, int sign, PoleCase pole_case) {
    if (branch_k != 0 && branch_k != 1) {
        throw DomainError("branch index must be 0 or 1");
    }
    if (sign != 1 && sign != -1) {
        throw DomainError("sign must be +1 or -1");
    }
    const ResonanceScales s = resonance_scales(p);
    const Factors f = factors_at(s, cplx{e.e1, e.e2});
    require_nondegenerate(f);

    const double sr1 = std::sqrt(s.u * std::abs(f.w1));
    const double sr2 = std::sqrt(s.c2 * std::abs(f.zeta0));
    const double two_pi_k = 2.0 * std::numbers::pi * branch_k;
    const double sg = static_cast<double>(sign);
    // The right side's half-angle comes from the argument of -zeta0: the
    // squared right side of the transcendental equation is -c2*zeta0, so that
    // is the complex number whose de Moivre root appears here.
    const double th2 =
        (std::atan2(-f.zeta0.imag(), -f.zeta0.real()) + two_pi_k) / 2.0;

    if (pole_case == PoleCase::UnderPos) {
        // Accented angles: phi1 + pi is the argument of -w1.
        const double th1 =
            (std::atan2(-f.w1.imag(), -f.w1.real()) + two_pi_k) / 2.0;
        const double x = sr1 * std::cos(th1);
        const double y = sr1 * std::sin(th1);
        return {-std::cosh(x) * std::sin(y) + sg * sr2 * std::cos(th2),
                std::sinh(x) * std::cos(y) + sg * sr2 * std::sin(th2)};
    }
    const double th1 = (std::atan2(f.w1.imag(), f.w1.real()) + two_pi_k) / 2.0;
    const double x = sr1 * std::cos(th1);
    const double y = sr1 * std::sin(th1);
    return {std::sin(x) * std::cosh(y) - sg * sr2 * std::cos(th2),
            std::cos(x) * std::sinh(y) - sg * sr2 * std::sin(th2)};
}

cplx pole_condition_value(const ResonanceParams& p, ComplexEnergy e) {
    const double b = p.L - p.a;
    if (b < 0.0) {
        throw DomainError("inconsistent lengths: L smaller than a");
    }
    const cplx ec{e.e1, e.e2};
    const cplx k = std::sqrt(ec);
    if (std::abs(k) == 0.0) {
        throw SingularParameterError("zero energy has no wavenumber");
    }
    // Both regime forms continue to the same complex functions because f and
    // d^2 depend on the interior wavenumber only through its square.
    const cplx q2 = ec - p.v;
    const cplx f = k * b + p.a * (q2 + k * k) / (2.0 * k);
    const cplx d = p.a * (q2 - k * k) / (2.0 * k);
    const cplx phi = std::sqrt(f * f - d * d);
    const cplx sc = sinc_phi(phi);
    return 1.0 + d * d * sc * sc;
}

namespace {

struct NewtonOutcome {
    bool converged = false;
    bool nonfinite = false;
    bool singular = false;
    ComplexEnergy e;
    double residual_norm = 0.0;
};

NewtonOutcome newton_run(const ResonanceParams& p, ComplexEnergy seed,
                         int branch_k, int sign, PoleCase pole_case) {
    NewtonOutcome out;
    double x1 = seed.e1;
    double x2 = seed.e2;
    const auto eval = [&](double a1, double a2,
                          double& f1, double& f2) -> bool {
        try {
            const auto [r1, r2] =
                pole_residual(p, ComplexEnergy{a1, a2}, branch_k, sign, pole_case);
            f1 = r1;
            f2 = r2;
        } catch (const SingularParameterError&) {
            return false;
        }
        return std::isfinite(f1) && std::isfinite(f2);
    };

    double f1 = 0.0;
    double f2 = 0.0;
    if (!eval(x1, x2, f1, f2)) {
        out.nonfinite = true;
        return out;
    }
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        const double norm = std::max(std::abs(f1), std::abs(f2));
        if (norm < kNewtonTol) {
            out.converged = true;
            out.e = ComplexEnergy{x1, x2};
            out.residual_norm = norm;
            return out;
        }
        const double h1 = 1e-6 * std::max(1.0, std::abs(x1));
        const double h2 = 1e-6 * std::max(1.0, std::abs(x2));
        double a1p, a2p, a1m, a2m, b1p, b2p, b1m, b2m;
        if (!eval(x1 + h1, x2, a1p, a2p) || !eval(x1 - h1, x2, a1m, a2m) ||
            !eval(x1, x2 + h2, b1p, b2p) || !eval(x1, x2 - h2, b1m, b2m)) {
            out.nonfinite = true;
            return out;
        }
        const double j11 = (a1p - a1m) / (2.0 * h1);
        const double j21 = (a2p - a2m) / (2.0 * h1);
        const double j12 = (b1p - b1m) / (2.0 * h2);
        const double j22 = (b2p - b2m) / (2.0 * h2);
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) {
            out.singular = true;
            return out;
        }
        const double dx1 = (f1 * j22 - f2 * j12) / det;
        const double dx2 = (j11 * f2 - j21 * f1) / det;

        double lam = 1.0;
        bool stepped = false;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            double n1 = 0.0;
            double n2 = 0.0;
            const double c1 = x1 - lam * dx1;
            const double c2v = x2 - lam * dx2;
            if (eval(c1, c2v, n1, n2) &&
                std::max(std::abs(n1), std::abs(n2)) < norm) {
                x1 = c1;
                x2 = c2v;
                f1 = n1;
                f2 = n2;
                stepped = true;
                break;
            }
            lam /= 2.0;
        }
        if (!stepped) {
            return out;  // stuck: report as not converged
        }
    }
    return out;
}

bool case_filter(PoleCase pole_case, const ResonanceScales& s, double v,
                 const ComplexEnergy& e) {
    const double mod = std::hypot(e.e1, e.e2);
    switch (pole_case) {
        case PoleCase::Over:
            return mod > v && mod * s.g > s.vv;
        case PoleCase::UnderNeg:
            return mod < v && mod * s.g > s.vv;
        case PoleCase::UnderPos:
            return mod < v && mod * s.g < s.vv;
    }
    return false;
}

PoleSearchResult search_poles(const ResonanceParams& p, const SearchRectangle& rect,
                              PoleCase pole_case, bool apply_filters) {
    if (!std::isfinite(rect.e1_min + rect.e1_max + rect.e2_min + rect.e2_max) ||
        !(rect.e1_max > rect.e1_min) || !(rect.e2_max > rect.e2_min)) {
        throw DomainError("search rectangle must be finite and non-empty");
    }
    if (rect.n1 < 20 || rect.n2 < 20) {
        throw DomainError("seed grid must be at least 20 x 20");
    }
    const ResonanceScales s = resonance_scales(p);

    const std::size_t n_seeds = static_cast<std::size_t>(rect.n1) *
                                static_cast<std::size_t>(rect.n2);
    std::vector<std::optional<PoleHit>> slots(n_seeds * 4);
    std::atomic<std::int64_t> converged{0}, rejected_filter{0},
        rejected_condition{0}, skipped_degenerate{0}, skipped_nonfinite{0},
        singular{0};

    parallel_for(n_seeds, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / rect.n2;
        const int j = static_cast<int>(idx) % rect.n2;
        const double e1 = rect.e1_min +
                          (rect.e1_max - rect.e1_min) * i / (rect.n1 - 1.0);
        const double e2 = rect.e2_min +
                          (rect.e2_max - rect.e2_min) * j / (rect.n2 - 1.0);
        const Factors f = factors_at(s, cplx{e1, e2});
        if (std::abs(f.w1) < kSeedMarginRel * f.w1_scale ||
            std::abs(f.zeta0) < kSeedMarginRel * f.zeta0_scale) {
            skipped_degenerate += 4;
            return;
        }
        int combo = 0;
        for (int branch_k : {0, 1}) {
            for (int sign : {+1, -1}) {
                const NewtonOutcome o =
                    newton_run(p, ComplexEnergy{e1, e2}, branch_k, sign, pole_case);
                if (o.nonfinite) ++skipped_nonfinite;
                if (o.singular) ++singular;
                if (o.converged) {
                    ++converged;
                    bool keep = o.e.e1 >= rect.e1_min - 1e-9 &&
                                o.e.e1 <= rect.e1_max + 1e-9 &&
                                o.e.e2 >= rect.e2_min - 1e-9 &&
                                o.e.e2 <= rect.e2_max + 1e-9;
                    if (keep && apply_filters) {
                        if (!case_filter(pole_case, s, p.v, o.e)) {
                            keep = false;
                            ++rejected_filter;
                        } else if (std::abs(pole_condition_value(p, o.e)) >=
                                   kConditionTol) {
                            keep = false;
                            ++rejected_condition;
                        }
                    } else if (!keep) {
                        ++rejected_filter;
                    }
                    if (keep) {
                        slots[idx * 4 + combo] =
                            PoleHit{o.e, branch_k, sign, o.residual_norm};
                    }
                }
                ++combo;
            }
        }
    });

    std::vector<PoleHit> hits;
    for (const auto& slot : slots) {
        if (slot) hits.push_back(*slot);
    }
    std::sort(hits.begin(), hits.end(), [](const PoleHit& a, const PoleHit& b) {
        return a.e.e1 != b.e.e1 ? a.e.e1 < b.e.e1 : a.e.e2 < b.e.e2;
    });

    PoleSearchResult out;
    for (const PoleHit& h : hits) {
        bool merged = false;
        for (PoleHit& kept : out.poles) {
            if (std::hypot(kept.e.e1 - h.e.e1, kept.e.e2 - h.e.e2) <= kDedupTol) {
                if (h.residual_norm < kept.residual_norm) kept = h;
                merged = true;
                break;
            }
        }
        if (!merged) out.poles.push_back(h);
    }
    std::sort(out.poles.begin(), out.poles.end(),
              [](const PoleHit& a, const PoleHit& b) {
                  return a.e.e1 != b.e.e1 ? a.e.e1 < b.e.e1 : a.e.e2 < b.e.e2;
              });

    out.diagnostics.seeds = static_cast<std::int64_t>(n_seeds) * 4;
    out.diagnostics.converged = converged;
    out.diagnostics.accepted = static_cast<std::int64_t>(out.poles.size());
    out.diagnostics.rejected_filter = rejected_filter;
    out.diagnostics.rejected_condition = rejected_condition;
    out.diagnostics.skipped_degenerate = skipped_degenerate;
    out.diagnostics.skipped_nonfinite = skipped_nonfinite + singular;
    return out;
}

} // namespace

PoleSearchResult find_poles(const ResonanceParams& p, const SearchRectangle& rect,
                            PoleCase pole_case) {
    return search_poles(p, rect, pole_case, true);
}

ExclusionVerdict large_energy_exclusion(const ResonanceParams& p, PoleCase pole_case,
                                        double e_big) {
    if (!(e_big > 0.0) || !std::isfinite(e_big)) {
        throw DomainError("asymptotic threshold must be positive and finite");
    }
    ExclusionVerdict verdict;
    const SearchRectangle wide{e_big, 5.0 * e_big, -0.01 * e_big, 0.01 * e_big,
                               24, 24};
    const SearchRectangle diagonal{e_big, 5.0 * e_big, e_big, 5.0 * e_big, 24, 24};
    for (const SearchRectangle& rect : {wide, diagonal}) {
        const PoleSearchResult res = search_poles(p, rect, pole_case, false);
        if (!res.poles.empty()) {
            verdict.confirmed = false;
            verdict.offending = res.poles.front();
            return verdict;
        }
    }
    verdict.confirmed = true;
    return verdict;
}

} // namespace mbar
