#include "spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace mbar {

namespace {

constexpr double kMergeTol = 1e-8;


} // namespace

void validate(const QuantizationProblem& problem) {
    if (!problem.spec.infinite()) {
        throw DomainError("quantization problem needs the infinite-count spec form");
    }
    if (!(problem.box_half_width_c > problem.spec.span())) {
        throw DomainError("box half-width C must exceed the array length");
    }
    if (!(problem.e_min > 0.0) || !(problem.e_max > problem.e_min)) {
        throw DomainError("energy window needs 0 < e_min < e_max");
    }
}

cplx quantization_residual(const QuantizationProblem& problem, double e) {
    validate(problem);
    const WaveParams p = derive_params(problem.spec, e);
    const cplx i{0.0, 1.0};
    const double c = problem.box_half_width_c;
    const cplx s = sinc_phi(p.phi);
    const cplx ds = p.d * s;
    // Q22 with its outer phase peeled off; the phase is restored explicitly in
    // the three exponentials below.
    const cplx q22_bar = std::cos(p.phi) - i * p.f * s;
    return std::exp(i * (4.0 * p.k * c)) * (1.0 + ds * ds) -
           2.0 * std::exp(i * (2.0 * p.k * c + p.z)) * q22_bar +
           std::exp(i * (2.0 * p.z)) * q22_bar * q22_bar;
}

namespace {

// Pieces of the quantization phase at one energy. The residual factors as
// (1 + ds^2) (w - w+) (w - w-) with w = exp(2ikC) and the unimodular pair
// w+- = exp(iz) q22bar / (1 -+ i ds), so levels solve the two real phase
// conditions theta_+-(e) = 2 pi m with
//   theta_+-(e) = 2kC - z - arg q22bar(e) -+ atan(ds(e)),
// where arg q22bar is tracked continuously in e. Both staircases increase
// strictly in e (the box quantization staircase per family), which makes
// every level a unique bisection target: no grid ever misses one.
struct PhaseSample {
    double base = 0.0;      // 2kC - z
    double atan_ds = 0.0;   // atan(d sinc(phi)), real in both regimes
    cplx q22bar;            // cos(phi) - i f sinc(phi), |q22bar| >= 1
};

PhaseSample phase_sample(const QuantizationProblem& problem, double e) {
    const double v = problem.spec.height_v;
    // The q -> 0 point is a removable limit of f and d; nudge off it.
    if (std::abs(e - v) < 1e-12 * std::max(1.0, v)) {
        e = v + (e < v ? -1e-12 : 1e-12) * std::max(1.0, v);
    }
    const WaveParams p = derive_params(problem.spec, e);
    const cplx i{0.0, 1.0};
    const cplx s = sinc_phi(p.phi);
    PhaseSample out;
    out.base = 2.0 * p.k * problem.box_half_width_c - p.z;
    out.atan_ds = std::atan((p.d * s).real());
    out.q22bar = std::cos(p.phi) - i * p.f * s;
    return out;
}

} // namespace

LevelSet find_levels(const QuantizationProblem& problem) {
    validate(problem);
    const double v = problem.spec.height_v;
    const double u_min = std::sqrt(problem.e_min);
    const double u_max = std::sqrt(problem.e_max);
    // Walk in u = sqrt(e); the dominant phase 2kC - z is linear in u. Steps
    // subdivide until the q22bar argument moves by less than pi/4, which keeps
    // the continuous-phase accumulation unambiguous (|q22bar| never dips
    // below 1, so its argument is well conditioned).
    const double du0 = std::numbers::pi / (8.0 * problem.box_half_width_c);
    constexpr double kMaxArgStep = std::numbers::pi / 4.0;
    constexpr int kMaxDepth = 48;

    struct Node {
        double u;
        PhaseSample s;
        double argq; // continuous arg q22bar up to this point
    };

    std::vector<double> found;
    Node cur{u_min, phase_sample(problem, u_min * u_min), 0.0};
    cur.argq = std::arg(cur.s.q22bar);

    const auto make_theta = [](const PhaseSample& s, double argq, int branch) {
        return s.base - argq - static_cast<double>(branch) * s.atan_ds;
    };

    while (cur.u < u_max - 1e-15) {
        // Find an acceptable step by halving until the phase increment is
        // small and unambiguous.
        double step = std::min(du0, u_max - cur.u);
        PhaseSample next_s;
        double next_argq = 0.0;
        int depth = 0;
        for (;; ++depth) {
            const double u_next = cur.u + step;
            next_s = phase_sample(problem, u_next * u_next);
            const double darg = std::arg(next_s.q22bar / cur.s.q22bar);
            if (std::abs(darg) <= kMaxArgStep || depth >= kMaxDepth) {
                next_argq = cur.argq + darg;
                break;
            }
            step /= 2.0;
        }
        const double u_next = cur.u + step;

        for (const int branch : {+1, -1}) {
            const double t0 = make_theta(cur.s, cur.argq, branch);
            const double t1 = make_theta(next_s, next_argq, branch);
            if (!(t1 > t0)) {
                if (t1 < t0 - 1e-9) {
                    throw NumericError(
                        "quantization staircase decreased; phase tracking lost");
                }
                continue; // numerically flat: no crossing in this sliver
            }
            const auto m_lo = static_cast<std::int64_t>(
                std::floor(t0 / (2.0 * std::numbers::pi))) + 1;
            const auto m_hi = static_cast<std::int64_t>(
                std::floor(t1 / (2.0 * std::numbers::pi)));
            for (std::int64_t m = m_lo; m <= m_hi; ++m) {
                const double target = 2.0 * std::numbers::pi * static_cast<double>(m);
                // Bisect theta(e) - target on [cur.u, u_next]; inside the step
                // the continuous argument equals the principal increment from
                // the left endpoint.
                double lo = cur.u;
                double hi = u_next;
                for (int it = 0; it < 80 && hi - lo > 1e-15 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const PhaseSample ms = phase_sample(problem, mid * mid);
                    const double margq =
                        cur.argq + std::arg(ms.q22bar / cur.s.q22bar);
                    const double tm = make_theta(ms, margq, branch);
                    (tm < target ? lo : hi) = mid;
                }
                const double u_star = 0.5 * (lo + hi);
                found.push_back(u_star * u_star);
            }
        }

        cur = Node{u_next, next_s, next_argq};
    }

    std::sort(found.begin(), found.end());
    LevelSet out;
    for (const double e : found) {
        if (e < problem.e_min - 1e-12 || e > problem.e_max + 1e-12) continue;
        if (problem.filter == RegimeFilter::OverOnly && !(e > v)) continue;
        if (problem.filter == RegimeFilter::UnderOnly && !(e < v)) continue;
        if (!out.energies.empty() && e - out.energies.back() <= kMergeTol) continue;
        out.energies.push_back(e);
    }
    return out;
}

LevelSet unfold(const LevelSet& levels, int degree) {
    const std::size_t n = levels.energies.size();
    if (n < 20) {
        throw InsufficientDataError("unfolding needs at least 20 levels, got " +
                                    std::to_string(n));
    }
    if (degree < 1 || static_cast<std::size_t>(degree) + 1 >= n) {
        throw DomainError("unsuitable unfolding polynomial degree");
    }
    const double e0 = levels.energies.front();
    const double e1 = levels.energies.back();
    for (std::size_t r = 1; r < n; ++r) {
        if (!(levels.energies[r] > levels.energies[r - 1])) {
            throw DomainError("levels must be strictly increasing");
        }
    }

    // Least-squares fit of the cumulative staircase on a [-1, 1] domain.
    Eigen::MatrixXd vand(n, degree + 1);
    Eigen::VectorXd target(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double t = 2.0 * (levels.energies[r] - e0) / (e1 - e0) - 1.0;
        double pw = 1.0;
        for (int cdeg = 0; cdeg <= degree; ++cdeg) {
            vand(r, cdeg) = pw;
            pw *= t;
        }
        target(r) = static_cast<double>(r) + 0.5;
    }
    const Eigen::VectorXd coef = vand.colPivHouseholderQr().solve(target);

    LevelSet out;
    out.energies = levels.energies;
    out.unfolded.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double t = 2.0 * (levels.energies[r] - e0) / (e1 - e0) - 1.0;
        double acc = 0.0;
        double pw = 1.0;
        for (int cdeg = 0; cdeg <= degree; ++cdeg) {
            acc += coef(cdeg) * pw;
            pw *= t;
        }
        out.unfolded[r] = acc;
    }

    out.spacings.resize(n - 1);
    double mean = 0.0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
        out.spacings[r] = out.unfolded[r + 1] - out.unfolded[r];
        mean += out.spacings[r];
    }
    mean /= static_cast<double>(n - 1);
    if (!(std::abs(mean) > 0.0)) {
        throw NumericError("degenerate unfolded staircase: zero mean spacing");
    }
    for (double& s : out.spacings) s /= mean;
    return out;
}

SpacingStatistics spacing_statistics(const LevelSet& levels, int bins) {
    if (bins < 4) {
        throw DomainError("histogram needs at least 4 bins");
    }
    const auto& s = levels.spacings;
    if (s.empty()) {
        throw DomainError("spacings not populated; unfold the level set first");
    }
    const double s_max = *std::max_element(s.begin(), s.end());
    if (!(s_max > 0.0)) {
        throw DomainError("spacings must contain positive entries");
    }
    const double width = s_max / bins;

    SpacingStatistics out;
    out.bin_left.resize(bins);
    out.bin_right.resize(bins);
    out.density.assign(bins, 0.0);
    for (int b = 0; b < bins; ++b) {
        out.bin_left[b] = b * width;
        out.bin_right[b] = (b + 1) * width;
    }
    for (double x : s) {
        auto idx = static_cast<std::int64_t>(x / width);
        idx = std::clamp<std::int64_t>(idx, 0, bins - 1);
        out.density[static_cast<std::size_t>(idx)] += 1.0;
    }
    const double norm = static_cast<double>(s.size()) * width;
    for (double& d : out.density) d /= norm;

    out.wigner_distance = ks_distance(s, &wigner_cdf);
    out.poisson_distance = ks_distance(s, &poisson_cdf);
    return out;
}

double wigner_cdf(double s) {
    if (s <= 0.0) return 0.0;
    return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
}

double poisson_cdf(double s) {
    if (s <= 0.0) return 0.0;
    return 1.0 - std::exp(-s);
}

std::vector<double> sample_wigner(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> out(n);
    for (double& x : out) {
        x = std::sqrt(-4.0 * std::log1p(-uni(rng)) / std::numbers::pi);
    }
    return out;
}

std::vector<double> sample_poisson(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> out(n);
    for (double& x : out) {
        x = -std::log1p(-uni(rng));
    }
    return out;
}

double ks_distance(std::vector<double> sample, double (*cdf)(double)) {
    if (sample.empty()) {
        throw DomainError("KS distance needs a non-empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        dist = std::max({dist, hi, lo});
    }
    return dist;
}

} // namespace mbar
