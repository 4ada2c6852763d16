#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "core.hpp"
#include "scattering.hpp"

using namespace mbar;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return g;
}

BarrierSpec random_limit_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ua(0.5, 30.0);
    std::uniform_real_distribution<double> ub(0.0, 30.0);
    std::uniform_real_distribution<double> uv(0.5, 200.0);
    return make_spec(kInfiniteBarriers, ua(rng), ub(rng), uv(rng));
}

double random_regular_energy(std::mt19937_64& rng, double v) {
    std::uniform_real_distribution<double> ue(0.2, 260.0);
    double e = ue(rng);
    while (std::abs(e - v) < 1e-2) e += 0.11;
    return e;
}

}  // namespace

TEST_CASE("scattering matrix is unitary across both regimes") {
    std::mt19937_64 rng(240229);
    for (int i = 0; i < 200; ++i) {
        const auto spec = random_limit_spec(rng);
        const double e = random_regular_energy(rng, spec.height_v);
        const SMatrix s = s_matrix(spec, e);
        const cplx r11 = s.s11 * std::conj(s.s11) + s.s12 * std::conj(s.s12);
        const cplx r22 = s.s21 * std::conj(s.s21) + s.s22 * std::conj(s.s22);
        const cplx off = s.s11 * std::conj(s.s21) + s.s12 * std::conj(s.s22);
        CHECK(std::abs(r11 - cplx{1.0, 0.0}) < 1e-10);
        CHECK(std::abs(r22 - cplx{1.0, 0.0}) < 1e-10);
        CHECK(std::abs(off) < 1e-10);
    }
}

TEST_CASE("scattering requires the dense-array form") {
    CHECK_THROWS_WITH_AS(eigen_phases(make_spec(4, 2.0, 1.0, 5.0), 3.0),
                         doctest::Contains("requires an infinite barrier count"), DomainError);
}

TEST_CASE("eigenvalues stay on the unit circle with consistent phases") {
    std::mt19937_64 rng(8675309);
    for (int i = 0; i < 200; ++i) {
        const auto spec = random_limit_spec(rng);
        const double e = random_regular_energy(rng, spec.height_v);
        const EigenPhases ep = eigen_phases(spec, e);
        CHECK(std::abs(ep.lambda_plus) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(ep.lambda_minus) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(ep.cos2d_plus * ep.cos2d_plus + ep.sin2d_plus * ep.sin2d_plus ==
              doctest::Approx(1.0).epsilon(1e-10));
        CHECK(ep.cos2d_minus * ep.cos2d_minus + ep.sin2d_minus * ep.sin2d_minus ==
              doctest::Approx(1.0).epsilon(1e-10));
        // sigma = |1 - lambda|^2 lies in [0, 4] and the total adds up.
        CHECK(ep.sigma_plus >= 0.0);
        CHECK(ep.sigma_plus <= 4.0 + 1e-12);
        CHECK(ep.sigma_minus >= 0.0);
        CHECK(ep.sigma_minus <= 4.0 + 1e-12);
        CHECK(ep.sigma_total ==
              doctest::Approx(ep.sigma_plus + ep.sigma_minus).epsilon(1e-12));
        CHECK(ep.sigma_plus ==
              doctest::Approx(std::norm(cplx{1.0, 0.0} - ep.lambda_plus)).epsilon(1e-10));
        CHECK(ep.sigma_minus ==
              doctest::Approx(std::norm(cplx{1.0, 0.0} - ep.lambda_minus)).epsilon(1e-10));
    }
}

TEST_CASE("eigenphase components agree with frozen high-precision values") {
    const auto spec = make_spec(kInfiniteBarriers, 40.0, 30.0, 70.0);
    SUBCASE("oscillatory point") {
        const EigenPhases ep = eigen_phases(spec, 100.0);
        CHECK(ep.cos2d_plus == doctest::Approx(0.89194865371050939342).epsilon(1e-13));
        CHECK(ep.sin2d_plus == doctest::Approx(-0.45213670404426336254).epsilon(1e-13));
        CHECK(ep.sigma_plus == doctest::Approx(0.21610269257898121317).epsilon(1e-13));
        CHECK(ep.cos2d_minus == doctest::Approx(0.57855356383070678440).epsilon(1e-13));
        CHECK(ep.sin2d_minus == doctest::Approx(-0.81564439174114860732).epsilon(1e-13));
        CHECK(ep.sigma_minus == doctest::Approx(0.84289287233858643120).epsilon(1e-13));
    }
    SUBCASE("evanescent point") {
        const EigenPhases ep = eigen_phases(spec, 60.0);
        CHECK(ep.cos2d_plus == doctest::Approx(-0.83063966256523613669).epsilon(1e-13));
        CHECK(ep.sin2d_plus == doctest::Approx(-0.55681033662595618936).epsilon(1e-13));
        CHECK(ep.sigma_plus == doctest::Approx(3.6612793251304722734).epsilon(1e-13));
        CHECK(ep.cos2d_minus == doctest::Approx(-0.93452465240028082353).epsilon(1e-13));
        CHECK(ep.sin2d_minus == doctest::Approx(0.35589840412136481119).epsilon(1e-13));
        CHECK(ep.sigma_minus == doctest::Approx(3.8690493048005616471).epsilon(1e-13));
    }
}

TEST_CASE("branch argument flips the sign of the d-term") {
    // Components for branch -1 equal the branch +1 components of the spec
    // with d negated, which the closed form realizes as a sign swap inside.
    std::mt19937_64 rng(5551212);
    for (int i = 0; i < 100; ++i) {
        const auto spec = random_limit_spec(rng);
        const double e = random_regular_energy(rng, spec.height_v);
        const auto p = derive_params(spec, e);
        const auto plus = eigenphase_components(p, +1);
        const auto minus = eigenphase_components(p, -1);
        WaveParams flipped = p;
        flipped.d = -p.d;
        const auto plus_flipped = eigenphase_components(flipped, +1);
        CHECK(minus.cos2d == doctest::Approx(plus_flipped.cos2d).epsilon(1e-12));
        CHECK(minus.sin2d == doctest::Approx(plus_flipped.sin2d).epsilon(1e-12));
        CHECK(plus.cos2d * plus.cos2d + plus.sin2d * plus.sin2d ==
              doctest::Approx(1.0).epsilon(1e-10));
        CHECK(minus.cos2d * minus.cos2d + minus.sin2d * minus.sin2d ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("deep evanescent eigenphases stay finite through the scaled forms") {
    // a q reaches ~118 here; naive cosh/sinh would overflow double range
    // long before that in the squared combinations.
    const auto spec = make_spec(kInfiniteBarriers, 10.0, 5.0, 140.0);
    for (double e : {1.0, 10.0, 60.0, 120.0}) {
        const EigenPhases ep = eigen_phases(spec, e);
        CHECK(std::isfinite(ep.cos2d_plus));
        CHECK(std::isfinite(ep.sin2d_plus));
        CHECK(std::abs(ep.lambda_plus) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(ep.lambda_minus) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("peak finder validates its window and branch") {
    const auto spec = make_spec(kInfiniteBarriers, 40.0, 30.0, 70.0);
    CHECK_THROWS_WITH_AS(find_sigma_peaks(spec, 100.0, 50.0),
                         doctest::Contains("peak search needs"), DomainError);
    CHECK_THROWS_WITH_AS(find_sigma_peaks(spec, -1.0, 50.0),
                         doctest::Contains("peak search needs"), DomainError);
    CHECK_THROWS_WITH_AS(find_sigma_peaks(spec, 71.0, 400.0, 3),
                         doctest::Contains("branch must be"), DomainError);
}

TEST_CASE("resonance peaks of the wide-array preset spread apart with energy") {
    // L=70, c=0.75 array at v=70: 25 peaks on [71, 1000] whose spacing grows
    // strictly, the widening-resonance signature.
    const auto spec = make_spec(kInfiniteBarriers, 40.0, 30.0, 70.0);
    const auto peaks = find_sigma_peaks(spec, 71.0, 1000.0, +1, 0.5);
    REQUIRE(peaks.size() == 25);
    CHECK(peaks.front().energy == doctest::Approx(71.9272).epsilon(2e-4));
    CHECK(peaks.back().energy == doctest::Approx(902.1480).epsilon(2e-4));
    double prev_gap = 0.0;
    double min_margin = 1e30;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        const double gap = peaks[i].energy - peaks[i - 1].energy;
        if (i > 1) {
            CHECK(gap > prev_gap);
            min_margin = std::min(min_margin, gap - prev_gap);
        }
        prev_gap = gap;
        CHECK(peaks[i].prominence >= 0.5);
        CHECK(peaks[i].value > 0.0);
        CHECK(peaks[i].value <= 4.0 + 1e-12);
    }
    CHECK(min_margin == doctest::Approx(0.3438).epsilon(0.02));

    // A prominence bar above the curve ceiling filters everything out.
    CHECK(find_sigma_peaks(spec, 71.0, 400.0, +1, 4.5).empty());
}

TEST_CASE("saturation scan validates its inputs") {
    CHECK_THROWS_WITH_AS(saturation_gap(10.0, 70.0, {}, 0.2),
                         doctest::Contains("non-empty energy grid"), DomainError);
    CHECK_THROWS_WITH_AS(saturation_gap(10.0, 70.0, {80.0, 90.0}, 0.0),
                         doctest::Contains("tol > 0"), DomainError);
    CHECK_THROWS_WITH_AS(saturation_gap(10.0, 70.0, {80.0, 90.0}, 0.2, -1.0),
                         doctest::Contains("b_max_over_a > 0"), DomainError);
}

TEST_CASE("oscillatory cross-section curves saturate a few widths out") {
    // a=10, v=70 probed over [71, 1000]: under a 0.2 max-norm tolerance the
    // curve stops changing at b* = 3.4 a (measured; the sweep samples in
    // steps of 0.1 a out to 60 a).
    const auto energies = linspace(71.0, 1000.0, 300);
    const auto res = saturation_gap(10.0, 70.0, energies, 0.2, 60.0, +1);
    CHECK(res.saturated);
    CHECK(res.b_star / 10.0 == doctest::Approx(3.4).epsilon(1e-12));
    CHECK(res.b_samples.size() == res.metric.size());
    CHECK(res.b_samples.size() == 600);
    CHECK(res.b_samples.front() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.b_samples.back() == doctest::Approx(600.0).epsilon(1e-12));
    // Every delta past b* stays under the tolerance by construction.
    for (std::size_t i = 0; i < res.b_samples.size(); ++i) {
        if (res.b_samples[i] >= res.b_star) {
            CHECK(res.metric[i] < 0.2);
        }
        CHECK(res.metric[i] >= 0.0);
    }
    CHECK(res.last_delta == doctest::Approx(6.018e-3).epsilon(0.05));
}

TEST_CASE("evanescent cross-section curves keep oscillating to the horizon") {
    // At v=140 the curves never settle: the max-norm delta between
    // successive gap widths stays O(1) all the way to b = 60 a, so the scan
    // honestly reports no saturation point.
    const auto energies = linspace(1.0, 120.0, 300);
    for (double a : {10.0, 15.0}) {
        const auto res = saturation_gap(a, 140.0, energies, 0.2, 60.0, +1);
        CHECK_FALSE(res.saturated);
        CHECK(res.b_star == doctest::Approx(60.1 * a).epsilon(1e-9));
        CHECK(res.last_delta > 1.0);
    }
}
