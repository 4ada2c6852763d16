#include "exactsolve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace mbar {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kResidualTol = 1e-8;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct MatchingSystem {
    CMatrix m;
    CVector rhs;
    bool gap_ignored = false;
};

// One interface contributes a continuity row and a derivative row. Columns
// (ul, ur) hold the left-region pair, (wl, wr) the right-region pair; a
// column index of -1 marks the fixed incoming unit amplitude, whose terms
// move to the right-hand side.
MatchingSystem assemble(const BarrierSpec& spec, double e) {
    const WaveParams p = derive_params(spec, e);
    const std::int64_t n = spec.n_barriers;
    const double wb = spec.total_width_a / static_cast<double>(n);
    const double wg = n > 1 ? spec.total_gap_b / static_cast<double>(n - 1) : 0.0;

    const cplx i{0.0, 1.0};
    const cplx kc{p.k, 0.0};
    const cplx qc = p.regime == Regime::Over ? cplx{p.q, 0.0} : cplx{0.0, p.q};

    const std::int64_t dim = 4 * n;
    MatchingSystem sys;
    sys.m = CMatrix::Zero(dim, dim);
    sys.rhs = CVector::Zero(dim);
    sys.gap_ignored = n == 1 && spec.total_gap_b > 0.0;

    // Unknown layout: 0 -> r, then (C_j, D_j) at 4j-3, followed by the gap
    // pair (A_j, B_j) at 4j-1 for j < n, and the transmitted amplitude last.
    const auto barrier_col = [](std::int64_t j) { return 1 + 4 * (j - 1); };
    const auto gap_col = [](std::int64_t j) { return 3 + 4 * (j - 1); };
    const std::int64_t t_col = dim - 1;

    std::int64_t row = 0;
    const auto add_interface = [&](double x, const cplx& kl, std::int64_t ul,
                                   const cplx& kr, std::int64_t wl) {
        const cplx el = std::exp(i * kl * x);
        const cplx er = std::exp(i * kr * x);
        // ul == -1: left region is (1, r) with r stored in column 0.
        if (ul < 0) {
            sys.m(row, 0) = 1.0 / el;
            sys.m(row + 1, 0) = -i * kl / el;
            sys.rhs(row) = -el;
            sys.rhs(row + 1) = -i * kl * el;
        } else {
            sys.m(row, ul) = el;
            sys.m(row, ul + 1) = 1.0 / el;
            sys.m(row + 1, ul) = i * kl * el;
            sys.m(row + 1, ul + 1) = -i * kl / el;
        }
        sys.m(row, wl) = -er;
        sys.m(row + 1, wl) = -i * kr * er;
        if (wl != t_col) {
            sys.m(row, wl + 1) = -1.0 / er;
            sys.m(row + 1, wl + 1) = i * kr / er;
        }
        row += 2;
    };

    for (std::int64_t j = 1; j <= n; ++j) {
        const double left = static_cast<double>(j - 1) * (wb + wg);
        const double right = left + wb;
        add_interface(left, kc, j == 1 ? -1 : gap_col(j - 1), qc, barrier_col(j));
        add_interface(right, qc, barrier_col(j), kc,
                      j == n ? t_col : gap_col(j));
    }

    // Balance each interface pair so pivot growth stays bounded.
    for (std::int64_t r = 0; r < dim; r += 2) {
        double biggest = 0.0;
        for (std::int64_t c = 0; c < dim; ++c) {
            biggest = std::max({biggest, std::abs(sys.m(r, c)), std::abs(sys.m(r + 1, c))});
        }
        biggest = std::max({biggest, std::abs(sys.rhs(r)), std::abs(sys.rhs(r + 1))});
        const double scale = 1.0 / std::max(1.0, biggest);
        sys.m.row(r) *= scale;
        sys.m.row(r + 1) *= scale;
        sys.rhs(r) *= scale;
        sys.rhs(r + 1) *= scale;
    }
    return sys;
}

} // namespace

ExactSolution exact_solve(const BarrierSpec& spec, double e, bool check_conditioning) {
    if (spec.infinite()) {
        throw DomainError("exact_solve requires a finite barrier count");
    }
    MatchingSystem sys = assemble(spec, e);
    Eigen::PartialPivLU<CMatrix> lu(sys.m);
    if (check_conditioning) {
        const double rc = lu.rcond();
        const double estimate = rc > 0.0 ? 1.0 / rc
                                         : std::numeric_limits<double>::infinity();
        if (!(estimate < kConditionLimit)) {
            throw IllConditionedError("matching matrix condition estimate " +
                                          std::to_string(estimate) + " exceeds 1e12",
                                      estimate);
        }
    }
    const CVector x = lu.solve(sys.rhs);

    const double rhs_inf = sys.rhs.lpNorm<Eigen::Infinity>();
    const double res_inf = (sys.m * x - sys.rhs).lpNorm<Eigen::Infinity>();
    if (!(res_inf <= kResidualTol * std::max(rhs_inf, 1e-300))) {
        throw AccuracyError("matching residual " + std::to_string(res_inf) +
                            " exceeds tolerance");
    }

    ExactSolution out;
    out.coefficients.assign(x.data(), x.data() + x.size());
    out.reflection = x(0);
    out.transmission = x(x.size() - 1);
    out.residual_inf = res_inf;
    out.gap_ignored = sys.gap_ignored;
    return out;
}

double transmission_exact(const BarrierSpec& spec, double e) {
    const ExactSolution sol = exact_solve(spec, e);
    return std::norm(sol.transmission);
}

double condition_estimate(const BarrierSpec& spec, double e) {
    if (spec.infinite()) {
        throw DomainError("condition_estimate requires a finite barrier count");
    }
    const MatchingSystem sys = assemble(spec, e);
    Eigen::PartialPivLU<CMatrix> lu(sys.m);
    const double rc = lu.rcond();
    return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

} // namespace mbar
