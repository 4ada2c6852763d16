#pragma once

#include <cmath>

#include "core.hpp"

namespace mbar {

// Dense complex 2x2 matrix, row-major entries.
struct Mat2 {
    cplx m11{};
    cplx m12{};
    cplx m21{};
    cplx m22{};

    static Mat2 identity() { return Mat2{1.0, 0.0, 0.0, 1.0}; }

    [[nodiscard]] cplx det() const { return m11 * m22 - m12 * m21; }

    [[nodiscard]] bool finite() const {
        const auto ok = [](const cplx& v) {
            return std::isfinite(v.real()) && std::isfinite(v.imag());
        };
        return ok(m11) && ok(m12) && ok(m21) && ok(m22);
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return Mat2{a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
                    a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
    }
};

// Right-moving and left-moving coefficients of a plane-wave superposition.
struct AmplitudePair {
    cplx right{};
    cplx left{};
};

inline AmplitudePair operator*(const Mat2& m, const AmplitudePair& v) {
    return AmplitudePair{m.m11 * v.right + m.m12 * v.left,
                         m.m21 * v.right + m.m22 * v.left};
}

} // namespace mbar
