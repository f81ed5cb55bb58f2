#pragma once

#include <cmath>
#include <stdexcept>

namespace fhn {

/// Value of (u, v) at one spatial point.
struct Point2 {
    double u = 0.0;
    double v = 0.0;

    Point2 operator+(Point2 o) const { return {u + o.u, v + o.v}; }
    Point2 operator-(Point2 o) const { return {u - o.u, v - o.v}; }
    Point2 operator*(double s) const { return {u * s, v * s}; }
};

/// 2x2 matrix acting on Point2, row-major.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0;
    double a10 = 0.0, a11 = 0.0;

    Point2 apply(Point2 x) const {
        return {a00 * x.u + a01 * x.v, a10 * x.u + a11 * x.v};
    }

    Mat2 mul(const Mat2& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

/// Reaction parameters. The linear recovery coupling is
///   d/dt (u, v) = B (u, v) + (0, beta),  B = [[0, -1], [gamma1, -gamma2]],
/// and b_norm is the spectral norm of B, used in Lipschitz envelopes.
struct ModelParams {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double beta = 1.0;
    Mat2 b;
    double b_norm = 0.0;

    ModelParams(double g1, double g2, double be) : gamma1(g1), gamma2(g2), beta(be) {
        if (gamma1 < 0.0 || gamma2 < 0.0) {
            throw std::invalid_argument("ModelParams: gamma1 and gamma2 must be nonnegative");
        }
        b = Mat2{0.0, -1.0, gamma1, -gamma2};
        // Largest singular value of B in closed form: B^T B has trace
        // s = 1 + gamma1^2 + gamma2^2 and determinant gamma1^2.
        double s = 1.0 + gamma1 * gamma1 + gamma2 * gamma2;
        double disc = std::sqrt(std::max(0.0, s * s - 4.0 * gamma1 * gamma1));
        b_norm = std::sqrt(0.5 * (s + disc));
    }

    ModelParams() : ModelParams(1.0, 1.0, 1.0) {}
};

}  // namespace fhn
