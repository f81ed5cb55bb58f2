#pragma once

#include <cmath>
#include <stdexcept>

#include "fhn/field.hpp"
#include "fhn/params.hpp"

namespace fhn {

/// Full reaction drift F(u, v) = (u - u^3 - v, gamma1 u - gamma2 v + beta).
inline Point2 drift_f(const ModelParams& p, Point2 x) {
    return {x.u - x.u * x.u * x.u - x.v, p.gamma1 * x.u - p.gamma2 * x.v + p.beta};
}

/// Cubic-plus-constant part integrated by the nonlinear subflow.
inline Point2 drift_f_nl(const ModelParams& p, Point2 x) {
    return {x.u - x.u * x.u * x.u, p.beta};
}

/// Linear coupling part B (u, v).
inline Point2 drift_f_l(const ModelParams& p, Point2 x) { return p.b.apply(x); }

namespace detail {

/// Flow of u' = u - u^3 with em2t = exp(-2t) precomputed, t > 0.
/// For large |u| the naive form overflows in u^2, so it is rewritten in
/// terms of 1/u^2; infinities collapse to the +-1 equilibria, NaN propagates.
inline double phi_ac_core(double u, double em2t) {
    double au = std::abs(u);
    if (au > 1e8) {
        double inv2 = 1.0 / (u * u);
        double denom = 1.0 + (inv2 - 1.0) * em2t;
        return std::copysign(1.0 / std::sqrt(denom), u);
    }
    double denom = u * u + (1.0 - u * u) * em2t;
    return u / std::sqrt(denom);
}

}  // namespace detail

/// Exact flow of the scalar ODE u' = u - u^3 at time t:
///   phi(t, u) = u / sqrt(u^2 + (1 - u^2) exp(-2t)).
/// Monotone in u, sign preserving, and |phi| <= max(1, |u|) for all t >= 0.
inline double phi_ac(double t, double u) {
    if (t < 0.0) throw std::domain_error("phi_ac: t must be nonnegative");
    if (t == 0.0) return u;
    return detail::phi_ac_core(u, std::exp(-2.0 * t));
}

/// Increment quotient (phi_ac(t, u) - u) / t; tends to u - u^3 as t -> 0.
inline double psi_ac(double t, double u) {
    if (t <= 0.0) throw std::domain_error("psi_ac: t must be positive");
    return (phi_ac(t, u) - u) / t;
}

/// exp(t B) for B = [[0, -1], [gamma1, -gamma2]] in closed form.
///
/// Writing B = m I + A with m = -gamma2/2, A^2 = (disc/4) I for
/// disc = gamma2^2 - 4 gamma1, the exponential is
///   exp(tB) = exp(mt) (c0(t) I + c1(t) A)
/// with (c0, c1) = (cosh, sinh/w) or (cos, sin/w) at w = sqrt(|disc|)/2
/// depending on the sign of disc; a short power series covers |disc| < 1e-10.
inline Mat2 matrix_exp_b(const ModelParams& p, double t) {
    const double disc = p.gamma2 * p.gamma2 - 4.0 * p.gamma1;
    const double m = -0.5 * p.gamma2;
    double c0;
    double c1;
    if (disc > 1e-10) {
        double w = 0.5 * std::sqrt(disc);
        c0 = std::cosh(w * t);
        c1 = std::sinh(w * t) / w;
    } else if (disc < -1e-10) {
        double w = 0.5 * std::sqrt(-disc);
        c0 = std::cos(w * t);
        c1 = std::sin(w * t) / w;
    } else {
        // c0 = sum_k (q t^2)^k / (2k)!, c1 = t sum_k (q t^2)^k / (2k+1)!, q = disc/4.
        double q = 0.25 * disc;
        double qt2 = q * t * t;
        c0 = 1.0 + qt2 * (0.5 + qt2 / 24.0);
        c1 = t * (1.0 + qt2 * (1.0 / 6.0 + qt2 / 120.0));
    }
    const double em = std::exp(m * t);
    // A = B - m I.
    return {em * (c0 - m * c1), em * (-c1),
            em * (p.gamma1 * c1), em * (c0 + (-p.gamma2 - m) * c1)};
}

/// Nonlinear subflow: cubic flow in u, constant-rate drift beta in v.
inline Point2 phi_nl(const ModelParams& p, double t, Point2 x) {
    if (t < 0.0) throw std::domain_error("phi_nl: t must be nonnegative");
    return {phi_ac(t, x.u), x.v + p.beta * t};
}

/// Linear subflow exp(tB) x.
inline Point2 phi_l(const ModelParams& p, double t, Point2 x) {
    return matrix_exp_b(p, t).apply(x);
}

/// Composed splitting flow: linear after nonlinear.
inline Point2 phi_tau(const ModelParams& p, double tau, Point2 x) {
    return phi_l(p, tau, phi_nl(p, tau, x));
}

/// Reversed composition: nonlinear after linear.
inline Point2 phi_tau_hat(const ModelParams& p, double tau, Point2 x) {
    return phi_nl(p, tau, phi_l(p, tau, x));
}

inline Point2 psi_nl(const ModelParams& p, double tau, Point2 x) {
    if (tau <= 0.0) throw std::domain_error("psi_nl: tau must be positive");
    return (phi_nl(p, tau, x) - x) * (1.0 / tau);
}

inline Point2 psi_l(const ModelParams& p, double tau, Point2 x) {
    if (tau <= 0.0) throw std::domain_error("psi_l: tau must be positive");
    return (phi_l(p, tau, x) - x) * (1.0 / tau);
}

/// Increment quotient of the composed flow; the effective one-step drift.
inline Point2 psi_tau(const ModelParams& p, double tau, Point2 x) {
    if (tau <= 0.0) throw std::domain_error("psi_tau: tau must be positive");
    return (phi_tau(p, tau, x) - x) * (1.0 / tau);
}

inline Point2 psi_tau_hat(const ModelParams& p, double tau, Point2 x) {
    if (tau <= 0.0) throw std::domain_error("psi_tau_hat: tau must be positive");
    return (phi_tau_hat(p, tau, x) - x) * (1.0 / tau);
}

/// One-step splitting flow with the per-step constants precomputed; this is
/// what trajectory loops evaluate at every grid point.
class PhiTauMap {
public:
    PhiTauMap(const ModelParams& p, double tau, bool reversed)
        : exp_tb_(matrix_exp_b(p, tau)),
          beta_tau_(p.beta * tau),
          em2t_(std::exp(-2.0 * tau)),
          reversed_(reversed) {
        if (tau <= 0.0) throw std::domain_error("PhiTauMap: tau must be positive");
    }

    Point2 operator()(Point2 x) const {
        if (!reversed_) {
            Point2 y{detail::phi_ac_core(x.u, em2t_), x.v + beta_tau_};
            return exp_tb_.apply(y);
        }
        Point2 y = exp_tb_.apply(x);
        return {detail::phi_ac_core(y.u, em2t_), y.v + beta_tau_};
    }

private:
    Mat2 exp_tb_;
    double beta_tau_;
    double em2t_;
    bool reversed_;
};

inline PhiTauMap make_phi_tau(const ModelParams& p, double tau) {
    return PhiTauMap(p, tau, false);
}

inline PhiTauMap make_phi_tau_hat(const ModelParams& p, double tau) {
    return PhiTauMap(p, tau, true);
}

/// Apply a pointwise map (Point2 -> Point2) to a pair of grid-value fields.
template <class Map>
State apply_pointwise(Map&& map, const State& x) {
    if (x.u.rep != Representation::GridValues || x.v.rep != Representation::GridValues) {
        throw std::logic_error("apply_pointwise: fields must hold grid values");
    }
    if (x.u.size() != x.v.size()) {
        throw std::invalid_argument("apply_pointwise: component size mismatch");
    }
    State out = x;
    for (std::size_t i = 0; i < x.u.size(); ++i) {
        Point2 y = map(Point2{x.u[i], x.v[i]});
        out.u.values[i] = y.u;
        out.v.values[i] = y.v;
    }
    return out;
}

}  // namespace fhn
