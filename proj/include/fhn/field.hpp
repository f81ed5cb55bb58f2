#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fhn {

/// Which basis a Field's values live in.
enum class Representation {
    GridValues,   ///< point values at the cell centers zeta_i
    EigenCoeffs,  ///< coefficients in the orthonormal cosine eigenbasis
};

/// One scalar component over the spatial grid.
///
/// The L2 norm is the same in both representations because the transform is
/// isometric; the sup norm is only defined for grid values.
struct Field {
    std::vector<double> values;
    Representation rep = Representation::GridValues;

    Field() = default;
    Field(std::vector<double> v, Representation r) : values(std::move(v)), rep(r) {}

    static Field grid_values(std::vector<double> v) {
        return Field(std::move(v), Representation::GridValues);
    }
    static Field eigen_coeffs(std::vector<double> c) {
        return Field(std::move(c), Representation::EigenCoeffs);
    }
    static Field zeros(std::size_t n, Representation r = Representation::GridValues) {
        return Field(std::vector<double>(n, 0.0), r);
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Pair of components (u, v); both share one grid.
struct State {
    Field u;
    Field v;
};

/// L2(0,1) norm. Grid values use the midpoint quadrature sqrt(h * sum f_i^2);
/// eigen coefficients use the plain Euclidean norm. The two agree to rounding.
inline double norm_h(const Field& f) {
    double s = 0.0;
    for (double x : f.values) s += x * x;
    if (f.rep == Representation::GridValues) {
        s /= static_cast<double>(f.values.size());
    }
    return std::sqrt(s);
}

/// Sup norm over the grid points. Requires grid values.
inline double norm_e(const Field& f) {
    if (f.rep != Representation::EigenCoeffs) {
        double m = 0.0;
        for (double x : f.values) m = std::max(m, std::abs(x));
        return m;
    }
    throw std::logic_error("norm_e: field must hold grid values");
}

/// Product norm sqrt(|u|^2 + |v|^2) on the pair space.
inline double norm_state_h(const State& x) {
    double a = norm_h(x.u);
    double b = norm_h(x.v);
    return std::sqrt(a * a + b * b);
}

/// max(|u|_sup, |v|_sup); the norm used for blow-up detection.
inline double norm_state_e(const State& x) {
    return std::max(norm_e(x.u), norm_e(x.v));
}

inline bool all_finite(const Field& f) {
    for (double x : f.values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline bool all_finite(const State& x) { return all_finite(x.u) && all_finite(x.v); }

}  // namespace fhn
