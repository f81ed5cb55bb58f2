#include "fhn/spatial.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fhn {

SpatialOperator::SpatialOperator(const Grid& grid) : grid_(grid) {
    if (grid_.n_modes < 2) {
        throw std::invalid_argument("SpatialOperator: n_modes must be at least 2");
    }
    const std::size_t n = grid_.n_modes;
    const double h = grid_.h();
    const double pi = std::numbers::pi;

    mu_.resize(n);
    mu_[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        if (grid_.backend == Backend::FiniteDifference) {
            double s = std::sin(0.5 * static_cast<double>(j) * pi * h);
            mu_[j] = 4.0 / (h * h) * s * s;
        } else {
            double jp = static_cast<double>(j) * pi;
            mu_[j] = jp * jp;
        }
    }

    // Sampled eigenbasis e_j(zeta_i) with normalization c_0 = 1, c_j = sqrt(2).
    // The same table serves both backends; discrete orthogonality
    //   h * sum_i e_j(zeta_i) e_k(zeta_i) = delta_jk
    // makes forward/inverse exact inverses and the forward map an isometry.
    fwd_.resize(n * n);
    inv_.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        double cj = (j == 0) ? 1.0 : std::numbers::sqrt2;
        for (std::size_t i = 0; i < n; ++i) {
            double e = cj * std::cos(static_cast<double>(j) * pi * grid_.point(i));
            fwd_[j * n + i] = h * e;
            inv_[i * n + j] = e;
        }
    }
}

void SpatialOperator::forward(const double* in, double* out) const {
    const std::size_t n = grid_.n_modes;
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = &fwd_[j * n];
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += row[i] * in[i];
        out[j] = s;
    }
}

void SpatialOperator::inverse(const double* in, double* out) const {
    const std::size_t n = grid_.n_modes;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &inv_[i * n];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * in[j];
        out[i] = s;
    }
}

Field SpatialOperator::to_eigen(const Field& f) const {
    if (f.rep == Representation::EigenCoeffs) return f;
    if (f.size() != grid_.n_modes) {
        throw std::invalid_argument("SpatialOperator::to_eigen: field size mismatch");
    }
    Field out = Field::zeros(grid_.n_modes, Representation::EigenCoeffs);
    forward(f.values.data(), out.values.data());
    return out;
}

Field SpatialOperator::to_grid(const Field& f) const {
    if (f.rep == Representation::GridValues) return f;
    if (f.size() != grid_.n_modes) {
        throw std::invalid_argument("SpatialOperator::to_grid: field size mismatch");
    }
    Field out = Field::zeros(grid_.n_modes, Representation::GridValues);
    inverse(f.values.data(), out.values.data());
    return out;
}

Field SpatialOperator::diagonal_apply(const std::vector<double>& factors, const Field& f) const {
    if (f.size() != grid_.n_modes) {
        throw std::invalid_argument("SpatialOperator: field size mismatch");
    }
    if (f.rep == Representation::EigenCoeffs) {
        Field out = f;
        for (std::size_t j = 0; j < factors.size(); ++j) out.values[j] *= factors[j];
        return out;
    }
    std::vector<double> c(grid_.n_modes);
    forward(f.values.data(), c.data());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= factors[j];
    Field out = Field::zeros(grid_.n_modes, Representation::GridValues);
    inverse(c.data(), out.values.data());
    return out;
}

Field SpatialOperator::heat_semigroup(double t, const Field& f) const {
    if (t < 0.0) throw std::domain_error("heat_semigroup: t must be nonnegative");
    if (t == 0.0) return f;
    return diagonal_apply(semigroup_factors(t), f);
}

Field SpatialOperator::resolvent(double tau, const Field& f) const {
    if (tau <= 0.0) throw std::domain_error("resolvent: tau must be positive");
    return diagonal_apply(resolvent_factors(tau), f);
}

std::vector<double> SpatialOperator::semigroup_factors(double t) const {
    if (t < 0.0) throw std::domain_error("semigroup_factors: t must be nonnegative");
    std::vector<double> a(mu_.size());
    for (std::size_t j = 0; j < mu_.size(); ++j) a[j] = std::exp(-t * mu_[j]);
    return a;
}

std::vector<double> SpatialOperator::resolvent_factors(double tau) const {
    if (tau <= 0.0) throw std::domain_error("resolvent_factors: tau must be positive");
    std::vector<double> a(mu_.size());
    for (std::size_t j = 0; j < mu_.size(); ++j) a[j] = 1.0 / (1.0 + tau * mu_[j]);
    return a;
}

State apply_lambda_semigroup(const SpatialOperator& op, double t, const State& x) {
    return {op.heat_semigroup(t, x.u), x.v};
}

State apply_lambda_resolvent(const SpatialOperator& op, double tau, const State& x) {
    return {op.resolvent(tau, x.u), x.v};
}

}  // namespace fhn
