#pragma once

#include <cstddef>
#include <vector>

#include "fhn/field.hpp"
#include "fhn/grid.hpp"

namespace fhn {

/// Discrete Neumann Laplacian on (0,1), diagonal in the cosine basis
///   e_0 = 1,  e_j(zeta) = sqrt(2) cos(j pi zeta),  j = 1..N-1,
/// sampled at the cell centers. Eigenvalues mu_j of -Laplacian:
///   finite differences:  mu_j = (4/h^2) sin^2(j pi / (2N))
///   spectral Galerkin:   mu_j = (j pi)^2
/// Both have mu_0 = 0 (the constant mode is preserved exactly), and the
/// discrete transform is an isometry from the h-weighted grid inner product
/// to the Euclidean one on coefficients.
class SpatialOperator {
public:
    explicit SpatialOperator(const Grid& grid);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return grid_.n_modes; }
    const std::vector<double>& eigenvalues() const { return mu_; }

    /// Forward transform: grid values -> eigenbasis coefficients.
    void forward(const double* in, double* out) const;
    /// Inverse transform: coefficients -> grid values.
    void inverse(const double* in, double* out) const;

    Field to_eigen(const Field& f) const;
    Field to_grid(const Field& f) const;

    /// exp(t * Laplacian) f, damping mode j by exp(-t mu_j). t = 0 returns f
    /// unchanged (no transform round-trip). Output keeps the input representation.
    Field heat_semigroup(double t, const Field& f) const;

    /// (I - tau * Laplacian)^{-1} f, scaling mode j by 1/(1 + tau mu_j).
    Field resolvent(double tau, const Field& f) const;

    /// Per-mode damping factors exp(-t mu_j); the diagonal of the semigroup.
    std::vector<double> semigroup_factors(double t) const;
    /// Per-mode factors 1/(1 + tau mu_j); the diagonal of the resolvent.
    std::vector<double> resolvent_factors(double tau) const;

private:
    Grid grid_;
    std::vector<double> mu_;
    std::vector<double> fwd_;  // row j holds h * e_j at the grid points
    std::vector<double> inv_;  // row i holds e_j(zeta_i) over j

    Field diagonal_apply(const std::vector<double>& factors, const Field& f) const;
};

inline SpatialOperator build_operator(const Grid& grid) { return SpatialOperator(grid); }

/// Semigroup of the pair-space operator (u, v) -> (-Laplacian u, 0):
/// the heat semigroup acts on u alone and v passes through untouched.
State apply_lambda_semigroup(const SpatialOperator& op, double t, const State& x);

/// Resolvent of the same pair-space operator: u is smoothed, v untouched.
State apply_lambda_resolvent(const SpatialOperator& op, double tau, const State& x);

}  // namespace fhn
