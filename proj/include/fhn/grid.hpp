#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fhn {

/// Spatial discretization backend for the Neumann Laplacian on (0,1).
enum class Backend {
    FiniteDifference,  ///< second-order differences on the cell-centered grid
    SpectralGalerkin,  ///< truncated cosine eigenbasis with exact eigenvalues (j*pi)^2
};

/// Uniform cell-centered grid on (0,1): points zeta_i = (i + 1/2) h with h = 1/N.
///
/// Both backends share the same N collocation points; they differ only in the
/// eigenvalues assigned to the cosine modes (see SpatialOperator).
struct Grid {
    std::size_t n_modes = 0;
    Backend backend = Backend::FiniteDifference;

    Grid() = default;
    Grid(std::size_t n, Backend b) : n_modes(n), backend(b) {
        if (n_modes < 2) {
            throw std::invalid_argument("Grid: n_modes must be at least 2");
        }
    }

    double h() const { return 1.0 / static_cast<double>(n_modes); }

    double point(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h(); }

    std::vector<double> points() const {
        std::vector<double> z(n_modes);
        for (std::size_t i = 0; i < n_modes; ++i) z[i] = point(i);
        return z;
    }

    bool operator==(const Grid&) const = default;
};

}  // namespace fhn
