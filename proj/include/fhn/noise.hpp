#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fhn/rng.hpp"
#include "fhn/spatial.hpp"

namespace fhn {

/// Which stochastic increment a scheme consumes per step.
enum class NoiseKind {
    Plain,             ///< Brownian increment delta W over the step
    ExactConvolution,  ///< heat-semigroup-filtered increment delta Z over the step
};

/// Eigenbasis coefficients of one noise increment over a step of length tau.
/// Space-time white noise makes the coefficients i.i.d.; the plain kind has
/// variance tau per mode, the convolution kind variance (1 - e^{-2 tau mu})/(2 mu).
struct NoiseIncrement {
    std::vector<double> coeffs;
    double tau = 0.0;
    NoiseKind kind = NoiseKind::Plain;
};

/// Ito isometry variance of the filtered increment on one mode:
///   v(mu, tau) = integral_0^tau e^{-2 mu s} ds = (1 - e^{-2 tau mu}) / (2 mu),
/// continuous at mu = 0 where it equals tau (expm1 keeps small tau*mu accurate).
double exact_convolution_variance(double mu, double tau);

/// Cross covariance between the plain and filtered increments on one mode:
///   c(mu, tau) = integral_0^tau e^{-mu s} ds = (1 - e^{-tau mu}) / mu,
/// equal to tau at mu = 0. Always c^2 <= tau * v, so the conditional sampler
/// below has a nonnegative residual variance.
double convolution_cross_covariance(double mu, double tau);

/// Per-(operator, tau) constants for drawing a correlated increment pair from
/// one pair of standard normals per mode:
///   dW = sqrt(tau) g1,   dZ = (c/tau) dW + sqrt(v - c^2/tau) g2.
/// This realizes the exact joint law of (dW, dZ) driven by one Brownian path,
/// so schemes consuming either kind can be coupled on identical paths.
struct NoisePlan {
    double tau = 0.0;
    double sqrt_tau = 0.0;
    std::vector<double> cond_weight;  // c(mu_j, tau) / tau
    std::vector<double> cond_sd;      // sqrt(v - c^2/tau), zero on mode 0

    NoisePlan(const SpatialOperator& op, double tau);
};

/// Draw the coupled pair for one step; either output may be null to skip it.
/// Draws are addressed by (stream, step, mode), so the same arguments always
/// reproduce the same increments, with or without a path table.
void sample_pair_into(const NoiseStream& stream, std::uint64_t step, const NoisePlan& plan,
                      double* plain_out, double* exact_out);

NoiseIncrement sample_plain_increment(const NoiseStream& stream, std::uint64_t step, double tau,
                                      std::size_t n_modes);

NoiseIncrement sample_exact_convolution_increment(const NoiseStream& stream, std::uint64_t step,
                                                  const SpatialOperator& op, double tau);

/// Both increment kinds of one Brownian path at the finest resolution, stored
/// per (step, mode). Coarser resolutions are derived by coarsen(), never
/// redrawn, which is what makes strong-error comparisons well posed.
struct PathTable {
    double fine_tau = 0.0;
    std::size_t n_fine = 0;
    std::size_t n_modes = 0;
    std::vector<double> plain;  // [step * n_modes + mode]
    std::vector<double> exact;

    const double* plain_row(std::size_t step) const { return &plain[step * n_modes]; }
    const double* exact_row(std::size_t step) const { return &exact[step * n_modes]; }
};

PathTable build_path_table(std::uint64_t seed, std::uint64_t trajectory, double fine_tau,
                           std::size_t n_fine, const SpatialOperator& op);

/// Aggregate fine increments into steps of length factor * fine_tau.
/// Plain increments add; filtered increments add with semigroup weights
///   dZ_coarse = sum_f e^{-mu fine_tau (factor-1-f)} dZ_f,
/// which reproduces both the exact distribution at the coarse step and the
/// fine-step recursion of the stored path. factor must be a power of two
/// dividing the table length.
std::vector<NoiseIncrement> coarsen(const PathTable& table, std::size_t factor, NoiseKind kind,
                                    const SpatialOperator& op);

}  // namespace fhn
