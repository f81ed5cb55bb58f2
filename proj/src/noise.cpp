#include "fhn/noise.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fhn {

double exact_convolution_variance(double mu, double tau) {
    if (tau <= 0.0) throw std::domain_error("exact_convolution_variance: tau must be positive");
    if (mu < 0.0) throw std::domain_error("exact_convolution_variance: mu must be nonnegative");
    if (mu == 0.0) return tau;
    return -std::expm1(-2.0 * tau * mu) / (2.0 * mu);
}

double convolution_cross_covariance(double mu, double tau) {
    if (tau <= 0.0) throw std::domain_error("convolution_cross_covariance: tau must be positive");
    if (mu < 0.0) throw std::domain_error("convolution_cross_covariance: mu must be nonnegative");
    if (mu == 0.0) return tau;
    return -std::expm1(-tau * mu) / mu;
}

NoisePlan::NoisePlan(const SpatialOperator& op, double t) : tau(t) {
    if (tau <= 0.0) throw std::domain_error("NoisePlan: tau must be positive");
    sqrt_tau = std::sqrt(tau);
    const auto& mu = op.eigenvalues();
    cond_weight.resize(mu.size());
    cond_sd.resize(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
        double v = exact_convolution_variance(mu[j], tau);
        double c = convolution_cross_covariance(mu[j], tau);
        cond_weight[j] = c / tau;
        // c^2 <= tau v by Cauchy-Schwarz; clamp rounding residue.
        cond_sd[j] = std::sqrt(std::max(0.0, v - c * c / tau));
    }
}

void sample_pair_into(const NoiseStream& stream, std::uint64_t step, const NoisePlan& plan,
                      double* plain_out, double* exact_out) {
    const std::size_t n = plan.cond_weight.size();
    for (std::size_t j = 0; j < n; ++j) {
        auto [g1, g2] = stream.normal_pair(step * n + j);
        double dw = plan.sqrt_tau * g1;
        if (plain_out) plain_out[j] = dw;
        if (exact_out) exact_out[j] = plan.cond_weight[j] * dw + plan.cond_sd[j] * g2;
    }
}

NoiseIncrement sample_plain_increment(const NoiseStream& stream, std::uint64_t step, double tau,
                                      std::size_t n_modes) {
    if (tau <= 0.0) throw std::domain_error("sample_plain_increment: tau must be positive");
    NoiseIncrement inc;
    inc.tau = tau;
    inc.kind = NoiseKind::Plain;
    inc.coeffs.resize(n_modes);
    const double sqrt_tau = std::sqrt(tau);
    for (std::size_t j = 0; j < n_modes; ++j) {
        auto [g1, g2] = stream.normal_pair(step * n_modes + j);
        (void)g2;
        inc.coeffs[j] = sqrt_tau * g1;
    }
    return inc;
}

NoiseIncrement sample_exact_convolution_increment(const NoiseStream& stream, std::uint64_t step,
                                                  const SpatialOperator& op, double tau) {
    NoisePlan plan(op, tau);
    NoiseIncrement inc;
    inc.tau = tau;
    inc.kind = NoiseKind::ExactConvolution;
    inc.coeffs.resize(op.size());
    sample_pair_into(stream, step, plan, nullptr, inc.coeffs.data());
    return inc;
}

PathTable build_path_table(std::uint64_t seed, std::uint64_t trajectory, double fine_tau,
                           std::size_t n_fine, const SpatialOperator& op) {
    if (n_fine == 0) throw std::invalid_argument("build_path_table: n_fine must be positive");
    NoisePlan plan(op, fine_tau);
    NoiseStream stream(seed, trajectory);
    PathTable table;
    table.fine_tau = fine_tau;
    table.n_fine = n_fine;
    table.n_modes = op.size();
    table.plain.resize(n_fine * table.n_modes);
    table.exact.resize(n_fine * table.n_modes);
    for (std::size_t step = 0; step < n_fine; ++step) {
        sample_pair_into(stream, step, plan, &table.plain[step * table.n_modes],
                         &table.exact[step * table.n_modes]);
    }
    return table;
}

std::vector<NoiseIncrement> coarsen(const PathTable& table, std::size_t factor, NoiseKind kind,
                                    const SpatialOperator& op) {
    if (factor == 0 || !std::has_single_bit(factor)) {
        throw std::invalid_argument("coarsen: factor must be a power of two");
    }
    if (table.n_fine % factor != 0) {
        throw std::invalid_argument("coarsen: factor must divide the table length");
    }
    if (op.size() != table.n_modes) {
        throw std::invalid_argument("coarsen: operator size does not match the table");
    }
    const std::size_t n_coarse = table.n_fine / factor;
    const std::size_t n = table.n_modes;
    const double coarse_tau = table.fine_tau * static_cast<double>(factor);

    std::vector<double> damp;
    if (kind == NoiseKind::ExactConvolution) {
        damp.resize(n);
        const auto& mu = op.eigenvalues();
        for (std::size_t j = 0; j < n; ++j) damp[j] = std::exp(-mu[j] * table.fine_tau);
    }

    std::vector<NoiseIncrement> out(n_coarse);
    for (std::size_t c = 0; c < n_coarse; ++c) {
        NoiseIncrement& inc = out[c];
        inc.tau = coarse_tau;
        inc.kind = kind;
        inc.coeffs.assign(n, 0.0);
        for (std::size_t f = 0; f < factor; ++f) {
            const std::size_t row = (c * factor + f) * n;
            if (kind == NoiseKind::Plain) {
                for (std::size_t j = 0; j < n; ++j) inc.coeffs[j] += table.plain[row + j];
            } else {
                // Accumulating as acc <- damp * acc + dZ_f mirrors the fine
                // one-step recursion, so the coarse path is not just equal in
                // law but numerically consistent with the fine one.
                for (std::size_t j = 0; j < n; ++j) {
                    inc.coeffs[j] = damp[j] * inc.coeffs[j] + table.exact[row + j];
                }
            }
        }
    }
    return out;
}

}  // namespace fhn
