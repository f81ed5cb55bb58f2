#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "fhn/flows.hpp"
#include "fhn/noise.hpp"
#include "fhn/params.hpp"
#include "fhn/spatial.hpp"

namespace fhn {

/// Time integrators. The three splitting schemes differ only in how the
/// linear diffusion and the noise enter:
///   LTexact  x' = e^{tau Lap} phi(x) + filtered noise increment
///   LTexpo   x' = e^{tau Lap} (phi(x) + plain increment)
///   LTimp    x' = (I - tau Lap)^{-1} (phi(x) + plain increment)
/// Hat variants compose the reaction flow in the reverse order. The
/// Euler-Maruyama baseline replaces phi by the explicit Euler drift map and
/// is kept as the known-fragile reference point.
enum class SchemeKind {
    LTexact,
    LTexpo,
    LTimp,
    LTexactHat,
    LTexpoHat,
    LTimpHat,
    EulerMaruyama,
};

constexpr bool is_splitting(SchemeKind k) { return k != SchemeKind::EulerMaruyama; }

constexpr bool is_hat(SchemeKind k) {
    return k == SchemeKind::LTexactHat || k == SchemeKind::LTexpoHat ||
           k == SchemeKind::LTimpHat;
}

constexpr bool uses_resolvent(SchemeKind k) {
    return k == SchemeKind::LTimp || k == SchemeKind::LTimpHat;
}

/// Which increment kind a scheme consumes.
constexpr NoiseKind noise_kind_for(SchemeKind k) {
    return (k == SchemeKind::LTexact || k == SchemeKind::LTexactHat)
               ? NoiseKind::ExactConvolution
               : NoiseKind::Plain;
}

std::string_view scheme_name(SchemeKind k);
std::optional<SchemeKind> parse_scheme(std::string_view name);
const std::vector<SchemeKind>& all_scheme_kinds();

/// States whose sup norm exceeds this are flagged as blown up; the flag is an
/// outcome, not an error, because the explicit baseline is expected to hit it.
constexpr double kBlowupThreshold = 1e12;

namespace detail {

/// Shared one-step core. The pointwise flow runs in grid values, then u is
/// pushed through the eigenbasis where both the linear propagator and the
/// noise are diagonal; v never touches the transform or the noise.
/// exact_noise selects x' = A(x + dW) versus x' = A x + dZ.
template <class Flow>
void step_inplace(const SpatialOperator& op, const std::vector<double>& lin_factors,
                  bool exact_noise, const double* noise_coeffs, const Flow& flow, State& x,
                  std::vector<double>& coeff_buf) {
    const std::size_t n = x.u.size();
    double* u = x.u.values.data();
    double* v = x.v.values.data();
    for (std::size_t i = 0; i < n; ++i) {
        Point2 y = flow(Point2{u[i], v[i]});
        u[i] = y.u;
        v[i] = y.v;
    }
    op.forward(u, coeff_buf.data());
    if (exact_noise) {
        for (std::size_t j = 0; j < n; ++j) {
            double z = noise_coeffs ? noise_coeffs[j] : 0.0;
            coeff_buf[j] = lin_factors[j] * coeff_buf[j] + z;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            double w = noise_coeffs ? noise_coeffs[j] : 0.0;
            coeff_buf[j] = lin_factors[j] * (coeff_buf[j] + w);
        }
    }
    op.inverse(coeff_buf.data(), u);
}

void check_step_args(SchemeKind kind, const SpatialOperator& op, double tau, const State& x,
                     const NoiseIncrement& noise);

}  // namespace detail

/// One step of the named scheme. The noise increment must match the scheme's
/// kind and step size; pass a zero increment of the right kind to run the
/// deterministic part alone.
State step(SchemeKind kind, const SpatialOperator& op, const ModelParams& params, double tau,
           const State& x, const NoiseIncrement& noise);

State step_euler_maruyama(const SpatialOperator& op, const ModelParams& params, double tau,
                          const State& x, const NoiseIncrement& noise);

/// One step with the deterministic flow replaced by an arbitrary pointwise
/// map; the scheme kind still selects propagator and noise handling. With the
/// identity map this iterates the pure noise recursion used in diagnostics.
template <class Flow>
State step_with_flow(SchemeKind kind, const SpatialOperator& op, double tau, const State& x,
                     const NoiseIncrement& noise, Flow&& flow) {
    detail::check_step_args(kind, op, tau, x, noise);
    State out = x;
    std::vector<double> coeff(op.size());
    auto factors = uses_resolvent(kind) ? op.resolvent_factors(tau) : op.semigroup_factors(tau);
    detail::step_inplace(op, factors, noise_kind_for(kind) == NoiseKind::ExactConvolution,
                         noise.coeffs.data(), flow, out, coeff);
    return out;
}

/// Everything one trajectory needs. tau * n_steps is the horizon; the seed
/// plus trajectory index select a reproducible noise substream.
struct SchemeConfig {
    SchemeKind kind = SchemeKind::LTexact;
    ModelParams params;
    Grid grid;
    State initial;
    double tau = 0.0;
    std::uint64_t n_steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    bool noise_enabled = true;
    std::uint64_t snapshot_stride = 0;  // 0 keeps only first and last
};

struct TrajectoryResult {
    std::vector<std::uint64_t> snapshot_steps;
    std::vector<State> snapshots;
    State final_state;
    std::uint64_t steps_completed = 0;
    bool blowup = false;
    std::int64_t blowup_step = -1;
};

/// Observer invoked with (step index, state) for step 0 and after every
/// completed finite step; not invoked for the state that triggered blow-up.
using StepObserver = std::function<void(std::uint64_t, const State&)>;

/// Run a full trajectory. If increments is non-null it must supply one
/// increment of the matching kind per step (typically from coarsen());
/// otherwise increments are sampled on the fly from the config's substream,
/// reproducing exactly what a path table at this resolution would hold.
TrajectoryResult run_trajectory(const SpatialOperator& op, const SchemeConfig& cfg,
                                const std::vector<NoiseIncrement>* increments = nullptr,
                                const StepObserver& observer = {});

/// Convenience overload coupling the run to a finer path table; cfg.tau must
/// be a power-of-two multiple of the table resolution.
TrajectoryResult run_trajectory(const SpatialOperator& op, const SchemeConfig& cfg,
                                const PathTable& table, const StepObserver& observer = {});

}  // namespace fhn
