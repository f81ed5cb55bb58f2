#include "fhn/schemes.hpp"

#include <bit>
#include <cmath>

namespace fhn {

namespace {

const std::vector<std::pair<SchemeKind, std::string_view>> kSchemeNames = {
    {SchemeKind::LTexact, "LTexact"},       {SchemeKind::LTexpo, "LTexpo"},
    {SchemeKind::LTimp, "LTimp"},           {SchemeKind::LTexactHat, "LTexactHat"},
    {SchemeKind::LTexpoHat, "LTexpoHat"},   {SchemeKind::LTimpHat, "LTimpHat"},
    {SchemeKind::EulerMaruyama, "EulerMaruyama"},
};

bool state_ok(const State& x) {
    // abs(nan) <= threshold is false, so NaN and inf both trip the flag.
    for (double a : x.u.values) {
        if (!(std::abs(a) <= kBlowupThreshold)) return false;
    }
    for (double a : x.v.values) {
        if (!(std::abs(a) <= kBlowupThreshold)) return false;
    }
    return true;
}

}  // namespace

std::string_view scheme_name(SchemeKind k) {
    for (auto& [kind, name] : kSchemeNames) {
        if (kind == k) return name;
    }
    throw std::logic_error("scheme_name: unknown kind");
}

std::optional<SchemeKind> parse_scheme(std::string_view name) {
    for (auto& [kind, n] : kSchemeNames) {
        if (n == name) return kind;
    }
    return std::nullopt;
}

const std::vector<SchemeKind>& all_scheme_kinds() {
    static const std::vector<SchemeKind> kinds = {
        SchemeKind::LTexact,    SchemeKind::LTexpo,    SchemeKind::LTimp,
        SchemeKind::LTexactHat, SchemeKind::LTexpoHat, SchemeKind::LTimpHat,
        SchemeKind::EulerMaruyama,
    };
    return kinds;
}

namespace detail {

void check_step_args(SchemeKind kind, const SpatialOperator& op, double tau, const State& x,
                     const NoiseIncrement& noise) {
    if (tau <= 0.0) throw std::domain_error("step: tau must be positive");
    if (x.u.rep != Representation::GridValues || x.v.rep != Representation::GridValues) {
        throw std::logic_error("step: state must hold grid values");
    }
    if (x.u.size() != op.size() || x.v.size() != op.size()) {
        throw std::invalid_argument("step: state size does not match the operator");
    }
    if (noise.coeffs.size() != op.size()) {
        throw std::invalid_argument("step: noise increment size does not match the operator");
    }
    if (noise.kind != noise_kind_for(kind)) {
        throw std::invalid_argument("step: noise increment kind does not match the scheme");
    }
    if (std::abs(noise.tau - tau) > 1e-12 * tau) {
        throw std::invalid_argument("step: noise increment step size does not match tau");
    }
}

}  // namespace detail

State step(SchemeKind kind, const SpatialOperator& op, const ModelParams& params, double tau,
           const State& x, const NoiseIncrement& noise) {
    if (kind == SchemeKind::EulerMaruyama) {
        return step_euler_maruyama(op, params, tau, x, noise);
    }
    return step_with_flow(kind, op, tau, x, noise, PhiTauMap(params, tau, is_hat(kind)));
}

State step_euler_maruyama(const SpatialOperator& op, const ModelParams& params, double tau,
                          const State& x, const NoiseIncrement& noise) {
    auto euler = [&params, tau](Point2 p) { return p + drift_f(params, p) * tau; };
    return step_with_flow(SchemeKind::EulerMaruyama, op, tau, x, noise, euler);
}

namespace {

template <class Flow>
TrajectoryResult run_loop(const SpatialOperator& op, const SchemeConfig& cfg,
                          const std::vector<NoiseIncrement>* increments,
                          const StepObserver& observer, const Flow& flow) {
    TrajectoryResult res;
    res.final_state = cfg.initial;
    State& x = res.final_state;

    auto factors =
        uses_resolvent(cfg.kind) ? op.resolvent_factors(cfg.tau) : op.semigroup_factors(cfg.tau);
    const bool exact_noise = noise_kind_for(cfg.kind) == NoiseKind::ExactConvolution;

    std::optional<NoisePlan> plan;
    std::optional<NoiseStream> stream;
    std::vector<double> sampled(op.size());
    if (!increments && cfg.noise_enabled) {
        plan.emplace(op, cfg.tau);
        stream.emplace(cfg.seed, cfg.trajectory);
    }

    auto snapshot = [&](std::uint64_t n) {
        res.snapshot_steps.push_back(n);
        res.snapshots.push_back(x);
    };
    snapshot(0);
    if (observer) observer(0, x);

    std::vector<double> coeff(op.size());
    for (std::uint64_t n = 0; n < cfg.n_steps; ++n) {
        const double* noise_coeffs = nullptr;
        if (increments) {
            noise_coeffs = (*increments)[n].coeffs.data();
        } else if (cfg.noise_enabled) {
            sample_pair_into(*stream, n, *plan, exact_noise ? nullptr : sampled.data(),
                             exact_noise ? sampled.data() : nullptr);
            noise_coeffs = sampled.data();
        }
        detail::step_inplace(op, factors, exact_noise, noise_coeffs, flow, x, coeff);
        res.steps_completed = n + 1;
        if (!state_ok(x)) {
            res.blowup = true;
            res.blowup_step = static_cast<std::int64_t>(n + 1);
            snapshot(n + 1);
            return res;
        }
        if (observer) observer(n + 1, x);
        bool last = (n + 1 == cfg.n_steps);
        if (!last && cfg.snapshot_stride != 0 && (n + 1) % cfg.snapshot_stride == 0) {
            snapshot(n + 1);
        }
        if (last) snapshot(n + 1);
    }
    return res;
}

void check_run_args(const SpatialOperator& op, const SchemeConfig& cfg,
                    const std::vector<NoiseIncrement>* increments) {
    if (cfg.tau <= 0.0 || cfg.tau >= 1.0) {
        throw std::domain_error("run_trajectory: tau must lie in (0, 1)");
    }
    if (cfg.grid != op.grid()) {
        throw std::invalid_argument("run_trajectory: config grid does not match the operator");
    }
    if (cfg.initial.u.rep != Representation::GridValues ||
        cfg.initial.v.rep != Representation::GridValues) {
        throw std::logic_error("run_trajectory: initial state must hold grid values");
    }
    if (cfg.initial.u.size() != op.size() || cfg.initial.v.size() != op.size()) {
        throw std::invalid_argument("run_trajectory: initial state size mismatch");
    }
    if (increments) {
        if (!cfg.noise_enabled) {
            throw std::invalid_argument(
                "run_trajectory: increments supplied but noise is disabled");
        }
        if (increments->size() != cfg.n_steps) {
            throw std::invalid_argument("run_trajectory: need one increment per step");
        }
        const NoiseKind want = noise_kind_for(cfg.kind);
        for (const auto& inc : *increments) {
            if (inc.kind != want || inc.coeffs.size() != op.size() ||
                std::abs(inc.tau - cfg.tau) > 1e-12 * cfg.tau) {
                throw std::invalid_argument("run_trajectory: increment does not match the scheme");
            }
        }
    }
}

}  // namespace

TrajectoryResult run_trajectory(const SpatialOperator& op, const SchemeConfig& cfg,
                                const std::vector<NoiseIncrement>* increments,
                                const StepObserver& observer) {
    check_run_args(op, cfg, increments);
    if (cfg.kind == SchemeKind::EulerMaruyama) {
        auto euler = [&cfg](Point2 p) { return p + drift_f(cfg.params, p) * cfg.tau; };
        return run_loop(op, cfg, increments, observer, euler);
    }
    return run_loop(op, cfg, increments, observer,
                    PhiTauMap(cfg.params, cfg.tau, is_hat(cfg.kind)));
}

TrajectoryResult run_trajectory(const SpatialOperator& op, const SchemeConfig& cfg,
                                const PathTable& table, const StepObserver& observer) {
    double ratio = cfg.tau / table.fine_tau;
    auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (factor == 0 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 ||
        !std::has_single_bit(factor)) {
        throw std::invalid_argument(
            "run_trajectory: tau must be a power-of-two multiple of the table resolution");
    }
    auto increments = coarsen(table, factor, noise_kind_for(cfg.kind), op);
    return run_trajectory(op, cfg, &increments, observer);
}

}  // namespace fhn
