#include "fhn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace fhn {

namespace {

double kahan_sum(const std::vector<double>& xs) {
    double s = 0.0;
    double c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

/// Ratio tau / tau_ref if it is an exact power of two, else nullopt.
std::optional<std::size_t> dyadic_factor(double tau, double tau_ref) {
    double ratio = tau / tau_ref;
    auto f = static_cast<std::size_t>(std::llround(ratio));
    if (f == 0 || std::abs(ratio - static_cast<double>(f)) > 1e-9 * ratio) return std::nullopt;
    if (!std::has_single_bit(f)) return std::nullopt;
    return f;
}

std::optional<std::uint64_t> integer_step_count(double T, double tau) {
    double ratio = T / tau;
    auto n = static_cast<std::uint64_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) return std::nullopt;
    return n;
}

/// Run fn(0..n-1) on the given number of threads. Work items land in
/// caller-owned slots indexed by sample, so the result of a study never
/// depends on the job count; the first exception wins and is rethrown.
void parallel_for_samples(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned count = std::min<std::size_t>(jobs, n);
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Two-sided 95% t quantiles for small degrees of freedom.
double t_quantile_975(std::size_t df) {
    static const double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    };
    if (df == 0) return 12.706;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (kinds.empty()) throw std::invalid_argument("config: kinds must not be empty");
    if (grid.n_modes < 2) throw std::invalid_argument("config: n_modes must be at least 2");
    if (!(T > 0.0)) throw std::invalid_argument("config: T must be positive");
    if (tau_list.empty()) throw std::invalid_argument("config: tau_list must not be empty");
    for (double tau : tau_list) {
        if (!(tau > 0.0) || tau >= 1.0) {
            throw std::invalid_argument("config: every tau must lie in (0, 1)");
        }
    }
    for (std::size_t i = 1; i < tau_list.size(); ++i) {
        if (!(tau_list[i] < tau_list[i - 1])) {
            throw std::invalid_argument("config: tau_list must be strictly decreasing");
        }
    }
    if (!(tau_ref > 0.0) || tau_ref >= 1.0) {
        throw std::invalid_argument("config: tau_ref must lie in (0, 1)");
    }
    if (tau_ref > tau_list.back()) {
        throw std::invalid_argument("config: tau_ref must not exceed min(tau_list)");
    }
    for (double tau : tau_list) {
        if (!dyadic_factor(tau, tau_ref)) {
            throw std::invalid_argument(
                "config: every tau must be a power-of-two multiple of tau_ref");
        }
        if (!integer_step_count(T, tau)) {
            throw std::invalid_argument("config: T must be an integer multiple of every tau");
        }
    }
    if (!integer_step_count(T, tau_ref)) {
        throw std::invalid_argument("config: T must be an integer multiple of tau_ref");
    }
    if (n_samples == 0) throw std::invalid_argument("config: n_samples must be positive");
    if (!(p >= 1.0)) throw std::invalid_argument("config: moment order p must be at least 1");
    if (!(alpha >= 0.0) || alpha >= 0.25) {
        throw std::invalid_argument("config: alpha must lie in [0, 1/4)");
    }
    if (!std::isfinite(initial_amplitude)) {
        throw std::invalid_argument("config: initial_amplitude must be finite");
    }
}

State cosine_initial(const Grid& grid, double amplitude) {
    std::vector<double> profile(grid.n_modes);
    for (std::size_t i = 0; i < grid.n_modes; ++i) {
        profile[i] = amplitude * std::cos(2.0 * std::numbers::pi * grid.point(i));
    }
    return State{Field::grid_values(profile), Field::grid_values(profile)};
}

State constant_initial(const Grid& grid, double amplitude) {
    std::vector<double> profile(grid.n_modes, amplitude);
    return State{Field::grid_values(profile), Field::grid_values(profile)};
}

State make_initial(const ExperimentConfig& cfg) {
    return cfg.initial_profile == InitialProfile::Constant
               ? constant_initial(cfg.grid, cfg.initial_amplitude)
               : cosine_initial(cfg.grid, cfg.initial_amplitude);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::domain_error("fit_rate: need at least 3 points");
    std::vector<double> xs(points.size());
    std::vector<double> ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto [tau, err] = points[i];
        if (!(tau > 0.0)) throw std::domain_error("fit_rate: tau must be positive");
        if (!(err > 0.0)) throw std::domain_error("fit_rate: errors must be positive");
        xs[i] = std::log2(tau);
        ys[i] = std::log2(err);
    }
    const auto n = static_cast<double>(points.size());
    double mx = kahan_sum(xs) / n;
    double my = kahan_sum(ys) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw std::domain_error("fit_rate: need at least two distinct tau");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ssr += r * r;
    }
    std::size_t df = points.size() - 2;
    double se = std::sqrt(std::max(0.0, ssr / static_cast<double>(df)) / sxx);
    fit.ci_halfwidth = t_quantile_975(df) * se;
    return fit;
}

ErrorTable strong_error_study(const ExperimentConfig& cfg) {
    cfg.validate();
    SpatialOperator op(cfg.grid);
    const State x0 = make_initial(cfg);
    const std::uint64_t n_fine = *integer_step_count(cfg.T, cfg.tau_ref);
    const std::size_t n_kinds = cfg.kinds.size();
    const std::size_t n_taus = cfg.tau_list.size();

    std::vector<std::size_t> factors(n_taus);
    for (std::size_t l = 0; l < n_taus; ++l) factors[l] = *dyadic_factor(cfg.tau_list[l], cfg.tau_ref);
    const std::size_t min_factor = factors.back();

    // slot (sample, kind, tau): squared pathwise error, or blown flag for the
    // explicit baseline. Filled independently per sample, reduced in order.
    std::vector<double> sq(cfg.n_samples * n_kinds * n_taus, 0.0);
    std::vector<char> blown(cfg.n_samples * n_kinds * n_taus, 0);
    auto slot = [&](std::size_t s, std::size_t k, std::size_t l) {
        return (s * n_kinds + k) * n_taus + l;
    };

    parallel_for_samples(cfg.n_samples, cfg.jobs, [&](std::size_t s) {
        PathTable table = build_path_table(cfg.seed, s, cfg.tau_ref, n_fine, op);

        SchemeConfig ref_cfg;
        ref_cfg.kind = SchemeKind::LTexact;
        ref_cfg.params = cfg.params;
        ref_cfg.grid = cfg.grid;
        ref_cfg.initial = x0;
        ref_cfg.tau = cfg.tau_ref;
        ref_cfg.n_steps = n_fine;
        ref_cfg.seed = cfg.seed;
        ref_cfg.trajectory = s;

        // On-the-fly draws address the same (stream, step, mode) counters as
        // the table, so the reference consumes the identical path.
        std::vector<State> ref_states;  // states at multiples of the smallest tau
        StepObserver ref_observer;
        if (cfg.sup_error_in_time) {
            ref_states.reserve(n_fine / min_factor + 1);
            ref_observer = [&](std::uint64_t n, const State& x) {
                if (n % min_factor == 0) ref_states.push_back(x);
            };
        }
        TrajectoryResult ref = run_trajectory(op, ref_cfg, nullptr, ref_observer);
        if (ref.blowup) {
            throw BlowupError("strong_error_study: reference trajectory blew up");
        }

        for (std::size_t k = 0; k < n_kinds; ++k) {
            const SchemeKind kind = cfg.kinds[k];
            for (std::size_t l = 0; l < n_taus; ++l) {
                SchemeConfig run_cfg = ref_cfg;
                run_cfg.kind = kind;
                run_cfg.tau = cfg.tau_list[l];
                run_cfg.n_steps = n_fine / factors[l];
                auto increments = coarsen(table, factors[l], noise_kind_for(kind), op);

                double sup_err = 0.0;
                StepObserver err_observer;
                if (cfg.sup_error_in_time) {
                    const std::size_t stride = factors[l] / min_factor;
                    err_observer = [&, stride](std::uint64_t n, const State& x) {
                        const State& r = ref_states[n * stride];
                        double du = 0.0;
                        double dv = 0.0;
                        for (std::size_t i = 0; i < x.u.size(); ++i) {
                            double a = x.u[i] - r.u[i];
                            double b = x.v[i] - r.v[i];
                            du += a * a;
                            dv += b * b;
                        }
                        double h = 1.0 / static_cast<double>(x.u.size());
                        sup_err = std::max(sup_err, std::sqrt(h * (du + dv)));
                    };
                }
                TrajectoryResult run = run_trajectory(op, run_cfg, &increments, err_observer);
                if (run.blowup) {
                    if (is_splitting(kind)) {
                        std::ostringstream msg;
                        msg << "strong_error_study: " << scheme_name(kind) << " blew up at tau="
                            << run_cfg.tau;
                        throw BlowupError(msg.str());
                    }
                    blown[slot(s, k, l)] = 1;
                    continue;
                }
                double err;
                if (cfg.sup_error_in_time) {
                    err = sup_err;
                } else {
                    State diff = run.final_state;
                    for (std::size_t i = 0; i < diff.u.size(); ++i) {
                        diff.u.values[i] -= ref.final_state.u[i];
                        diff.v.values[i] -= ref.final_state.v[i];
                    }
                    err = norm_state_h(diff);
                }
                sq[slot(s, k, l)] = err * err;
            }
        }
    });

    ErrorTable table;
    for (std::size_t k = 0; k < n_kinds; ++k) {
        std::vector<std::pair<double, double>> points;
        bool fit_ok = is_splitting(cfg.kinds[k]);
        for (std::size_t l = 0; l < n_taus; ++l) {
            std::vector<double> vals;
            vals.reserve(cfg.n_samples);
            for (std::size_t s = 0; s < cfg.n_samples; ++s) {
                if (!blown[slot(s, k, l)]) vals.push_back(sq[slot(s, k, l)]);
            }
            ErrorRow row;
            row.kind = cfg.kinds[k];
            row.tau = cfg.tau_list[l];
            row.n_samples = vals.size();
            if (!vals.empty()) {
                double mean_sq = kahan_sum(vals) / static_cast<double>(vals.size());
                row.rms_error = std::sqrt(mean_sq);
                if (vals.size() > 1 && row.rms_error > 0.0) {
                    double var = 0.0;
                    for (double v : vals) var += (v - mean_sq) * (v - mean_sq);
                    var /= static_cast<double>(vals.size() - 1);
                    double se_mean = std::sqrt(var / static_cast<double>(vals.size()));
                    row.std_error = se_mean / (2.0 * row.rms_error);
                }
            }
            table.rows.push_back(row);
            if (row.rms_error > 0.0 && row.n_samples > 0) {
                points.emplace_back(row.tau, row.rms_error);
            } else {
                fit_ok = false;  // self-comparison or fully blown row; no meaningful fit
            }
        }
        std::optional<RateFit> fit;
        if (fit_ok && points.size() >= 3) fit = fit_rate(points);
        table.fits.emplace_back(cfg.kinds[k], fit);
    }
    return table;
}

std::vector<MomentRow> moment_study(const ExperimentConfig& cfg,
                                    const std::vector<double>& p_values_in) {
    cfg.validate();
    std::vector<double> p_values = p_values_in.empty() ? std::vector<double>{cfg.p} : p_values_in;
    for (double p : p_values) {
        if (!(p >= 1.0)) throw std::invalid_argument("moment_study: p must be at least 1");
    }
    SpatialOperator op(cfg.grid);
    const State x0 = make_initial(cfg);

    std::vector<MomentRow> out;
    for (SchemeKind kind : cfg.kinds) {
        for (double tau : cfg.tau_list) {
            const std::uint64_t n_steps = *integer_step_count(cfg.T, tau);
            std::vector<std::vector<double>> norms(cfg.n_samples);
            std::vector<char> blown(cfg.n_samples, 0);

            parallel_for_samples(cfg.n_samples, cfg.jobs, [&](std::size_t s) {
                SchemeConfig run_cfg;
                run_cfg.kind = kind;
                run_cfg.params = cfg.params;
                run_cfg.grid = cfg.grid;
                run_cfg.initial = x0;
                run_cfg.tau = tau;
                run_cfg.n_steps = n_steps;
                run_cfg.seed = cfg.seed;
                run_cfg.trajectory = s;
                run_cfg.noise_enabled = cfg.noise_enabled;
                auto& row = norms[s];
                row.reserve(n_steps + 1);
                TrajectoryResult res = run_trajectory(
                    op, run_cfg, nullptr,
                    [&row](std::uint64_t, const State& x) { row.push_back(norm_state_e(x)); });
                if (res.blowup) blown[s] = 1;
            });

            std::size_t n_blown = 0;
            for (char b : blown) n_blown += b;
            const std::size_t survivors = cfg.n_samples - n_blown;

            for (double p : p_values) {
                MomentRow row;
                row.kind = kind;
                row.tau = tau;
                row.p = p;
                row.blowup_fraction =
                    static_cast<double>(n_blown) / static_cast<double>(cfg.n_samples);
                if (survivors == 0) {
                    row.sup_moment = std::numeric_limits<double>::quiet_NaN();
                } else {
                    double sup = 0.0;
                    std::vector<double> vals(survivors);
                    for (std::uint64_t n = 0; n <= n_steps; ++n) {
                        std::size_t idx = 0;
                        for (std::size_t s = 0; s < cfg.n_samples; ++s) {
                            if (!blown[s]) vals[idx++] = std::pow(norms[s][n], p);
                        }
                        sup = std::max(sup, kahan_sum(vals) / static_cast<double>(survivors));
                    }
                    row.sup_moment = sup;
                }
                out.push_back(row);
            }
        }
    }
    return out;
}

EvolutionResult evolution_snapshot(const ExperimentConfig& cfg, std::size_t max_frames) {
    cfg.validate();
    if (cfg.kinds.size() != 1) {
        throw std::invalid_argument("evolution_snapshot: exactly one scheme kind required");
    }
    if (max_frames < 2) throw std::invalid_argument("evolution_snapshot: need at least 2 frames");
    SpatialOperator op(cfg.grid);

    SchemeConfig run_cfg;
    run_cfg.kind = cfg.kinds[0];
    run_cfg.params = cfg.params;
    run_cfg.grid = cfg.grid;
    run_cfg.initial = make_initial(cfg);
    run_cfg.tau = cfg.tau_list[0];
    run_cfg.n_steps = *integer_step_count(cfg.T, cfg.tau_list[0]);
    run_cfg.seed = cfg.seed;
    run_cfg.noise_enabled = cfg.noise_enabled;
    run_cfg.snapshot_stride = std::max<std::uint64_t>(1, run_cfg.n_steps / (max_frames - 1));

    TrajectoryResult res = run_trajectory(op, run_cfg);
    if (res.blowup) {
        std::ostringstream msg;
        msg << "evolution_snapshot: " << scheme_name(run_cfg.kind) << " blew up at step "
            << res.blowup_step;
        throw BlowupError(msg.str());
    }

    EvolutionResult out;
    out.zetas = cfg.grid.points();
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        out.times.push_back(static_cast<double>(res.snapshot_steps[i]) * run_cfg.tau);
        out.u.push_back(res.snapshots[i].u.values);
        out.v.push_back(res.snapshots[i].v.values);
    }
    return out;
}

IneqScanResult verify_eq_ineq(std::uint64_t n_max, const std::vector<double>& z_grid) {
    if (n_max < 1) throw std::invalid_argument("verify_eq_ineq: n_max must be at least 1");
    for (double z : z_grid) {
        if (!(z >= 0.0)) throw std::invalid_argument("verify_eq_ineq: z values must be nonnegative");
    }
    IneqScanResult res;
    res.n_max = n_max;
    res.n_z = z_grid.size();
    for (double z : z_grid) {
        if (z == 0.0) continue;  // both powers stay 1, difference 0
        const double r = 1.0 / (1.0 + z);
        const double e = std::exp(-z);
        const double inv_min = 1.0 / std::min(1.0, z);
        double rp = 1.0;
        double ep = 1.0;
        for (std::uint64_t n = 1; n <= n_max; ++n) {
            rp *= r;
            ep *= e;
            double d = std::abs(rp - ep);
            res.sup_n_scaled = std::max(res.sup_n_scaled, static_cast<double>(n) * d);
            res.sup_min_scaled = std::max(res.sup_min_scaled, d * inv_min);
            // Once both powers vanish the difference can only shrink.
            if (rp < 1e-300 && ep < 1e-300) break;
        }
    }
    return res;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw std::invalid_argument("logspace: need at least 2 points");
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("logspace: need 0 < lo < hi");
    std::vector<double> out(n);
    const double la = std::log10(lo);
    const double lb = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n - 1);
        out[i] = std::pow(10.0, la + t * (lb - la));
    }
    return out;
}

}  // namespace fhn
