// Command-line front end: run simulations and Monte Carlo studies, emit
// CSV/JSON tables plus a manifest that reproduces the run.
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fhn/experiments.hpp"
#include "fhn/output.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Accepts plain decimals and the dyadic shorthand "2^-10".
double parse_tau_expr(const std::string& s) {
    auto caret = s.find('^');
    if (caret == std::string::npos) return fhn::parse_double(s);
    double base = fhn::parse_double(s.substr(0, caret));
    double expo = fhn::parse_double(s.substr(caret + 1));
    return std::pow(base, expo);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_tau_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_commas(s)) out.push_back(parse_tau_expr(item));
    return out;
}

std::vector<fhn::SchemeKind> parse_scheme_list(const std::string& s) {
    std::vector<fhn::SchemeKind> out;
    for (const auto& item : split_commas(s)) {
        auto kind = fhn::parse_scheme(item);
        if (!kind) throw std::invalid_argument("unknown scheme name: " + item);
        out.push_back(*kind);
    }
    if (out.empty()) throw std::invalid_argument("scheme list is empty");
    return out;
}

fhn::Backend parse_backend(const std::string& s) {
    if (s == "fd") return fhn::Backend::FiniteDifference;
    if (s == "spectral") return fhn::Backend::SpectralGalerkin;
    throw std::invalid_argument("backend must be 'fd' or 'spectral'");
}

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

/// Raw option values shared by the subcommands; resolved into an
/// ExperimentConfig only after parsing so the config file and CLI flags
/// share one precedence chain (flags > file > defaults).
struct Options {
    std::string scheme;
    std::size_t n_modes = 128;
    std::string backend = "spectral";
    std::string tau;
    std::string tau_list;
    std::string tau_ref;
    double horizon = 0.5;
    std::size_t samples = 64;
    std::uint64_t seed = 12345;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double beta = 1.0;
    double p = 2.0;
    double alpha = 0.22;
    double amplitude = 1.0;
    std::string profile = "cosine";
    bool no_noise = false;
    std::string out_dir = "out";
    unsigned jobs = 1;
    std::string config_path;
};

void add_common_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--scheme", o.scheme, "Scheme kind(s), comma separated");
    cmd->add_option("--n-modes", o.n_modes, "Number of grid points / modes");
    cmd->add_option("--backend", o.backend, "Spatial backend: fd | spectral")
        ->check(CLI::IsMember({"fd", "spectral"}));
    cmd->add_option("--tau", o.tau, "Time step (decimal or 2^-k)");
    cmd->add_option("--tau-list", o.tau_list, "Comma-separated time steps, decreasing");
    cmd->add_option("--tau-ref", o.tau_ref, "Reference time step");
    cmd->add_option("--T", o.horizon, "Time horizon");
    cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", o.seed, "Base RNG seed");
    cmd->add_option("--gamma1", o.gamma1, "Recovery coupling gamma1");
    cmd->add_option("--gamma2", o.gamma2, "Recovery damping gamma2");
    cmd->add_option("--beta", o.beta, "Recovery forcing beta");
    cmd->add_option("--p", o.p, "Moment order");
    cmd->add_option("--alpha", o.alpha, "Target rate exponent in [0, 1/4)");
    cmd->add_option("--amplitude", o.amplitude, "Initial profile amplitude");
    cmd->add_option("--profile", o.profile, "Initial data shape: cosine | constant")
        ->check(CLI::IsMember({"cosine", "constant"}));
    cmd->add_flag("--no-noise", o.no_noise, "Disable the stochastic forcing");
    cmd->add_option("--out-dir", o.out_dir, "Output directory");
    cmd->add_option("--jobs", o.jobs, "Worker threads (results are independent of this)");
    cmd->add_option("--config", o.config_path,
                    "Flat key=value config file; command-line flags win");
}

std::uint64_t parse_config_uint(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        if (v.empty() || v[0] == '-') throw std::invalid_argument("negative");
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != v.size()) {
        throw std::invalid_argument("config: key '" + key + "' needs a non-negative integer, got '" +
                                    v + "'");
    }
    return x;
}

bool parse_config_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: key '" + key + "' needs true/false, got '" + v + "'");
}

/// Applies key=value lines from o.config_path to every option the command
/// line left untouched, so precedence is flags > file > defaults. Unknown
/// keys are usage errors; keys are the long option names without the dashes.
void apply_config_file(const CLI::App* cmd, Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw std::invalid_argument("cannot read config file: " + o.config_path);

    auto trim = [](std::string s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    auto unquote = [](std::string s) {
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
            return s.substr(1, s.size() - 2);
        }
        return s;
    };

    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected key=value, got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = unquote(trim(t.substr(eq + 1)));

        const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
        if (opt->count() > 0) continue;  // given on the command line; flag wins

        if (key == "scheme") {
            o.scheme = value;
        } else if (key == "n-modes") {
            o.n_modes = static_cast<std::size_t>(parse_config_uint(value, key));
        } else if (key == "backend") {
            o.backend = value;
        } else if (key == "tau") {
            o.tau = value;
        } else if (key == "tau-list") {
            o.tau_list = value;
        } else if (key == "tau-ref") {
            o.tau_ref = value;
        } else if (key == "T") {
            o.horizon = fhn::parse_double(value);
        } else if (key == "samples") {
            o.samples = static_cast<std::size_t>(parse_config_uint(value, key));
        } else if (key == "seed") {
            o.seed = parse_config_uint(value, key);
        } else if (key == "gamma1") {
            o.gamma1 = fhn::parse_double(value);
        } else if (key == "gamma2") {
            o.gamma2 = fhn::parse_double(value);
        } else if (key == "beta") {
            o.beta = fhn::parse_double(value);
        } else if (key == "p") {
            o.p = fhn::parse_double(value);
        } else if (key == "alpha") {
            o.alpha = fhn::parse_double(value);
        } else if (key == "amplitude") {
            o.amplitude = fhn::parse_double(value);
        } else if (key == "profile") {
            o.profile = value;
        } else if (key == "no-noise") {
            o.no_noise = parse_config_bool(value, key);
        } else if (key == "out-dir") {
            o.out_dir = value;
        } else if (key == "jobs") {
            o.jobs = static_cast<unsigned>(parse_config_uint(value, key));
        } else {
            throw std::invalid_argument("config: unsupported key '" + key + "'");
        }
    }
}

fhn::ExperimentConfig resolve_config(const Options& o, const std::string& default_schemes,
                                     const std::string& default_tau_list,
                                     const std::string& default_tau_ref) {
    fhn::ExperimentConfig cfg;
    cfg.kinds = parse_scheme_list(o.scheme.empty() ? default_schemes : o.scheme);
    cfg.params = fhn::ModelParams(o.gamma1, o.gamma2, o.beta);
    cfg.grid = fhn::Grid(o.n_modes, parse_backend(o.backend));
    cfg.T = o.horizon;
    if (!o.tau_list.empty()) {
        cfg.tau_list = parse_tau_list(o.tau_list);
    } else if (!o.tau.empty()) {
        cfg.tau_list = {parse_tau_expr(o.tau)};
    } else {
        cfg.tau_list = parse_tau_list(default_tau_list);
    }
    cfg.tau_ref = parse_tau_expr(o.tau_ref.empty() ? default_tau_ref : o.tau_ref);
    cfg.n_samples = o.samples;
    cfg.seed = o.seed;
    cfg.p = o.p;
    cfg.alpha = o.alpha;
    cfg.initial_amplitude = o.amplitude;
    if (o.profile != "cosine" && o.profile != "constant") {
        throw std::invalid_argument("profile must be 'cosine' or 'constant'");
    }
    cfg.initial_profile = o.profile == "constant" ? fhn::InitialProfile::Constant
                                                  : fhn::InitialProfile::Cosine;
    cfg.noise_enabled = !o.no_noise;
    cfg.jobs = o.jobs;
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json config_json(const fhn::ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    std::vector<std::string> kinds;
    for (auto k : cfg.kinds) kinds.emplace_back(fhn::scheme_name(k));
    j["schemes"] = kinds;
    j["n_modes"] = cfg.grid.n_modes;
    j["backend"] = cfg.grid.backend == fhn::Backend::FiniteDifference ? "fd" : "spectral";
    j["T"] = cfg.T;
    j["tau_list"] = cfg.tau_list;
    j["tau_ref"] = cfg.tau_ref;
    j["samples"] = cfg.n_samples;
    j["seed"] = cfg.seed;
    j["gamma1"] = cfg.params.gamma1;
    j["gamma2"] = cfg.params.gamma2;
    j["beta"] = cfg.params.beta;
    j["p"] = cfg.p;
    j["alpha"] = cfg.alpha;
    j["amplitude"] = cfg.initial_amplitude;
    j["profile"] = cfg.initial_profile == fhn::InitialProfile::Constant ? "constant" : "cosine";
    j["noise"] = cfg.noise_enabled;
    j["jobs"] = cfg.jobs;
    return j;
}

std::filesystem::path prepare_out_dir(const Options& o) {
    std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void finish_manifest(fhn::RunManifest& manifest, const std::filesystem::path& dir) {
    manifest.generated_at = iso_timestamp();
    fhn::write_manifest(manifest, (dir / "manifest.json").string());
}

int run_simulate(const Options& o) {
    auto cfg = resolve_config(o, "LTexact", "2^-10", "2^-10");
    if (cfg.kinds.size() != 1) {
        throw std::invalid_argument("simulate takes exactly one --scheme");
    }
    auto dir = prepare_out_dir(o);
    fhn::EvolutionResult evo = fhn::evolution_snapshot(cfg);
    fhn::emit_evolution_csv(evo, (dir / "evolution.csv").string());

    fhn::RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = config_json(cfg);
    manifest.seed = cfg.seed;
    manifest.outputs = {"evolution.csv"};
    finish_manifest(manifest, dir);
    std::cout << "wrote " << (dir / "evolution.csv").string() << " (" << evo.times.size()
              << " frames x " << evo.zetas.size() << " points)\n";
    return 0;
}

int run_strong_error(const Options& o) {
    auto cfg = resolve_config(o, "LTexact,LTexpo,LTimp", "2^-5,2^-6,2^-7,2^-8,2^-9,2^-10",
                              "2^-14");
    auto dir = prepare_out_dir(o);
    fhn::ErrorTable table = fhn::strong_error_study(cfg);
    fhn::emit_strong_error_csv(table, (dir / "strong_error.csv").string());
    bool any_fit = false;
    for (const auto& [kind, fit] : table.fits) any_fit = any_fit || fit.has_value();
    if (any_fit) {
        fhn::emit_rates_json(table, "manifest.json", (dir / "rates.json").string());
    }

    fhn::RunManifest manifest;
    manifest.command = "strong-error";
    manifest.config = config_json(cfg);
    manifest.seed = cfg.seed;
    manifest.outputs = {"strong_error.csv"};
    if (any_fit) manifest.outputs.push_back("rates.json");
    finish_manifest(manifest, dir);

    for (const auto& [kind, fit] : table.fits) {
        if (fit) {
            std::cout << fhn::scheme_name(kind) << ": slope " << fhn::format_double(fit->slope)
                      << " +- " << fhn::format_double(fit->ci_halfwidth) << "\n";
        }
    }
    return 0;
}

int run_moments(const Options& o) {
    auto cfg = resolve_config(o,
                              "LTexact,LTexpo,LTimp,LTexactHat,LTexpoHat,LTimpHat,EulerMaruyama",
                              "2^-4,2^-6,2^-8", "2^-8");
    cfg.T = o.horizon;  // moments default horizon differs; set via --T
    auto dir = prepare_out_dir(o);
    std::vector<fhn::MomentRow> rows = fhn::moment_study(cfg);
    fhn::emit_moments_csv(rows, (dir / "moments.csv").string());

    fhn::RunManifest manifest;
    manifest.command = "moments";
    manifest.config = config_json(cfg);
    manifest.seed = cfg.seed;
    manifest.outputs = {"moments.csv"};
    finish_manifest(manifest, dir);
    std::cout << "wrote " << (dir / "moments.csv").string() << " (" << rows.size() << " rows)\n";
    return 0;
}

int run_verify_ineq(const Options& o, std::uint64_t n_max, double z_min, double z_max,
                    std::size_t z_points) {
    auto dir = prepare_out_dir(o);
    auto grid = fhn::logspace(z_min, z_max, z_points);
    fhn::IneqScanResult res = fhn::verify_eq_ineq(n_max, grid);

    nlohmann::ordered_json j;
    j["n_max"] = res.n_max;
    j["z_min"] = z_min;
    j["z_max"] = z_max;
    j["z_points"] = res.n_z;
    j["sup_n_scaled"] = res.sup_n_scaled;
    j["sup_min_scaled"] = res.sup_min_scaled;
    j["ceiling"] = fhn::kIneqCeiling;
    {
        std::ofstream out(dir / "ineq.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot open ineq.json for writing");
        out << j.dump(2) << "\n";
    }

    fhn::RunManifest manifest;
    manifest.command = "verify-ineq";
    nlohmann::ordered_json cfg;
    cfg["n_max"] = n_max;
    cfg["z_min"] = z_min;
    cfg["z_max"] = z_max;
    cfg["z_points"] = z_points;
    manifest.config = cfg;
    manifest.seed = 0;
    manifest.outputs = {"ineq.json"};
    finish_manifest(manifest, dir);

    std::cout << "sup n|1/(1+z)^n - e^(-nz)|        = " << fhn::format_double(res.sup_n_scaled)
              << "\n"
              << "sup |1/(1+z)^n - e^(-nz)|/min(1,z) = " << fhn::format_double(res.sup_min_scaled)
              << "\n";
    if (!within_ceiling(res)) {
        std::cerr << "inequality ceiling " << fhn::kIneqCeiling << " exceeded\n";
        return kExitNumerical;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Splitting integrators for a stochastic reaction-diffusion pair"};
    app.require_subcommand(1);

    Options sim_opts;
    Options err_opts;
    Options mom_opts;
    Options ineq_opts;
    std::uint64_t n_max = 10000;
    double z_min = 1e-6;
    double z_max = 1e3;
    std::size_t z_points = 10000;

    auto* sim = app.add_subcommand("simulate", "Single-trajectory space-time evolution");
    sim_opts.gamma1 = 0.08;
    sim_opts.gamma2 = 0.064;
    sim_opts.beta = 0.7;
    sim_opts.horizon = 1.0;
    add_common_options(sim, sim_opts);

    auto* err = app.add_subcommand("strong-error", "Coupled strong-error study with rate fits");
    add_common_options(err, err_opts);

    auto* mom = app.add_subcommand("moments", "Sup-in-time moment study with blow-up counts");
    mom_opts.samples = 200;
    mom_opts.horizon = 1.0;
    add_common_options(mom, mom_opts);

    auto* ineq = app.add_subcommand("verify-ineq", "Scan the resolvent-vs-semigroup inequality");
    ineq->add_option("--n-max", n_max, "Largest power n in the scan");
    ineq->add_option("--z-min", z_min, "Smallest z in the log grid");
    ineq->add_option("--z-max", z_max, "Largest z in the log grid");
    ineq->add_option("--z-points", z_points, "Number of z grid points");
    ineq->add_option("--out-dir", ineq_opts.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed()) {
            apply_config_file(sim, sim_opts);
            return run_simulate(sim_opts);
        }
        if (err->parsed()) {
            apply_config_file(err, err_opts);
            return run_strong_error(err_opts);
        }
        if (mom->parsed()) {
            apply_config_file(mom, mom_opts);
            return run_moments(mom_opts);
        }
        if (ineq->parsed()) return run_verify_ineq(ineq_opts, n_max, z_min, z_max, z_points);
    } catch (const fhn::BlowupError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
