#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fhn/experiments.hpp"

namespace fhn {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);
double parse_double(const std::string& s);

/// Everything needed to reproduce a run, written alongside each output file.
/// generated_at is informational; byte-identity of re-runs is judged on the
/// payload files and on the manifest minus that field.
struct RunManifest {
    std::string command;
    nlohmann::ordered_json config;
    std::uint64_t seed = 0;
    std::string version = kArtifactVersion;
    std::vector<std::string> outputs;
    std::string generated_at;
};

nlohmann::ordered_json manifest_json(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& path);

/// Column layout: scheme,tau,rms_error,stderr,n_samples. Header always
/// present, LF newlines, full round-trip number precision. Empty tables are
/// rejected before any file is created.
void emit_strong_error_csv(const ErrorTable& table, const std::string& path);
std::vector<ErrorRow> parse_strong_error_csv(const std::string& path);

/// Column layout: scheme,tau,p,sup_moment,blowup_fraction.
void emit_moments_csv(const std::vector<MomentRow>& rows, const std::string& path);
std::vector<MomentRow> parse_moments_csv(const std::string& path);

/// Column layout: t,zeta,u,v; one row per (time, grid point) pair.
void emit_evolution_csv(const EvolutionResult& evo, const std::string& path);
EvolutionResult parse_evolution_csv(const std::string& path);

/// {"schemes": {name: {slope, ci_halfwidth, points: [[tau, error], ...]}},
///  "manifest": <relative manifest path>}. Requires at least one fitted kind;
/// kinds without a fit (the explicit baseline) are omitted.
void emit_rates_json(const ErrorTable& table, const std::string& manifest_ref,
                     const std::string& path);

}  // namespace fhn
