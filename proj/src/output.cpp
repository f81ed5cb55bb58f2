#include "fhn/output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fhn {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("parse_double: malformed number '" + s + "'");
    }
    return x;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    if (line != expected_header) {
        throw std::runtime_error("unexpected header in " + path + ": " + line);
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

nlohmann::ordered_json manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    j["generated_at"] = m.generated_at;
    return j;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    write_file(path, manifest_json(m).dump(2) + "\n");
}

void emit_strong_error_csv(const ErrorTable& table, const std::string& path) {
    if (table.rows.empty()) throw std::invalid_argument("emit_strong_error_csv: empty table");
    std::string out = "scheme,tau,rms_error,stderr,n_samples\n";
    for (const auto& row : table.rows) {
        out += std::string(scheme_name(row.kind)) + "," + format_double(row.tau) + "," +
               format_double(row.rms_error) + "," + format_double(row.std_error) + "," +
               std::to_string(row.n_samples) + "\n";
    }
    write_file(path, out);
}

std::vector<ErrorRow> parse_strong_error_csv(const std::string& path) {
    auto rows = read_csv(path, "scheme,tau,rms_error,stderr,n_samples");
    std::vector<ErrorRow> out;
    for (const auto& f : rows) {
        if (f.size() != 5) throw std::runtime_error("malformed row in " + path);
        ErrorRow row;
        auto kind = parse_scheme(f[0]);
        if (!kind) throw std::runtime_error("unknown scheme name: " + f[0]);
        row.kind = *kind;
        row.tau = parse_double(f[1]);
        row.rms_error = parse_double(f[2]);
        row.std_error = parse_double(f[3]);
        row.n_samples = static_cast<std::size_t>(std::stoull(f[4]));
        out.push_back(row);
    }
    return out;
}

void emit_moments_csv(const std::vector<MomentRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_moments_csv: empty table");
    std::string out = "scheme,tau,p,sup_moment,blowup_fraction\n";
    for (const auto& row : rows) {
        out += std::string(scheme_name(row.kind)) + "," + format_double(row.tau) + "," +
               format_double(row.p) + "," + format_double(row.sup_moment) + "," +
               format_double(row.blowup_fraction) + "\n";
    }
    write_file(path, out);
}

std::vector<MomentRow> parse_moments_csv(const std::string& path) {
    auto rows = read_csv(path, "scheme,tau,p,sup_moment,blowup_fraction");
    std::vector<MomentRow> out;
    for (const auto& f : rows) {
        if (f.size() != 5) throw std::runtime_error("malformed row in " + path);
        MomentRow row;
        auto kind = parse_scheme(f[0]);
        if (!kind) throw std::runtime_error("unknown scheme name: " + f[0]);
        row.kind = *kind;
        row.tau = parse_double(f[1]);
        row.p = parse_double(f[2]);
        row.sup_moment = parse_double(f[3]);
        row.blowup_fraction = parse_double(f[4]);
        out.push_back(row);
    }
    return out;
}

void emit_evolution_csv(const EvolutionResult& evo, const std::string& path) {
    if (evo.times.empty() || evo.zetas.empty()) {
        throw std::invalid_argument("emit_evolution_csv: empty result");
    }
    std::string out = "t,zeta,u,v\n";
    for (std::size_t t = 0; t < evo.times.size(); ++t) {
        for (std::size_t i = 0; i < evo.zetas.size(); ++i) {
            out += format_double(evo.times[t]) + "," + format_double(evo.zetas[i]) + "," +
                   format_double(evo.u[t][i]) + "," + format_double(evo.v[t][i]) + "\n";
        }
    }
    write_file(path, out);
}

EvolutionResult parse_evolution_csv(const std::string& path) {
    auto rows = read_csv(path, "t,zeta,u,v");
    EvolutionResult out;
    for (const auto& f : rows) {
        if (f.size() != 4) throw std::runtime_error("malformed row in " + path);
        double t = parse_double(f[0]);
        double zeta = parse_double(f[1]);
        if (out.times.empty() || out.times.back() != t) {
            out.times.push_back(t);
            out.u.emplace_back();
            out.v.emplace_back();
        }
        if (out.times.size() == 1) out.zetas.push_back(zeta);
        out.u.back().push_back(parse_double(f[2]));
        out.v.back().push_back(parse_double(f[3]));
    }
    return out;
}

void emit_rates_json(const ErrorTable& table, const std::string& manifest_ref,
                     const std::string& path) {
    nlohmann::ordered_json schemes = nlohmann::ordered_json::object();
    for (const auto& [kind, fit] : table.fits) {
        if (!fit) continue;
        nlohmann::ordered_json entry;
        entry["slope"] = fit->slope;
        entry["ci_halfwidth"] = fit->ci_halfwidth;
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& row : table.rows) {
            if (row.kind == kind) points.push_back({row.tau, row.rms_error});
        }
        entry["points"] = points;
        schemes[std::string(scheme_name(kind))] = entry;
    }
    if (schemes.empty()) {
        throw std::invalid_argument("emit_rates_json: no fitted slopes to write");
    }
    nlohmann::ordered_json j;
    j["schemes"] = schemes;
    j["manifest"] = manifest_ref;
    write_file(path, j.dump(2) + "\n");
}

}  // namespace fhn
