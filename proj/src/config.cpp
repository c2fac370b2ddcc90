#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fissure/harness.hpp"

namespace fissure {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& key, const std::string& msg, std::size_t offset = 0) {
    throw ParseError("line " + std::to_string(line) + ", field '" + key + "': " + msg, offset, line, key);
}

double number(std::size_t line, const std::string& key, const std::string& tok) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0' || !std::isfinite(v)) fail(line, key, "expected a number, got '" + tok + "'");
    return v;
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text, const std::string& base_dir) {
    SweepConfig cfg;
    bool have_geom = false, have_eps = false;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        if (trim(raw).empty()) continue;
        auto eq = raw.find('=');
        if (eq == std::string::npos) fail(line, trim(raw), "expected 'key = value'");
        std::string key = trim(raw.substr(0, eq));
        std::string val = trim(raw.substr(eq + 1));
        if (val.empty()) fail(line, key, "empty value");

        Expr* target = nullptr;
        if (key == "a1") target = &cfg.data.a1;
        else if (key == "a2") target = &cfg.data.a2;
        else if (key == "alpha") target = &cfg.data.alpha;
        else if (key == "F") target = &cfg.data.F;
        else if (key == "g_x") target = &cfg.data.g_x;
        else if (key == "g_z") target = &cfg.data.g_z;
        else if (key == "f_gamma") target = &cfg.data.f_gamma;
        else if (key == "drained_pressure") target = &cfg.data.p_drained;
        if (target) {
            try {
                *target = parse_expr(val);
            } catch (const ParseError& e) {
                fail(line, key, e.what(), e.offset());
            }
            continue;
        }
        if (key == "geometry") {
            std::filesystem::path p(val);
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            cfg.geometry_path = p.string();
            have_geom = true;
        } else if (key == "eps") {
            std::string list = val;
            for (char& c : list)
                if (c == ',') c = ' ';
            std::istringstream ls(list);
            for (std::string t; ls >> t;) cfg.eps.push_back(number(line, key, t));
            if (cfg.eps.empty()) fail(line, key, "empty eps list");
            for (std::size_t k = 0; k < cfg.eps.size(); ++k) {
                if (!(cfg.eps[k] > 0.0 && cfg.eps[k] <= 1.0)) fail(line, key, "eps values must lie in (0, 1]");
                if (k > 0 && !(cfg.eps[k] < cfg.eps[k - 1])) fail(line, key, "eps values must be strictly decreasing");
            }
            have_eps = true;
        } else if (key == "target_h") {
            cfg.target_h = number(line, key, val);
            if (!(cfg.target_h > 0.0)) fail(line, key, "must be positive");
        } else if (key == "refinements") {
            double r = number(line, key, val);
            if (r < 0 || r != std::floor(r) || r > 8) fail(line, key, "must be an integer in [0, 8]");
            cfg.refinements = static_cast<int>(r);
        } else if (key == "output") {
            std::filesystem::path p(val);
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            cfg.output_dir = p.string();
        } else if (key == "tol") {
            cfg.tol = number(line, key, val);
            if (!(cfg.tol > 0.0 && cfg.tol <= 1e-6)) fail(line, key, "must lie in (0, 1e-6]");
        } else if (key == "threads") {
            double t = number(line, key, val);
            if (t < 0 || t != std::floor(t)) fail(line, key, "must be a non-negative integer");
            cfg.threads = static_cast<unsigned>(t);
        } else {
            fail(line, key, "unknown key");
        }
    }
    if (!have_geom) fail(0, "geometry", "missing");
    if (!have_eps) fail(0, "eps", "missing (the eps list must be nonempty)");
    cfg.medium = load_geometry(cfg.geometry_path);
    return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    auto dir = std::filesystem::path(path).parent_path();
    return parse_sweep_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace fissure
