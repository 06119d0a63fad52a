#include "dhym/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

using nlohmann::json;

double number_at(const json& node, const char* key) {
    if (!node.contains(key)) throw ArgumentError(std::string("missing key '") + key + "'");
    const json& v = node.at(key);
    if (!v.is_number()) throw ArgumentError(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& node, const char* key, double fallback) {
    return node.contains(key) ? number_at(node, key) : fallback;
}

std::vector<double> number_list(const json& node, const char* key) {
    const json& v = node.at(key);
    if (!v.is_array()) throw ArgumentError(std::string("key '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& item : v) {
        if (!item.is_number()) throw ArgumentError(std::string("key '") + key + "' must be an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

int integer_at(const json& node, const char* key, int fallback) {
    if (!node.contains(key)) return fallback;
    const json& v = node.at(key);
    if (!v.is_number_integer()) throw ArgumentError(std::string("key '") + key + "' must be an integer");
    return v.get<int>();
}

TorusProblem parse_torus(const json& node, const PhaseParams& phase) {
    if (!node.is_object()) throw ArgumentError("'torus' must be an object");
    TorusProblem problem = diagonal_model(phase, integer_at(node, "grid", 16));
    if (node.contains("base")) {
        const json& base = node.at("base");
        if (base.is_string()) {
            if (base.get<std::string>() != "diagonal") throw ArgumentError("'base' must be \"diagonal\" or an object");
        } else if (base.is_object()) {
            problem.base11 = number_at(base, "h11");
            problem.base22 = number_at(base, "h22");
            problem.base12 = {number_or(base, "re", 0.0), number_or(base, "im", 0.0)};
        } else {
            throw ArgumentError("'base' must be \"diagonal\" or an object");
        }
    }
    if (node.contains("frozen")) {
        const json& frozen = node.at("frozen");
        if (frozen.is_string()) {
            if (frozen.get<std::string>() != "diagonal") throw ArgumentError("'frozen' must be \"diagonal\" or an array");
        } else {
            problem.frozen = number_list(node, "frozen");
            if (static_cast<int>(problem.frozen.size()) != phase.n - 2) {
                throw ArgumentError("'frozen' must list " + std::to_string(phase.n - 2) + " values");
            }
        }
    }
    if (node.contains("potential")) {
        const json& modes = node.at("potential");
        if (!modes.is_array()) throw ArgumentError("'potential' must be an array");
        for (const auto& m : modes) {
            if (!m.is_object()) throw ArgumentError("potential entries must be objects");
            PotentialMode mode;
            mode.amplitude = number_at(m, "amplitude");
            mode.phase = number_or(m, "phase", 0.0);
            if (!m.contains("wave") || !m.at("wave").is_array() || m.at("wave").size() != 4) {
                throw ArgumentError("potential 'wave' must be an array of 4 integers");
            }
            for (std::size_t k = 0; k < 4; ++k) {
                const json& w = m.at("wave").at(k);
                if (!w.is_number_integer()) throw ArgumentError("potential 'wave' must be an array of 4 integers");
                mode.wave[k] = w.get<int>();
            }
            problem.potential.push_back(mode);
        }
    }
    problem.volume = number_or(node, "volume", 1.0);
    problem.tolerance = number_or(node, "tolerance", 1e-9);
    return problem;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ArgumentError("configuration must be a JSON object");
    RunConfig config;
    const int dimension = integer_at(root, "dimension", 0);
    config.phase = make_phase(dimension, number_at(root, "theta_hat"));
    if (root.contains("intersection_numbers")) {
        IntersectionNumbers omega{number_list(root, "intersection_numbers")};
        validate_omega(omega, config.phase);
        config.omega = omega;
    }
    if (root.contains("ell")) config.ell = number_at(root, "ell");
    if (root.contains("seed")) {
        const json& seed = root.at("seed");
        if (!seed.is_number_unsigned()) throw ArgumentError("'seed' must be a non-negative integer");
        config.seed = seed.get<std::uint64_t>();
    }
    config.samples = integer_at(root, "samples", config.samples);
    if (config.samples < 2) throw ArgumentError("'samples' must be at least 2");
    if (root.contains("torus")) config.torus = parse_torus(root.at("torus"), config.phase);
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

IntersectionNumbers config_omega(const RunConfig& config) {
    if (config.omega) return *config.omega;
    if (config.torus) return compute_intersection_numbers(*config.torus);
    throw ArgumentError("configuration needs 'intersection_numbers' or a 'torus' block");
}

}  // namespace dhym
