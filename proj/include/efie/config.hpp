#pragma once

#include "pair_engine.hpp"
#include "solver.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace efie {

// ----------------------------------------------------------------------------
// Flat key=value run configuration. Lines are `dotted.key = value`; `#` starts
// a comment; later assignments (e.g. command-line overrides) win.
// ----------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    std::map<std::string, std::string> values;

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    void parse_line(const std::string& raw, int lineno) {
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) return;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key");
        values[key] = value;
    }

    void parse(std::istream& in) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) parse_line(line, ++lineno);
    }

    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        Config c;
        c.parse(in);
        return c;
    }

    static Config from_string(const std::string& text) {
        std::istringstream in(text);
        Config c;
        c.parse(in);
        return c;
    }

    void set(const std::string& key, const std::string& value) {
        values[trim(key)] = trim(value);
    }

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        const auto it = values.find(key);
        return it == values.end() ? dflt : it->second;
    }

    double get_double(const std::string& key, double dflt) const {
        const auto it = values.find(key);
        if (it == values.end()) return dflt;
        try {
            size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size())
                throw ConfigError("config key " + key + ": bad number '" +
                                  it->second + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key " + key + ": bad number '" +
                              it->second + "'");
        }
    }

    int get_int(const std::string& key, int dflt) const {
        const auto it = values.find(key);
        if (it == values.end()) return dflt;
        try {
            size_t used = 0;
            const int v = std::stoi(it->second, &used);
            if (used != it->second.size())
                throw ConfigError("config key " + key + ": bad integer '" +
                                  it->second + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key " + key + ": bad integer '" +
                              it->second + "'");
        }
    }
};

// Typed views of the recognized keys, with library defaults for the rest.

inline QuadConfig quadrature_config(const Config& c) {
    QuadConfig q;
    q.outer_degree = c.get_int("quadrature.outer_degree", q.outer_degree);
    q.inner_degree = c.get_int("quadrature.inner_degree", q.inner_degree);
    q.separated_degree =
        c.get_int("quadrature.separated_degree", q.separated_degree);
    q.near_threshold =
        c.get_double("quadrature.near_threshold", q.near_threshold);
    q.clustered_nodes =
        c.get_int("quadrature.clustered_nodes", q.clustered_nodes);
    q.line_nodes = c.get_int("quadrature.line_nodes", q.line_nodes);
    return q;
}

inline GmresOptions solver_options(const Config& c) {
    GmresOptions o;
    o.tol = c.get_double("solver.tol", o.tol);
    o.max_iter = c.get_int("solver.max_iter", o.max_iter);
    o.restart = c.get_int("solver.restart", o.restart);
    return o;
}

inline InnerSolveOptions inner_solve_options(const Config& c) {
    InnerSolveOptions o;
    o.tol = c.get_double("solver.inner_tol", o.tol);
    o.max_iter = c.get_int("solver.max_iter", o.max_iter);
    return o;
}

// Divergence-weight policy: c = c_scale / k^2 keeps the two contributions of
// the div-augmented forms balanced across frequency.
inline double divergence_weight(const Config& c, double k) {
    const double scale = c.get_double("c_scale", 1.0);
    return scale / (k * k);
}

} // namespace efie
