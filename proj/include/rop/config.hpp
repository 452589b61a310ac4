// Flat key = value run configuration. The schema is intentionally small and
// diff-friendly; every key is validated by name and unknown keys are errors.
// `#` starts a comment; lists are comma-separated, optionally bracketed.
#ifndef ROP_CONFIG_HPP
#define ROP_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rop/experiments.hpp"
#include "rop/model.hpp"

namespace rop {

struct RunConfig {
    Problem problem = Problem::P1;
    FadingSpec fading;
    bool has_seed = false;  // sweeps refuse to run on an implicit seed
    SweepAxis x_axis = SweepAxis::Ppk;
    bool has_x_axis = false;
    std::vector<double> x_values;
    SystemParams params;
    int alpha_points = 101;
    double alpha_max = 1.0 - 1e-9;
    bool oracle_check = false;
    bool timing = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_number(std::string_view v, const std::string& key) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ValidationError("config key '" + key + "': not a number: '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ValidationError("config key '" + key + "': expected true or false");
}

inline std::vector<double> parse_list(std::string_view v, const std::string& key) {
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') throw ValidationError("config key '" + key + "': unterminated list");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (item.empty()) throw ValidationError("config key '" + key + "': empty list element");
        out.push_back(parse_number(item, key));
        if (comma == std::string_view::npos) break;
        v = v.substr(comma + 1);
    }
    return out;
}

inline Problem parse_problem(std::string_view v, const std::string& key) {
    if (v == "p1") return Problem::P1;
    if (v == "p2") return Problem::P2;
    if (v == "p3") return Problem::P3;
    if (v == "p4") return Problem::P4;
    if (v == "p5") return Problem::P5;
    if (v == "p6") return Problem::P6;
    throw ValidationError("config key '" + key + "': expected one of p1..p6");
}

inline SweepAxis parse_axis(std::string_view v, const std::string& key) {
    if (v == "p_pk") return SweepAxis::Ppk;
    if (v == "p_av") return SweepAxis::Pav;
    if (v == "eps_out") return SweepAxis::EpsOut;
    throw ValidationError("config key '" + key + "': expected p_pk, p_av or eps_out");
}

inline std::string_view unquote(std::string_view v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

}  // namespace detail

// Default x axis for a problem: the budget it sweeps in the figure suite.
inline SweepAxis default_axis(Problem p) {
    switch (p) {
        case Problem::P1:
        case Problem::P2:
        case Problem::P5: return SweepAxis::Ppk;
        default: return SweepAxis::Pav;
    }
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key{detail::trim(line.substr(0, eq))};
        const std::string_view value = detail::unquote(detail::trim(line.substr(eq + 1)));
        if (value.empty())
            throw ValidationError("config key '" + key + "': missing value");

        if (key == "problem") {
            cfg.problem = detail::parse_problem(value, key);
        } else if (key == "seed") {
            const double v = detail::parse_number(value, key);
            if (!(v >= 0.0) || v != std::floor(v))
                throw ValidationError("config key 'seed': expected a nonnegative integer");
            cfg.fading.seed = static_cast<std::uint64_t>(v);
            cfg.has_seed = true;
        } else if (key == "n") {
            const double v = detail::parse_number(value, key);
            if (!(v >= 1.0) || v != std::floor(v))
                throw ValidationError("config key 'n': expected an integer >= 1");
            cfg.fading.n_realizations = static_cast<int>(v);
        } else if (key == "x_axis") {
            cfg.x_axis = detail::parse_axis(value, key);
            cfg.has_x_axis = true;
        } else if (key == "x_values") {
            cfg.x_values = detail::parse_list(value, key);
        } else if (key == "sigma_pr_sq") {
            cfg.params.sigma_pr_sq = detail::parse_number(value, key);
        } else if (key == "sigma_sr_sq") {
            cfg.params.sigma_sr_sq = detail::parse_number(value, key);
        } else if (key == "eta_st") {
            cfg.params.eta_st = detail::parse_number(value, key);
        } else if (key == "eps_st") {
            cfg.params.eps_st = detail::parse_number(value, key);
        } else if (key == "eps_b") {
            cfg.params.eps_b = detail::parse_number(value, key);
        } else if (key == "u") {
            cfg.params.u = detail::parse_number(value, key);
        } else if (key == "gamma") {
            cfg.params.gamma = detail::parse_number(value, key);
        } else if (key == "p_pk") {
            cfg.params.p_pk = detail::parse_number(value, key);
        } else if (key == "p_av") {
            cfg.params.p_av = detail::parse_number(value, key);
        } else if (key == "eps_out") {
            cfg.params.eps_out = detail::parse_number(value, key);
        } else if (key == "alpha_points") {
            const double v = detail::parse_number(value, key);
            if (!(v >= 2.0) || v != std::floor(v))
                throw ValidationError("config key 'alpha_points': expected an integer >= 2");
            cfg.alpha_points = static_cast<int>(v);
        } else if (key == "alpha_max") {
            cfg.alpha_max = detail::parse_number(value, key);
            if (!(cfg.alpha_max > 0.0 && cfg.alpha_max <= 1.0))
                throw ValidationError("config key 'alpha_max': expected a value in (0, 1]");
        } else if (key == "oracle_check") {
            cfg.oracle_check = detail::parse_bool(value, key);
        } else if (key == "timing") {
            cfg.timing = detail::parse_bool(value, key);
        } else {
            throw ValidationError("unknown config key '" + key + "'");
        }
    }
    try {
        cfg.params.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!cfg.has_x_axis) cfg.x_axis = default_axis(cfg.problem);
    for (std::size_t i = 1; i < cfg.x_values.size(); ++i)
        if (!(cfg.x_values[i] > cfg.x_values[i - 1]))
            throw ValidationError("config key 'x_values': values must be strictly increasing");
    return cfg;
}

inline SweepSpec to_sweep_spec(const RunConfig& cfg) {
    SweepSpec spec;
    spec.problem = cfg.problem;
    spec.x_axis = cfg.x_axis;
    spec.x_values = cfg.x_values;
    spec.params = cfg.params;
    spec.alpha_points = cfg.alpha_points;
    spec.alpha_max = cfg.alpha_max;
    return spec;
}

}  // namespace rop

#endif  // ROP_CONFIG_HPP
