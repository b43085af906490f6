#include "vortexlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vortexlab/errors.hpp"
#include "vortexlab/textio.hpp"

namespace vlab {

// ---------------------------------------------------------------- textio

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double_strict(const std::string& s, double& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_i64_strict(const std::string& s, long long& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_u64_strict(const std::string& s, unsigned long long& out) {
    if (s.empty() || s[0] == '-') return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// ------------------------------------------------------------- SimConfig

void SimConfig::validate() const {
    if (n_particles < 2) throw SimError("n_particles must be >= 2");
    if (!(sigma >= 0.0)) throw SimError("sigma must be >= 0");
    if (!(moment_order_k > 0.0 && moment_order_k <= 1.0))
        throw SimError("moment_order_k must lie in (0, 1]");
    if (!(circulation_bound_a > 0.0))
        throw SimError("circulation_bound_a must be > 0");
    if (!(dt > 0.0)) throw SimError("dt must be > 0");
    if (!(t_end >= 0.0)) throw SimError("t_end must be >= 0");
    if (!(epsilon >= 0.0)) throw SimError("epsilon must be >= 0");
    for (size_t i = 0; i < save_times.size(); ++i) {
        if (save_times[i] < 0.0 || save_times[i] > t_end)
            throw SimError("save_times must lie within [0, t_end]");
        if (i > 0 && !(save_times[i] > save_times[i - 1]))
            throw SimError("save_times must be strictly increasing");
    }
}

// ------------------------------------------------------------- ConfigMap

ConfigMap ConfigMap::parse_text(const std::string& text,
                                std::vector<ConfigIssue>& issues) {
    ConfigMap m;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (size_t h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            issues.push_back({lineno, "", "expected 'key = value', got: " + trim(raw)});
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            issues.push_back({lineno, "", "missing key before '='"});
            continue;
        }
        if (m.entries_.count(key)) {
            issues.push_back({lineno, key, "duplicate key '" + key + "' (first on line " +
                                               std::to_string(m.entries_[key].line) + ")"});
            continue;
        }
        m.entries_[key] = {lineno, value};
    }
    return m;
}

ConfigMap ConfigMap::parse_file(const std::string& path,
                                std::vector<ConfigIssue>& issues) {
    std::ifstream in(path);
    if (!in) {
        issues.push_back({0, "", "cannot open config file: " + path});
        return ConfigMap{};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), issues);
}

void ConfigMap::set_override(const std::string& key, const std::string& value) {
    entries_[key] = {0, value};
}

bool ConfigMap::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

int ConfigMap::line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

std::optional<std::string> ConfigMap::take_string(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string v = it->second.value;
    entries_.erase(it);
    return v;
}

std::optional<double> ConfigMap::take_double(const std::string& key,
                                             std::vector<ConfigIssue>& issues) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    int line = it->second.line;
    std::string v = it->second.value;
    entries_.erase(it);
    double d;
    if (!parse_double_strict(v, d)) {
        issues.push_back({line, key, "'" + key + "' expects a real number, got '" + v + "'"});
        return std::nullopt;
    }
    return d;
}

std::optional<std::int64_t> ConfigMap::take_int(const std::string& key,
                                                std::vector<ConfigIssue>& issues) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    int line = it->second.line;
    std::string v = it->second.value;
    entries_.erase(it);
    long long d;
    if (!parse_i64_strict(v, d)) {
        issues.push_back({line, key, "'" + key + "' expects an integer, got '" + v + "'"});
        return std::nullopt;
    }
    return d;
}

std::optional<std::uint64_t> ConfigMap::take_u64(const std::string& key,
                                                 std::vector<ConfigIssue>& issues) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    int line = it->second.line;
    std::string v = it->second.value;
    entries_.erase(it);
    unsigned long long d;
    if (!parse_u64_strict(v, d)) {
        issues.push_back({line, key, "'" + key + "' expects a non-negative integer, got '" + v + "'"});
        return std::nullopt;
    }
    return d;
}

std::optional<std::vector<double>> ConfigMap::take_double_list(
    const std::string& key, std::vector<ConfigIssue>& issues) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    int line = it->second.line;
    std::string v = it->second.value;
    entries_.erase(it);
    std::vector<double> out;
    std::string tok;
    for (char c : v + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!tok.empty()) {
                double d;
                if (!parse_double_strict(tok, d)) {
                    issues.push_back({line, key, "'" + key + "' has a non-numeric entry '" + tok + "'"});
                    return std::nullopt;
                }
                out.push_back(d);
                tok.clear();
            }
        } else {
            tok.push_back(c);
        }
    }
    return out;
}

void ConfigMap::finish(std::vector<ConfigIssue>& issues) {
    for (const auto& [key, e] : entries_) {
        issues.push_back({e.line, key, "unknown key '" + key + "'"});
    }
    entries_.clear();
}

// ------------------------------------------------------ resolve_sim_config

ResolvedSim resolve_sim_config(ConfigMap& map, std::vector<ConfigIssue>& issues) {
    ResolvedSim r;
    SimConfig& c = r.sim;
    auto echo = [&r](const std::string& k, const std::string& v, const std::string& note = "") {
        r.echo.push_back(k + " = " + v + (note.empty() ? "" : "  (" + note + ")"));
    };
    auto fail = [&issues, &map](const std::string& key, const std::string& msg) {
        issues.push_back({map.line_of(key), key, msg});
    };

    if (auto v = map.take_int("n_particles", issues)) {
        if (*v < 2) { fail("n_particles", "n_particles must be >= 2, got " + std::to_string(*v)); }
        else c.n_particles = int(*v);
    }
    echo("n_particles", std::to_string(c.n_particles));

    int sigma_line = map.line_of("sigma");
    auto sigma_v = map.take_double("sigma", issues);
    int nu_line = map.line_of("nu");
    auto nu_v = map.take_double("nu", issues);
    if (sigma_v) {
        if (*sigma_v < 0.0)
            issues.push_back({sigma_line, "sigma", "sigma must be >= 0"});
        else
            c.sigma = *sigma_v;
    } else if (nu_v) {
        if (*nu_v < 0.0)
            issues.push_back({nu_line, "nu", "nu must be >= 0"});
        else
            c.sigma = std::sqrt(2.0 * *nu_v);
    }
    if (sigma_v && nu_v) {
        double expect = 0.5 * *sigma_v * *sigma_v;
        if (std::abs(*nu_v - expect) > 1e-12 * std::max(1.0, expect)) {
            issues.push_back({nu_line, "nu",
                              "nu must equal sigma^2/2 = " + format_double(expect) +
                                  ", got " + format_double(*nu_v)});
        }
    }
    echo("sigma", format_double(c.sigma));
    echo("nu", format_double(c.nu()), "derived: sigma^2/2");

    if (auto v = map.take_double("moment_order_k", issues)) {
        if (!(*v > 0.0 && *v <= 1.0))
            fail("moment_order_k", "moment_order_k must lie in (0, 1], got " + format_double(*v));
        else
            c.moment_order_k = *v;
    }
    echo("moment_order_k", format_double(c.moment_order_k));

    if (auto v = map.take_double("circulation_bound_a", issues)) {
        if (!(*v > 0.0))
            fail("circulation_bound_a", "circulation_bound_a must be > 0");
        else
            c.circulation_bound_a = *v;
    }
    echo("circulation_bound_a", format_double(c.circulation_bound_a));

    if (auto v = map.take_double("dt", issues)) {
        if (!(*v > 0.0)) fail("dt", "dt must be > 0");
        else c.dt = *v;
    }
    echo("dt", format_double(c.dt));

    if (auto v = map.take_double("t_end", issues)) {
        if (!(*v >= 0.0)) fail("t_end", "t_end must be >= 0");
        else c.t_end = *v;
    }
    echo("t_end", format_double(c.t_end));

    bool eps_given = map.has("epsilon");
    if (auto v = map.take_double("epsilon", issues)) {
        if (!(*v >= 0.0)) fail("epsilon", "epsilon must be >= 0");
        else c.epsilon = *v;
    }
    if (!eps_given) {
        c.epsilon = 10.0 * std::sqrt(c.dt) * c.sigma;
        echo("epsilon", format_double(c.epsilon), "default: 10*sqrt(dt)*sigma");
    } else {
        echo("epsilon", format_double(c.epsilon));
    }

    if (auto v = map.take_u64("seed", issues)) c.seed = *v;
    echo("seed", std::to_string(c.seed));

    int st_line = map.line_of("save_times");
    if (auto v = map.take_double_list("save_times", issues)) {
        bool ok = true;
        for (size_t i = 0; i < v->size() && ok; ++i) {
            if ((*v)[i] < 0.0 || (*v)[i] > c.t_end) {
                issues.push_back({st_line, "save_times",
                                  "save_times entries must lie in [0, t_end]"});
                ok = false;
            }
            if (i > 0 && !((*v)[i] > (*v)[i - 1])) {
                issues.push_back({st_line, "save_times",
                                  "save_times must be strictly increasing"});
                ok = false;
            }
        }
        if (ok) c.save_times = *v;
    }
    if (c.save_times.empty() && c.t_end > 0.0) {
        c.save_times = {c.t_end};
        echo("save_times", format_double(c.t_end), "default: t_end");
    } else {
        std::string joined;
        for (size_t i = 0; i < c.save_times.size(); ++i)
            joined += (i ? "," : "") + format_double(c.save_times[i]);
        echo("save_times", joined);
    }
    return r;
}

std::string format_issues(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& is : issues) {
        out += "config error";
        if (is.line > 0) out += " (line " + std::to_string(is.line) + ")";
        out += ": " + is.message + "\n";
    }
    return out;
}

} // namespace vlab
