#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlab {

// Static parameters of one particle-system run. nu is not stored: the
// model ties it to the noise intensity as nu = sigma^2/2, so it is exposed
// as a derived value and can never drift out of sync.
struct SimConfig {
    int n_particles = 1000;          // >= 2
    double sigma = 0.2;              // >= 0, Brownian intensity
    double moment_order_k = 1.0;     // in (0, 1]
    double circulation_bound_a = 1.0; // > 0, |M_i| <= A
    double dt = 1e-3;                // > 0
    double t_end = 1.0;              // >= 0
    double epsilon = 0.0;            // >= 0, kernel regularization (0 = exact)
    std::uint64_t seed = 0;
    std::vector<double> save_times;  // strictly increasing, within [0, t_end]

    double nu() const { return 0.5 * sigma * sigma; }

    // Throws SimError with the first violated constraint.
    void validate() const;
};

struct ConfigIssue {
    int line = 0;            // 1-based; 0 when not tied to a line
    std::string key;
    std::string message;
};

// Flat "key = value" file: one pair per line, '#' comments, blank lines
// skipped. Typed getters consume keys; whatever is left when finish() runs
// is reported as an unknown key. All problems carry line context.
class ConfigMap {
  public:
    static ConfigMap parse_text(const std::string& text,
                                std::vector<ConfigIssue>& issues);
    static ConfigMap parse_file(const std::string& path,
                                std::vector<ConfigIssue>& issues);

    // CLI-style override "key=value"; replaces any file value.
    void set_override(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;

    std::optional<std::string> take_string(const std::string& key);
    std::optional<double> take_double(const std::string& key,
                                      std::vector<ConfigIssue>& issues);
    std::optional<std::int64_t> take_int(const std::string& key,
                                         std::vector<ConfigIssue>& issues);
    std::optional<std::uint64_t> take_u64(const std::string& key,
                                          std::vector<ConfigIssue>& issues);
    // comma- or space-separated list of reals
    std::optional<std::vector<double>> take_double_list(
        const std::string& key, std::vector<ConfigIssue>& issues);

    int line_of(const std::string& key) const;

    // Flags every unconsumed key as unknown.
    void finish(std::vector<ConfigIssue>& issues);

  private:
    struct Entry {
        int line = 0;
        std::string value;
    };
    std::map<std::string, Entry> entries_;
};

struct ResolvedSim {
    SimConfig sim;
    // human-readable "key = value" lines, including applied defaults
    std::vector<std::string> echo;
};

// Consumes the SimConfig keys from `map`, applying defaults and the
// documented derivations (nu from sigma, epsilon from dt and sigma).
// Constraint violations land in `issues` with the offending line.
ResolvedSim resolve_sim_config(ConfigMap& map, std::vector<ConfigIssue>& issues);

std::string format_issues(const std::vector<ConfigIssue>& issues);

} // namespace vlab
