#pragma once
#include <map>
#include <string>

#include <json.hpp>

#include "vortexlab/config.hpp"
#include "vortexlab/ensemble.hpp"
#include "vortexlab/estimators.hpp"

namespace vlab {

// One row of scalar functionals at a checkpoint. Everything downstream
// (NDJSON streams, sweep summaries) is a pure function of these rows.
struct FunctionalReport {
    double time = 0.0;
    int replica = 0;
    double entropy_H = 0.0;
    double fisher_I = 0.0;
    double partial_entropy_Ht = 0.0;
    double partial_fisher_It = 0.0;
    double moment_Mk = 0.0;
    std::map<std::string, double> lp_norms;   // "1", "2", "4", "inf"
    double min_pair_dist = 0.0;
    std::map<std::string, double> neg_moment; // keyed by gamma
    std::map<std::string, double> meta;       // bandwidths, excluded masses
};

nlohmann::json report_to_json(const FunctionalReport& r);
FunctionalReport report_from_json(const nlohmann::json& j);

// Whole-line append; rows come out exactly as dumped (sorted keys,
// shortest float form), so identical reports give identical bytes.
void append_ndjson(const std::string& path, const nlohmann::json& row);

// Pooled position KDE for H/I/norms, circulation-resolved partials,
// moment of order cfg.moment_order_k, min pair distance, and the
// negative-distance moments for the listed gammas.
FunctionalReport compute_functional_report(const VortexEnsemble& e,
                                           const SimConfig& cfg,
                                           const KdeSpec& kde_spec,
                                           const std::vector<double>& gammas = {1.0, 1.5},
                                           long long max_pairs = 100000);

} // namespace vlab
