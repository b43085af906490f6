#include "vortexlab/report.hpp"

#include <fstream>
#include <limits>

#include "vortexlab/errors.hpp"
#include "vortexlab/textio.hpp"

namespace vlab {

nlohmann::json report_to_json(const FunctionalReport& r) {
    nlohmann::json j;
    j["time"] = r.time;
    j["replica"] = r.replica;
    j["entropy_H"] = r.entropy_H;
    j["fisher_I"] = r.fisher_I;
    j["partial_entropy_Ht"] = r.partial_entropy_Ht;
    j["partial_fisher_It"] = r.partial_fisher_It;
    j["moment_Mk"] = r.moment_Mk;
    j["lp_norms"] = r.lp_norms;
    j["min_pair_dist"] = r.min_pair_dist;
    j["neg_moment"] = r.neg_moment;
    j["meta"] = r.meta;
    return j;
}

FunctionalReport report_from_json(const nlohmann::json& j) {
    FunctionalReport r;
    r.time = j.at("time").get<double>();
    r.replica = j.at("replica").get<int>();
    r.entropy_H = j.at("entropy_H").get<double>();
    r.fisher_I = j.at("fisher_I").get<double>();
    r.partial_entropy_Ht = j.at("partial_entropy_Ht").get<double>();
    r.partial_fisher_It = j.at("partial_fisher_It").get<double>();
    r.moment_Mk = j.at("moment_Mk").get<double>();
    r.lp_norms = j.at("lp_norms").get<std::map<std::string, double>>();
    r.min_pair_dist = j.at("min_pair_dist").get<double>();
    r.neg_moment = j.at("neg_moment").get<std::map<std::string, double>>();
    r.meta = j.at("meta").get<std::map<std::string, double>>();
    return r;
}

void append_ndjson(const std::string& path, const nlohmann::json& row) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw SimError("cannot append to " + path);
    out << row.dump() << "\n";
    if (!out) throw SimError("short write on " + path);
}

FunctionalReport compute_functional_report(const VortexEnsemble& e,
                                           const SimConfig& cfg,
                                           const KdeSpec& kde_spec,
                                           const std::vector<double>& gammas,
                                           long long max_pairs) {
    FunctionalReport r;
    r.time = e.time;

    // Position-law functionals use uniform weights; the signed circulation
    // weighting belongs to the vorticity reconstruction, not to H or I.
    DensityGrid g = kde(e.positions, nullptr, kde_spec);
    EntropyResult he = entropy_h(g);
    FisherResult fe = fisher_i(g);
    r.entropy_H = he.value;
    r.fisher_I = fe.value;
    r.lp_norms["1"] = lp_norm(g, 1.0);
    r.lp_norms["2"] = lp_norm(g, 2.0);
    r.lp_norms["4"] = lp_norm(g, 4.0);
    r.lp_norms["inf"] = lp_norm(g, std::numeric_limits<double>::infinity());
    r.meta["kde_bandwidth"] = g.hx;
    r.meta["entropy_floored_mass"] = he.floored_mass;
    r.meta["fisher_excluded_mass"] = fe.excluded_mass;

    PartialFunctionals part = partial_functionals(e, kde_spec);
    r.partial_entropy_Ht = part.entropy;
    r.partial_fisher_It = part.fisher;
    r.meta["partial_excluded_weight"] = part.excluded_weight;

    r.moment_Mk = moment_mk(e, cfg.moment_order_k);
    r.min_pair_dist = min_pair_distance(e);

    for (double gamma : gammas) {
        NegMomentResult nm = neg_distance_moment(e, gamma, max_pairs);
        std::string key = format_double(gamma);
        r.neg_moment[key] = nm.value;
        r.meta["neg_moment_se_" + key] = nm.std_error;
        r.meta["neg_moment_excluded_" + key] = double(nm.coincident_excluded);
    }
    return r;
}

} // namespace vlab
