#include <lppi/csv.hpp>
#include <lppi/error.hpp>
#include <lppi/report.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lppi::report {
namespace {

using nlohmann::json;
using csv::format_double;

json number(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return v;
}

json names_of(const std::vector<Index>& idx, const std::vector<std::string>& names)
{
    json out = json::array();
    for (Index v : idx) out.push_back(names.at(static_cast<std::size_t>(v)));
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json summary_json(const ResidualSummary& s)
{
    json h = json::object();
    h["edges"] = json::array();
    for (Index k = 0; k < s.edges.size(); ++k) h["edges"].push_back(s.edges(k));
    h["counts"] = json::array();
    for (Index k = 0; k < s.counts.size(); ++k) h["counts"].push_back(s.counts(k));
    return {{"mean", s.mean},
            {"sd", s.sd},
            {"skewness", s.skewness},
            {"excess_kurtosis", s.excess_kurtosis},
            {"n", s.n},
            {"normality_suspect", s.normality_suspect},
            {"histogram", h}};
}

} // namespace

std::string path_json(const SolutionPath& path, const PathEvaluation* evaluation, const EvalConfig* eval_config)
{
    if (evaluation && evaluation->sizes.size() != path.records.size()) {
        throw ConfigError("path report: evaluation does not match the path");
    }
    json j;
    j["order"] = names_of(path.order, path.names);
    json sizes = json::array();
    for (std::size_t k = 0; k < path.records.size(); ++k) {
        const auto& rec = path.records[k];
        json s;
        s["size"] = rec.size;
        s["terms"] = names_of(rec.subset, path.names);
        if (evaluation) {
            const auto& m = evaluation->sizes[k];
            s["kl"] = number(m.kl);
            s["elpd"] = number(m.elpd.total);
            s["elpd_se"] = number(m.elpd.se);
        } else {
            s["kl"] = number(rec.kl);
            s["elpd"] = nullptr;
            s["elpd_se"] = nullptr;
        }
        sizes.push_back(s);
    }
    j["sizes"] = sizes;
    json cfg;
    cfg["mode"] = std::string(to_string(path.config.mode));
    cfg["clusters_search"] = path.config.clusters_search;
    cfg["clusters_search_used"] = path.clusters_used;
    cfg["clusters_eval"] = eval_config ? json(eval_config->clusters_eval) : json(nullptr);
    cfg["clusters_eval_used"] = evaluation ? json(evaluation->clusters_used) : json(nullptr);
    cfg["max_size"] = path.config.max_size;
    cfg["seed"] = path.config.seed;
    cfg["ridge"] = path.config.projection.ridge;
    j["config"] = cfg;
    j["failed"] = path.failed;
    if (path.failed) j["error"] = path.error;
    return dump(j);
}

StoredPath parse_path_json(const std::string& text)
{
    StoredPath out;
    try {
        const json j = json::parse(text);
        for (const auto& name : j.at("order")) out.order.push_back(name.get<std::string>());
        const auto& cfg = j.at("config");
        out.mode = parse_mode(cfg.at("mode").get<std::string>());
        out.clusters_search = cfg.at("clusters_search").get<Index>();
        if (cfg.contains("clusters_eval") && !cfg["clusters_eval"].is_null()) {
            out.clusters_eval = cfg["clusters_eval"].get<Index>();
        }
        out.seed = cfg.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw LoadError(std::string("path file: ") + e.what());
    }
    return out;
}

SolutionPath restore_path(const StoredPath& stored, const LatentReference& latent, const Dataset& data,
                          const ProjectionOptions& options)
{
    SolutionPath path;
    path.names = data.names;
    path.config.mode = stored.mode;
    path.config.clusters_search = stored.clusters_search;
    path.config.seed = stored.seed;
    path.config.projection = options;
    path.config.max_size = static_cast<Index>(stored.order.size());
    for (const auto& name : stored.order) {
        const auto it = std::find(data.names.begin(), data.names.end(), name);
        if (it == data.names.end()) throw AlignmentError("path variable '" + name + "' is not in the dataset");
        path.order.push_back(static_cast<Index>(it - data.names.begin()));
    }
    const DrawClusters clusters = path_clusters(latent, stored.clusters_search, stored.seed);
    path.clusters_used = clusters.size();
    std::vector<Index> subset;
    for (std::size_t k = 0; k <= path.order.size(); ++k) {
        if (k > 0) subset.push_back(path.order[k - 1]);
        PathRecord r;
        r.size = static_cast<Index>(subset.size());
        r.subset = subset;
        r.projection = project_submodel(latent, clusters, data, subset, stored.mode, options);
        r.kl = r.projection.weighted_kl;
        path.records.push_back(std::move(r));
    }
    return path;
}

std::string metrics_csv(const PathEvaluation& evaluation)
{
    std::ostringstream os;
    os << "size,kl,elpd,elpd_se\n";
    for (const auto& m : evaluation.sizes) {
        os << m.size << ',' << format_double(m.kl) << ',' << format_double(m.elpd.total) << ','
           << format_double(m.elpd.se) << '\n';
    }
    return os.str();
}

std::string metrics_json(const PathEvaluation& evaluation, const std::vector<std::string>& names,
                         Index suggested_size)
{
    json j;
    j["reference"] = {{"elpd", number(evaluation.reference.total)}, {"elpd_se", number(evaluation.reference.se)}};
    j["held_out"] = evaluation.held_out;
    j["clusters_eval_used"] = evaluation.clusters_used;
    j["suggested_size"] = suggested_size;
    json sizes = json::array();
    for (const auto& m : evaluation.sizes) {
        sizes.push_back({{"size", m.size},
                         {"terms", names_of(m.subset, names)},
                         {"kl", number(m.kl)},
                         {"elpd", number(m.elpd.total)},
                         {"elpd_se", number(m.elpd.se)},
                         {"elpd_diff", number(m.elpd_diff)},
                         {"elpd_diff_se", number(m.elpd_diff_se)}});
    }
    j["sizes"] = sizes;
    return dump(j);
}

std::string truth_json(const GroundTruth& truth, const ObservationModel& model)
{
    json j;
    j["beta"] = json::array();
    for (Index k = 0; k < truth.beta.size(); ++k) j["beta"].push_back(truth.beta(k));
    j["z"] = json::array();
    for (bool z : truth.z) j["z"].push_back(z ? 1 : 0);
    json aux = json::object();
    switch (model.family()) {
        case Family::gaussian: aux["sigma"] = truth.aux.sigma; break;
        case Family::ordinal: aux["thresholds"] = truth.aux.thresholds; break;
        case Family::weibull: aux["alpha"] = truth.aux.shape; break;
        default: break;
    }
    j["aux"] = aux;
    return dump(j);
}

std::string residual_summary_csv(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries)
{
    std::ostringstream os;
    os << "size,mean,sd,skewness,excess_kurtosis,normality_suspect\n";
    for (std::size_t k = 0; k < summaries.size(); ++k) {
        const auto& s = summaries[k];
        os << sizes[k] << ',' << format_double(s.mean) << ',' << format_double(s.sd) << ','
           << format_double(s.skewness) << ',' << format_double(s.excess_kurtosis) << ','
           << (s.normality_suspect ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string histogram_csv(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries)
{
    std::ostringstream os;
    os << "size,edge_low,edge_high,count\n";
    for (std::size_t k = 0; k < summaries.size(); ++k) {
        const auto& s = summaries[k];
        for (Index b = 0; b < s.counts.size(); ++b) {
            os << sizes[k] << ',' << format_double(s.edges(b)) << ',' << format_double(s.edges(b + 1)) << ','
               << s.counts(b) << '\n';
        }
    }
    return os.str();
}

std::string raw_residuals_csv(const std::vector<Index>& sizes, const std::vector<ProjectionResult>& projections)
{
    std::ostringstream os;
    os << "size,cluster,observation,residual,weight\n";
    for (std::size_t k = 0; k < projections.size(); ++k) {
        const auto& p = projections[k];
        for (Index c = 0; c < p.residuals.rows(); ++c) {
            for (Index i = 0; i < p.residuals.cols(); ++i) {
                os << sizes[k] << ',' << c + 1 << ',' << i + 1 << ',' << format_double(p.residuals(c, i)) << ','
                   << format_double(p.weights(c)) << '\n';
            }
        }
    }
    return os.str();
}

std::string kl_curve_csv(const std::vector<std::pair<Index, double>>& curve)
{
    std::ostringstream os;
    os << "size,kl\n";
    for (const auto& [size, kl] : curve) os << size << ',' << format_double(kl) << '\n';
    return os.str();
}

std::string diagnostics_json(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries,
                             const std::vector<std::pair<Index, double>>& curve)
{
    json j;
    json res = json::array();
    for (std::size_t k = 0; k < summaries.size(); ++k) {
        json s = summary_json(summaries[k]);
        s["size"] = sizes[k];
        res.push_back(s);
    }
    j["residuals"] = res;
    json kl = json::array();
    for (const auto& [size, v] : curve) kl.push_back({{"size", size}, {"kl", number(v)}});
    j["kl_curve"] = kl;
    return dump(j);
}

std::string inclusion_csv(const BootstrapResult& result, const std::vector<std::string>& names)
{
    std::ostringstream os;
    os << "variable,frequency\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
        os << names[j] << ',' << format_double(result.frequency(static_cast<Index>(j))) << '\n';
    }
    return os.str();
}

std::string bootstrap_json(const BootstrapResult& result, const std::vector<std::string>& names)
{
    json j;
    j["successes"] = result.successes;
    json reps = json::array();
    for (std::size_t b = 0; b < result.replicates.size(); ++b) {
        const auto& r = result.replicates[b];
        json e{{"replicate", b + 1}, {"ok", r.ok}};
        if (r.ok) {
            e["suggested_size"] = r.suggested_size;
            e["selected"] = names_of(r.selected, names);
        } else {
            e["error"] = r.error;
        }
        reps.push_back(e);
    }
    j["replicates"] = reps;
    json freq = json::object();
    for (std::size_t k = 0; k < names.size(); ++k) freq[names[k]] = result.frequency(static_cast<Index>(k));
    j["frequency"] = freq;
    return dump(j);
}

} // namespace lppi::report
