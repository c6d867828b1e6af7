#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "erkit/canonical.hpp"
#include "erkit/evaluation.hpp"
#include "erkit/matching.hpp"
#include "erkit/pipeline.hpp"
#include "erkit/text.hpp"
#include "erkit/types.hpp"

namespace py = pybind11;

namespace {

erkit::ClusterPartition partition_from_lists(const std::vector<std::vector<std::string>>& raw) {
    erkit::ClusterPartition partition;
    for (const auto& cluster : raw) {
        std::vector<std::string> members = cluster;
        std::sort(members.begin(), members.end());
        partition.universe.insert(members.begin(), members.end());
        partition.clusters.push_back(std::move(members));
    }
    std::sort(partition.clusters.begin(), partition.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return partition;
}

}  // namespace

PYBIND11_MODULE(_erkit, m) {
    m.doc() = "Native core of the erkit entity resolution toolkit";

    m.def("make_reference_id", &erkit::make_reference_id, py::arg("source_id"),
          py::arg("record_ordinal"));

    m.def("levenshtein_norm", &erkit::levenshtein_norm, py::arg("a"), py::arg("b"),
          "Normalized Levenshtein similarity in [0,1]");
    m.def("jaro_winkler", &erkit::jaro_winkler, py::arg("a"), py::arg("b"),
          "Jaro-Winkler similarity with the standard 0.1 prefix scale");
    m.def(
        "jaccard_tokens",
        [](const std::set<std::string>& a, const std::set<std::string>& b) {
            return erkit::jaccard_tokens(a, b);
        },
        py::arg("a"), py::arg("b"));
    m.def("numeric_closeness", &erkit::numeric_closeness, py::arg("a"), py::arg("b"));
    m.def("soundex", &erkit::text::soundex, py::arg("s"));

    m.def(
        "adjusted_rand_index",
        [](const std::vector<std::vector<std::string>>& a,
           const std::vector<std::vector<std::string>>& b) {
            return erkit::adjusted_rand_index(partition_from_lists(a), partition_from_lists(b));
        },
        py::arg("a"), py::arg("b"), "ARI between two partitions given as lists of clusters");

    m.def(
        "pairwise_metrics",
        [](const std::vector<std::pair<std::string, std::string>>& predicted,
           const std::vector<std::pair<std::string, std::string>>& truth) {
            std::set<std::pair<std::string, std::string>> predicted_set;
            for (const auto& p : predicted) predicted_set.insert(erkit::ordered_pair(p.first, p.second));
            erkit::GroundTruth gt;
            gt.match_pairs.emplace();
            for (const auto& p : truth) gt.match_pairs->insert(erkit::ordered_pair(p.first, p.second));
            auto metrics = erkit::pairwise_metrics(predicted_set, gt);
            py::dict out;
            out["precision"] = metrics.precision;
            out["recall"] = metrics.recall;
            out["f1"] = metrics.f1;
            out["tp"] = metrics.tp;
            out["fp"] = metrics.fp;
            out["fn"] = metrics.fn;
            return out;
        },
        py::arg("predicted"), py::arg("truth"));

    m.def(
        "run_batch",
        [](const std::string& config_path) {
            auto cfg = erkit::load_runtime_config(config_path);
            auto result = erkit::run_batch(cfg);
            py::dict out;
            out["profiles_jsonl"] = erkit::profiles_to_jsonl(result.profiles);
            out["report_json"] = result.report.to_json().dump();
            return out;
        },
        py::arg("config_path"), "Run a batch job; returns profiles JSONL and the run report");

    // Translators run newest-first, so subclasses go after the base.
    py::register_exception<erkit::Error>(m, "ErkitError", PyExc_RuntimeError);
    py::register_exception<erkit::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<erkit::InvalidArgumentError>(m, "InvalidArgumentError",
                                                        PyExc_ValueError);

#ifdef ERKIT_VERSION
    m.attr("__version__") = ERKIT_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
