// erkit command line: batch runs, evaluation, and the incremental service.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "erkit/canonical.hpp"
#include "erkit/evaluation.hpp"
#include "erkit/pipeline.hpp"
#include "erkit/service.hpp"

namespace {

using namespace erkit;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void write_artifact(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open output path '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

int run_batch_command(const std::string& config_path, const std::string& out_path,
                      const std::string& report_path, std::int64_t threads_override) {
    RuntimeConfig cfg;
    try {
        cfg = load_runtime_config(config_path);
        if (cfg.mode != RunMode::Batch) {
            throw ConfigError("batch command requires mode = batch");
        }
        if (threads_override > 0) cfg.threads = static_cast<std::size_t>(threads_override);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        BatchResult result = run_batch(cfg);
        write_artifact(out_path, profiles_to_jsonl(result.profiles));
        if (!report_path.empty()) {
            write_artifact(report_path, result.report.to_json().dump(2) + "\n");
        }
    } catch (const Error& e) {
        std::cerr << "run error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

std::string read_file_or_throw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Predicted pairs from edges, profiles, partition clusters, or raw pair
// lines; selected by the fields on the first line.
std::set<std::pair<std::string, std::string>> load_predicted_pairs(const std::string& path) {
    std::string content = read_file_or_throw(path);
    std::istringstream sniff(content);
    std::string first_line;
    while (std::getline(sniff, first_line)) {
        if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();
        if (!first_line.empty()) break;
    }
    std::set<std::pair<std::string, std::string>> pairs;
    if (first_line.empty()) return pairs;

    Json probe = Json::parse(first_line, nullptr, false);
    if (probe.is_discarded() || !probe.is_object()) {
        throw ParseError(1, "predicted file is not JSONL");
    }

    auto add_group = [&pairs](const std::vector<std::string>& members) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                pairs.insert(ordered_pair(members[i], members[j]));
            }
        }
    };

    std::istringstream in(content);
    if (probe.contains("label")) {
        for (const auto& edge : edges_from_jsonl(in)) {
            if (edge.label == MatchLabel::Match) pairs.insert({edge.a, edge.b});
        }
    } else if (probe.contains("member_ids")) {
        for (const auto& profile : profiles_from_jsonl(in)) add_group(profile.member_ids);
    } else if (probe.contains("members")) {
        for (const auto& cluster : partition_from_jsonl(in).clusters) add_group(cluster);
    } else if (probe.contains("pair")) {
        GroundTruth as_truth = ground_truth_from_jsonl(in);
        pairs = as_truth.as_pairs();
    } else {
        throw ParseError(1, "cannot tell edges, profiles, clusters, or pairs apart");
    }
    return pairs;
}

ClusterPartition load_predicted_partition(const std::string& path) {
    std::string content = read_file_or_throw(path);
    std::istringstream sniff(content);
    std::string first_line;
    while (std::getline(sniff, first_line)) {
        if (!first_line.empty() && first_line.back() == '\r') first_line.pop_back();
        if (!first_line.empty()) break;
    }
    Json probe = Json::parse(first_line, nullptr, false);
    std::istringstream in(content);
    if (!probe.is_discarded() && probe.is_object() && probe.contains("member_ids")) {
        ClusterPartition partition;
        for (const auto& profile : profiles_from_jsonl(in)) {
            for (const auto& id : profile.member_ids) {
                if (!partition.universe.insert(id).second) {
                    throw ParseError("ref '" + id + "' appears in two profiles");
                }
            }
            partition.clusters.push_back(profile.member_ids);
        }
        return partition;
    }
    return partition_from_jsonl(in);
}

ClusterPartition truth_partition(const GroundTruth& truth) {
    if (!truth.cluster_labels) {
        throw ParseError("ari mode needs cluster-form truth ({\"ref\":...,\"label\":...})");
    }
    std::map<std::string, std::vector<std::string>> by_label;
    for (const auto& [ref, label] : *truth.cluster_labels) by_label[label].push_back(ref);
    ClusterPartition partition;
    for (auto& [label, members] : by_label) {
        std::sort(members.begin(), members.end());
        partition.universe.insert(members.begin(), members.end());
        partition.clusters.push_back(std::move(members));
    }
    std::sort(partition.clusters.begin(), partition.clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return partition;
}

int run_evaluate_command(const std::string& predicted_path, const std::string& truth_path,
                         const std::string& mode, std::int64_t total_refs,
                         const std::string& unknown_policy) {
    try {
        std::string truth_content = read_file_or_throw(truth_path);
        std::istringstream truth_in(truth_content);
        GroundTruth truth = ground_truth_from_jsonl(truth_in);

        Json out = Json::object();
        out["mode"] = mode;
        if (mode == "pairwise") {
            if (unknown_policy != "fp" && unknown_policy != "ignore") {
                throw ConfigError("--unknown-refs must be 'fp' or 'ignore'");
            }
            auto policy =
                unknown_policy == "fp" ? UnknownRefPolicy::CountAsFp : UnknownRefPolicy::Ignore;
            auto metrics = pairwise_metrics(load_predicted_pairs(predicted_path), truth, policy);
            out["precision"] = metrics.precision;
            out["recall"] = metrics.recall;
            out["f1"] = metrics.f1;
            out["tp"] = metrics.tp;
            out["fp"] = metrics.fp;
            out["fn"] = metrics.fn;
            out["unknown_ref_pairs"] = metrics.unknown_ref_pairs;
            out["unknown_ref_policy"] = unknown_policy;
        } else if (mode == "ari") {
            auto predicted = load_predicted_partition(predicted_path);
            out["ari"] = adjusted_rand_index(predicted, truth_partition(truth));
        } else if (mode == "blocking") {
            if (total_refs <= 0) {
                throw ConfigError("blocking mode needs --total-refs");
            }
            std::string content = read_file_or_throw(predicted_path);
            std::istringstream in(content);
            ComparisonSpace space;
            space.groups = groups_from_jsonl(in);
            space.stats.total_references = total_refs;
            space.stats.group_count = static_cast<std::int64_t>(space.groups.size());
            auto metrics = blocking_metrics(space, truth, total_refs);
            out["reduction_ratio"] = metrics.reduction_ratio;
            out["pair_completeness"] = metrics.pair_completeness;
            out["space_pairs"] = metrics.space_pairs;
            out["truth_pairs"] = metrics.truth_pairs;
        } else {
            throw ConfigError("mode must be pairwise, ari, or blocking");
        }
        std::cout << out.dump() << "\n";
    } catch (const Error& e) {
        std::cerr << "evaluate error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

int run_serve_command(const std::string& config_path, std::string listen) {
    RuntimeConfig cfg;
    try {
        cfg = load_runtime_config(config_path);
        if (cfg.mode != RunMode::Incremental) {
            throw ConfigError("serve command requires mode = incremental");
        }
        if (const char* env_store = std::getenv("ERKIT_STORE_PATH")) {
            cfg.store.backend = StoreBackend::File;
            cfg.store.path = env_store;
        }
        if (const char* env_listen = std::getenv("ERKIT_LISTEN_ADDRESS")) {
            listen = env_listen;
        }
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        auto [host, port] = parse_listen_address(listen);
        IngestService service(std::move(cfg));
        std::cerr << "serving on " << host << ":" << port << " (store version "
                  << service.pipeline().store_version() << ")\n";
        if (!service.serve(host, port)) {
            std::cerr << "serve error: cannot bind " << listen << "\n";
            return kExitRuntime;
        }
    } catch (const Error& e) {
        std::cerr << "serve error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"erkit: end-to-end entity resolution (batch jobs, evaluation, "
                 "and an incremental ingestion service)"};
    app.require_subcommand(1);

    auto* batch = app.add_subcommand("batch", "Run a batch resolution job");
    std::string batch_config;
    std::string batch_out = "-";
    std::string batch_report;
    std::int64_t batch_threads = 0;
    batch->add_option("--config", batch_config, "Runtime config JSON")->required();
    batch->add_option("--out", batch_out, "Profiles JSONL path ('-' for stdout)");
    batch->add_option("--report", batch_report, "Run report JSON path ('-' for stdout)");
    batch->add_option("--threads", batch_threads, "Matcher worker threads (overrides config)");

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    std::string eval_predicted;
    std::string eval_truth;
    std::string eval_mode = "pairwise";
    std::int64_t eval_total_refs = 0;
    std::string eval_unknown = "fp";
    evaluate->add_option("--predicted", eval_predicted,
                         "Predicted edges/profiles/clusters/pairs JSONL")
        ->required();
    evaluate->add_option("--truth", eval_truth, "Ground truth JSONL")->required();
    evaluate->add_option("--mode", eval_mode, "pairwise | ari | blocking");
    evaluate->add_option("--total-refs", eval_total_refs,
                         "Total reference count (blocking mode)");
    evaluate->add_option("--unknown-refs", eval_unknown,
                         "Pairs naming refs outside the truth: ignore | fp");

    auto* serve = app.add_subcommand("serve", "Run the incremental ingestion service");
    std::string serve_config;
    std::string serve_listen = "127.0.0.1:8080";
    serve->add_option("--config", serve_config, "Runtime config JSON (mode = incremental)")
        ->required();
    serve->add_option("--listen", serve_listen,
                      "host:port (env ERKIT_LISTEN_ADDRESS overrides; "
                      "ERKIT_STORE_PATH overrides the store path)");

    CLI11_PARSE(app, argc, argv);

    if (batch->parsed()) {
        return run_batch_command(batch_config, batch_out, batch_report, batch_threads);
    }
    if (evaluate->parsed()) {
        return run_evaluate_command(eval_predicted, eval_truth, eval_mode, eval_total_refs,
                                    eval_unknown);
    }
    return run_serve_command(serve_config, serve_listen);
}
