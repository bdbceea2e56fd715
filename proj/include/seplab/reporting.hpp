// reporting.hpp — machine-readable reports and run manifests.
//
// JSON uses ordered objects with a stable field layout; CSV columns are
// documented in docs/reference.md. Reports carry no timestamps, so reruns
// with the same configuration are byte-identical. The manifest (written next
// to each output) records the resolved configuration, seeds, input digests
// and wall-clock duration; it is the one file that differs across reruns.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seplab/attacks.hpp"
#include "seplab/core.hpp"
#include "seplab/lipschitz.hpp"
#include "seplab/separation.hpp"
#include "seplab/training.hpp"

namespace seplab {

using Json = nlohmann::ordered_json;

inline Json to_json(const SeparationReport& report, bool with_records = true) {
    Json j;
    j["mode"] = mode_name(report.mode);
    j["metric"] = metric_name(report.metric);
    if (report.valid_count() > 0) {
        j["min"] = report.min;
        j["mean"] = report.mean;
    } else {
        j["min"] = nullptr;
        j["mean"] = nullptr;
    }
    j["n"] = report.valid_count();
    if (with_records) {
        Json records = Json::array();
        for (const auto& r : report.records) {
            Json rec;
            rec["query_index"] = r.query_index;
            rec["query_label"] = r.query_label;
            rec["valid"] = r.valid;
            if (r.valid) {
                rec["nn_index"] = r.nn_index;
                rec["nn_label"] = r.nn_label;
                rec["distance"] = r.distance;
            }
            records.push_back(std::move(rec));
        }
        j["records"] = std::move(records);
    }
    return j;
}

inline Json to_json(const ExperimentReport& rep) {
    Json j;
    j["train_acc"] = rep.train_acc;
    j["test_acc"] = rep.test_acc;
    j["adv_train_acc"] = rep.adv_train_acc;
    j["adv_test_acc"] = rep.adv_test_acc;
    j["gap"] = rep.gap;
    j["adv_gap"] = rep.adv_gap;
    j["test_lipschitz"] = rep.test_lipschitz;
    return j;
}

inline Json to_json(const AttackConfig& cfg) {
    Json j;
    j["epsilon"] = cfg.epsilon;
    j["steps"] = cfg.steps;
    j["step_size"] = cfg.resolved_step();
    j["random_start"] = cfg.random_start;
    j["restarts"] = cfg.restarts;
    j["seed"] = cfg.seed;
    return j;
}

inline Json to_json(const LipschitzConfig& cfg) {
    Json j;
    j["epsilon"] = cfg.epsilon;
    j["steps"] = cfg.steps;
    j["step_size"] = cfg.resolved_step();
    j["seed"] = cfg.seed;
    return j;
}

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw FormatError("write failed: " + path);
}

inline Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_histogram_csv(
    const std::vector<std::pair<double, std::size_t>>& bins,
    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << "bin_start,count\n";
    for (const auto& [start, count] : bins)
        out << format_g17(start) << "," << count << "\n";
    if (!out) throw FormatError("write failed: " + path);
}

inline constexpr const char* kExperimentCsvHeader =
    "method,train_acc,test_acc,adv_train_acc,adv_test_acc,gap,adv_gap,"
    "test_lipschitz";

inline std::string experiment_csv_row(const std::string& method,
                                      const ExperimentReport& rep) {
    std::string row = method;
    for (double v : {rep.train_acc, rep.test_acc, rep.adv_train_acc,
                     rep.adv_test_acc, rep.gap, rep.adv_gap, rep.test_lipschitz})
        row += "," + format_g17(v);
    return row;
}

// FNV-1a over the raw file bytes; recorded in manifests so inputs are
// identifiable.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file for digest: " + path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i)
            h = (h ^ static_cast<unsigned char>(buf[i])) * 0x100000001B3ULL;
        if (!in) break;
    }
    char hex[24];
    std::snprintf(hex, sizeof(hex), "fnv1a:%016llx",
                  static_cast<unsigned long long>(h));
    return hex;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    Json config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;

    Json to_json() const {
        Json j;
        j["tool"] = "seplab";
        j["version"] = kVersion;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config;
        Json ins = Json::object();
        for (const auto& [path, digest] : inputs) ins[path] = digest;
        j["inputs"] = std::move(ins);
        j["outputs"] = outputs;
        j["duration_seconds"] = duration_seconds;
        return j;
    }
};

}  // namespace seplab
