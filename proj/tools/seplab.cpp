// seplab — measure r-separation, certify distance classifiers, train robust
// networks, attack them, and estimate local Lipschitz constants.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
// divergence. Diagnostics go to stderr; results go to files (full precision)
// with a short 3-decimal summary on stdout. Every command writes a
// <out>.manifest.json recording the resolved configuration, seeds and input
// digests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seplab/config.hpp"
#include "seplab/distance_classifier.hpp"
#include "seplab/reporting.hpp"
#include "seplab/seplab.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace seplab;

struct LoadedDataset {
    Dataset ds;
    std::vector<std::string> files;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

// Dataset specs: "idx:<images>,<labels>" (MNIST IDX pair),
// "cifar:<batch1>[,<batch2>...]" (CIFAR-10 binary), or a SEPLABDS file path.
LoadedDataset load_spec(const std::string& spec) {
    LoadedDataset out;
    if (spec.rfind("idx:", 0) == 0) {
        const auto parts = split_commas(spec.substr(4));
        if (parts.size() != 2)
            throw InputError("idx spec needs exactly two files: idx:<images>,<labels>");
        out.ds = load_mnist_idx(parts[0], parts[1]);
        out.files = parts;
    } else if (spec.rfind("cifar:", 0) == 0) {
        const auto parts = split_commas(spec.substr(6));
        out.ds = load_cifar10_binary(parts);
        out.files = parts;
    } else {
        out.ds = load_dataset(spec);
        out.files = {spec};
    }
    return out;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

struct ManifestTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void write_manifest(RunManifest manifest, const ManifestTimer& timer,
                    const std::string& primary_out) {
    manifest.duration_seconds = timer.seconds();
    write_json(manifest.to_json(), primary_out + ".manifest.json");
}

std::vector<std::string> collect_argv(int argc, char** argv) {
    std::vector<std::string> out;
    for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
    return out;
}

int cmd_separation(const std::vector<std::string>& argv, const std::string& queries,
                   const std::string& references, const std::string& metric_str,
                   const std::string& mode_str, const std::string& out_path,
                   const std::string& hist_path, double hist_bin, double flag_below,
                   bool flag_set, std::int64_t relabel_seed, bool no_records) {
    ManifestTimer timer;
    const Metric metric = metric_from_name(metric_str);
    if (mode_str != "train-train" && mode_str != "test-train")
        throw InputError("mode must be train-train or test-train");
    const bool train_train = mode_str == "train-train";

    LoadedDataset q = load_spec(queries);
    LoadedDataset r = train_train && references == queries ? LoadedDataset{}
                                                           : load_spec(references);
    const Dataset& refs = r.files.empty() ? q.ds : r.ds;

    Json out_json;
    SeparationReport primary;  // histogram and outlier flags describe this one
    if (relabel_seed >= 0) {
        if (!train_train)
            throw InputError("--relabel-seed applies to train-train mode only");
        auto [original, randomized] = separation_with_random_labels(
            q.ds, metric, std::uint64_t(relabel_seed));
        out_json["original"] = to_json(original, !no_records);
        out_json["randomized"] = to_json(randomized, !no_records);
        out_json["relabel_seed"] = relabel_seed;
        if (randomized.valid_count() > 0)
            std::printf("randomized: min %.3f mean %.3f (n=%zu)\n",
                        round3(randomized.min), round3(randomized.mean),
                        randomized.valid_count());
        primary = std::move(original);
        if (primary.valid_count() > 0)
            std::printf("original:   min %.3f mean %.3f (n=%zu)\n",
                        round3(primary.min), round3(primary.mean),
                        primary.valid_count());
    } else {
        primary = cross_class_nn(q.ds, refs, metric, train_train);
        out_json = to_json(primary, !no_records);
        if (primary.valid_count() > 0)
            std::printf("min %.3f mean %.3f (n=%zu)\n", round3(primary.min),
                        round3(primary.mean), primary.valid_count());
        else
            std::printf("no valid records (single-class data?)\n");
    }

    if (flag_set) {
        const auto flagged = flag_outliers(primary, flag_below);
        Json arr = Json::array();
        for (const auto& rec : flagged) {
            Json jr;
            jr["query_index"] = rec.query_index;
            jr["query_label"] = rec.query_label;
            jr["nn_index"] = rec.nn_index;
            jr["nn_label"] = rec.nn_label;
            jr["distance"] = rec.distance;
            arr.push_back(std::move(jr));
        }
        out_json["flagged"] = std::move(arr);
        out_json["flag_threshold"] = flag_below;
    }

    write_json(out_json, out_path);
    if (!hist_path.empty())
        write_histogram_csv(histogram(primary, hist_bin), hist_path);

    RunManifest manifest;
    manifest.command = "separation";
    manifest.argv = argv;
    manifest.config = {{"queries", queries},
                       {"references", references},
                       {"metric", metric_str},
                       {"mode", mode_str},
                       {"hist_bin", hist_bin},
                       {"relabel_seed", relabel_seed}};
    for (const auto& f : q.files) manifest.inputs.emplace_back(f, file_digest(f));
    for (const auto& f : r.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    if (!hist_path.empty()) manifest.outputs.push_back(hist_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_certify(const std::vector<std::string>& argv, const std::string& train_spec,
                const std::string& test_spec, double radius,
                const std::string& metric_str, double r_param,
                const std::string& out_path) {
    ManifestTimer timer;
    const Metric metric = metric_from_name(metric_str);
    LoadedDataset train = load_spec(train_spec);
    LoadedDataset test = load_spec(test_spec);
    const auto clf = DistanceClassifier::from_dataset(train.ds, r_param, metric);

    Json records = Json::array();
    std::size_t astute = 0;
    for (std::size_t i = 0; i < test.ds.n; ++i) {
        const Certificate cert = clf.certify(test.ds.row_vec(i));
        const bool hit = cert.predicted == test.ds.labels[i] &&
                         cert.certified_radius >= radius;
        astute += hit ? 1 : 0;
        Json rec;
        rec["index"] = i;
        rec["predicted"] = cert.predicted;
        rec["true"] = test.ds.labels[i];
        rec["margin"] = cert.margin;
        rec["certified_radius"] = cert.certified_radius;
        records.push_back(std::move(rec));
    }
    Json out_json;
    out_json["radius"] = radius;
    out_json["metric"] = metric_str;
    out_json["r"] = r_param;
    out_json["n"] = test.ds.n;
    out_json["astuteness"] = double(astute) / double(test.ds.n);
    out_json["records"] = std::move(records);
    write_json(out_json, out_path);
    std::printf("astuteness %.3f at radius %.3f (n=%zu)\n",
                round3(double(astute) / double(test.ds.n)), radius, test.ds.n);

    RunManifest manifest;
    manifest.command = "certify";
    manifest.argv = argv;
    manifest.config = {{"train", train_spec},
                       {"test", test_spec},
                       {"radius", radius},
                       {"metric", metric_str},
                       {"r", r_param}};
    for (const auto& f : train.files) manifest.inputs.emplace_back(f, file_digest(f));
    for (const auto& f : test.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_train(const std::vector<std::string>& argv, const std::string& config_path,
              const std::string& out_path, const std::string& history_path) {
    ManifestTimer timer;
    const RunSpec spec = load_run_spec(config_path);
    LoadedDataset train_ds = load_spec(spec.train_data);
    LoadedDataset test_ds = load_spec(spec.test_data);

    const TrainResult result = train(spec.train, train_ds.ds, test_ds.ds);
    save_model(result.net, out_path);

    if (!history_path.empty()) {
        std::ofstream hist(history_path);
        if (!hist) throw FormatError("cannot open for writing: " + history_path);
        hist << "epoch,lr,loss,train_acc,test_acc\n";
        for (const auto& e : result.history)
            hist << e.epoch << "," << format_g17(e.lr) << "," << format_g17(e.loss)
                 << "," << format_g17(e.train_acc) << "," << format_g17(e.test_acc)
                 << "\n";
    }
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        std::printf("epoch %d: loss %.3f train_acc %.3f test_acc %.3f\n", last.epoch,
                    round3(last.loss), round3(last.train_acc), round3(last.test_acc));
    }

    RunManifest manifest;
    manifest.command = "train";
    manifest.argv = argv;
    manifest.config = {{"config_file", config_path},
                       {"method", method_name(spec.train.method.kind)},
                       {"beta", spec.train.method.beta},
                       {"lambda", spec.train.method.lambda},
                       {"mu", spec.train.method.mu},
                       {"gr_fd_step", spec.train.method.fd_step},
                       {"llr_fd_scale", spec.train.method.fd_scale},
                       {"inner", to_json(spec.train.method.inner)},
                       {"hidden", spec.train.hidden},
                       {"epochs", spec.train.epochs},
                       {"batch_size", spec.train.batch_size},
                       {"lr", spec.train.lr},
                       {"momentum", spec.train.momentum},
                       {"decay_epochs", spec.train.decay_epochs},
                       {"decay_factor", spec.train.decay_factor},
                       {"dropout_rate", spec.train.dropout_rate},
                       {"seed", spec.train.seed},
                       {"include_test_in_train", spec.train.include_test_in_train},
                       {"data_train", spec.train_data},
                       {"data_test", spec.test_data}};
    manifest.inputs.emplace_back(config_path, file_digest(config_path));
    for (const auto& f : train_ds.files) manifest.inputs.emplace_back(f, file_digest(f));
    for (const auto& f : test_ds.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    if (!history_path.empty()) manifest.outputs.push_back(history_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_attack(const std::vector<std::string>& argv, const std::string& model_path,
               const std::string& data_spec, const std::string& method,
               const AttackConfig& cfg, const std::string& out_path) {
    ManifestTimer timer;
    const AttackKind kind = attack_from_name(method);
    const Network net = load_model(model_path);
    LoadedDataset data = load_spec(data_spec);

    const double clean = clean_accuracy(net, data.ds);
    RandomStream base(cfg.seed);
    Json records = Json::array();
    std::size_t robust = 0;
    for (std::size_t i = 0; i < data.ds.n; ++i) {
        const Vector x = data.ds.row_vec(i);
        const bool correct = clean_correct(net, x, data.ds.labels[i]);
        Json rec;
        rec["index"] = i;
        rec["clean_correct"] = correct;
        if (correct) {
            AttackConfig local = cfg;
            local.seed = base.derive(i).seed();
            const AttackOutcome out = run_attack(net, x, data.ds.labels[i], local, kind);
            rec["success"] = out.success;
            rec["loss_achieved"] = out.loss_achieved;
            robust += out.success ? 0 : 1;
        }
        records.push_back(std::move(rec));
    }
    const double adv = double(robust) / double(data.ds.n);

    Json out_json;
    out_json["method"] = method;
    out_json["attack"] = to_json(cfg);
    out_json["n"] = data.ds.n;
    out_json["clean_accuracy"] = clean;
    out_json["adv_accuracy"] = adv;
    out_json["records"] = std::move(records);
    write_json(out_json, out_path);
    std::printf("clean %.3f adv %.3f (n=%zu)\n", round3(clean), round3(adv),
                data.ds.n);

    RunManifest manifest;
    manifest.command = "attack";
    manifest.argv = argv;
    manifest.config = {{"model", model_path}, {"data", data_spec},
                       {"method", method},   {"attack", to_json(cfg)}};
    manifest.inputs.emplace_back(model_path, file_digest(model_path));
    for (const auto& f : data.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_lipschitz(const std::vector<std::string>& argv, const std::string& model_path,
                  const std::string& data_spec, const LipschitzConfig& cfg,
                  const std::string& out_path) {
    ManifestTimer timer;
    const Network net = load_model(model_path);
    LoadedDataset data = load_spec(data_spec);
    const LipschitzEstimate est = empirical_lipschitz(net, data.ds, cfg);

    Json out_json;
    out_json["lipschitz"] = to_json(cfg);
    out_json["n"] = data.ds.n;
    out_json["mean"] = est.mean;
    out_json["per_example"] = est.per_example;
    write_json(out_json, out_path);
    std::printf("empirical lipschitz %.3f (n=%zu)\n", round3(est.mean), data.ds.n);

    RunManifest manifest;
    manifest.command = "lipschitz";
    manifest.argv = argv;
    manifest.config = {{"model", model_path},
                       {"data", data_spec},
                       {"lipschitz", to_json(cfg)}};
    manifest.inputs.emplace_back(model_path, file_digest(model_path));
    for (const auto& f : data.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& argv, const std::string& model_path,
                 const std::string& train_spec, const std::string& test_spec,
                 const std::string& method, const AttackConfig& attack_cfg,
                 const LipschitzConfig& lip_cfg, const std::string& out_path,
                 const std::string& csv_path, const std::string& method_name_str) {
    ManifestTimer timer;
    const AttackKind kind = attack_from_name(method);
    const Network net = load_model(model_path);
    LoadedDataset train_ds = load_spec(train_spec);
    LoadedDataset test_ds = load_spec(test_spec);

    const ExperimentReport rep =
        evaluate(net, train_ds.ds, test_ds.ds, attack_cfg, kind, lip_cfg);

    Json out_json = to_json(rep);
    out_json["attack"] = to_json(attack_cfg);
    out_json["attack_kind"] = method;
    out_json["lipschitz"] = to_json(lip_cfg);
    write_json(out_json, out_path);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw FormatError("cannot open for writing: " + csv_path);
        csv << kExperimentCsvHeader << "\n"
            << experiment_csv_row(method_name_str, rep) << "\n";
    }
    std::printf(
        "train %.3f test %.3f adv_train %.3f adv_test %.3f gap %.3f adv_gap %.3f "
        "lipschitz %.3f\n",
        round3(rep.train_acc), round3(rep.test_acc), round3(rep.adv_train_acc),
        round3(rep.adv_test_acc), round3(rep.gap), round3(rep.adv_gap),
        round3(rep.test_lipschitz));

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.argv = argv;
    manifest.config = {{"model", model_path},
                       {"train", train_spec},
                       {"test", test_spec},
                       {"attack_kind", method},
                       {"attack", to_json(attack_cfg)},
                       {"lipschitz", to_json(lip_cfg)}};
    manifest.inputs.emplace_back(model_path, file_digest(model_path));
    for (const auto& f : train_ds.files) manifest.inputs.emplace_back(f, file_digest(f));
    for (const auto& f : test_ds.files) manifest.inputs.emplace_back(f, file_digest(f));
    manifest.outputs.push_back(out_path);
    if (!csv_path.empty()) manifest.outputs.push_back(csv_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_spiral(const std::vector<std::string>& argv, const SpiralParams& params,
               const std::string& out_path) {
    ManifestTimer timer;
    const Dataset ds = gen_spiral(params);
    save_dataset(ds, out_path);
    std::printf("spiral: n=%zu d=%zu classes=%d\n", ds.n, ds.d, ds.class_count);

    RunManifest manifest;
    manifest.command = "spiral";
    manifest.argv = argv;
    manifest.config = {{"n_per_class", params.n_per_class},
                       {"x_range_max", params.x_range_max},
                       {"noise", params.noise},
                       {"seed", params.seed}};
    manifest.outputs.push_back(out_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

int cmd_blobs(const std::vector<std::string>& argv, const std::string& centers_str,
              double spread, std::size_t n_per_class, std::uint64_t seed,
              const std::string& out_path) {
    ManifestTimer timer;
    std::vector<Vector> centers;
    for (const auto& point : [&] {
             std::vector<std::string> out;
             std::size_t start = 0;
             while (start <= centers_str.size()) {
                 const auto semi = centers_str.find(';', start);
                 if (semi == std::string::npos) {
                     out.push_back(centers_str.substr(start));
                     break;
                 }
                 out.push_back(centers_str.substr(start, semi - start));
                 start = semi + 1;
             }
             return out;
         }()) {
        Vector c;
        for (const auto& coord : split_commas(point)) {
            try {
                c.push_back(std::stod(coord));
            } catch (const std::exception&) {
                throw InputError("blobs: bad center coordinate '" + coord + "'");
            }
        }
        centers.push_back(std::move(c));
    }

    const Dataset ds = gen_blobs(centers, spread, n_per_class, seed);
    save_dataset(ds, out_path);
    std::printf("blobs: n=%zu d=%zu classes=%d\n", ds.n, ds.d, ds.class_count);

    RunManifest manifest;
    manifest.command = "blobs";
    manifest.argv = argv;
    manifest.config = {{"centers", centers_str},
                       {"spread", spread},
                       {"n_per_class", n_per_class},
                       {"seed", seed}};
    manifest.outputs.push_back(out_path);
    write_manifest(std::move(manifest), timer, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seplab: r-separation, distance-classifier certification, "
                 "robust training, attacks and Lipschitz estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("seplab ") + kVersion);

    int threads = 0;
    app.add_option("--threads", threads, "cap the number of worker threads");

    const auto argv_vec = collect_argv(argc, argv);

    // separation
    auto* sep = app.add_subcommand("separation", "nearest different-class distances");
    std::string sep_queries, sep_refs, sep_metric = "linf", sep_mode = "train-train";
    std::string sep_out = "report.json", sep_hist;
    double sep_hist_bin = 0.02, sep_flag_below = 0.0;
    std::int64_t sep_relabel_seed = -1;
    bool sep_no_records = false;
    sep->add_option("--queries", sep_queries, "query dataset spec")->required();
    sep->add_option("--references", sep_refs, "reference dataset spec")->required();
    sep->add_option("--metric", sep_metric, "linf or l2");
    sep->add_option("--mode", sep_mode, "train-train or test-train");
    sep->add_option("--out", sep_out, "JSON report path");
    sep->add_option("--hist", sep_hist, "histogram CSV path");
    sep->add_option("--hist-bin", sep_hist_bin, "histogram bin width");
    auto* flag_opt =
        sep->add_option("--flag-below", sep_flag_below, "flag records at or below");
    sep->add_option("--relabel-seed", sep_relabel_seed,
                    "also compute a random-label baseline with this seed");
    sep->add_flag("--no-records", sep_no_records, "omit per-example records");

    // certify
    auto* cert = app.add_subcommand("certify", "distance-classifier certificates");
    std::string cert_train, cert_test, cert_metric = "linf", cert_out = "cert.json";
    double cert_radius = 0.0, cert_r = 1.0;
    cert->add_option("--train", cert_train, "training dataset spec")->required();
    cert->add_option("--test", cert_test, "evaluation dataset spec")->required();
    cert->add_option("--radius", cert_radius, "astuteness radius")->required();
    cert->add_option("--metric", cert_metric, "linf or l2");
    cert->add_option("--r", cert_r, "score scale r (> 0)");
    cert->add_option("--out", cert_out, "JSON output path");

    // train
    auto* tr = app.add_subcommand("train", "train a network from a config file");
    std::string tr_config, tr_out = "model.bin", tr_history;
    tr->add_option("--config", tr_config, "key=value config file")->required();
    tr->add_option("--out", tr_out, "model output path");
    tr->add_option("--history", tr_history, "per-epoch CSV path");

    // attack
    auto* atk = app.add_subcommand("attack", "PGD or multi-targeted attack");
    std::string atk_model, atk_data, atk_method = "pgd", atk_out = "adv.json";
    AttackConfig atk_cfg;
    atk->add_option("--model", atk_model, "model file")->required();
    atk->add_option("--data", atk_data, "dataset spec")->required();
    atk->add_option("--method", atk_method, "pgd or mt");
    atk->add_option("--epsilon", atk_cfg.epsilon, "perturbation radius")->required();
    atk->add_option("--steps", atk_cfg.steps, "attack iterations");
    atk->add_option("--step-size", atk_cfg.step_size, "step size (default eps/5)");
    atk->add_flag("--random-start", atk_cfg.random_start, "random start in the ball");
    atk->add_option("--restarts", atk_cfg.restarts, "PGD restarts");
    atk->add_option("--seed", atk_cfg.seed, "attack seed");
    atk->add_option("--out", atk_out, "JSON output path");

    // lipschitz
    auto* lip = app.add_subcommand("lipschitz", "empirical local Lipschitz constant");
    std::string lip_model, lip_data, lip_out = "lips.json";
    LipschitzConfig lip_cfg;
    lip->add_option("--model", lip_model, "model file")->required();
    lip->add_option("--data", lip_data, "dataset spec")->required();
    lip->add_option("--epsilon", lip_cfg.epsilon, "ball radius")->required();
    lip->add_option("--steps", lip_cfg.steps, "ascent iterations");
    lip->add_option("--step-size", lip_cfg.step_size, "step size (default eps/5)");
    lip->add_option("--seed", lip_cfg.seed, "estimator seed");
    lip->add_option("--out", lip_out, "JSON output path");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "full experiment report for a model");
    std::string ev_model, ev_train, ev_test, ev_method = "pgd";
    std::string ev_out = "report.json", ev_csv, ev_name = "model";
    AttackConfig ev_attack;
    LipschitzConfig ev_lip;
    double ev_lip_eps = -1.0;
    ev->add_option("--model", ev_model, "model file")->required();
    ev->add_option("--train", ev_train, "training dataset spec")->required();
    ev->add_option("--test", ev_test, "test dataset spec")->required();
    ev->add_option("--attack", ev_method, "pgd or mt");
    ev->add_option("--epsilon", ev_attack.epsilon, "attack radius")->required();
    ev->add_option("--steps", ev_attack.steps, "attack iterations");
    ev->add_option("--step-size", ev_attack.step_size, "attack step size");
    ev->add_flag("--random-start", ev_attack.random_start, "random start");
    ev->add_option("--seed", ev_attack.seed, "attack seed");
    ev->add_option("--lip-epsilon", ev_lip_eps, "Lipschitz radius (default epsilon)");
    ev->add_option("--lip-steps", ev_lip.steps, "Lipschitz ascent iterations");
    ev->add_option("--lip-seed", ev_lip.seed, "Lipschitz seed");
    ev->add_option("--out", ev_out, "JSON output path");
    ev->add_option("--csv", ev_csv, "also write a one-row CSV");
    ev->add_option("--method-name", ev_name, "method label for the CSV row");

    // spiral
    auto* spi = app.add_subcommand("spiral", "generate the two-arm spiral dataset");
    SpiralParams spi_params;
    std::string spi_out = "spiral.bin";
    spi->add_option("--n-per-class", spi_params.n_per_class, "samples per class");
    spi->add_option("--x-range-max", spi_params.x_range_max, "parameter range max");
    spi->add_option("--noise", spi_params.noise, "uniform noise level");
    spi->add_option("--seed", spi_params.seed, "generator seed");
    spi->add_option("--out", spi_out, "dataset output path");

    // blobs
    auto* blo = app.add_subcommand("blobs", "generate separated uniform blobs");
    std::string blo_centers, blo_out = "blobs.bin";
    double blo_spread = 0.0;
    std::size_t blo_n = 100;
    std::uint64_t blo_seed = 0;
    blo->add_option("--centers", blo_centers,
                    "semicolon-separated centers, comma-separated coords")
        ->required();
    blo->add_option("--spread", blo_spread, "uniform half-width around centers");
    blo->add_option("--n-per-class", blo_n, "samples per class");
    blo->add_option("--seed", blo_seed, "generator seed");
    blo->add_option("--out", blo_out, "dataset output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (*sep)
            return cmd_separation(argv_vec, sep_queries, sep_refs, sep_metric,
                                  sep_mode, sep_out, sep_hist, sep_hist_bin,
                                  sep_flag_below, flag_opt->count() > 0,
                                  sep_relabel_seed, sep_no_records);
        if (*cert)
            return cmd_certify(argv_vec, cert_train, cert_test, cert_radius,
                               cert_metric, cert_r, cert_out);
        if (*tr) return cmd_train(argv_vec, tr_config, tr_out, tr_history);
        if (*atk)
            return cmd_attack(argv_vec, atk_model, atk_data, atk_method, atk_cfg,
                              atk_out);
        if (*lip) return cmd_lipschitz(argv_vec, lip_model, lip_data, lip_cfg, lip_out);
        if (*ev) {
            ev_lip.epsilon = ev_lip_eps > 0.0 ? ev_lip_eps : ev_attack.epsilon;
            return cmd_evaluate(argv_vec, ev_model, ev_train, ev_test, ev_method,
                                ev_attack, ev_lip, ev_out, ev_csv, ev_name);
        }
        if (*spi) return cmd_spiral(argv_vec, spi_params, spi_out);
        if (*blo)
            return cmd_blobs(argv_vec, blo_centers, blo_spread, blo_n, blo_seed,
                             blo_out);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
