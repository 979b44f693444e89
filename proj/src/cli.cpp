/*
 * Copyright 2026 The oxmc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oxmc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "oxmc/dataset.hpp"
#include "oxmc/error.hpp"
#include "oxmc/metrics.hpp"
#include "oxmc/model.hpp"
#include "oxmc/synth.hpp"
#include "oxmc/train.hpp"

namespace oxmc {

namespace {

namespace fs = std::filesystem;

Dataset load_features(const std::string& path, bool normalize) {
    Dataset data = load_dataset(path);
    if (normalize) data.X = normalize_rows(data.X);
    return data;
}

struct TrainFlags {
    std::string data, out;
    TrainConfig cfg;
    bool no_normalize = false;
};

struct RefineFlags {
    std::string model, data, out, log;
    std::size_t lambda = 2;
    std::size_t rounds = 1;
    bool rlap = false;
    std::size_t xi = 0;
    bool random_baseline = false;
    bool clusters_only = false;
    bool no_normalize = false;
    double reg_C = 1.0;
    double threshold = 0.1;
};

struct PredictFlags {
    std::string model, data, out;
    std::size_t topk = 10;
    std::size_t beam = 0;
    bool ranker_only = false;
    bool no_normalize = false;
};

struct EvalFlags {
    std::vector<std::string> preds;
    std::string gold, train_gold;
    double A = 0.55, B = 1.5;
    bool csv = false;
};

struct SynthFlags {
    std::string data, out, mapping, mode = "hard";
    std::size_t k = 5;
    std::size_t group_width = 32;
    std::uint64_t seed = 0;
    bool planted = false;
    PlantedCorpusSpec planted_spec;
};

struct SweepFlags {
    std::string model, data, test;
    std::size_t lambda_max = 6;
    std::size_t rounds = 1;
    bool no_normalize = false;
};

RefineOptions refine_options(const RefineFlags& f) {
    RefineOptions o;
    if (f.rlap) {
        o.strategy = AssignmentStrategy::rlap;
        o.xi = f.xi;
    } else if (f.random_baseline) {
        o.strategy = AssignmentStrategy::random_duplicate;
    }
    o.finetune_matcher = !f.clusters_only;
    return o;
}

// Reconstructs the training settings a model was built with.
TrainConfig config_from_model(const XmcModel& model) {
    TrainConfig cfg;
    cfg.branching = model.info.branching;
    cfg.max_leaf_size = model.info.max_leaf_size;
    cfg.beam = model.beam;
    cfg.seed = model.info.seed;
    return cfg;
}

int do_train(const TrainFlags& f, std::ostream& out) {
    const Dataset data = load_features(f.data, !f.no_normalize);
    const XmcModel model = train_baseline(data, f.cfg);
    save_model(model, f.out);
    out << "trained model: " << model.K() << " clusters, " << model.tree.num_nodes() << " nodes -> " << f.out << '\n';
    return 0;
}

int do_refine(const RefineFlags& f, std::ostream& out) {
    const XmcModel base = load_model(f.model);
    const Dataset data = load_features(f.data, !f.no_normalize);
    TrainConfig cfg = config_from_model(base);
    cfg.lambda = f.lambda;
    cfg.rounds = f.rounds;
    cfg.reg_C = f.reg_C;
    cfg.weight_threshold = f.threshold;
    const auto result = refine(base, data, cfg, refine_options(f));
    const std::string dest = f.out.empty() ? f.model + "_refined" : f.out;
    save_model(result.model, dest);
    write_round_log(result.rounds, out);
    std::ofstream log(f.log.empty() ? (fs::path(dest) / "refine_log.txt").string() : f.log);
    write_round_log(result.rounds, log);
    out << "refined model -> " << dest << '\n';
    return 0;
}

int do_predict(const PredictFlags& f, std::ostream& out) {
    XmcModel model = load_model(f.model);
    if (f.beam > 0) model.beam = f.beam;
    const Dataset data = load_features(f.data, !f.no_normalize);
    const auto preds = predict(model, data.X, f.topk, f.ranker_only ? DedupScore::ranker_only : DedupScore::combined);
    if (f.out.empty() || f.out == "-") {
        write_predictions(preds, out);
    } else {
        save_predictions(preds, f.out);
    }
    return 0;
}

int do_eval(const EvalFlags& f, std::ostream& out) {
    const Dataset gold = load_dataset(f.gold);
    const Dataset train = load_dataset(f.train_gold.empty() ? f.gold : f.train_gold);
    if (train.L() != gold.L()) {
        throw DimensionError("train and test label spaces differ");
    }
    const auto prop = compute_propensities(train.Y, f.A, f.B);
    std::vector<MetricRow> rows;
    for (const auto& path : f.preds) {
        rows.push_back(evaluate(fs::path(path).stem().string(), load_predictions(path), gold.Y, prop));
    }
    write_report(rows, out, f.csv);
    return 0;
}

int do_synth(const SynthFlags& f, std::ostream& out) {
    Dataset base;
    if (f.planted) {
        auto spec = f.planted_spec;
        spec.seed = f.seed;
        base = make_planted_corpus(spec);
        if (f.data.empty()) {
            save_dataset(base, f.out);
            out << "planted corpus: n=" << base.n() << " d=" << base.d() << " L=" << base.L() << " -> " << f.out << '\n';
            return 0;
        }
        save_dataset(base, f.data);
    } else {
        if (f.data.empty()) throw InvalidArgument("synth needs --data (or --planted)");
        base = load_dataset(f.data);
    }
    FusionSpec spec{fusion_mode_from_string(f.mode), f.k, f.seed, f.group_width};
    const auto fused = fuse_labels(base, spec);
    save_dataset(fused.data, f.out);
    std::ofstream mapping(f.mapping.empty() ? f.out + ".mapping" : f.mapping);
    if (!mapping) throw Error("cannot write fusion mapping");
    write_fusion_mapping(fused.groups, mapping);
    out << "fused " << base.L() << " labels into " << fused.data.L() << " (" << f.mode << ", k=" << f.k << ") -> "
        << f.out << '\n';
    return 0;
}

int do_sweep(const SweepFlags& f, std::ostream& out) {
    const XmcModel base = load_model(f.model);
    const Dataset data = load_features(f.data, !f.no_normalize);
    const Dataset eval_set = f.test.empty() ? data : load_features(f.test, !f.no_normalize);
    TrainConfig cfg = config_from_model(base);
    cfg.rounds = f.rounds;
    out << "lambda relaxed binary P@1 P@3 P@5\n";
    char buf[128];
    for (std::size_t lambda = 1; lambda <= f.lambda_max; ++lambda) {
        cfg.lambda = lambda;
        const auto result = refine(base, data, cfg);
        const auto preds = predict(result.model, eval_set.X, 5);
        const auto& last = result.rounds.back();
        std::snprintf(buf, sizeof(buf), "%zu %lld %lld %.4f %.4f %.4f", lambda, static_cast<long long>(last.relaxed),
                      static_cast<long long>(last.binary), precision_at_k(preds, eval_set.Y, 1),
                      precision_at_k(preds, eval_set.Y, 3), precision_at_k(preds, eval_set.Y, 5));
        out << buf << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"oxmc: tree-based extreme multi-label classification with overlapping label clusters", "oxmc"};
    app.require_subcommand(1);

    TrainFlags tf;
    auto* train = app.add_subcommand("train", "train a baseline tree model");
    train->add_option("--data", tf.data, "training dataset")->required()->check(CLI::ExistingFile);
    train->add_option("--out", tf.out, "model directory")->required();
    train->add_option("--branch", tf.cfg.branching, "tree branching factor")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    train->add_option("--max-leaf", tf.cfg.max_leaf_size, "maximum labels per leaf")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--beam", tf.cfg.beam, "beam size")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--seed", tf.cfg.seed, "random seed")->capture_default_str();
    train->add_option("--reg-C", tf.cfg.reg_C, "squared-hinge cost")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--threshold", tf.cfg.weight_threshold, "weight pruning threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
    train->add_option("--max-iter", tf.cfg.max_iter, "solver epochs")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_flag("--no-normalize", tf.no_normalize, "keep feature rows as given");

    RefineFlags rf;
    auto* ref = app.add_subcommand("refine", "reassign labels to overlapping clusters and retrain");
    ref->add_option("--model", rf.model, "baseline model directory")->required()->check(CLI::ExistingDirectory);
    ref->add_option("--data", rf.data, "training dataset")->required()->check(CLI::ExistingFile);
    ref->add_option("--out", rf.out, "output model directory (default <model>_refined)");
    ref->add_option("--lambda", rf.lambda, "maximum clusters per label")->capture_default_str()->check(CLI::PositiveNumber);
    ref->add_option("--rounds", rf.rounds, "alternating update rounds")->capture_default_str();
    auto* rlap = ref->add_flag("--rlap", rf.rlap, "capacity-constrained assignment");
    ref->add_option("--xi", rf.xi, "cluster capacity for --rlap (default ceil(1.5 L/K))")->needs(rlap);
    auto* rnd = ref->add_flag("--random-baseline", rf.random_baseline, "duplicate each label into a random cluster");
    rnd->excludes(rlap);
    ref->add_flag("--clusters-only", rf.clusters_only, "keep the matcher frozen");
    ref->add_option("--reg-C", rf.reg_C, "squared-hinge cost")->capture_default_str()->check(CLI::PositiveNumber);
    ref->add_option("--threshold", rf.threshold, "weight pruning threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
    ref->add_option("--log", rf.log, "per-round log file (default <out>/refine_log.txt)");
    ref->add_flag("--no-normalize", rf.no_normalize, "keep feature rows as given");

    PredictFlags pf;
    auto* pred = app.add_subcommand("predict", "rank labels for every instance");
    pred->add_option("--model", pf.model, "model directory")->required()->check(CLI::ExistingDirectory);
    pred->add_option("--data", pf.data, "dataset to score")->required()->check(CLI::ExistingFile);
    pred->add_option("--topk", pf.topk, "labels per instance")->capture_default_str();
    pred->add_option("--out", pf.out, "prediction file (default stdout)");
    pred->add_option("--beam", pf.beam, "override the model's beam size");
    pred->add_flag("--ranker-only", pf.ranker_only, "average ranker scores only when deduplicating");
    pred->add_flag("--no-normalize", pf.no_normalize, "keep feature rows as given");

    EvalFlags ef;
    auto* ev = app.add_subcommand("eval", "P@k and PSP@k report");
    ev->add_option("--pred", ef.preds, "prediction file(s)")->required()->check(CLI::ExistingFile);
    ev->add_option("--gold", ef.gold, "dataset with ground-truth labels")->required()->check(CLI::ExistingFile);
    ev->add_option("--train-gold", ef.train_gold, "training dataset for propensities")->check(CLI::ExistingFile);
    ev->add_option("--A", ef.A, "propensity parameter A")->capture_default_str();
    ev->add_option("--B", ef.B, "propensity parameter B")->capture_default_str();
    ev->add_flag("--csv", ef.csv, "emit CSV");

    SynthFlags sf;
    auto* syn = app.add_subcommand("synth", "fuse labels into multi-modal synthetic labels");
    syn->add_option("--data", sf.data, "source dataset (written first when --planted)");
    syn->add_option("--out", sf.out, "fused dataset")->required();
    syn->add_option("--mode", sf.mode, "easy | medium | hard")->capture_default_str()->check(CLI::IsMember({"easy", "medium", "hard"}));
    syn->add_option("--k", sf.k, "labels merged per fused label")->capture_default_str()->check(CLI::Range(2, 1 << 20));
    syn->add_option("--group-width", sf.group_width, "medium mode group width")->capture_default_str()->check(CLI::PositiveNumber);
    syn->add_option("--seed", sf.seed, "random seed")->capture_default_str();
    syn->add_option("--mapping", sf.mapping, "mapping file (default <out>.mapping)");
    syn->add_flag("--planted", sf.planted, "generate a planted-prototype corpus instead of reading --data");
    syn->add_option("--n", sf.planted_spec.n, "planted: instances")->capture_default_str();
    syn->add_option("--labels", sf.planted_spec.L, "planted: labels")->capture_default_str();
    syn->add_option("--dim", sf.planted_spec.d, "planted: features")->capture_default_str();

    SweepFlags wf;
    auto* sweep = app.add_subcommand("sweep-lambda", "refine for lambda = 1..max and report objective and P@k");
    sweep->add_option("--model", wf.model, "baseline model directory")->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--data", wf.data, "training dataset")->required()->check(CLI::ExistingFile);
    sweep->add_option("--test", wf.test, "evaluation dataset (default: training data)")->check(CLI::ExistingFile);
    sweep->add_option("--lambda-max", wf.lambda_max, "largest lambda")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--rounds", wf.rounds, "alternating update rounds")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_flag("--no-normalize", wf.no_normalize, "keep feature rows as given");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train) return do_train(tf, out);
        if (*ref) return do_refine(rf, out);
        if (*pred) return do_predict(pf, out);
        if (*ev) return do_eval(ef, out);
        if (*syn) return do_synth(sf, out);
        if (*sweep) return do_sweep(wf, out);
    } catch (const std::exception& e) {
        err << "oxmc: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace oxmc
