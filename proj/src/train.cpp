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

#include "oxmc/train.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

#include "oxmc/error.hpp"
#include "oxmc/log.hpp"
#include "oxmc/parallel.hpp"

namespace oxmc {

namespace {

// splitmix64 finalizer; derives independent solver seeds per problem.
std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = a ^ (b * 0x9E3779B97F4A7C15ULL) ^ (c * 0xC2B2AE3D27D4EB4FULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kMatcherStream = 1;
constexpr std::uint64_t kRankerStream = 2;

SolverOptions solver_options(const TrainConfig& cfg, std::uint64_t seed) {
    SolverOptions o;
    o.reg_C = cfg.reg_C;
    o.max_iter = cfg.max_iter;
    o.eps = cfg.eps;
    o.weight_threshold = cfg.weight_threshold;
    o.seed = seed;
    return o;
}

std::vector<index_t> difference(const std::vector<index_t>& a, const std::vector<index_t>& b) {
    std::vector<index_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Instances holding at least one label of each cluster (K lists, ascending).
std::vector<std::vector<index_t>> cluster_positives(const SparseMatrix& y, const SparseMatrix& c) {
    const auto yc = transpose(binarize(multiply(y, c)));
    std::vector<std::vector<index_t>> out(yc.rows());
    for (index_t j = 0; j < yc.rows(); ++j) {
        const auto r = yc.row(j);
        out[j].assign(r.idx.begin(), r.idx.end());
    }
    return out;
}

WeightVector solve_or_empty(const SparseMatrix& x, const std::vector<index_t>& pos, const std::vector<index_t>& neg,
                            const SolverOptions& opt) {
    if (pos.empty()) return {};
    TrainProblem p{&x, pos, neg, opt};
    return train_ovr(p).weights;
}

ClusterAssignment reassign(const XmcModel& model, const Dataset& data, const SparseMatrix& m,
                           const TrainConfig& cfg, const RefineOptions& options, std::size_t round) {
    switch (options.strategy) {
        case AssignmentStrategy::projection:
            return project_assignment(data.Y, m, cfg.lambda, model.initial);
        case AssignmentStrategy::rlap: {
            const std::size_t xi =
                options.xi > 0 ? options.xi : default_capacity(model.num_labels(), static_cast<index_t>(model.K()));
            return solve_rlap_greedy(data.Y, m, cfg.lambda, xi, model.initial);
        }
        case AssignmentStrategy::random_duplicate:
            return random_duplicate(model.initial, mix(cfg.seed, 3, round));
    }
    throw InvalidArgument("unknown assignment strategy");
}

}  // namespace

void TrainConfig::validate() const {
    if (branching < 2) throw InvalidArgument("branching must be >= 2");
    if (max_leaf_size == 0) throw InvalidArgument("max_leaf_size must be >= 1");
    if (beam == 0) throw InvalidArgument("beam must be >= 1");
    if (lambda == 0) throw InvalidArgument("lambda must be >= 1");
    if (!(reg_C > 0.0)) throw InvalidArgument("reg_C must be positive");
    if (weight_threshold < 0.0) throw InvalidArgument("weight_threshold must be non-negative");
    if (max_iter == 0) throw InvalidArgument("max_iter must be >= 1");
}

void train_matcher(XmcModel& model, const Dataset& data, const TrainConfig& cfg) {
    const auto& tree = model.tree;
    const auto per_cluster = cluster_positives(data.Y, tree.assignment());

    // Positive instances of every node: union over the clusters beneath it.
    std::vector<std::vector<index_t>> node_pos(tree.num_nodes());
    for (std::size_t v = tree.num_nodes(); v-- > 0;) {
        const auto& nd = tree.node(static_cast<index_t>(v));
        if (nd.children.empty()) {
            node_pos[v] = per_cluster[static_cast<std::size_t>(tree.cluster_of(static_cast<index_t>(v)))];
            continue;
        }
        std::vector<index_t> acc;
        for (index_t c : nd.children) {
            std::vector<index_t> merged;
            std::set_union(acc.begin(), acc.end(), node_pos[c].begin(), node_pos[c].end(), std::back_inserter(merged));
            acc.swap(merged);
        }
        node_pos[v] = std::move(acc);
    }

    struct Job {
        index_t node;
        std::size_t child;
    };
    std::vector<Job> jobs;
    model.matcher.assign(tree.num_nodes(), {});
    for (index_t v = 0; v < tree.num_nodes(); ++v) {
        model.matcher[v].resize(tree.node(v).children.size());
        for (std::size_t k = 0; k < tree.node(v).children.size(); ++k) jobs.push_back({v, k});
    }
    parallel_for(jobs.size(), [&](std::size_t t) {
        const auto [v, k] = jobs[t];
        const index_t child = tree.node(v).children[k];
        const auto& pos = node_pos[child];
        // Teacher forcing: negatives are positives of the parent routed elsewhere.
        const auto neg = difference(node_pos[v], pos);
        model.matcher[v][k] = solve_or_empty(data.X, pos, neg, solver_options(cfg, mix(cfg.seed, kMatcherStream, child)));
    });
}

void train_ranker(XmcModel& model, const Dataset& data, const TrainConfig& cfg) {
    const auto& tree = model.tree;
    const auto per_cluster = cluster_positives(data.Y, tree.assignment());
    const auto yt = transpose(data.Y);

    struct Job {
        index_t cluster;
        std::size_t slot;
    };
    std::vector<Job> jobs;
    model.ranker.assign(tree.K(), {});
    for (index_t j = 0; j < tree.K(); ++j) {
        const auto& labels = tree.node(tree.leaf_node(j)).labels;
        for (std::size_t s = 0; s < labels.size(); ++s) {
            model.ranker[j].push_back({labels[s], {}});
            jobs.push_back({j, s});
        }
    }
    parallel_for(jobs.size(), [&](std::size_t t) {
        const auto [j, s] = jobs[t];
        auto& slot = model.ranker[j][s];
        const auto r = yt.row(slot.label);
        const std::vector<index_t> pos(r.idx.begin(), r.idx.end());
        const auto neg = difference(per_cluster[j], pos);
        const std::uint64_t seed = mix(cfg.seed, kRankerStream, static_cast<std::uint64_t>(slot.label) * 1000003ULL + j);
        slot.weights = solve_or_empty(data.X, pos, neg, solver_options(cfg, seed));
    });
}

XmcModel train_baseline(const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    const auto pifa = pifa_embeddings(data.X, data.Y);
    if (!pifa.zero_labels.empty()) {
        log::warn(std::to_string(pifa.zero_labels.size()) + " label(s) have no positive instance");
    }
    XmcModel model;
    model.tree = build_tree(pifa.embeddings, cfg.branching, cfg.max_leaf_size, cfg.seed);
    model.dim = data.d();
    model.beam = cfg.beam;
    model.lambda = 1;
    model.info = {cfg.branching, cfg.max_leaf_size, cfg.seed};
    model.initial = {model.tree.assignment(), 1, Provenance::initial_kmeans};
    model.provenance = Provenance::initial_kmeans;
    log::info("tree: " + std::to_string(model.tree.num_nodes()) + " nodes, K=" + std::to_string(model.K()) +
              ", depth " + std::to_string(model.tree.depth()));
    train_matcher(model, data, cfg);
    train_ranker(model, data, cfg);
    return model;
}

RefineResult refine(const XmcModel& model, const Dataset& data, const TrainConfig& cfg, const RefineOptions& options) {
    cfg.validate();
    data.validate();
    if (data.d() > model.dim || data.L() != model.num_labels()) {
        throw DimensionError("dataset does not match the model's feature or label space");
    }
    RefineResult out{model, {}};
    auto& current = out.model;
    for (std::size_t r = 1; r <= cfg.rounds; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const SparseMatrix m = match_matrix(current, data.X, current.beam);
        RoundLog entry;
        entry.round = r;
        entry.relaxed_before = objective_relaxed(data.Y, m, current.tree.assignment());

        ClusterAssignment c = reassign(current, data, m, cfg, options, r);
        c.validate();
        entry.relaxed = objective_relaxed(data.Y, m, c.C);
        entry.binary = objective_binary(data.Y, m, c.C);

        current.tree.set_assignment(c.C);
        current.lambda = c.lambda;
        current.provenance = c.provenance;
        if (options.finetune_matcher) train_matcher(current, data, cfg);
        train_ranker(current, data, cfg);

        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log::info("refine round " + std::to_string(r) + ": relaxed " + std::to_string(entry.relaxed_before) + " -> " +
                  std::to_string(entry.relaxed) + ", binary " + std::to_string(entry.binary));
        out.rounds.push_back(entry);
    }
    return out;
}

RefineResult refine_clusters_only(const XmcModel& model, const Dataset& data, const TrainConfig& cfg,
                                  const RefineOptions& options) {
    auto o = options;
    o.finetune_matcher = false;
    return refine(model, data, cfg, o);
}

void write_round_log(const std::vector<RoundLog>& rounds, std::ostream& out) {
    char buf[64];
    for (const auto& r : rounds) {
        std::snprintf(buf, sizeof(buf), "%.3f", r.seconds);
        out << "round=" << r.round << " relaxed=" << r.relaxed << " binary=" << r.binary
            << " relaxed_before=" << r.relaxed_before << " seconds=" << buf << '\n';
    }
}

}  // namespace oxmc
