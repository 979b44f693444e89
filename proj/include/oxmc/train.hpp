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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "oxmc/dataset.hpp"
#include "oxmc/model.hpp"

namespace oxmc {

enum class NegativeSampling {
    tfn,  // teacher-forcing: siblings under the ground-truth routing
};

struct TrainConfig {
    std::size_t branching = 32;
    std::size_t max_leaf_size = 100;
    std::size_t beam = 10;
    std::size_t lambda = 2;
    std::size_t rounds = 1;
    double reg_C = 1.0;
    double weight_threshold = 0.1;
    std::size_t max_iter = 100;
    double eps = 1e-3;
    std::uint64_t seed = 0;
    NegativeSampling neg_sampling = NegativeSampling::tfn;

    // Throws InvalidArgument on lambda == 0, beam == 0, and similar.
    void validate() const;
};

enum class AssignmentStrategy {
    projection,        // top-lambda of Y^T M
    rlap,              // capacity-constrained greedy
    random_duplicate,  // initial cluster plus one random cluster
};

struct RefineOptions {
    AssignmentStrategy strategy = AssignmentStrategy::projection;
    std::size_t xi = 0;          // cluster capacity for rlap; 0 = ceil(1.5 L / K)
    bool finetune_matcher = true;
};

struct RoundLog {
    std::size_t round = 0;
    std::int64_t relaxed_before = 0;  // Tr(Y^T M C^T) with the previous C
    std::int64_t relaxed = 0;         // Tr(Y^T M C^T) with the new C
    std::int64_t binary = 0;          // Tr(Y^T Binary(M C^T)) with the new C
    double seconds = 0.0;
};

struct RefineResult {
    XmcModel model;
    std::vector<RoundLog> rounds;
};

// Balanced k-means tree over PIFA label embeddings, then matcher and ranker
// classifiers under teacher-forcing negatives.
XmcModel train_baseline(const Dataset& data, const TrainConfig& cfg);

// Alternating updates: match the training set, reassign labels to clusters,
// rewrite the leaves (topology fixed), retrain the matcher unless disabled,
// and retrain one ranker weight vector per (label, cluster) incidence.
RefineResult refine(const XmcModel& model, const Dataset& data, const TrainConfig& cfg,
                    const RefineOptions& options = {});

// Same as refine with the matcher frozen.
RefineResult refine_clusters_only(const XmcModel& model, const Dataset& data, const TrainConfig& cfg,
                                  const RefineOptions& options = {});

// Building blocks, exposed for tests.
void train_matcher(XmcModel& model, const Dataset& data, const TrainConfig& cfg);
void train_ranker(XmcModel& model, const Dataset& data, const TrainConfig& cfg);

// "round=<r> relaxed=<v> binary=<v> relaxed_before=<v> seconds=<t>"
void write_round_log(const std::vector<RoundLog>& rounds, std::ostream& out);

}  // namespace oxmc
