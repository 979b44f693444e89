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
#include <filesystem>
#include <vector>

#include "oxmc/cluster.hpp"
#include "oxmc/dataset.hpp"
#include "oxmc/linear.hpp"
#include "oxmc/overlap.hpp"

namespace oxmc {

// Ranker weight of one (label, cluster) incidence.
struct RankerSlot {
    index_t label;
    WeightVector weights;

    bool operator==(const RankerSlot&) const = default;
};

// Settings recorded with a model so that retraining steps can reproduce it.
struct ModelInfo {
    std::size_t branching = 32;
    std::size_t max_leaf_size = 100;
    std::uint64_t seed = 0;

    bool operator==(const ModelInfo&) const = default;
};

// Matcher (one classifier per internal-node child) plus ranker (one
// classifier per label per cluster the label occupies). A label held by m
// clusters owns m independent ranker weight vectors.
struct XmcModel {
    LabelTree tree;
    index_t dim = 0;
    std::size_t beam = 10;
    std::size_t lambda = 1;
    ModelInfo info;
    // Assignment the tree was built with; kept as fallback for projection.
    ClusterAssignment initial;
    Provenance provenance = Provenance::initial_kmeans;
    // matcher[v][k] scores the k-th child of node v; empty for leaves.
    std::vector<std::vector<WeightVector>> matcher;
    // ranker[j] holds one slot per label of cluster j, labels ascending.
    std::vector<std::vector<RankerSlot>> ranker;

    index_t num_labels() const { return tree.num_labels(); }
    std::size_t K() const { return tree.K(); }
    ClusterAssignment assignment() const { return {tree.assignment(), lambda, provenance}; }

    // Checks shapes and that ranker slots mirror the leaf label sets.
    void validate() const;
    bool operator==(const XmcModel&) const = default;
};

struct LeafMatch {
    index_t cluster;
    double path_score;  // product of sigmoid(child score) along the path
};

enum class DedupScore {
    combined,     // average sigmoid(ranker) * path score (default)
    ranker_only,  // average sigmoid(ranker)
};

double sigmoid(double s);

// Level-by-level beam search keeping the `beam` best nodes by path score
// (ties to lower node id). Returns min(beam, K) leaves, best first.
std::vector<LeafMatch> match(const XmcModel& model, RowView x, std::size_t beam);
inline std::vector<LeafMatch> match(const XmcModel& model, RowView x) { return match(model, x, model.beam); }

// n x K binary matrix with a one at every matched leaf.
SparseMatrix match_matrix(const XmcModel& model, const SparseMatrix& x, std::size_t beam);
inline SparseMatrix match_matrix(const XmcModel& model, const SparseMatrix& x) {
    return match_matrix(model, x, model.beam);
}

// Scores every label of the matched leaves, averages a label's scores over
// the matched clusters that hold it, and returns the top k.
Prediction predict(const XmcModel& model, RowView x, std::size_t k, DedupScore mode = DedupScore::combined);
std::vector<Prediction> predict(const XmcModel& model, const SparseMatrix& x, std::size_t k,
                                DedupScore mode = DedupScore::combined);

// Pipeline without deduplication: every (label, cluster) candidate is ranked
// on its own combined score and the first occurrence of a label wins. Equal
// to predict() whenever no label sits in two matched clusters.
Prediction predict_without_dedup(const XmcModel& model, RowView x, std::size_t k);

// Directory layout:
//   meta.json            scalar settings
//   tree.txt             "id parent child_ids | label_ids"
//   clusters.txt         "label_id cluster_id" per incidence
//   initial_clusters.txt same format, the k-means assignment
//   matcher.txt          "node child nnz idx:val ..."
//   ranker.txt           "cluster label nnz idx:val ..."
void save_model(const XmcModel& model, const std::filesystem::path& dir);
XmcModel load_model(const std::filesystem::path& dir);

}  // namespace oxmc
