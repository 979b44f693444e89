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
#include <iosfwd>
#include <vector>

#include "oxmc/sparse.hpp"

namespace oxmc {

inline constexpr std::int64_t kNoParent = -1;

struct TreeNode {
    std::int64_t parent = kNoParent;
    std::vector<index_t> children;  // node ids, ascending
    std::vector<index_t> labels;    // leaves only, ascending
};

// Fixed-topology label tree. Node ids follow breadth-first order with the
// root at 0. Leaves, taken in ascending node id, are the clusters 0..K-1.
//
// Only leaf label sets may change after construction (set_assignment).
class LabelTree {
  public:
    LabelTree() = default;
    LabelTree(std::vector<TreeNode> nodes, index_t num_labels);

    std::size_t num_nodes() const { return nodes_.size(); }
    index_t num_labels() const { return num_labels_; }
    std::size_t K() const { return leaves_.size(); }
    std::size_t depth() const { return depth_; }

    const TreeNode& node(index_t id) const { return nodes_[id]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    bool is_leaf(index_t id) const { return nodes_[id].children.empty(); }

    // Node id of cluster j and the inverse (-1 for internal nodes).
    index_t leaf_node(index_t cluster) const { return leaves_[cluster]; }
    std::int64_t cluster_of(index_t node) const { return cluster_of_node_[node]; }
    const std::vector<index_t>& leaf_nodes() const { return leaves_; }

    // Clusters in the subtree rooted at `node`, ascending.
    const std::vector<index_t>& clusters_under(index_t node) const { return clusters_under_[node]; }
    std::size_t node_depth(index_t node) const { return node_depth_[node]; }

    // L x K binary incidence of labels to clusters.
    SparseMatrix assignment() const;
    // Rewrites every leaf label set from an L x K incidence. Topology is left
    // untouched. Throws DimensionError on shape mismatch.
    void set_assignment(const SparseMatrix& c);

    // One line per node: "id parent child_ids | label_ids".
    void write(std::ostream& out) const;
    static LabelTree read(std::istream& in, const std::string& source = "<stream>");

    bool operator==(const LabelTree& o) const;

  private:
    void index_structure();

    std::vector<TreeNode> nodes_;
    index_t num_labels_ = 0;
    std::vector<index_t> leaves_;
    std::vector<std::int64_t> cluster_of_node_;
    std::vector<std::vector<index_t>> clusters_under_;
    std::vector<std::size_t> node_depth_;
    std::size_t depth_ = 0;
};

struct PifaEmbeddings {
    SparseMatrix embeddings;            // L x d, unit rows or empty rows
    std::vector<index_t> zero_labels;   // labels without a positive instance
};

// Label embedding = normalized sum of the feature rows of its positive
// instances.
PifaEmbeddings pifa_embeddings(const SparseMatrix& x, const SparseMatrix& y);

struct KMeansOptions {
    std::size_t max_iter = 20;
    double tol = 1e-4;  // relative objective change
};

// Spherical k-means with exactly balanced groups (sizes differ by at most
// one). Returns the group id of every point. Power-of-two B is handled by
// recursive median splits of 2-means; other B by capacity-constrained
// greedy assignment.
std::vector<index_t> balanced_kmeans(const SparseMatrix& points, std::size_t B, std::uint64_t seed,
                                     const KMeansOptions& options = {});

// Recursive balanced B-way splits until every leaf holds at most
// max_leaf_size labels. Labels with an empty embedding are dealt to the
// smallest child at every split.
LabelTree build_tree(const SparseMatrix& label_embs, std::size_t B, std::size_t max_leaf_size,
                     std::uint64_t seed, const KMeansOptions& options = {});

}  // namespace oxmc
