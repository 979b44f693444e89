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

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oxmc/cluster.hpp"
#include "oxmc/dataset.hpp"
#include "oxmc/error.hpp"
#include "support.hpp"

using namespace oxmc;

namespace {

// Points drawn around `groups` well separated unit directions.
SparseMatrix separated_points(std::mt19937_64& rng, std::size_t groups, std::size_t per_group, index_t d,
                              std::vector<index_t>& truth) {
    std::uniform_real_distribution<double> jitter(0.0, 0.1);
    std::vector<SparseVector> rows;
    truth.clear();
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t i = 0; i < per_group; ++i) {
            SparseVector v;
            for (index_t j = 0; j < d; ++j) v.push_back(j, j % groups == g ? 1.0 + jitter(rng) : jitter(rng));
            rows.push_back(std::move(v));
            truth.push_back(static_cast<index_t>(g));
        }
    }
    // Interleave so that the input order does not reveal the groups.
    std::vector<index_t> perm(rows.size());
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<SparseVector> shuffled;
    std::vector<index_t> shuffled_truth;
    for (index_t p : perm) {
        shuffled.push_back(rows[p]);
        shuffled_truth.push_back(truth[p]);
    }
    truth = std::move(shuffled_truth);
    return normalize_rows(SparseMatrix::from_rows(d, std::move(shuffled)));
}

// True when `got` equals `truth` up to a renaming of the groups.
bool same_partition(const std::vector<index_t>& got, const std::vector<index_t>& truth) {
    std::map<index_t, index_t> fwd, back;
    for (std::size_t i = 0; i < got.size(); ++i) {
        auto [a, fresh_a] = fwd.emplace(got[i], truth[i]);
        auto [b, fresh_b] = back.emplace(truth[i], got[i]);
        if (a->second != truth[i] || b->second != got[i]) return false;
    }
    return true;
}

double spherical_objective(const SparseMatrix& pts, const std::vector<index_t>& part, std::size_t B) {
    const auto d = pts.to_dense();
    std::vector<std::vector<double>> centers(B, std::vector<double>(pts.cols(), 0.0));
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < pts.cols(); ++j) centers[part[i]][j] += d[i][j];
    double total = 0.0;
    for (auto& c : centers) {
        double norm = 0.0;
        for (double v : c) norm += v * v;
        total += std::sqrt(norm);  // sum of cosine similarities to normalized centers
    }
    return total;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("pifa embeddings are normalized positive sums") {
    const auto x = SparseMatrix::from_dense({{1, 0, 0}, {0, 3, 4}, {1, 1, 0}});
    const auto y = SparseMatrix::from_dense({{1, 0, 0}, {1, 1, 0}, {0, 1, 0}});
    const auto p = pifa_embeddings(x, y);
    CHECK(p.zero_labels == std::vector<index_t>{2});
    // Label 0: (1,3,4) / sqrt(26).
    CHECK(p.embeddings.at(0, 0) == doctest::Approx(1.0 / std::sqrt(26.0)));
    CHECK(p.embeddings.at(0, 2) == doctest::Approx(4.0 / std::sqrt(26.0)));
    // Label 1: (1,4,4) / sqrt(33).
    CHECK(p.embeddings.at(1, 1) == doctest::Approx(4.0 / std::sqrt(33.0)));
    CHECK(p.embeddings.row(2).nnz() == 0);
    CHECK_THROWS_AS(pifa_embeddings(x, SparseMatrix(2, 3)), DimensionError);
}

TEST_CASE("balanced k-means recovers separated groups") {
    std::mt19937_64 rng(31);
    for (std::size_t B : {2u, 3u, 4u, 5u, 8u}) {
        std::vector<index_t> truth;
        const auto pts = separated_points(rng, B, 6, static_cast<index_t>(2 * B), truth);
        const auto part = balanced_kmeans(pts, B, 7);
        CHECK(same_partition(part, truth));
    }
}

TEST_CASE("balanced 2-means reaches the exhaustive optimum on separated data") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<index_t> truth;
        const auto pts = separated_points(rng, 2, 5, 4, truth);
        const std::size_t n = pts.rows();
        // Exhaustive search over every balanced 2-partition.
        double best = -1.0;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != n / 2) continue;
            std::vector<index_t> part(n);
            for (std::size_t i = 0; i < n; ++i) part[i] = (mask >> i) & 1u;
            best = std::max(best, spherical_objective(pts, part, 2));
        }
        const auto got = balanced_kmeans(pts, 2, trial);
        CHECK(spherical_objective(pts, got, 2) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("balanced k-means group sizes differ by at most one") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 60; ++trial) {
        const index_t n = 2 + rng() % 40;
        const std::size_t B = 2 + rng() % std::min<index_t>(n - 1, 9);
        const auto pts = normalize_rows(oxmc::testing::random_sparse(rng, n, 6, 0.6));
        const auto part = balanced_kmeans(pts, B, trial);
        std::vector<std::size_t> sizes(B, 0);
        for (index_t g : part) {
            REQUIRE(g < B);
            ++sizes[g];
        }
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi - *lo <= 1);
        CHECK(balanced_kmeans(pts, B, trial) == part);
    }
    CHECK_THROWS_AS(balanced_kmeans(SparseMatrix(3, 2), 0, 0), InvalidArgument);
    CHECK_THROWS_AS(balanced_kmeans(SparseMatrix(3, 2), 4, 0), InvalidArgument);
}

TEST_CASE("build_tree invariants") {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 40; ++trial) {
        const index_t L = 1 + rng() % 60;
        const std::size_t B = 2 + rng() % 5, max_leaf = 1 + rng() % 8;
        auto embs = normalize_rows(oxmc::testing::random_sparse(rng, L, 5, 0.5));
        const LabelTree tree = build_tree(embs, B, max_leaf, trial);
        const auto c = tree.assignment();
        // Every label in exactly one leaf, leaves small enough, BFS numbering.
        for (index_t l = 0; l < L; ++l) CHECK(c.row(l).nnz() == 1);
        std::size_t prev_depth = 0;
        for (index_t v = 0; v < tree.num_nodes(); ++v) {
            CHECK(tree.node_depth(v) >= prev_depth);
            prev_depth = tree.node_depth(v);
            CHECK(tree.node(v).children.size() <= B);
            if (tree.is_leaf(v)) CHECK(tree.node(v).labels.size() <= max_leaf);
        }
        CHECK(tree.clusters_under(0).size() == tree.K());
        for (index_t j = 0; j < tree.K(); ++j) CHECK(tree.cluster_of(tree.leaf_node(j)) == j);
        CHECK(build_tree(embs, B, max_leaf, trial) == tree);
    }
}

TEST_CASE("binary tree over 16 labels has 4 leaves of 4") {
    std::mt19937_64 rng(35);
    const auto embs = normalize_rows(oxmc::testing::random_sparse(rng, 16, 6, 0.6));
    const LabelTree tree = build_tree(embs, 2, 4, 0);
    CHECK(tree.K() == 4);
    CHECK(tree.num_nodes() == 7);
    for (index_t j = 0; j < 4; ++j) {
        CHECK(tree.node(tree.leaf_node(j)).labels.size() == 4);
        CHECK(tree.node_depth(tree.leaf_node(j)) == 2);
    }
    CHECK(build_tree(embs, 2, 16, 0).K() == 1);
    const auto hundred = normalize_rows(oxmc::testing::random_sparse(rng, 100, 6, 0.6));
    CHECK(build_tree(hundred, 32, 100, 0).K() == 1);
}

TEST_CASE("labels with empty embeddings still land in a leaf") {
    const auto embs = SparseMatrix::from_dense({{1, 0}, {0, 0}, {0, 1}, {0, 0}, {0.6, 0.8}});
    const LabelTree tree = build_tree(embs, 2, 2, 0);
    const auto c = tree.assignment();
    for (index_t l = 0; l < 5; ++l) CHECK(c.row(l).nnz() == 1);
}

TEST_CASE("tree text round trip and assignment rewrite") {
    std::mt19937_64 rng(35);
    const auto embs = normalize_rows(oxmc::testing::random_sparse(rng, 20, 4, 0.7));
    LabelTree tree = build_tree(embs, 3, 3, 1);
    std::stringstream buf;
    tree.write(buf);
    CHECK(LabelTree::read(buf) == tree);

    // Overlapping assignment: label 0 everywhere.
    auto c = tree.assignment();
    std::vector<Triplet> t;
    for (index_t l = 0; l < c.rows(); ++l)
        for (index_t j : c.row(l).idx) t.push_back({l, j, 1.0});
    for (index_t j = 0; j < tree.K(); ++j) t.push_back({0, j, 1.0});
    const auto wide = binarize(SparseMatrix::from_triplets(c.rows(), c.cols(), t));
    const auto nodes_before = tree.num_nodes();
    tree.set_assignment(wide);
    CHECK(tree.assignment() == wide);
    CHECK(tree.num_nodes() == nodes_before);

    // A label left uncovered is rejected and the tree is unchanged.
    std::vector<Triplet> missing;
    for (index_t l = 1; l < c.rows(); ++l)
        for (index_t j : c.row(l).idx) missing.push_back({l, j, 1.0});
    CHECK_THROWS_AS(tree.set_assignment(SparseMatrix::from_triplets(c.rows(), c.cols(), missing)), InvalidArgument);
    CHECK(tree.assignment() == wide);
    CHECK_THROWS_AS(tree.set_assignment(SparseMatrix(3, 3)), DimensionError);

    std::istringstream bad("0 -1 1 |\n1 0 | 0\n2 0 | 1\n");
    CHECK_THROWS(LabelTree::read(bad));
}

}  // TEST_SUITE
