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

// Shared helpers for the unit and acceptance tests: random instance
// generators, dense reference arithmetic and a scratch directory.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oxmc/cluster.hpp"
#include "oxmc/dataset.hpp"
#include "oxmc/linear.hpp"
#include "oxmc/model.hpp"
#include "oxmc/overlap.hpp"
#include "oxmc/sparse.hpp"

namespace oxmc::testing {

using Dense = std::vector<std::vector<double>>;

// Binary rows x cols matrix; each entry is one with probability `density`.
inline SparseMatrix random_binary(std::mt19937_64& rng, index_t rows, index_t cols, double density) {
    std::bernoulli_distribution on(density);
    Dense d(rows, std::vector<double>(cols, 0.0));
    for (auto& r : d)
        for (auto& v : r) v = on(rng) ? 1.0 : 0.0;
    return SparseMatrix::from_dense(d);
}

// Match-matrix-like binary matrix with exactly `b` ones per row.
inline SparseMatrix random_match(std::mt19937_64& rng, index_t n, index_t K, std::size_t b) {
    std::vector<SparseVector> rows(n);
    std::vector<index_t> cols(K);
    std::iota(cols.begin(), cols.end(), index_t{0});
    for (auto& r : rows) {
        std::shuffle(cols.begin(), cols.end(), rng);
        for (std::size_t k = 0; k < b; ++k) r.push_back(cols[k], 1.0);
    }
    return SparseMatrix::from_rows(K, std::move(rows));
}

// Tiny assignment problem: labels Y (n x L), match matrix M (n x K) with b
// ones per row, and a single-cluster fallback assignment.
struct OverlapInstance {
    SparseMatrix y, m;
    ClusterAssignment fallback;
    std::size_t b = 1;
};

inline OverlapInstance random_overlap_instance(std::mt19937_64& rng, index_t max_n = 20, index_t max_L = 8,
                                               index_t max_K = 4) {
    OverlapInstance inst;
    const index_t n = 1 + rng() % max_n, L = 1 + rng() % max_L, K = 1 + rng() % max_K;
    inst.b = 1 + rng() % std::min<index_t>(K, 2);
    std::uniform_real_distribution<double> density(0.1, 0.6);
    inst.y = random_binary(rng, n, L, density(rng));
    inst.m = random_match(rng, n, K, inst.b);
    std::vector<Triplet> t;
    for (index_t l = 0; l < L; ++l) t.push_back({l, static_cast<index_t>(rng() % K), 1.0});
    inst.fallback = {SparseMatrix::from_triplets(L, K, std::move(t)), 1, Provenance::initial_kmeans};
    return inst;
}

// Real-valued sparse matrix with values in [-2, 2]; entries equal to zero are
// not stored.
inline SparseMatrix random_sparse(std::mt19937_64& rng, index_t rows, index_t cols, double density) {
    std::bernoulli_distribution on(density);
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    std::vector<Triplet> t;
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            if (on(rng)) t.push_back({i, j, value(rng)});
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

inline Dense dense_multiply(const Dense& a, const Dense& b, std::size_t inner, std::size_t cols) {
    Dense c(a.size(), std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < inner; ++k)
            for (std::size_t j = 0; j < cols; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Dense dense_transpose(const Dense& a, std::size_t cols) {
    Dense t(cols, std::vector<double>(a.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) t[j][i] = a[i][j];
    return t;
}

// Small labelled corpus: every label has a prototype, instances carry one or
// two labels and noisy copies of their prototypes.
inline Dataset random_dataset(std::mt19937_64& rng, index_t n, index_t d, index_t L) {
    std::uniform_int_distribution<index_t> label(0, L - 1), dim(0, d - 1);
    std::uniform_real_distribution<double> value(0.1, 1.0);
    std::vector<std::vector<index_t>> proto(L);
    for (auto& p : proto)
        for (int k = 0; k < 3; ++k) p.push_back(dim(rng));
    std::vector<SparseVector> xs(n), ys(n);
    for (index_t i = 0; i < n; ++i) {
        std::vector<index_t> labels{i < L ? i : label(rng)};
        if (rng() % 2) {
            const index_t extra = label(rng);
            if (extra != labels[0]) labels.push_back(extra);
        }
        for (index_t l : labels) {
            ys[i].push_back(l, 1.0);
            for (index_t j : proto[l]) xs[i].push_back(j, value(rng));
        }
        xs[i].push_back(dim(rng), 0.2 * value(rng));
    }
    Dataset data;
    data.X = normalize_rows(SparseMatrix::from_rows(d, std::move(xs)));
    data.Y = SparseMatrix::from_rows(L, std::move(ys));
    return data;
}

// Model with an arbitrary balanced tree and random dense-ish weights, for
// structural checks of inference that do not need training.
inline XmcModel random_model(std::mt19937_64& rng, index_t L, index_t d, std::size_t B, std::size_t max_leaf,
                             std::size_t beam) {
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<SparseVector> embs(L);
    for (auto& e : embs)
        for (index_t j = 0; j < d; ++j) e.push_back(j, value(rng));
    XmcModel model;
    model.tree = build_tree(normalize_rows(SparseMatrix::from_rows(d, std::move(embs))), B, max_leaf, rng());
    model.dim = d;
    model.beam = beam;
    model.initial = {model.tree.assignment(), 1, Provenance::initial_kmeans};
    model.matcher.resize(model.tree.num_nodes());
    auto random_weights = [&] {
        WeightVector w;
        for (index_t j = 0; j < d; ++j) w.push_back(j, value(rng));
        return w;
    };
    for (index_t v = 0; v < model.tree.num_nodes(); ++v)
        for (std::size_t c = 0; c < model.tree.node(v).children.size(); ++c)
            model.matcher[v].push_back(random_weights());
    model.ranker.resize(model.K());
    for (index_t j = 0; j < model.K(); ++j)
        for (index_t l : model.tree.node(model.tree.leaf_node(j)).labels)
            model.ranker[j].push_back({l, random_weights()});
    return model;
}

// Reference solver for the squared-hinge problem: projected gradient descent
// on the dual
//   min_{a >= 0} 1/2 a^T (Q + I / (2C)) a - sum(a),  Q_ij = y_i y_j x_i^T x_j,
// with step 1 / trace bound. Returns the primal weights sum_i a_i y_i x_i as a
// dense vector of length x.cols().
inline std::vector<double> projected_gradient_oracle(const TrainProblem& p, std::size_t iters = 200000) {
    std::vector<index_t> ids(p.positives.begin(), p.positives.end());
    ids.insert(ids.end(), p.negatives.begin(), p.negatives.end());
    const std::size_t n = ids.size(), d = p.x->cols();
    const Dense xd = select_rows(*p.x, ids).to_dense();
    std::vector<double> y(n, -1.0);
    std::fill(y.begin(), y.begin() + p.positives.size(), 1.0);
    Dense q(n, std::vector<double>(n, 0.0));
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += xd[i][k] * xd[j][k];
            q[i][j] = y[i] * y[j] * s + (i == j ? 0.5 / p.options.reg_C : 0.0);
        }
        bound += q[i][i];
    }
    const double step = 1.0 / bound;
    std::vector<double> a(n, 0.0), g(n);
    for (std::size_t it = 0; it < iters; ++it) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = -1.0;
            for (std::size_t j = 0; j < n; ++j) g[i] += q[i][j] * a[j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double next = std::max(0.0, a[i] - step * g[i]);
            moved = std::max(moved, std::abs(next - a[i]));
            a[i] = next;
        }
        if (moved < 1e-15) break;
    }
    std::vector<double> w(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) w[k] += a[i] * y[i] * xd[i][k];
    return w;
}

inline std::vector<double> to_dense_weights(const WeightVector& w, index_t d) {
    std::vector<double> out(d, 0.0);
    for (std::size_t k = 0; k < w.nnz(); ++k) out[w.idx[k]] = w.val[k];
    return out;
}

// Dense reference metrics. Per-instance terms are accumulated in instance
// order so the results are comparable bit for bit.
inline double reference_precision(const std::vector<std::vector<index_t>>& ranked, const Dense& y, std::size_t k) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::size_t hits = 0;
        for (std::size_t r = 0; r < ranked[i].size() && r < k; ++r) hits += y[i][ranked[i][r]] != 0.0;
        total += static_cast<double>(hits) / static_cast<double>(k);
    }
    return total / static_cast<double>(y.size());
}

inline double reference_psp(const std::vector<std::vector<index_t>>& ranked, const Dense& y,
                            const std::vector<double>& p, std::size_t k) {
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::vector<double> inv;
        for (std::size_t l = 0; l < y[i].size(); ++l)
            if (y[i][l] != 0.0) inv.push_back(1.0 / p[l]);
        if (inv.empty()) continue;
        std::sort(inv.rbegin(), inv.rend());
        double best = 0.0;
        for (std::size_t r = 0; r < inv.size() && r < k; ++r) best += inv[r];
        double got = 0.0;
        for (std::size_t r = 0; r < ranked[i].size() && r < k; ++r)
            if (y[i][ranked[i][r]] != 0.0) got += 1.0 / p[ranked[i][r]];
        total += got / best;
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

// Reference propensity of a label with `count` positives among n instances.
inline double reference_propensity(double count, double n, double A, double B) {
    const double c = (std::log(n) - 1.0) * std::pow(B + 1.0, A);
    return 1.0 / (1.0 + c * std::pow(count + B, -A));
}

// Random ranked predictions: up to `max_len` distinct labels per instance.
inline std::vector<std::vector<index_t>> random_rankings(std::mt19937_64& rng, index_t n, index_t L,
                                                         std::size_t max_len) {
    std::vector<std::vector<index_t>> out(n);
    std::vector<index_t> ids(L);
    std::iota(ids.begin(), ids.end(), index_t{0});
    for (auto& r : out) {
        std::shuffle(ids.begin(), ids.end(), rng);
        r.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(rng() % (std::min<std::size_t>(max_len, L) + 1)));
    }
    return out;
}

inline std::vector<Prediction> to_predictions(const std::vector<std::vector<index_t>>& ranked) {
    std::vector<Prediction> out(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out[i].instance = static_cast<index_t>(i);
        for (std::size_t r = 0; r < ranked[i].size(); ++r)
            out[i].labels.push_back({ranked[i][r], static_cast<double>(ranked[i].size() - r)});
    }
    return out;
}

class ScratchDir {
  public:
    explicit ScratchDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                ("oxmc_test_" + name + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

  private:
    std::filesystem::path path_;
};

}  // namespace oxmc::testing
