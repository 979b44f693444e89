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
#include <limits>
#include <span>
#include <vector>

#include "oxmc/sparse.hpp"

namespace oxmc {

using WeightVector = SparseVector;

struct SolverOptions {
    double reg_C = 1.0;
    std::size_t max_iter = 100;     // epochs over the instances
    double eps = 1e-3;              // stop when max projected-gradient violation < eps
    double weight_threshold = 0.1;  // |w_j| <= threshold is pruned after training
    std::uint64_t seed = 0;         // coordinate order
};

// One binary problem over rows of a shared feature matrix. `positives` and
// `negatives` are disjoint row ids of `x`.
struct TrainProblem {
    const SparseMatrix* x = nullptr;
    std::span<const index_t> positives;
    std::span<const index_t> negatives;
    SolverOptions options;
};

struct TrainResult {
    WeightVector weights;
    std::size_t epochs = 0;
    double max_violation = 0.0;
};

// L2-regularized squared-hinge classifier,
//   min_w 1/2 |w|^2 + C * sum_i max(0, 1 - y_i x_i^T w)^2,
// solved with dual coordinate descent (Hsieh et al., ICML 2008). Throws
// InvalidArgument when positives is empty or overlaps negatives.
TrainResult train_ovr(const TrainProblem& problem);

// Primal objective at `w` (dense), for diagnostics and tests.
double squared_hinge_objective(const TrainProblem& problem, std::span<const double> w);

inline double score(const WeightVector& w, RowView x) { return dot(w, x); }

// Dot product against a dense scatter of the instance.
inline double score_dense(const WeightVector& w, std::span<const double> x_dense) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.nnz(); ++k) s += w.val[k] * x_dense[w.idx[k]];
    return s;
}

}  // namespace oxmc
