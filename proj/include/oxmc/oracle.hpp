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

#include "oxmc/overlap.hpp"

// Exhaustive reference solvers for tiny instances. They evaluate objectives
// on dense copies of Y and M and never call the sparse projection path, so
// they can check it independently.
namespace oxmc::oracle {

struct Optimum {
    ClusterAssignment assignment;
    std::int64_t value = 0;
};

// Maximizes Tr(Y^T M C^T) over every C whose rows hold 1..lambda clusters.
// The objective is a sum of per-label terms, so each row's subsets are
// enumerated independently. Requires L <= 10 and K <= 4.
Optimum brute_force_optimal(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda);

// max over single-cluster assignments C of Tr(Y^T Binary(M C^T)). Requires
// K^L <= 1e6 and n <= 64.
std::int64_t enumerate_partitions_objective(const SparseMatrix& y, const SparseMatrix& m, index_t L, index_t K);

// Exact optimum of the capacity-constrained problem (row sums in [1, lambda],
// column sums <= xi) by depth-first search. Requires L <= 8 and K <= 4.
Optimum exact_rlap(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda, std::size_t xi);

// Dense Tr(Y^T M C^T) and Tr(Y^T Binary(M C^T)).
std::int64_t dense_relaxed(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c);
std::int64_t dense_binary(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c);

}  // namespace oxmc::oracle
