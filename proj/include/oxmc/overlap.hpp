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
#include <string>

#include "oxmc/sparse.hpp"

// Matcher-aware overlapping label assignment.
//
// With Y (n x L) the ground truth, M (n x K) the binary match matrix of a
// beam-search matcher and C (L x K) the label-to-cluster incidence, the
// matcher can only ever surface the candidates Binary(M C^T). The number of
// true positives it exposes is Tr(Y^T Binary(M C^T)); maximizing it over C
// with at most lambda clusters per label is NP-complete (reduction from set
// cover). Replacing Binary by the identity (exact when the beam is 1)
// makes the objective linear in C, Tr(Y^T M C^T) = <Y^T M, C>, and its
// maximizer keeps the lambda largest entries of every row of Y^T M.
namespace oxmc {

enum class Provenance { initial_kmeans, projected, rlap, random };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// Binary L x K incidence where every label occupies between 1 and lambda
// clusters.
struct ClusterAssignment {
    SparseMatrix C;
    std::size_t lambda = 1;
    Provenance provenance = Provenance::initial_kmeans;

    index_t L() const { return C.rows(); }
    index_t K() const { return C.cols(); }

    // Throws InvalidArgument on a row with no cluster, more than lambda
    // clusters, or a non-binary value.
    void validate() const;
    bool operator==(const ClusterAssignment&) const = default;
};

// "label_id cluster_id" per incidence, labels ascending.
void write_assignment(const SparseMatrix& c, std::ostream& out);
SparseMatrix read_assignment(std::istream& in, index_t L, index_t K, const std::string& source = "<stream>");

// Y^T M: how many times the positives of each label are routed to each
// cluster.
SparseMatrix match_scores(const SparseMatrix& y, const SparseMatrix& m);

// Tr(Y^T Binary(M C^T)).
std::int64_t objective_binary(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c);
// Tr(Y^T M C^T).
std::int64_t objective_relaxed(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c);

// Keeps the lambda largest strictly positive entries of each row of Y^T M.
// Labels whose row is entirely zero keep their row of `fallback`.
ClusterAssignment project_assignment(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda,
                                     const ClusterAssignment& fallback);

// Capacity-constrained variant: maximize <Y^T M, C> subject to row sums
// <= lambda and column sums <= xi, solved greedily in three passes:
//   1. one cluster per label, scanning positive scores in descending order;
//   2. labels still uncovered go to a fallback cluster with room, else to
//      the least-loaded cluster;
//   3. remaining positive scores, descending, fill extra slots.
// Requires xi * K >= L. With xi >= L it returns the same C as
// project_assignment.
ClusterAssignment solve_rlap_greedy(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda,
                                    std::size_t xi, const std::optional<ClusterAssignment>& fallback = {});

// Default cluster capacity 1.5 * L / K, rounded up.
std::size_t default_capacity(index_t L, index_t K);

// Baseline: each label keeps its first initial cluster plus one uniformly
// drawn different cluster. Requires K >= 2.
ClusterAssignment random_duplicate(const ClusterAssignment& initial, std::uint64_t seed);

}  // namespace oxmc
