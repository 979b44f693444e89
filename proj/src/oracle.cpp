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

#include "oxmc/oracle.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "oxmc/error.hpp"

namespace oxmc::oracle {

namespace {

using Dense = std::vector<std::vector<double>>;

void check(const SparseMatrix& y, const SparseMatrix& m) {
    if (y.rows() != m.rows()) {
        throw DimensionError("oracle: Y " + y.shape_string() + " and M " + m.shape_string() +
                             " disagree on instances");
    }
}

// gain[l][mask] = sum_i Y[i][l] * sum_{j in mask} M[i][j].
std::vector<std::vector<double>> subset_gains(const Dense& y, const Dense& m, index_t L, index_t K) {
    std::vector<std::vector<double>> gain(L, std::vector<double>(std::size_t{1} << K, 0.0));
    for (index_t l = 0; l < L; ++l) {
        for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
            double g = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (y[i][l] == 0.0) continue;
                for (index_t j = 0; j < K; ++j) {
                    if (mask & (1u << j)) g += y[i][l] * m[i][j];
                }
            }
            gain[l][mask] = g;
        }
    }
    return gain;
}

SparseMatrix from_masks(const std::vector<std::uint32_t>& masks, index_t K) {
    std::vector<Triplet> t;
    for (index_t l = 0; l < masks.size(); ++l) {
        for (index_t j = 0; j < K; ++j) {
            if (masks[l] & (1u << j)) t.push_back({l, j, 1.0});
        }
    }
    return SparseMatrix::from_triplets(static_cast<index_t>(masks.size()), K, std::move(t));
}

}  // namespace

std::int64_t dense_relaxed(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c) {
    const auto Y = y.to_dense(), M = m.to_dense(), C = c.to_dense();
    double total = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        for (std::size_t l = 0; l < C.size(); ++l) {
            double mc = 0.0;
            for (std::size_t j = 0; j < M[i].size(); ++j) mc += M[i][j] * C[l][j];
            total += Y[i][l] * mc;
        }
    }
    return std::llround(total);
}

std::int64_t dense_binary(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c) {
    const auto Y = y.to_dense(), M = m.to_dense(), C = c.to_dense();
    double total = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i) {
        for (std::size_t l = 0; l < C.size(); ++l) {
            double mc = 0.0;
            for (std::size_t j = 0; j < M[i].size(); ++j) mc += M[i][j] * C[l][j];
            total += Y[i][l] * (mc > 0.0 ? 1.0 : 0.0);
        }
    }
    return std::llround(total);
}

Optimum brute_force_optimal(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda) {
    check(y, m);
    const index_t L = y.cols(), K = m.cols();
    if (L > 10 || K > 4 || K == 0) {
        throw InvalidArgument("brute_force_optimal is limited to L <= 10 and 1 <= K <= 4");
    }
    if (lambda == 0) {
        throw InvalidArgument("brute_force_optimal requires lambda >= 1");
    }
    const auto gain = subset_gains(y.to_dense(), m.to_dense(), L, K);
    std::vector<std::uint32_t> best(L, 0);
    for (index_t l = 0; l < L; ++l) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) > lambda) continue;
            if (gain[l][mask] > top) {
                top = gain[l][mask];
                best[l] = mask;
            }
        }
    }
    Optimum out;
    out.assignment = {from_masks(best, K), lambda, Provenance::projected};
    out.value = dense_relaxed(y, m, out.assignment.C);
    return out;
}

std::int64_t enumerate_partitions_objective(const SparseMatrix& y, const SparseMatrix& m, index_t L, index_t K) {
    check(y, m);
    if (y.cols() != L || m.cols() != K) {
        throw DimensionError("enumerate_partitions_objective: L or K disagree with Y/M");
    }
    if (K == 0 || y.rows() > 64) {
        throw InvalidArgument("enumerate_partitions_objective needs K >= 1 and n <= 64");
    }
    if (std::pow(static_cast<double>(K), static_cast<double>(L)) > 1e6) {
        throw InvalidArgument("enumerate_partitions_objective: K^L exceeds 1e6");
    }
    // Column bitmasks over instances: label l is a hit for instance i when i
    // is positive for l and matched to any cluster holding l.
    const auto Y = y.to_dense(), M = m.to_dense();
    std::vector<std::uint64_t> ycol(L, 0), mcol(K, 0);
    for (std::size_t i = 0; i < Y.size(); ++i) {
        for (index_t l = 0; l < L; ++l) if (Y[i][l] != 0.0) ycol[l] |= std::uint64_t{1} << i;
        for (index_t j = 0; j < K; ++j) if (M[i][j] != 0.0) mcol[j] |= std::uint64_t{1} << i;
    }
    std::vector<index_t> assign(L, 0);
    std::int64_t best = -1;
    while (true) {
        std::int64_t value = 0;
        for (index_t l = 0; l < L; ++l) value += std::popcount(ycol[l] & mcol[assign[l]]);
        best = std::max(best, value);
        index_t pos = 0;
        while (pos < L && ++assign[pos] == K) assign[pos++] = 0;
        if (pos == L) break;
    }
    return best;
}

Optimum exact_rlap(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda, std::size_t xi) {
    check(y, m);
    const index_t L = y.cols(), K = m.cols();
    if (L > 8 || K > 4 || K == 0) {
        throw InvalidArgument("exact_rlap is limited to L <= 8 and 1 <= K <= 4");
    }
    const auto gain = subset_gains(y.to_dense(), m.to_dense(), L, K);
    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) <= lambda) masks.push_back(mask);
    }
    std::vector<std::uint32_t> cur(L, 0), best;
    std::vector<std::size_t> load(K, 0);
    double best_value = -1.0;
    auto dfs = [&](auto&& self, index_t l, double value) -> void {
        if (l == L) {
            if (value > best_value) {
                best_value = value;
                best = cur;
            }
            return;
        }
        for (std::uint32_t mask : masks) {
            bool fits = true;
            for (index_t j = 0; j < K; ++j) {
                if ((mask & (1u << j)) && load[j] >= xi) fits = false;
            }
            if (!fits) continue;
            for (index_t j = 0; j < K; ++j) if (mask & (1u << j)) ++load[j];
            cur[l] = mask;
            self(self, l + 1, value + gain[l][mask]);
            for (index_t j = 0; j < K; ++j) if (mask & (1u << j)) --load[j];
        }
    };
    dfs(dfs, 0, 0.0);
    if (best.empty()) {
        throw InvalidArgument("exact_rlap: no feasible assignment");
    }
    Optimum out;
    out.assignment = {from_masks(best, K), lambda, Provenance::rlap};
    out.value = dense_relaxed(y, m, out.assignment.C);
    return out;
}

}  // namespace oxmc::oracle
