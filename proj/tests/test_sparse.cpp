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

#include <random>

#include "doctest.h"
#include "oxmc/error.hpp"
#include "oxmc/sparse.hpp"
#include "support.hpp"

using namespace oxmc;
using oxmc::testing::Dense;

TEST_SUITE("sparse") {

TEST_CASE("from_csr rejects broken invariants") {
    CHECK_NOTHROW(SparseMatrix::from_csr(2, 3, {0, 1, 2}, {2, 0}, {1.0, 2.0}));
    CHECK_THROWS_AS(SparseMatrix::from_csr(2, 3, {0, 1}, {2}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseMatrix::from_csr(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseMatrix::from_csr(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseMatrix::from_csr(1, 3, {0, 1}, {3}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseMatrix::from_csr(1, 3, {0, 1}, {0}, {0.0}), InvalidArgument);
    CHECK_THROWS_AS(SparseMatrix::from_csr(2, 3, {0, 2, 1}, {0, 1}, {1.0, 1.0}), InvalidArgument);
}

TEST_CASE("from_triplets sums duplicates and drops cancellations") {
    const auto m = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 0, -1.0}});
    CHECK(m.nnz() == 1);
    CHECK(m.at(0, 1) == 3.0);
    CHECK(m.at(1, 0) == 0.0);
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), InvalidArgument);
}

TEST_CASE("spmm_pattern on a 2x2 example") {
    const auto a = SparseMatrix::from_dense({{1, 1}, {0, 1}});
    const auto b = SparseMatrix::from_dense({{1, 0}, {1, 1}});
    const auto c = spmm_pattern(a, transpose(b));
    CHECK(c.to_dense() == Dense{{2, 1}, {1, 1}});
    CHECK(multiply(a, b) == c);
}

TEST_CASE("multiply and transpose match dense arithmetic") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const index_t n = 1 + rng() % 7, k = 1 + rng() % 7, m = 1 + rng() % 7;
        const auto a = oxmc::testing::random_sparse(rng, n, k, 0.4);
        const auto b = oxmc::testing::random_sparse(rng, k, m, 0.4);
        const Dense want = oxmc::testing::dense_multiply(a.to_dense(), b.to_dense(), k, m);
        const Dense got = multiply(a, b).to_dense();
        for (index_t i = 0; i < n; ++i)
            for (index_t j = 0; j < m; ++j) CHECK(got[i][j] == doctest::Approx(want[i][j]).epsilon(1e-12));
        CHECK(transpose(a).to_dense() == oxmc::testing::dense_transpose(a.to_dense(), k));
        CHECK(transpose(transpose(a)) == a);
    }
    CHECK_THROWS_AS(multiply(SparseMatrix(2, 3), SparseMatrix(2, 3)), DimensionError);
}

TEST_CASE("trace_product counts shared coordinates") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const index_t n = 1 + rng() % 8, L = 1 + rng() % 8;
        const auto y = oxmc::testing::random_binary(rng, n, L, 0.3);
        const auto yh = oxmc::testing::random_binary(rng, n, L, 0.3);
        // Tr(Y^T Yhat) computed densely.
        const Dense prod = oxmc::testing::dense_multiply(oxmc::testing::dense_transpose(y.to_dense(), L),
                                                         yh.to_dense(), n, L);
        double trace = 0;
        for (index_t l = 0; l < L; ++l) trace += prod[l][l];
        CHECK(trace_product(y, yh) == static_cast<std::int64_t>(trace));
    }
    CHECK(trace_product(SparseMatrix::from_dense({{1, 0}, {1, 1}}), SparseMatrix::from_dense({{1, 1}, {0, 1}})) == 2);
    CHECK(trace_product(SparseMatrix(3, 2), SparseMatrix::from_dense({{1, 1}, {1, 0}, {0, 1}})) == 0);
    CHECK_THROWS_AS(trace_product(SparseMatrix(2, 2), SparseMatrix(2, 3)), DimensionError);
}

TEST_CASE("row_top_lambda keeps the largest positive entries") {
    const auto a = SparseMatrix::from_dense({{3, 1, 3, -2}, {0, 0, 0, 0}, {-1, 2, 0, 0}});
    CHECK(row_top_lambda(a, 1).to_dense() == Dense{{1, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK(row_top_lambda(a, 1, TieBreak::highest_index).to_dense() ==
          Dense{{0, 0, 1, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK(row_top_lambda(a, 2).to_dense() == Dense{{1, 0, 1, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK(row_top_lambda(a, 4).to_dense() == Dense{{1, 1, 1, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}});
    CHECK_THROWS_AS(row_top_lambda(a, 0), InvalidArgument);
    const auto b = SparseMatrix::from_dense({{3, 1, 2}, {0, 5, 0}, {2, 2, 1}});
    CHECK(row_top_lambda(b, 2).to_dense()[0] == std::vector<double>{1, 0, 1});
    CHECK(row_top_lambda(b, 2).to_dense()[1] == std::vector<double>{0, 1, 0});
    CHECK(row_top_lambda(b, 1).to_dense()[2] == std::vector<double>{1, 0, 0});
}

TEST_CASE("row_top_lambda agrees with a sort-based reference") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const index_t n = 1 + rng() % 5, K = 1 + rng() % 6;
        std::uniform_int_distribution<int> small(-1, 3);
        Dense d(n, std::vector<double>(K));
        for (auto& r : d)
            for (auto& v : r) v = small(rng);
        const std::size_t lambda = 1 + rng() % 3;
        const auto got = row_top_lambda(SparseMatrix::from_dense(d), lambda).to_dense();
        for (index_t i = 0; i < n; ++i) {
            std::vector<index_t> order(K);
            std::iota(order.begin(), order.end(), index_t{0});
            std::stable_sort(order.begin(), order.end(), [&](index_t x, index_t y) { return d[i][x] > d[i][y]; });
            std::vector<double> want(K, 0.0);
            for (std::size_t r = 0; r < std::min<std::size_t>(lambda, K); ++r)
                if (d[i][order[r]] > 0) want[order[r]] = 1.0;
            CHECK(got[i] == want);
        }
    }
}

TEST_CASE("binarize select_rows column_counts dot") {
    const auto a = SparseMatrix::from_dense({{0.5, -1, 0}, {0, 2, 3}});
    CHECK(binarize(a).to_dense() == Dense{{1, 0, 0}, {0, 1, 1}});
    const std::vector<index_t> ids{1, 1, 0};
    const auto s = select_rows(a, ids);
    CHECK(s.rows() == 3);
    CHECK(s.to_dense()[2] == std::vector<double>{0.5, -1, 0});
    CHECK(column_counts(a) == std::vector<std::size_t>{1, 2, 1});
    SparseVector w;
    w.push_back(1, 2.0);
    w.push_back(2, 1.0);
    CHECK(dot(w, a.row(1)) == 7.0);
    CHECK(dot(w, a.row(0)) == -2.0);
    CHECK(a.is_binary() == false);
    CHECK(binarize(a).is_binary());
}

}  // TEST_SUITE
