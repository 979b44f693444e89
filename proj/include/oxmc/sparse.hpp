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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oxmc {

using index_t = std::uint32_t;
using offset_t = std::size_t;

// A sparse vector with strictly ascending indices. Used for matrix rows and
// for classifier weights.
struct SparseVector {
    std::vector<index_t> idx;
    std::vector<double> val;

    std::size_t nnz() const { return idx.size(); }
    bool empty() const { return idx.empty(); }
    void push_back(index_t i, double v) {
        idx.push_back(i);
        val.push_back(v);
    }
    bool operator==(const SparseVector&) const = default;
};

// Read-only view of one CSR row.
struct RowView {
    std::span<const index_t> idx;
    std::span<const double> val;

    std::size_t nnz() const { return idx.size(); }
};

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

enum class TieBreak { lowest_index, highest_index };

// Compressed sparse row matrix. Immutable once built: all mutating
// operations return a new matrix.
//
// Invariants: row_ptr has rows+1 monotone entries; column indices inside a
// row are strictly ascending and < cols; no stored value is exactly zero.
class SparseMatrix {
  public:
    SparseMatrix() : row_ptr_(1, 0) {}
    SparseMatrix(index_t rows, index_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    // Takes ownership of raw CSR arrays; throws InvalidArgument if any
    // invariant is violated.
    static SparseMatrix from_csr(index_t rows, index_t cols, std::vector<offset_t> row_ptr,
                                 std::vector<index_t> col_idx, std::vector<double> values);
    // Duplicated coordinates are summed; resulting zeros are dropped.
    static SparseMatrix from_triplets(index_t rows, index_t cols, std::vector<Triplet> triplets);
    // Rows may be unsorted; duplicates are summed, zeros dropped.
    static SparseMatrix from_rows(index_t cols, std::vector<SparseVector> rows);
    static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);
    static SparseMatrix identity(index_t n);

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    offset_t nnz() const { return col_idx_.size(); }

    RowView row(index_t i) const {
        const offset_t b = row_ptr_[i], e = row_ptr_[i + 1];
        return {std::span<const index_t>(col_idx_.data() + b, e - b),
                std::span<const double>(values_.data() + b, e - b)};
    }
    SparseVector row_copy(index_t i) const;

    // Binary search inside row i; 0 when absent.
    double at(index_t i, index_t j) const;

    const std::vector<offset_t>& row_ptr() const { return row_ptr_; }
    const std::vector<index_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    std::vector<std::vector<double>> to_dense() const;
    bool is_binary() const;
    std::string shape_string() const;

    bool operator==(const SparseMatrix&) const = default;

  private:
    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<offset_t> row_ptr_;
    std::vector<index_t> col_idx_;
    std::vector<double> values_;
};

SparseMatrix transpose(const SparseMatrix& a);

// General product a * b.
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

// a * b where b is supplied in transposed form (rows of `b_transposed` are the
// columns of b). Inner dimension is a.cols() == b_transposed.cols().
SparseMatrix spmm_pattern(const SparseMatrix& a, const SparseMatrix& b_transposed);

// Number of coordinates stored in both matrices. For binary Y and Yhat this is
// Tr(Y^T Yhat).
std::int64_t trace_product(const SparseMatrix& y, const SparseMatrix& y_hat);

// Binary matrix keeping, per row, the `lambda` largest strictly positive
// entries. Ties are resolved by column index according to `tie_break`.
SparseMatrix row_top_lambda(const SparseMatrix& a, std::size_t lambda,
                            TieBreak tie_break = TieBreak::lowest_index);

// Element-wise indicator of strictly positive entries.
SparseMatrix binarize(const SparseMatrix& a);

// Row i of the result is a.row(ids[i]).
SparseMatrix select_rows(const SparseMatrix& a, std::span<const index_t> ids);

// Column sums of nonzero counts.
std::vector<std::size_t> column_counts(const SparseMatrix& a);

double dot(const SparseVector& w, RowView x);

}  // namespace oxmc
