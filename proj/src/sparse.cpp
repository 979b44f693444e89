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

#include "oxmc/sparse.hpp"

#include <algorithm>
#include <numeric>

#include "oxmc/error.hpp"

namespace oxmc {

namespace {

std::string shape(index_t r, index_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

// Sorts (index, value) pairs of one row, sums duplicates and drops zeros.
void canonicalize(SparseVector& row) {
    std::vector<std::size_t> order(row.idx.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row.idx[a] < row.idx[b]; });
    SparseVector out;
    out.idx.reserve(order.size());
    out.val.reserve(order.size());
    for (std::size_t k = 0; k < order.size();) {
        const index_t j = row.idx[order[k]];
        double sum = 0.0;
        for (; k < order.size() && row.idx[order[k]] == j; ++k) {
            sum += row.val[order[k]];
        }
        if (sum != 0.0) {
            out.push_back(j, sum);
        }
    }
    row = std::move(out);
}

}  // namespace

SparseMatrix SparseMatrix::from_csr(index_t rows, index_t cols, std::vector<offset_t> row_ptr,
                                    std::vector<index_t> col_idx, std::vector<double> values) {
    if (row_ptr.size() != static_cast<std::size_t>(rows) + 1 || row_ptr.front() != 0) {
        throw InvalidArgument("row_ptr must have rows+1 entries starting at 0");
    }
    if (col_idx.size() != values.size() || row_ptr.back() != col_idx.size()) {
        throw InvalidArgument("row_ptr, col_idx and values disagree on nnz");
    }
    for (index_t i = 0; i < rows; ++i) {
        if (row_ptr[i] > row_ptr[i + 1]) {
            throw InvalidArgument("row_ptr is not monotone at row " + std::to_string(i));
        }
        for (offset_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col_idx[k] >= cols) {
                throw InvalidArgument("column index out of range in row " + std::to_string(i));
            }
            if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1]) {
                throw InvalidArgument("column indices not strictly ascending in row " +
                                      std::to_string(i));
            }
            if (values[k] == 0.0) {
                throw InvalidArgument("explicit zero stored in row " + std::to_string(i));
            }
        }
    }
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    return m;
}

SparseMatrix SparseMatrix::from_triplets(index_t rows, index_t cols, std::vector<Triplet> triplets) {
    std::vector<SparseVector> by_row(rows);
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) {
            throw InvalidArgument("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                  ") outside " + shape(rows, cols));
        }
        by_row[t.row].push_back(t.col, t.value);
    }
    return from_rows(cols, std::move(by_row));
}

SparseMatrix SparseMatrix::from_rows(index_t cols, std::vector<SparseVector> rows) {
    SparseMatrix m(static_cast<index_t>(rows.size()), cols);
    std::size_t total = 0;
    for (auto& r : rows) {
        if (r.idx.size() != r.val.size()) {
            throw InvalidArgument("sparse row has mismatched idx/val lengths");
        }
        canonicalize(r);
        if (!r.idx.empty() && r.idx.back() >= cols) {
            throw InvalidArgument("column index " + std::to_string(r.idx.back()) +
                                  " out of range for " + std::to_string(cols) + " columns");
        }
        total += r.nnz();
    }
    m.col_idx_.reserve(total);
    m.values_.reserve(total);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.col_idx_.insert(m.col_idx_.end(), rows[i].idx.begin(), rows[i].idx.end());
        m.values_.insert(m.values_.end(), rows[i].val.begin(), rows[i].val.end());
        m.row_ptr_[i + 1] = m.col_idx_.size();
    }
    return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
    const index_t rows = static_cast<index_t>(dense.size());
    const index_t cols = rows == 0 ? 0 : static_cast<index_t>(dense.front().size());
    std::vector<SparseVector> out(rows);
    for (index_t i = 0; i < rows; ++i) {
        if (dense[i].size() != cols) {
            throw InvalidArgument("ragged dense matrix");
        }
        for (index_t j = 0; j < cols; ++j) {
            if (dense[i][j] != 0.0) {
                out[i].push_back(j, dense[i][j]);
            }
        }
    }
    return from_rows(cols, std::move(out));
}

SparseMatrix SparseMatrix::identity(index_t n) {
    std::vector<offset_t> ptr(n + 1);
    std::iota(ptr.begin(), ptr.end(), offset_t{0});
    std::vector<index_t> idx(n);
    std::iota(idx.begin(), idx.end(), index_t{0});
    return from_csr(n, n, std::move(ptr), std::move(idx), std::vector<double>(n, 1.0));
}

SparseVector SparseMatrix::row_copy(index_t i) const {
    const auto r = row(i);
    return {std::vector<index_t>(r.idx.begin(), r.idx.end()),
            std::vector<double>(r.val.begin(), r.val.end())};
}

double SparseMatrix::at(index_t i, index_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.idx.begin(), r.idx.end(), j);
    if (it == r.idx.end() || *it != j) {
        return 0.0;
    }
    return r.val[static_cast<std::size_t>(it - r.idx.begin())];
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(rows_, std::vector<double>(cols_, 0.0));
    for (index_t i = 0; i < rows_; ++i) {
        const auto r = row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            d[i][r.idx[k]] = r.val[k];
        }
    }
    return d;
}

bool SparseMatrix::is_binary() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 1.0; });
}

std::string SparseMatrix::shape_string() const { return shape(rows_, cols_); }

SparseMatrix transpose(const SparseMatrix& a) {
    std::vector<offset_t> ptr(static_cast<std::size_t>(a.cols()) + 1, 0);
    for (index_t j : a.col_idx()) {
        ++ptr[j + 1];
    }
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    std::vector<index_t> idx(a.nnz());
    std::vector<double> val(a.nnz());
    std::vector<offset_t> cursor(ptr.begin(), ptr.end() - 1);
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            const offset_t dst = cursor[r.idx[k]]++;
            idx[dst] = i;
            val[dst] = r.val[k];
        }
    }
    return SparseMatrix::from_csr(a.cols(), a.rows(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("cannot multiply " + a.shape_string() + " by " + b.shape_string());
    }
    // Gustavson row-by-row accumulation with a dense scratch row.
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<char> touched(b.cols(), 0);
    std::vector<index_t> pattern;
    std::vector<offset_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
    std::vector<index_t> idx;
    std::vector<double> val;
    for (index_t i = 0; i < a.rows(); ++i) {
        pattern.clear();
        const auto ra = a.row(i);
        for (std::size_t p = 0; p < ra.nnz(); ++p) {
            const auto rb = b.row(ra.idx[p]);
            const double s = ra.val[p];
            for (std::size_t q = 0; q < rb.nnz(); ++q) {
                const index_t j = rb.idx[q];
                if (!touched[j]) {
                    touched[j] = 1;
                    pattern.push_back(j);
                }
                acc[j] += s * rb.val[q];
            }
        }
        std::sort(pattern.begin(), pattern.end());
        for (index_t j : pattern) {
            if (acc[j] != 0.0) {
                idx.push_back(j);
                val.push_back(acc[j]);
            }
            acc[j] = 0.0;
            touched[j] = 0;
        }
        ptr[i + 1] = idx.size();
    }
    return SparseMatrix::from_csr(a.rows(), b.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix spmm_pattern(const SparseMatrix& a, const SparseMatrix& b_transposed) {
    if (a.cols() != b_transposed.cols()) {
        throw DimensionError("inner dimensions disagree: " + a.shape_string() + " times (" +
                             b_transposed.shape_string() + ")^T");
    }
    return multiply(a, transpose(b_transposed));
}

std::int64_t trace_product(const SparseMatrix& y, const SparseMatrix& y_hat) {
    if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
        throw DimensionError("trace_product shape mismatch: " + y.shape_string() + " vs " +
                             y_hat.shape_string());
    }
    std::int64_t count = 0;
    for (index_t i = 0; i < y.rows(); ++i) {
        const auto a = y.row(i);
        const auto b = y_hat.row(i);
        std::size_t p = 0, q = 0;
        while (p < a.nnz() && q < b.nnz()) {
            if (a.idx[p] < b.idx[q]) {
                ++p;
            } else if (a.idx[p] > b.idx[q]) {
                ++q;
            } else {
                ++count;
                ++p;
                ++q;
            }
        }
    }
    return count;
}

SparseMatrix row_top_lambda(const SparseMatrix& a, std::size_t lambda, TieBreak tie_break) {
    if (lambda == 0) {
        throw InvalidArgument("row_top_lambda requires lambda >= 1");
    }
    std::vector<offset_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
    std::vector<index_t> idx;
    std::vector<std::size_t> order;
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        order.clear();
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            if (r.val[k] > 0.0) {
                order.push_back(k);
            }
        }
        const std::size_t keep = std::min(lambda, order.size());
        // Stored indices ascend, so position order is column order.
        auto better = [&](std::size_t x, std::size_t y) {
            if (r.val[x] != r.val[y]) {
                return r.val[x] > r.val[y];
            }
            return tie_break == TieBreak::lowest_index ? x < y : x > y;
        };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                          better);
        order.resize(keep);
        std::sort(order.begin(), order.end());
        for (std::size_t k : order) {
            idx.push_back(r.idx[k]);
        }
        ptr[i + 1] = idx.size();
    }
    std::vector<double> val(idx.size(), 1.0);
    return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix binarize(const SparseMatrix& a) {
    std::vector<offset_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
    std::vector<index_t> idx;
    for (index_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            if (r.val[k] > 0.0) {
                idx.push_back(r.idx[k]);
            }
        }
        ptr[i + 1] = idx.size();
    }
    std::vector<double> val(idx.size(), 1.0);
    return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix select_rows(const SparseMatrix& a, std::span<const index_t> ids) {
    std::vector<offset_t> ptr(ids.size() + 1, 0);
    std::vector<index_t> idx;
    std::vector<double> val;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= a.rows()) {
            throw DimensionError("row id " + std::to_string(ids[i]) + " out of range for " +
                                 a.shape_string());
        }
        const auto r = a.row(ids[i]);
        idx.insert(idx.end(), r.idx.begin(), r.idx.end());
        val.insert(val.end(), r.val.begin(), r.val.end());
        ptr[i + 1] = idx.size();
    }
    return SparseMatrix::from_csr(static_cast<index_t>(ids.size()), a.cols(), std::move(ptr),
                                  std::move(idx), std::move(val));
}

std::vector<std::size_t> column_counts(const SparseMatrix& a) {
    std::vector<std::size_t> counts(a.cols(), 0);
    for (index_t j : a.col_idx()) {
        ++counts[j];
    }
    return counts;
}

double dot(const SparseVector& w, RowView x) {
    double s = 0.0;
    std::size_t p = 0, q = 0;
    while (p < w.nnz() && q < x.nnz()) {
        if (w.idx[p] < x.idx[q]) {
            ++p;
        } else if (w.idx[p] > x.idx[q]) {
            ++q;
        } else {
            s += w.val[p++] * x.val[q++];
        }
    }
    return s;
}

}  // namespace oxmc
