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

#include <filesystem>
#include <string>
#include <vector>

#include "oxmc/sparse.hpp"

namespace oxmc {

// Features X (n x d) and binary labels Y (n x L) for the same instances.
struct Dataset {
    SparseMatrix X;
    SparseMatrix Y;

    index_t n() const { return X.rows(); }
    index_t d() const { return X.cols(); }
    index_t L() const { return Y.cols(); }

    // Instances without a single stored feature.
    std::vector<index_t> degenerate_rows() const;
    // Throws InvalidArgument unless X and Y agree on n and Y is binary.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct ScoredLabel {
    index_t label;
    double score;

    bool operator==(const ScoredLabel&) const = default;
};

// Ranked labels for one instance: non-increasing score, distinct labels.
struct Prediction {
    index_t instance = 0;
    std::vector<ScoredLabel> labels;
};

// Text format: header "n d L", then n lines "l1,l2,... i1:v1 i2:v2 ..." with
// zero-based indices. A line that starts with a space has no labels.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
void save_dataset(const Dataset& data, const std::filesystem::path& path);
void write_dataset(const Dataset& data, std::ostream& out);

SparseMatrix normalize_rows(const SparseMatrix& x);

// One line per instance: "label:score" pairs, descending score (ties by
// lower label), six decimals.
void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path);
void write_predictions(const std::vector<Prediction>& preds, std::ostream& out);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

// Sorts by (score desc, label asc).
void sort_ranked(std::vector<ScoredLabel>& labels);

// Shortest decimal text that parses back to exactly `v`.
std::string format_exact(double v);

}  // namespace oxmc
