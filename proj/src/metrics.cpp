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

#include "oxmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>

#include "oxmc/error.hpp"

namespace oxmc {

namespace {

void check(const std::vector<Prediction>& preds, const SparseMatrix& y, std::size_t k) {
    if (k == 0) {
        throw InvalidArgument("metrics need k >= 1");
    }
    if (preds.size() != y.rows()) {
        throw DimensionError(std::to_string(preds.size()) + " predictions for " + std::to_string(y.rows()) +
                             " instances");
    }
}

bool relevant(RowView truth, index_t label) {
    return std::binary_search(truth.idx.begin(), truth.idx.end(), label);
}

}  // namespace

Propensities compute_propensities(const SparseMatrix& y_train, double A, double B) {
    const double n = static_cast<double>(y_train.rows());
    if (y_train.rows() < 2) {
        throw InvalidArgument("propensities need at least two training instances");
    }
    const double c = (std::log(n) - 1.0) * std::pow(B + 1.0, A);
    const auto counts = column_counts(y_train);
    Propensities prop;
    prop.A = A;
    prop.B = B;
    prop.p.resize(counts.size());
    for (std::size_t l = 0; l < counts.size(); ++l) {
        prop.p[l] = 1.0 / (1.0 + c * std::exp(-A * std::log(static_cast<double>(counts[l]) + B)));
    }
    return prop;
}

double precision_at_k(const std::vector<Prediction>& preds, const SparseMatrix& y, std::size_t k) {
    check(preds, y, k);
    if (preds.empty()) return 0.0;
    double total = 0.0;
    for (index_t i = 0; i < y.rows(); ++i) {
        const auto truth = y.row(i);
        const auto& ranked = preds[i].labels;
        std::size_t hits = 0;
        for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) hits += relevant(truth, ranked[r].label);
        total += static_cast<double>(hits) / static_cast<double>(k);
    }
    return total / static_cast<double>(y.rows());
}

double psp_at_k(const std::vector<Prediction>& preds, const SparseMatrix& y, const Propensities& prop,
                std::size_t k) {
    check(preds, y, k);
    if (prop.p.size() != y.cols()) {
        throw DimensionError("propensities cover " + std::to_string(prop.p.size()) + " labels, Y has " +
                             std::to_string(y.cols()));
    }
    double total = 0.0;
    std::size_t counted = 0;
    std::vector<double> ideal;
    for (index_t i = 0; i < y.rows(); ++i) {
        const auto truth = y.row(i);
        if (truth.nnz() == 0) continue;
        ideal.clear();
        for (index_t l : truth.idx) ideal.push_back(1.0 / prop.p[l]);
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        double best = 0.0;
        for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) best += ideal[r];
        double got = 0.0;
        const auto& ranked = preds[i].labels;
        for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
            if (ranked[r].label < prop.p.size() && relevant(truth, ranked[r].label)) got += 1.0 / prop.p[ranked[r].label];
        }
        total += got / best;
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

MetricRow evaluate(const std::string& name, const std::vector<Prediction>& preds, const SparseMatrix& y,
                   const Propensities& prop) {
    MetricRow row;
    row.name = name;
    row.p1 = precision_at_k(preds, y, 1);
    row.p3 = precision_at_k(preds, y, 3);
    row.p5 = precision_at_k(preds, y, 5);
    row.psp1 = psp_at_k(preds, y, prop, 1);
    row.psp3 = psp_at_k(preds, y, prop, 3);
    row.psp5 = psp_at_k(preds, y, prop, 5);
    return row;
}

void write_report(const std::vector<MetricRow>& rows, std::ostream& out, bool csv) {
    char buf[256];
    if (csv) {
        out << "model,P@1,P@3,P@5,PSP@1,PSP@3,PSP@5\n";
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.p1, r.p3, r.p5, r.psp1, r.psp3, r.psp5);
            out << r.name << buf << '\n';
        }
        return;
    }
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    const int w = static_cast<int>(width);
    std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %8s %8s %8s", w, "model", "P@1", "P@3", "P@5", "PSP@1", "PSP@3",
                  "PSP@5");
    out << buf << '\n';
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-*s %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f", w, r.name.c_str(), 100 * r.p1,
                      100 * r.p3, 100 * r.p5, 100 * r.psp1, 100 * r.psp3, 100 * r.psp5);
        out << buf << '\n';
    }
}

}  // namespace oxmc
