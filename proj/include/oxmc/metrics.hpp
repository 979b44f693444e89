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

#include <iosfwd>
#include <string>
#include <vector>

#include "oxmc/dataset.hpp"

namespace oxmc {

// Inverse-propensity weights for tail-sensitive metrics. Label propensity
// follows Jain et al. (KDD 2016):
//   p_l = 1 / (1 + C exp(-A log(N_l + B))),  C = (log n - 1) (B + 1)^A,
// where N_l counts the training positives of label l.
struct Propensities {
    std::vector<double> p;
    double A = 0.55;
    double B = 1.5;
};

Propensities compute_propensities(const SparseMatrix& y_train, double A = 0.55, double B = 1.5);

// Mean over instances of |top-k hits| / k. Predictions beyond the k-th are
// ignored; preds[i] corresponds to row i of y.
double precision_at_k(const std::vector<Prediction>& preds, const SparseMatrix& y, std::size_t k);

// Per instance: sum of 1/p over the hits in the top k, divided by the best
// value achievable on that instance (its k largest 1/p among true labels);
// averaged over instances that have at least one label.
double psp_at_k(const std::vector<Prediction>& preds, const SparseMatrix& y, const Propensities& prop,
                std::size_t k);

struct MetricRow {
    std::string name;
    double p1 = 0, p3 = 0, p5 = 0;
    double psp1 = 0, psp3 = 0, psp5 = 0;
};

MetricRow evaluate(const std::string& name, const std::vector<Prediction>& preds, const SparseMatrix& y,
                   const Propensities& prop);

// Aligned text table (percentages, two decimals) or CSV with a header row.
void write_report(const std::vector<MetricRow>& rows, std::ostream& out, bool csv = false);

}  // namespace oxmc
