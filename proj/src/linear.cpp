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

#include "oxmc/linear.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "oxmc/error.hpp"

namespace oxmc {

namespace {

void check(const TrainProblem& p) {
    if (p.x == nullptr) {
        throw InvalidArgument("train_ovr: no feature matrix");
    }
    if (p.positives.empty()) {
        throw InvalidArgument("train_ovr: empty positive set");
    }
    if (!(p.options.reg_C > 0.0)) {
        throw InvalidArgument("train_ovr: reg_C must be positive");
    }
    std::vector<index_t> pos(p.positives.begin(), p.positives.end());
    std::sort(pos.begin(), pos.end());
    for (index_t i : p.negatives) {
        if (std::binary_search(pos.begin(), pos.end(), i)) {
            throw InvalidArgument("train_ovr: instance " + std::to_string(i) + " is both positive and negative");
        }
    }
    for (index_t i : pos) {
        if (i >= p.x->rows()) throw DimensionError("train_ovr: positive row out of range");
    }
    for (index_t i : p.negatives) {
        if (i >= p.x->rows()) throw DimensionError("train_ovr: negative row out of range");
    }
}

}  // namespace

TrainResult train_ovr(const TrainProblem& problem) {
    check(problem);
    const auto& x = *problem.x;
    const auto& opt = problem.options;
    const std::size_t n = problem.positives.size() + problem.negatives.size();

    std::vector<index_t> rows;
    std::vector<double> y;
    rows.reserve(n);
    y.reserve(n);
    for (index_t i : problem.positives) {
        rows.push_back(i);
        y.push_back(1.0);
    }
    for (index_t i : problem.negatives) {
        rows.push_back(i);
        y.push_back(-1.0);
    }

    // Compact copy of the rows restricted to the features they touch, so the
    // cost of a problem scales with its nnz rather than with d.
    std::vector<index_t> features;
    for (index_t i : rows) {
        const auto r = x.row(i);
        features.insert(features.end(), r.idx.begin(), r.idx.end());
    }
    std::sort(features.begin(), features.end());
    features.erase(std::unique(features.begin(), features.end()), features.end());
    std::vector<offset_t> ptr(n + 1, 0);
    std::vector<index_t> lidx;
    std::vector<double> lval;
    for (std::size_t k = 0; k < n; ++k) {
        const auto r = x.row(rows[k]);
        for (std::size_t t = 0; t < r.nnz(); ++t) {
            lidx.push_back(static_cast<index_t>(
                std::lower_bound(features.begin(), features.end(), r.idx[t]) - features.begin()));
            lval.push_back(r.val[t]);
        }
        ptr[k + 1] = lidx.size();
    }

    // Squared hinge: D_ii = 1/(2C), no upper bound on alpha.
    const double diag = 0.5 / opt.reg_C;
    std::vector<double> qd(n), alpha(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double sq = diag;
        for (offset_t t = ptr[k]; t < ptr[k + 1]; ++t) sq += lval[t] * lval[t];
        qd[k] = sq;
    }
    std::vector<double> w(features.size(), 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::mt19937_64 rng(opt.seed);

    TrainResult result;
    for (result.epochs = 0; result.epochs < opt.max_iter;) {
        std::shuffle(order.begin(), order.end(), rng);
        double violation = 0.0;
        for (std::size_t k : order) {
            double wx = 0.0;
            for (offset_t t = ptr[k]; t < ptr[k + 1]; ++t) wx += w[lidx[t]] * lval[t];
            const double g = y[k] * wx - 1.0 + diag * alpha[k];
            const double pg = alpha[k] == 0.0 ? std::min(g, 0.0) : g;
            violation = std::max(violation, std::abs(pg));
            if (pg != 0.0) {
                const double old = alpha[k];
                alpha[k] = std::max(old - g / qd[k], 0.0);
                const double delta = (alpha[k] - old) * y[k];
                for (offset_t t = ptr[k]; t < ptr[k + 1]; ++t) w[lidx[t]] += delta * lval[t];
            }
        }
        ++result.epochs;
        result.max_violation = violation;
        if (violation < opt.eps) break;
    }

    for (std::size_t j = 0; j < w.size(); ++j) {
        if (std::abs(w[j]) > opt.weight_threshold) {
            result.weights.push_back(features[j], w[j]);
        }
    }
    return result;
}

double squared_hinge_objective(const TrainProblem& problem, std::span<const double> w) {
    const auto& x = *problem.x;
    double reg = 0.0;
    for (double v : w) reg += v * v;
    double loss = 0.0;
    auto add = [&](index_t i, double label) {
        const auto r = x.row(i);
        double wx = 0.0;
        for (std::size_t t = 0; t < r.nnz(); ++t) wx += w[r.idx[t]] * r.val[t];
        const double m = std::max(0.0, 1.0 - label * wx);
        loss += m * m;
    };
    for (index_t i : problem.positives) add(i, 1.0);
    for (index_t i : problem.negatives) add(i, -1.0);
    return 0.5 * reg + problem.options.reg_C * loss;
}

}  // namespace oxmc
