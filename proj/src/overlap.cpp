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

#include "oxmc/overlap.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "oxmc/error.hpp"

namespace oxmc {

namespace {

void check_shapes(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c) {
    if (y.rows() != m.rows() || c.rows() != y.cols() || c.cols() != m.cols()) {
        throw DimensionError("objective expects Y n x L, M n x K, C L x K; got Y " + y.shape_string() +
                             ", M " + m.shape_string() + ", C " + c.shape_string());
    }
}

// Sum over shared indices of a.val * b.val, and whether any index is shared.
std::pair<double, bool> intersect(RowView a, RowView b) {
    double s = 0.0;
    bool hit = false;
    std::size_t p = 0, q = 0;
    while (p < a.nnz() && q < b.nnz()) {
        if (a.idx[p] < b.idx[q]) {
            ++p;
        } else if (a.idx[p] > b.idx[q]) {
            ++q;
        } else {
            s += a.val[p++] * b.val[q++];
            hit = true;
        }
    }
    return {s, hit};
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::initial_kmeans: return "initial-kmeans";
        case Provenance::projected: return "projected";
        case Provenance::rlap: return "rlap";
        case Provenance::random: return "random";
    }
    return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "initial-kmeans") return Provenance::initial_kmeans;
    if (s == "projected") return Provenance::projected;
    if (s == "rlap") return Provenance::rlap;
    if (s == "random") return Provenance::random;
    throw InvalidArgument("unknown assignment provenance '" + s + "'");
}

void ClusterAssignment::validate() const {
    if (lambda == 0) {
        throw InvalidArgument("assignment lambda must be >= 1");
    }
    if (!C.is_binary()) {
        throw InvalidArgument("assignment matrix must be binary");
    }
    for (index_t l = 0; l < C.rows(); ++l) {
        const auto nnz = C.row(l).nnz();
        if (nnz == 0) {
            throw InvalidArgument("label " + std::to_string(l) + " is not assigned to any cluster");
        }
        if (nnz > lambda) {
            throw InvalidArgument("label " + std::to_string(l) + " occupies " + std::to_string(nnz) +
                                  " clusters, lambda=" + std::to_string(lambda));
        }
    }
}

void write_assignment(const SparseMatrix& c, std::ostream& out) {
    for (index_t l = 0; l < c.rows(); ++l) {
        for (index_t j : c.row(l).idx) out << l << ' ' << j << '\n';
    }
}

SparseMatrix read_assignment(std::istream& in, index_t L, index_t K, const std::string& source) {
    std::vector<Triplet> t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        long long l = 0, j = 0;
        std::string extra;
        if (!(ss >> l)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError(source, lineno, "expected \"label_id cluster_id\"");
        }
        if (!(ss >> j) || (ss >> extra)) {
            throw ParseError(source, lineno, "expected \"label_id cluster_id\"");
        }
        if (l < 0 || j < 0 || l >= L || j >= K) {
            throw ParseError(source, lineno, "incidence (" + std::to_string(l) + "," + std::to_string(j) +
                                                 ") outside " + std::to_string(L) + "x" + std::to_string(K));
        }
        t.push_back({static_cast<index_t>(l), static_cast<index_t>(j), 1.0});
    }
    // Repeated lines collapse to a single incidence.
    auto c = SparseMatrix::from_triplets(L, K, std::move(t));
    return binarize(c);
}

SparseMatrix match_scores(const SparseMatrix& y, const SparseMatrix& m) {
    if (y.rows() != m.rows()) {
        throw DimensionError("match_scores: Y " + y.shape_string() + " and M " + m.shape_string() +
                             " disagree on instances");
    }
    return multiply(transpose(y), m);
}

std::int64_t objective_binary(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c) {
    check_shapes(y, m, c);
    std::int64_t total = 0;
    for (index_t i = 0; i < y.rows(); ++i) {
        const auto mi = m.row(i);
        for (index_t l : y.row(i).idx) {
            if (intersect(c.row(l), mi).second) ++total;
        }
    }
    return total;
}

std::int64_t objective_relaxed(const SparseMatrix& y, const SparseMatrix& m, const SparseMatrix& c) {
    check_shapes(y, m, c);
    double total = 0.0;
    for (index_t i = 0; i < y.rows(); ++i) {
        const auto yi = y.row(i);
        const auto mi = m.row(i);
        for (std::size_t k = 0; k < yi.nnz(); ++k) {
            total += yi.val[k] * intersect(c.row(yi.idx[k]), mi).first;
        }
    }
    return static_cast<std::int64_t>(total);
}

ClusterAssignment project_assignment(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda,
                                     const ClusterAssignment& fallback) {
    if (lambda == 0) {
        throw InvalidArgument("project_assignment requires lambda >= 1");
    }
    if (fallback.L() != y.cols() || fallback.K() != m.cols()) {
        throw DimensionError("fallback assignment " + fallback.C.shape_string() + " does not match L=" +
                             std::to_string(y.cols()) + ", K=" + std::to_string(m.cols()));
    }
    const SparseMatrix top = row_top_lambda(match_scores(y, m), lambda);
    std::vector<SparseVector> rows(top.rows());
    for (index_t l = 0; l < top.rows(); ++l) {
        rows[l] = top.row(l).nnz() > 0 ? top.row_copy(l) : fallback.C.row_copy(l);
        if (rows[l].empty()) {
            throw InvalidArgument("fallback assignment leaves label " + std::to_string(l) + " uncovered");
        }
        if (rows[l].nnz() > lambda) {
            throw InvalidArgument("fallback row of label " + std::to_string(l) + " exceeds lambda");
        }
    }
    ClusterAssignment out{SparseMatrix::from_rows(top.cols(), std::move(rows)), lambda, Provenance::projected};
    return out;
}

std::size_t default_capacity(index_t L, index_t K) {
    if (K == 0) return L;
    // ceil(1.5 * L / K) in integers.
    return (3 * static_cast<std::size_t>(L) + 2 * K - 1) / (2 * static_cast<std::size_t>(K));
}

ClusterAssignment solve_rlap_greedy(const SparseMatrix& y, const SparseMatrix& m, std::size_t lambda,
                                    std::size_t xi, const std::optional<ClusterAssignment>& fallback) {
    if (lambda == 0) {
        throw InvalidArgument("solve_rlap_greedy requires lambda >= 1");
    }
    const index_t L = y.cols(), K = m.cols();
    if (K == 0 || static_cast<std::size_t>(xi) * K < L) {
        throw InvalidArgument("infeasible capacity: xi=" + std::to_string(xi) + " with K=" + std::to_string(K) +
                              " cannot hold L=" + std::to_string(L) + " labels");
    }
    if (fallback && (fallback->L() != L || fallback->K() != K)) {
        throw DimensionError("fallback assignment does not match L x K");
    }
    const SparseMatrix s = match_scores(y, m);

    struct Entry {
        double v;
        index_t l, j;
    };
    std::vector<Entry> entries;
    for (index_t l = 0; l < L; ++l) {
        const auto r = s.row(l);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            if (r.val[k] > 0.0) entries.push_back({r.val[k], l, r.idx[k]});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.v > b.v; });

    std::vector<std::vector<index_t>> chosen(L);
    std::vector<std::size_t> load(K, 0);
    auto take = [&](index_t l, index_t j) {
        chosen[l].push_back(j);
        ++load[j];
    };
    auto has = [&](index_t l, index_t j) {
        return std::find(chosen[l].begin(), chosen[l].end(), j) != chosen[l].end();
    };

    for (const auto& e : entries) {
        if (chosen[e.l].empty() && load[e.j] < xi) take(e.l, e.j);
    }
    for (index_t l = 0; l < L; ++l) {
        if (!chosen[l].empty()) continue;
        if (fallback) {
            for (index_t j : fallback->C.row(l).idx) {
                if (load[j] < xi && chosen[l].size() < lambda) take(l, j);
            }
        }
        if (chosen[l].empty()) {
            const auto least = std::min_element(load.begin(), load.end());
            take(l, static_cast<index_t>(least - load.begin()));
        }
    }
    for (const auto& e : entries) {
        if (chosen[e.l].size() < lambda && load[e.j] < xi && !has(e.l, e.j)) take(e.l, e.j);
    }

    std::vector<Triplet> t;
    for (index_t l = 0; l < L; ++l) {
        for (index_t j : chosen[l]) t.push_back({l, j, 1.0});
    }
    return {SparseMatrix::from_triplets(L, K, std::move(t)), lambda, Provenance::rlap};
}

ClusterAssignment random_duplicate(const ClusterAssignment& initial, std::uint64_t seed) {
    const index_t K = initial.K();
    if (K < 2) {
        throw InvalidArgument("random_duplicate needs at least 2 clusters");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<index_t> draw(0, K - 2);
    std::vector<Triplet> t;
    for (index_t l = 0; l < initial.L(); ++l) {
        const auto r = initial.C.row(l);
        if (r.nnz() == 0) {
            throw InvalidArgument("initial assignment leaves label " + std::to_string(l) + " uncovered");
        }
        const index_t home = r.idx[0];
        index_t other = draw(rng);
        if (other >= home) ++other;
        t.push_back({l, home, 1.0});
        t.push_back({l, other, 1.0});
    }
    return {SparseMatrix::from_triplets(initial.L(), K, std::move(t)), 2, Provenance::random};
}

}  // namespace oxmc
