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

#include "oxmc/synth.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "oxmc/cluster.hpp"
#include "oxmc/error.hpp"

namespace oxmc {

namespace {

std::vector<std::vector<index_t>> chunk(const std::vector<index_t>& ids, std::size_t k) {
    std::vector<std::vector<index_t>> out;
    for (std::size_t b = 0; b < ids.size(); b += k) {
        out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(b),
                         ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), b + k)));
    }
    return out;
}

std::vector<std::vector<index_t>> kmeans_groups(const Dataset& data, std::size_t count, std::uint64_t seed) {
    const auto pifa = pifa_embeddings(data.X, data.Y);
    const auto part = balanced_kmeans(pifa.embeddings, count, seed);
    std::vector<std::vector<index_t>> groups(count);
    for (index_t l = 0; l < part.size(); ++l) groups[part[l]].push_back(l);
    return groups;
}

SparseVector random_block(std::mt19937_64& rng, index_t begin, index_t end, double presence, double lo, double hi) {
    std::bernoulli_distribution keep(presence);
    std::uniform_real_distribution<double> value(lo, hi);
    SparseVector v;
    for (index_t j = begin; j < end; ++j) {
        if (keep(rng)) v.push_back(j, value(rng));
    }
    return v;
}

void append(SparseVector& dst, const SparseVector& src) {
    dst.idx.insert(dst.idx.end(), src.idx.begin(), src.idx.end());
    dst.val.insert(dst.val.end(), src.val.begin(), src.val.end());
}

}  // namespace

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::easy: return "easy";
        case FusionMode::medium: return "medium";
        case FusionMode::hard: return "hard";
    }
    return "unknown";
}

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "easy") return FusionMode::easy;
    if (s == "medium") return FusionMode::medium;
    if (s == "hard") return FusionMode::hard;
    throw InvalidArgument("unknown fusion mode '" + s + "' (expected easy, medium or hard)");
}

FusedDataset fuse_labels(const Dataset& data, const FusionSpec& spec) {
    data.validate();
    const index_t L = data.L();
    const std::size_t k = spec.merge_k;
    if (k < 2) {
        throw InvalidArgument("merge_k must be >= 2");
    }
    if (L < k) {
        throw InvalidArgument("cannot merge groups of " + std::to_string(k) + " from " + std::to_string(L) + " labels");
    }
    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<index_t>> groups;
    switch (spec.mode) {
        case FusionMode::easy:
            groups = kmeans_groups(data, (L + k - 1) / k, rng());
            break;
        case FusionMode::medium: {
            if (spec.group_width == 0) {
                throw InvalidArgument("medium fusion needs group_width >= 1");
            }
            const std::size_t width = spec.group_width * k;
            const std::size_t num_clusters = (L + width - 1) / width;
            std::vector<std::vector<index_t>> clusters;
            if (num_clusters == 1) {
                clusters.emplace_back(L);
                std::iota(clusters[0].begin(), clusters[0].end(), index_t{0});
            } else {
                clusters = kmeans_groups(data, num_clusters, rng());
            }
            // Whole groups of k inside each cluster; the remainders of all
            // clusters are pooled so the total stays ceil(L/k).
            std::vector<index_t> leftover;
            for (auto& cluster : clusters) {
                std::shuffle(cluster.begin(), cluster.end(), rng);
                const std::size_t whole = cluster.size() / k * k;
                for (auto& g : chunk({cluster.begin(), cluster.begin() + static_cast<std::ptrdiff_t>(whole)}, k)) {
                    groups.push_back(std::move(g));
                }
                leftover.insert(leftover.end(), cluster.begin() + static_cast<std::ptrdiff_t>(whole), cluster.end());
            }
            std::shuffle(leftover.begin(), leftover.end(), rng);
            for (auto& g : chunk(leftover, k)) groups.push_back(std::move(g));
            break;
        }
        case FusionMode::hard: {
            std::vector<index_t> ids(L);
            std::iota(ids.begin(), ids.end(), index_t{0});
            std::shuffle(ids.begin(), ids.end(), rng);
            groups = chunk(ids, k);
            break;
        }
    }

    FusedDataset out;
    out.fused_of.assign(L, 0);
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
        for (index_t l : g) out.fused_of[l] = static_cast<index_t>(out.groups.size());
        out.groups.push_back(std::move(g));
    }
    std::vector<Triplet> t;
    for (index_t i = 0; i < data.n(); ++i) {
        for (index_t l : data.Y.row(i).idx) t.push_back({i, out.fused_of[l], 1.0});
    }
    out.data.X = data.X;
    out.data.Y = binarize(SparseMatrix::from_triplets(data.n(), static_cast<index_t>(out.groups.size()), std::move(t)));
    return out;
}

void write_fusion_mapping(const std::vector<std::vector<index_t>>& groups, std::ostream& out) {
    for (std::size_t f = 0; f < groups.size(); ++f) {
        out << f << ':';
        for (std::size_t p = 0; p < groups[f].size(); ++p) out << (p == 0 ? " " : ",") << groups[f][p];
        out << '\n';
    }
}

BimodalToy make_bimodal_toy(const BimodalSpec& spec) {
    const std::size_t m = spec.distractors_per_mode;
    const index_t half = spec.d / 2;
    // Per mode: `core_dims` features shared by every instance of the mode,
    // then one block per sub-topic (m distractors and the fused label).
    const std::size_t core = spec.core_dims;
    const std::size_t block = core < half ? (half - core) / (m + 1) : 0;
    if (m == 0 || core == 0 || block < 2) {
        throw InvalidArgument("make_bimodal_toy: d=" + std::to_string(spec.d) + " too small for " +
                              std::to_string(m) + " distractors per mode");
    }
    if (!(spec.topic_presence > 0.0 && spec.topic_presence <= 1.0)) {
        throw InvalidArgument("make_bimodal_toy: topic_presence must be in (0, 1]");
    }
    std::mt19937_64 rng(spec.seed);
    BimodalToy toy;
    toy.fused_label = 0;
    for (std::size_t t = 0; t < m; ++t) toy.mode_a_labels.push_back(static_cast<index_t>(1 + t));
    for (std::size_t t = 0; t < m; ++t) toy.mode_b_labels.push_back(static_cast<index_t>(1 + m + t));

    std::vector<SparseVector> xs, ys;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int mode = 0; mode < 2; ++mode) {
        const index_t base = mode == 0 ? 0 : half;
        const double fused_share = mode == 0 ? spec.major_fraction : spec.minor_fraction;
        const auto& distractors = mode == 0 ? toy.mode_a_labels : toy.mode_b_labels;
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        std::uniform_int_distribution<index_t> noise_dim(base, base + half - 1);
        for (std::size_t i = 0; i < spec.n_per_mode; ++i) {
            const bool fused = unit(rng) < fused_share;
            // Sub-topic m is the fused label's block.
            const std::size_t topic = fused ? m : pick(rng);
            const index_t begin = base + static_cast<index_t>(core + topic * block);
            SparseVector x = random_block(rng, base, base + static_cast<index_t>(core), 1.0, 0.8, 1.0);
            append(x, random_block(rng, begin, begin + static_cast<index_t>(block), spec.topic_presence,
                                   0.5 * spec.topic_weight, spec.topic_weight));
            for (int r = 0; r < 2; ++r) x.push_back(noise_dim(rng), 0.3 * unit(rng));
            xs.push_back(std::move(x));
            SparseVector y;
            y.push_back(fused ? toy.fused_label : distractors[topic], 1.0);
            ys.push_back(std::move(y));
            toy.mode.push_back(mode);
        }
    }
    const index_t L = static_cast<index_t>(1 + 2 * m);
    toy.data.X = normalize_rows(SparseMatrix::from_rows(spec.d, std::move(xs)));
    toy.data.Y = SparseMatrix::from_rows(L, std::move(ys));
    return toy;
}

Dataset make_planted_corpus(const PlantedCorpusSpec& spec) {
    if (spec.L == 0 || spec.d < spec.prototype_nnz || spec.max_labels == 0) {
        throw InvalidArgument("make_planted_corpus: inconsistent sizes");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<index_t> dim(0, spec.d - 1);
    std::uniform_real_distribution<double> weight(0.5, 1.5), jitter(0.7, 1.3), noise(0.0, 0.5);
    std::bernoulli_distribution keep(0.8);

    std::vector<SparseVector> proto(spec.L);
    for (auto& p : proto) {
        std::vector<index_t> dims;
        while (dims.size() < spec.prototype_nnz) {
            const index_t j = dim(rng);
            if (std::find(dims.begin(), dims.end(), j) == dims.end()) dims.push_back(j);
        }
        std::sort(dims.begin(), dims.end());
        for (index_t j : dims) p.push_back(j, weight(rng));
    }

    std::uniform_int_distribution<index_t> label(0, spec.L - 1);
    std::uniform_int_distribution<std::size_t> count(1, spec.max_labels);
    std::vector<SparseVector> xs(spec.n), ys(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        // The first L instances visit every label once so none is empty.
        std::vector<index_t> labels{i < spec.L ? static_cast<index_t>(i) : label(rng)};
        const std::size_t want = count(rng);
        while (labels.size() < want) {
            const index_t l = label(rng);
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
        }
        for (index_t l : labels) {
            ys[i].push_back(l, 1.0);
            for (std::size_t k = 0; k < proto[l].nnz(); ++k) {
                if (keep(rng)) xs[i].push_back(proto[l].idx[k], proto[l].val[k] * jitter(rng));
            }
        }
        for (std::size_t r = 0; r < spec.noise_nnz; ++r) xs[i].push_back(dim(rng), noise(rng));
    }
    Dataset data;
    data.X = normalize_rows(SparseMatrix::from_rows(spec.d, std::move(xs)));
    data.Y = SparseMatrix::from_rows(spec.L, std::move(ys));
    return data;
}

}  // namespace oxmc
