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

#include "oxmc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "oxmc/error.hpp"
#include "oxmc/parallel.hpp"

namespace oxmc {

// ---------------------------------------------------------------------------
// LabelTree

LabelTree::LabelTree(std::vector<TreeNode> nodes, index_t num_labels)
    : nodes_(std::move(nodes)), num_labels_(num_labels) {
    index_structure();
}

void LabelTree::index_structure() {
    if (nodes_.empty()) {
        throw InvalidArgument("label tree needs at least a root");
    }
    leaves_.clear();
    cluster_of_node_.assign(nodes_.size(), -1);
    node_depth_.assign(nodes_.size(), 0);
    for (index_t v = 0; v < nodes_.size(); ++v) {
        const auto& nd = nodes_[v];
        if ((v == 0) != (nd.parent == kNoParent)) {
            throw InvalidArgument("node 0 must be the only root");
        }
        if (v > 0) {
            if (nd.parent < 0 || static_cast<std::size_t>(nd.parent) >= v) {
                throw InvalidArgument("node " + std::to_string(v) + " must follow its parent");
            }
            node_depth_[v] = node_depth_[static_cast<std::size_t>(nd.parent)] + 1;
            const auto& siblings = nodes_[static_cast<std::size_t>(nd.parent)].children;
            if (std::find(siblings.begin(), siblings.end(), v) == siblings.end()) {
                throw InvalidArgument("node " + std::to_string(v) + " missing from its parent's children");
            }
        }
        for (index_t c : nd.children) {
            if (c >= nodes_.size() || nodes_[c].parent != static_cast<std::int64_t>(v)) {
                throw InvalidArgument("inconsistent child link " + std::to_string(v) + "->" + std::to_string(c));
            }
        }
        if (nd.children.empty()) {
            cluster_of_node_[v] = static_cast<std::int64_t>(leaves_.size());
            leaves_.push_back(v);
        } else if (!nd.labels.empty()) {
            throw InvalidArgument("internal node " + std::to_string(v) + " carries labels");
        }
    }
    depth_ = 0;
    for (index_t leaf : leaves_) depth_ = std::max(depth_, node_depth_[leaf]);
    clusters_under_.assign(nodes_.size(), {});
    for (std::size_t v = nodes_.size(); v-- > 0;) {
        if (cluster_of_node_[v] >= 0) {
            clusters_under_[v].push_back(static_cast<index_t>(cluster_of_node_[v]));
        }
        for (index_t c : nodes_[v].children) {
            auto& dst = clusters_under_[v];
            dst.insert(dst.end(), clusters_under_[c].begin(), clusters_under_[c].end());
        }
        std::sort(clusters_under_[v].begin(), clusters_under_[v].end());
    }
    std::vector<char> covered(num_labels_, 0);
    for (index_t leaf : leaves_) {
        auto& labels = nodes_[leaf].labels;
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
        for (index_t l : labels) {
            if (l >= num_labels_) {
                throw InvalidArgument("leaf label " + std::to_string(l) + " out of range");
            }
            covered[l] = 1;
        }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
        throw InvalidArgument("label tree does not cover every label");
    }
}

SparseMatrix LabelTree::assignment() const {
    std::vector<Triplet> t;
    for (index_t j = 0; j < leaves_.size(); ++j) {
        for (index_t l : nodes_[leaves_[j]].labels) {
            t.push_back({l, j, 1.0});
        }
    }
    return SparseMatrix::from_triplets(num_labels_, static_cast<index_t>(leaves_.size()), std::move(t));
}

void LabelTree::set_assignment(const SparseMatrix& c) {
    if (c.rows() != num_labels_ || c.cols() != leaves_.size()) {
        throw DimensionError("assignment " + c.shape_string() + " does not fit tree with L=" +
                             std::to_string(num_labels_) + ", K=" + std::to_string(leaves_.size()));
    }
    const auto ct = transpose(c);
    auto saved = nodes_;
    for (index_t j = 0; j < leaves_.size(); ++j) {
        const auto r = ct.row(j);
        nodes_[leaves_[j]].labels.assign(r.idx.begin(), r.idx.end());
    }
    try {
        index_structure();
    } catch (...) {
        nodes_ = std::move(saved);
        index_structure();
        throw;
    }
}

void LabelTree::write(std::ostream& out) const {
    for (index_t v = 0; v < nodes_.size(); ++v) {
        const auto& nd = nodes_[v];
        out << v << ' ' << nd.parent;
        for (index_t c : nd.children) out << ' ' << c;
        out << " |";
        for (index_t l : nd.labels) out << ' ' << l;
        out << '\n';
    }
}

LabelTree LabelTree::read(std::istream& in, const std::string& source) {
    std::vector<TreeNode> nodes;
    index_t max_label = 0;
    bool any_label = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto bar = line.find('|');
        if (bar == std::string::npos) {
            throw ParseError(source, lineno, "missing '|' separator");
        }
        std::istringstream head(line.substr(0, bar)), tail(line.substr(bar + 1));
        long long id = -1, parent = -2;
        if (!(head >> id >> parent) || id != static_cast<long long>(nodes.size())) {
            throw ParseError(source, lineno, "expected node id " + std::to_string(nodes.size()) + " and parent");
        }
        TreeNode nd;
        nd.parent = parent;
        long long v = 0;
        while (head >> v) {
            if (v < 0) throw ParseError(source, lineno, "negative child id");
            nd.children.push_back(static_cast<index_t>(v));
        }
        if (!head.eof()) throw ParseError(source, lineno, "non-numeric child id");
        while (tail >> v) {
            if (v < 0) throw ParseError(source, lineno, "negative label id");
            nd.labels.push_back(static_cast<index_t>(v));
            max_label = std::max(max_label, static_cast<index_t>(v));
            any_label = true;
        }
        if (!tail.eof()) throw ParseError(source, lineno, "non-numeric label id");
        nodes.push_back(std::move(nd));
    }
    if (nodes.empty()) {
        throw ParseError(source, 0, "empty tree file");
    }
    try {
        return LabelTree(std::move(nodes), any_label ? max_label + 1 : 0);
    } catch (const InvalidArgument& e) {
        throw ParseError(source, 0, e.what());
    }
}

bool LabelTree::operator==(const LabelTree& o) const {
    if (num_labels_ != o.num_labels_ || nodes_.size() != o.nodes_.size()) return false;
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        const auto& a = nodes_[v];
        const auto& b = o.nodes_[v];
        if (a.parent != b.parent || a.children != b.children || a.labels != b.labels) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// PIFA

PifaEmbeddings pifa_embeddings(const SparseMatrix& x, const SparseMatrix& y) {
    if (x.rows() != y.rows()) {
        throw DimensionError("pifa: X " + x.shape_string() + " and Y " + y.shape_string() +
                             " disagree on instances");
    }
    const SparseMatrix sums = multiply(transpose(y), x);
    std::vector<double> val = sums.values();
    PifaEmbeddings out;
    for (index_t l = 0; l < sums.rows(); ++l) {
        const offset_t b = sums.row_ptr()[l], e = sums.row_ptr()[l + 1];
        double sq = 0.0;
        for (offset_t k = b; k < e; ++k) sq += val[k] * val[k];
        if (sq == 0.0) {
            out.zero_labels.push_back(l);
            continue;
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (offset_t k = b; k < e; ++k) val[k] *= inv;
    }
    out.embeddings =
        SparseMatrix::from_csr(sums.rows(), sums.cols(), sums.row_ptr(), sums.col_idx(), std::move(val));
    return out;
}

// ---------------------------------------------------------------------------
// Balanced spherical k-means

namespace {

using Centroid = std::vector<double>;

double sim(const Centroid& c, RowView p) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.nnz(); ++k) s += c[p.idx[k]] * p.val[k];
    return s;
}

// Normalized sum of the member points; left at zero for an all-zero sum.
void recompute(Centroid& c, const SparseMatrix& points, const std::vector<index_t>& members) {
    std::fill(c.begin(), c.end(), 0.0);
    for (index_t i : members) {
        const auto r = points.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) c[r.idx[k]] += r.val[k];
    }
    double sq = 0.0;
    for (double v : c) sq += v * v;
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : c) v *= inv;
    }
}

bool converged(double prev, double cur, double tol) {
    const double scale = std::max(std::abs(prev), 1e-12);
    return std::abs(cur - prev) / scale < tol;
}

std::vector<index_t> distinct_seeds(std::size_t m, std::size_t count, std::mt19937_64& rng) {
    std::vector<index_t> pos(m);
    std::iota(pos.begin(), pos.end(), index_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m - 1);
        std::swap(pos[i], pos[pick(rng)]);
    }
    pos.resize(count);
    return pos;
}

// Splits `ids` into two halves of sizes ceil(m/2) and floor(m/2) by ranking
// points on sim(c0) - sim(c1).
std::pair<std::vector<index_t>, std::vector<index_t>> two_means(const SparseMatrix& points,
                                                                const std::vector<index_t>& ids,
                                                                std::mt19937_64& rng,
                                                                const KMeansOptions& opt) {
    const std::size_t m = ids.size();
    const std::size_t first = (m + 1) / 2;
    const auto seeds = distinct_seeds(m, 2, rng);
    Centroid c0(points.cols(), 0.0), c1(points.cols(), 0.0);
    recompute(c0, points, {ids[seeds[0]]});
    recompute(c1, points, {ids[seeds[1]]});

    std::vector<index_t> order(m);
    std::vector<double> diff(m), s0(m), s1(m);
    std::vector<index_t> left, right;
    double prev = 0.0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        for (std::size_t p = 0; p < m; ++p) {
            const auto r = points.row(ids[p]);
            s0[p] = sim(c0, r);
            s1[p] = sim(c1, r);
            diff[p] = s0[p] - s1[p];
        }
        std::iota(order.begin(), order.end(), index_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](index_t a, index_t b) { return diff[a] > diff[b]; });
        left.clear();
        right.clear();
        double obj = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const index_t p = order[r];
            if (r < first) {
                left.push_back(ids[p]);
                obj += s0[p];
            } else {
                right.push_back(ids[p]);
                obj += s1[p];
            }
        }
        recompute(c0, points, left);
        recompute(c1, points, right);
        if (it > 0 && converged(prev, obj, opt.tol)) break;
        prev = obj;
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    return {std::move(left), std::move(right)};
}

void halving(const SparseMatrix& points, const std::vector<index_t>& ids, std::size_t B, index_t offset,
             std::vector<index_t>& group, std::mt19937_64& rng, const KMeansOptions& opt) {
    if (B == 1 || ids.size() <= 1) {
        for (index_t i : ids) group[i] = offset;
        return;
    }
    auto [left, right] = two_means(points, ids, rng, opt);
    halving(points, left, B / 2, offset, group, rng, opt);
    halving(points, right, B / 2, offset + static_cast<index_t>(B / 2), group, rng, opt);
}

std::vector<index_t> capacity_kmeans(const SparseMatrix& points, std::size_t B, std::mt19937_64& rng,
                                     const KMeansOptions& opt) {
    const std::size_t n = points.rows();
    std::vector<std::size_t> cap(B, n / B);
    for (std::size_t g = 0; g < n % B; ++g) ++cap[g];

    std::vector<Centroid> cents(B, Centroid(points.cols(), 0.0));
    const auto seeds = distinct_seeds(n, B, rng);
    for (std::size_t g = 0; g < B; ++g) recompute(cents[g], points, {seeds[g]});

    std::vector<index_t> group(n, 0);
    std::vector<double> sims(n * B);
    std::vector<std::size_t> order(n * B);
    std::vector<std::vector<index_t>> members(B);
    double prev = 0.0;
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        parallel_for(n, [&](std::size_t i) {
            const auto r = points.row(static_cast<index_t>(i));
            for (std::size_t g = 0; g < B; ++g) sims[i * B + g] = sim(cents[g], r);
        });
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Flat index i*B+g breaks ties by point, then group.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
        std::vector<char> done(n, 0);
        std::vector<std::size_t> load(B, 0);
        double obj = 0.0;
        for (std::size_t flat : order) {
            const std::size_t i = flat / B, g = flat % B;
            if (done[i] || load[g] >= cap[g]) continue;
            done[i] = 1;
            ++load[g];
            group[i] = static_cast<index_t>(g);
            obj += sims[flat];
        }
        for (auto& mbr : members) mbr.clear();
        for (std::size_t i = 0; i < n; ++i) members[group[i]].push_back(static_cast<index_t>(i));
        for (std::size_t g = 0; g < B; ++g) recompute(cents[g], points, members[g]);
        if (it > 0 && converged(prev, obj, opt.tol)) break;
        prev = obj;
    }
    return group;
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

std::vector<index_t> balanced_kmeans(const SparseMatrix& points, std::size_t B, std::uint64_t seed,
                                     const KMeansOptions& options) {
    if (B == 0) {
        throw InvalidArgument("balanced_kmeans: B must be positive");
    }
    if (B > points.rows()) {
        throw InvalidArgument("balanced_kmeans: B=" + std::to_string(B) + " exceeds " +
                              std::to_string(points.rows()) + " points");
    }
    std::mt19937_64 rng(seed);
    if (B == 1) {
        return std::vector<index_t>(points.rows(), 0);
    }
    if (is_power_of_two(B)) {
        std::vector<index_t> group(points.rows(), 0);
        std::vector<index_t> ids(points.rows());
        std::iota(ids.begin(), ids.end(), index_t{0});
        halving(points, ids, B, 0, group, rng, options);
        return group;
    }
    return capacity_kmeans(points, B, rng, options);
}

LabelTree build_tree(const SparseMatrix& label_embs, std::size_t B, std::size_t max_leaf_size,
                     std::uint64_t seed, const KMeansOptions& options) {
    const index_t L = label_embs.rows();
    if (L == 0) {
        throw InvalidArgument("build_tree: no labels");
    }
    if (B < 2) {
        throw InvalidArgument("build_tree: branching factor must be at least 2");
    }
    if (max_leaf_size == 0) {
        throw InvalidArgument("build_tree: max_leaf_size must be positive");
    }
    std::vector<TreeNode> nodes(1);
    std::vector<std::vector<index_t>> members(1);
    members[0].resize(L);
    std::iota(members[0].begin(), members[0].end(), index_t{0});
    std::mt19937_64 rng(seed);

    // Breadth-first so node ids come out in BFS order.
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        std::vector<index_t> labels = std::move(members[v]);
        if (labels.size() <= max_leaf_size) {
            nodes[v].labels = std::move(labels);
            continue;
        }
        const std::size_t width = std::min(B, labels.size());
        std::vector<index_t> nonzero, zero;
        for (index_t l : labels) (label_embs.row(l).nnz() > 0 ? nonzero : zero).push_back(l);

        std::vector<std::vector<index_t>> groups(width);
        if (nonzero.size() >= width) {
            const auto part = balanced_kmeans(select_rows(label_embs, nonzero), width, rng(), options);
            for (std::size_t p = 0; p < nonzero.size(); ++p) groups[part[p]].push_back(nonzero[p]);
        } else {
            for (std::size_t p = 0; p < nonzero.size(); ++p) groups[p].push_back(nonzero[p]);
        }
        for (index_t l : zero) {
            auto smallest = std::min_element(groups.begin(), groups.end(),
                                             [](const auto& a, const auto& b) { return a.size() < b.size(); });
            smallest->push_back(l);
        }
        for (auto& g : groups) {
            std::sort(g.begin(), g.end());
            const index_t child = static_cast<index_t>(nodes.size());
            nodes[v].children.push_back(child);
            TreeNode nd;
            nd.parent = static_cast<std::int64_t>(v);
            nodes.push_back(std::move(nd));
            members.push_back(std::move(g));
        }
    }
    return LabelTree(std::move(nodes), L);
}

}  // namespace oxmc
