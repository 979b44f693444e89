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

#include "oxmc/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "oxmc/error.hpp"
#include "oxmc/parallel.hpp"

namespace oxmc {

namespace {

// Dense scatter of one instance, reused per thread.
class Scatter {
  public:
    Scatter(index_t dim, RowView x) : x_(x) {
        auto& buf = buffer();
        if (buf.size() < dim) buf.assign(dim, 0.0);
        for (std::size_t k = 0; k < x.nnz(); ++k) {
            if (x.idx[k] < dim) buf[x.idx[k]] = x.val[k];
        }
        view_ = std::span<const double>(buf.data(), dim);
    }
    ~Scatter() {
        auto& buf = buffer();
        for (index_t j : x_.idx) {
            if (j < view_.size()) buf[j] = 0.0;
        }
    }
    Scatter(const Scatter&) = delete;
    Scatter& operator=(const Scatter&) = delete;

    std::span<const double> view() const { return view_; }

  private:
    static std::vector<double>& buffer() {
        thread_local std::vector<double> buf;
        return buf;
    }
    RowView x_;
    std::span<const double> view_;
};

struct Beam {
    index_t node;
    double score;
};

std::vector<LeafMatch> beam_search(const XmcModel& model, std::span<const double> x, std::size_t beam) {
    const auto& tree = model.tree;
    std::vector<LeafMatch> out;
    if (beam == 0) return out;
    std::vector<Beam> frontier{{0, 1.0}}, next;
    auto better = [](const Beam& a, const Beam& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.node < b.node;
    };
    while (std::any_of(frontier.begin(), frontier.end(), [&](const Beam& b) { return !tree.is_leaf(b.node); })) {
        next.clear();
        for (const auto& b : frontier) {
            if (tree.is_leaf(b.node)) {
                next.push_back(b);
                continue;
            }
            const auto& children = tree.node(b.node).children;
            for (std::size_t k = 0; k < children.size(); ++k) {
                next.push_back({children[k], b.score * sigmoid(score_dense(model.matcher[b.node][k], x))});
            }
        }
        const std::size_t keep = std::min(beam, next.size());
        std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(keep), next.end(), better);
        next.resize(keep);
        frontier.swap(next);
    }
    std::sort(frontier.begin(), frontier.end(), better);
    frontier.resize(std::min(beam, frontier.size()));
    for (const auto& b : frontier) {
        out.push_back({static_cast<index_t>(tree.cluster_of(b.node)), b.score});
    }
    return out;
}

void check_dim(const XmcModel& model, index_t cols) {
    if (cols > model.dim) {
        throw DimensionError("instances have " + std::to_string(cols) + " features, model expects " +
                             std::to_string(model.dim));
    }
}

void top_k(std::vector<ScoredLabel>& labels, std::size_t k) {
    sort_ranked(labels);
    if (labels.size() > k) labels.resize(k);
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error("cannot open " + p.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError(p.string(), 0, "missing model file");
    return in;
}

void write_weights(std::ostream& out, std::size_t a, std::size_t b, const WeightVector& w) {
    out << a << ' ' << b << ' ' << w.nnz();
    for (std::size_t k = 0; k < w.nnz(); ++k) out << ' ' << w.idx[k] << ':' << format_exact(w.val[k]);
    out << '\n';
}

struct WeightLine {
    index_t a, b;
    WeightVector w;
};

std::vector<WeightLine> read_weights(const std::filesystem::path& p, index_t dim) {
    auto in = open_in(p);
    std::vector<WeightLine> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        long long a = -1, b = -1, nnz = -1;
        if (!(ss >> a >> b >> nnz) || a < 0 || b < 0 || nnz < 0) {
            throw ParseError(p.string(), lineno, "expected \"id id nnz idx:val ...\"");
        }
        WeightLine wl{static_cast<index_t>(a), static_cast<index_t>(b), {}};
        std::string tok;
        while (ss >> tok) {
            const auto colon = tok.find(':');
            index_t j = 0;
            double v = 0.0;
            const char* s = tok.data();
            const char* e = s + tok.size();
            if (colon == std::string::npos || std::from_chars(s, s + colon, j).ptr != s + colon ||
                std::from_chars(s + colon + 1, e, v).ptr != e || j >= dim ||
                (!wl.w.idx.empty() && j <= wl.w.idx.back())) {
                throw ParseError(p.string(), lineno, "bad weight entry '" + tok + "'");
            }
            wl.w.push_back(j, v);
        }
        if (wl.w.nnz() != static_cast<std::size_t>(nnz)) {
            throw ParseError(p.string(), lineno, "nnz field disagrees with entry count");
        }
        lines.push_back(std::move(wl));
    }
    return lines;
}

}  // namespace

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

void XmcModel::validate() const {
    if (matcher.size() != tree.num_nodes()) {
        throw InvalidArgument("matcher has " + std::to_string(matcher.size()) + " nodes, tree has " +
                              std::to_string(tree.num_nodes()));
    }
    for (index_t v = 0; v < tree.num_nodes(); ++v) {
        if (matcher[v].size() != tree.node(v).children.size()) {
            throw InvalidArgument("matcher node " + std::to_string(v) + " has wrong number of child classifiers");
        }
    }
    if (ranker.size() != tree.K()) {
        throw InvalidArgument("ranker does not have one slot list per cluster");
    }
    for (index_t j = 0; j < tree.K(); ++j) {
        const auto& labels = tree.node(tree.leaf_node(j)).labels;
        if (ranker[j].size() != labels.size()) {
            throw InvalidArgument("ranker slots of cluster " + std::to_string(j) + " do not match its labels");
        }
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (ranker[j][k].label != labels[k]) {
                throw InvalidArgument("ranker slots of cluster " + std::to_string(j) + " do not match its labels");
            }
        }
    }
    if (initial.L() != tree.num_labels() || initial.K() != tree.K()) {
        throw InvalidArgument("initial assignment shape disagrees with the tree");
    }
}

std::vector<LeafMatch> match(const XmcModel& model, RowView x, std::size_t beam) {
    Scatter s(model.dim, x);
    return beam_search(model, s.view(), beam);
}

SparseMatrix match_matrix(const XmcModel& model, const SparseMatrix& x, std::size_t beam) {
    check_dim(model, x.cols());
    std::vector<SparseVector> rows(x.rows());
    parallel_for(x.rows(), [&](std::size_t i) {
        for (const auto& m : match(model, x.row(static_cast<index_t>(i)), beam)) rows[i].push_back(m.cluster, 1.0);
    });
    return SparseMatrix::from_rows(static_cast<index_t>(model.K()), std::move(rows));
}

Prediction predict(const XmcModel& model, RowView x, std::size_t k, DedupScore mode) {
    Prediction p;
    if (k == 0) return p;
    Scatter s(model.dim, x);
    const auto leaves = beam_search(model, s.view(), model.beam);
    std::unordered_map<index_t, std::pair<double, std::size_t>> acc;
    for (const auto& leaf : leaves) {
        for (const auto& slot : model.ranker[leaf.cluster]) {
            double v = sigmoid(score_dense(slot.weights, s.view()));
            if (mode == DedupScore::combined) v *= leaf.path_score;
            auto& [sum, count] = acc[slot.label];
            sum += v;
            ++count;
        }
    }
    p.labels.reserve(acc.size());
    for (const auto& [label, sc] : acc) {
        p.labels.push_back({label, sc.first / static_cast<double>(sc.second)});
    }
    top_k(p.labels, k);
    return p;
}

std::vector<Prediction> predict(const XmcModel& model, const SparseMatrix& x, std::size_t k, DedupScore mode) {
    check_dim(model, x.cols());
    std::vector<Prediction> out(x.rows());
    parallel_for(x.rows(), [&](std::size_t i) {
        out[i] = predict(model, x.row(static_cast<index_t>(i)), k, mode);
        out[i].instance = static_cast<index_t>(i);
    });
    return out;
}

Prediction predict_without_dedup(const XmcModel& model, RowView x, std::size_t k) {
    Prediction p;
    if (k == 0) return p;
    Scatter s(model.dim, x);
    std::vector<ScoredLabel> all;
    for (const auto& leaf : beam_search(model, s.view(), model.beam)) {
        for (const auto& slot : model.ranker[leaf.cluster]) {
            all.push_back({slot.label, sigmoid(score_dense(slot.weights, s.view())) * leaf.path_score});
        }
    }
    sort_ranked(all);
    std::vector<index_t> seen;
    for (const auto& c : all) {
        if (std::find(seen.begin(), seen.end(), c.label) != seen.end()) continue;
        seen.push_back(c.label);
        p.labels.push_back(c);
        if (p.labels.size() == k) break;
    }
    return p;
}

void save_model(const XmcModel& model, const std::filesystem::path& dir) {
    model.validate();
    std::filesystem::create_directories(dir);
    nlohmann::json meta;
    meta["format"] = "oxmc-model";
    meta["version"] = 1;
    meta["dim"] = model.dim;
    meta["num_labels"] = model.num_labels();
    meta["num_clusters"] = model.K();
    meta["beam"] = model.beam;
    meta["lambda"] = model.lambda;
    meta["provenance"] = to_string(model.provenance);
    meta["branching"] = model.info.branching;
    meta["max_leaf_size"] = model.info.max_leaf_size;
    meta["seed"] = model.info.seed;
    {
        auto out = open_out(dir / "meta.json");
        out << meta.dump(2) << '\n';
    }
    {
        auto out = open_out(dir / "tree.txt");
        model.tree.write(out);
    }
    {
        auto out = open_out(dir / "clusters.txt");
        write_assignment(model.tree.assignment(), out);
    }
    {
        auto out = open_out(dir / "initial_clusters.txt");
        write_assignment(model.initial.C, out);
    }
    {
        auto out = open_out(dir / "matcher.txt");
        for (index_t v = 0; v < model.tree.num_nodes(); ++v) {
            const auto& children = model.tree.node(v).children;
            for (std::size_t k = 0; k < children.size(); ++k) write_weights(out, v, children[k], model.matcher[v][k]);
        }
    }
    {
        auto out = open_out(dir / "ranker.txt");
        for (index_t j = 0; j < model.K(); ++j) {
            for (const auto& slot : model.ranker[j]) write_weights(out, j, slot.label, slot.weights);
        }
        if (!out) throw Error("write failed for " + (dir / "ranker.txt").string());
    }
}

XmcModel load_model(const std::filesystem::path& dir) {
    XmcModel model;
    nlohmann::json meta;
    {
        auto in = open_in(dir / "meta.json");
        try {
            in >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError((dir / "meta.json").string(), 0, e.what());
        }
    }
    index_t L = 0;
    std::size_t K = 0;
    try {
        if (meta.at("format").get<std::string>() != "oxmc-model") {
            throw ParseError((dir / "meta.json").string(), 0, "not an oxmc model");
        }
        model.dim = meta.at("dim").get<index_t>();
        L = meta.at("num_labels").get<index_t>();
        K = meta.at("num_clusters").get<std::size_t>();
        model.beam = meta.at("beam").get<std::size_t>();
        model.lambda = meta.at("lambda").get<std::size_t>();
        model.provenance = provenance_from_string(meta.at("provenance").get<std::string>());
        model.info.branching = meta.at("branching").get<std::size_t>();
        model.info.max_leaf_size = meta.at("max_leaf_size").get<std::size_t>();
        model.info.seed = meta.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "meta.json").string(), 0, e.what());
    }
    {
        auto in = open_in(dir / "tree.txt");
        model.tree = LabelTree::read(in, (dir / "tree.txt").string());
    }
    if (model.tree.num_labels() != L || model.tree.K() != K) {
        throw ParseError((dir / "tree.txt").string(), 0, "tree disagrees with meta.json on L or K");
    }
    {
        auto in = open_in(dir / "clusters.txt");
        const auto c = read_assignment(in, L, static_cast<index_t>(K), (dir / "clusters.txt").string());
        if (!(c == model.tree.assignment())) {
            throw ParseError((dir / "clusters.txt").string(), 0, "cluster assignment disagrees with tree leaves");
        }
    }
    {
        auto in = open_in(dir / "initial_clusters.txt");
        model.initial = {read_assignment(in, L, static_cast<index_t>(K), (dir / "initial_clusters.txt").string()), 1,
                         Provenance::initial_kmeans};
        model.initial.lambda = 0;
        for (index_t l = 0; l < L; ++l) model.initial.lambda = std::max(model.initial.lambda, model.initial.C.row(l).nnz());
        try {
            model.initial.validate();
        } catch (const InvalidArgument& e) {
            throw ParseError((dir / "initial_clusters.txt").string(), 0, e.what());
        }
    }
    const auto& tree = model.tree;
    model.matcher.assign(tree.num_nodes(), {});
    for (index_t v = 0; v < tree.num_nodes(); ++v) model.matcher[v].resize(tree.node(v).children.size());
    std::vector<std::vector<char>> seen_m(tree.num_nodes());
    for (index_t v = 0; v < tree.num_nodes(); ++v) seen_m[v].assign(tree.node(v).children.size(), 0);
    for (auto& wl : read_weights(dir / "matcher.txt", model.dim)) {
        if (wl.a >= tree.num_nodes()) throw ParseError((dir / "matcher.txt").string(), 0, "unknown node");
        const auto& children = tree.node(wl.a).children;
        const auto it = std::find(children.begin(), children.end(), wl.b);
        if (it == children.end()) throw ParseError((dir / "matcher.txt").string(), 0, "unknown child");
        const auto k = static_cast<std::size_t>(it - children.begin());
        model.matcher[wl.a][k] = std::move(wl.w);
        seen_m[wl.a][k] = 1;
    }
    for (const auto& s : seen_m) {
        if (std::find(s.begin(), s.end(), 0) != s.end()) {
            throw ParseError((dir / "matcher.txt").string(), 0, "missing matcher weights");
        }
    }
    model.ranker.assign(K, {});
    for (index_t j = 0; j < K; ++j) {
        for (index_t l : tree.node(tree.leaf_node(j)).labels) model.ranker[j].push_back({l, {}});
    }
    std::size_t slots = 0;
    for (auto& wl : read_weights(dir / "ranker.txt", model.dim)) {
        if (wl.a >= K) throw ParseError((dir / "ranker.txt").string(), 0, "unknown cluster");
        auto& list = model.ranker[wl.a];
        auto it = std::lower_bound(list.begin(), list.end(), wl.b,
                                   [](const RankerSlot& s, index_t l) { return s.label < l; });
        if (it == list.end() || it->label != wl.b) {
            throw ParseError((dir / "ranker.txt").string(), 0, "ranker slot for a label outside its cluster");
        }
        it->weights = std::move(wl.w);
        ++slots;
    }
    if (slots != tree.assignment().nnz()) {
        throw ParseError((dir / "ranker.txt").string(), 0, "ranker slots do not match the cluster assignment");
    }
    model.validate();
    return model;
}

}  // namespace oxmc
