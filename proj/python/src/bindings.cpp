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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oxmc/dataset.hpp"
#include "oxmc/error.hpp"
#include "oxmc/metrics.hpp"
#include "oxmc/model.hpp"
#include "oxmc/overlap.hpp"
#include "oxmc/synth.hpp"
#include "oxmc/train.hpp"

namespace py = pybind11;
using namespace oxmc;

namespace {

using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using PyRanking = std::vector<std::vector<std::pair<index_t, double>>>;

// (indptr, indices, data, shape), ready for scipy.sparse.csr_matrix.
py::tuple to_csr(const SparseMatrix& m) {
    py::array_t<std::int64_t> indptr(static_cast<py::ssize_t>(m.row_ptr().size()));
    py::array_t<std::int32_t> indices(static_cast<py::ssize_t>(m.col_idx().size()));
    py::array_t<double> data(static_cast<py::ssize_t>(m.values().size()));
    std::copy(m.row_ptr().begin(), m.row_ptr().end(), indptr.mutable_data());
    std::copy(m.col_idx().begin(), m.col_idx().end(), indices.mutable_data());
    std::copy(m.values().begin(), m.values().end(), data.mutable_data());
    return py::make_tuple(indptr, indices, data, py::make_tuple(m.rows(), m.cols()));
}

// Accepts scipy-style CSR with unsorted indices or explicit zeros.
SparseMatrix from_csr(const py::tuple& t) {
    if (t.size() != 4) throw InvalidArgument("expected (indptr, indices, data, shape)");
    const auto indptr = t[0].cast<IntArray>();
    const auto indices = t[1].cast<IntArray>();
    const auto data = t[2].cast<RealArray>();
    const auto [rows, cols] = t[3].cast<std::pair<index_t, index_t>>();
    if (indptr.size() != static_cast<py::ssize_t>(rows) + 1) {
        throw DimensionError("indptr must have rows + 1 entries");
    }
    if (indices.size() != data.size()) throw DimensionError("indices and data differ in length");
    std::vector<SparseVector> out(rows);
    for (index_t i = 0; i < rows; ++i) {
        for (std::int64_t k = indptr.at(i); k < indptr.at(i + 1); ++k) {
            if (k < 0 || k >= indices.size()) throw DimensionError("indptr points outside indices");
            const std::int64_t j = indices.at(k);
            if (j < 0 || j >= static_cast<std::int64_t>(cols)) throw DimensionError("column index out of range");
            out[i].push_back(static_cast<index_t>(j), data.at(k));
        }
    }
    return SparseMatrix::from_rows(cols, std::move(out));
}

TrainConfig make_config(std::size_t branching, std::size_t max_leaf, std::size_t beam, std::size_t lambda,
                        std::size_t rounds, std::uint64_t seed, double reg_C, double threshold) {
    TrainConfig cfg;
    cfg.branching = branching;
    cfg.max_leaf_size = max_leaf;
    cfg.beam = beam;
    cfg.lambda = lambda;
    cfg.rounds = rounds;
    cfg.seed = seed;
    cfg.reg_C = reg_C;
    cfg.weight_threshold = threshold;
    return cfg;
}

py::list predictions_to_py(const std::vector<Prediction>& preds) {
    py::list out;
    for (const auto& p : preds) {
        py::list row;
        for (const auto& s : p.labels) row.append(py::make_tuple(s.label, s.score));
        out.append(row);
    }
    return out;
}

std::vector<Prediction> predictions_from_py(const PyRanking& rows) {
    std::vector<Prediction> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i].instance = static_cast<index_t>(i);
        for (auto [l, s] : rows[i]) out[i].labels.push_back({l, s});
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_oxmc, m) {
    m.doc() = "Tree-based extreme multi-label classification with overlapping label clusters";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n", &Dataset::n)
        .def_property_readonly("d", &Dataset::d)
        .def_property_readonly("L", &Dataset::L)
        .def("features_csr", [](const Dataset& d) { return to_csr(d.X); })
        .def("labels_csr", [](const Dataset& d) { return to_csr(d.Y); })
        .def("normalized", [](const Dataset& d) { return Dataset{normalize_rows(d.X), d.Y}; })
        .def("subset",
             [](const Dataset& d, const std::vector<index_t>& rows) {
                 for (index_t r : rows)
                     if (r >= d.n()) throw InvalidArgument("row id out of range");
                 return Dataset{select_rows(d.X, rows), select_rows(d.Y, rows)};
             })
        .def("__repr__", [](const Dataset& d) {
            return "<oxmc.Dataset n=" + std::to_string(d.n()) + " d=" + std::to_string(d.d()) +
                   " L=" + std::to_string(d.L()) + ">";
        });

    m.def(
        "dataset_from_csr",
        [](const py::tuple& x, const py::tuple& y) {
            Dataset d{from_csr(x), from_csr(y)};
            d.validate();
            return d;
        },
        py::arg("x"), py::arg("y"), "Build a dataset from (indptr, indices, data, shape) tuples.");
    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("save_dataset", &save_dataset, py::arg("data"), py::arg("path"));

    py::class_<XmcModel>(m, "Model")
        .def_property_readonly("num_labels", &XmcModel::num_labels)
        .def_property_readonly("num_clusters", &XmcModel::K)
        .def_property_readonly("num_nodes", [](const XmcModel& x) { return x.tree.num_nodes(); })
        .def_readwrite("beam", &XmcModel::beam)
        .def_readonly("lambda_", &XmcModel::lambda)
        .def_property_readonly("provenance", [](const XmcModel& x) { return to_string(x.provenance); })
        .def("assignment_csr", [](const XmcModel& x) { return to_csr(x.tree.assignment()); })
        .def("clusters_of", [](const XmcModel& x, index_t label) {
            const auto c = x.tree.assignment();
            if (label >= c.rows()) throw InvalidArgument("label out of range");
            const auto r = c.row(label);
            return std::vector<index_t>(r.idx.begin(), r.idx.end());
        });

    m.def(
        "train",
        [](const Dataset& data, std::size_t branching, std::size_t max_leaf, std::size_t beam, std::uint64_t seed,
           double reg_C, double threshold) {
            const TrainConfig cfg = make_config(branching, max_leaf, beam, 1, 1, seed, reg_C, threshold);
            py::gil_scoped_release release;
            return train_baseline(data, cfg);
        },
        py::arg("data"), py::arg("branching") = 32, py::arg("max_leaf") = 100, py::arg("beam") = 10,
        py::arg("seed") = 0, py::arg("reg_C") = 1.0, py::arg("threshold") = 0.1);

    m.def(
        "refine",
        [](const XmcModel& model, const Dataset& data, std::size_t lambda, std::size_t rounds,
           const std::string& strategy, std::size_t xi, bool clusters_only, double reg_C, double threshold) {
            RefineOptions o;
            if (strategy == "rlap") {
                o.strategy = AssignmentStrategy::rlap;
            } else if (strategy == "random") {
                o.strategy = AssignmentStrategy::random_duplicate;
            } else if (strategy != "projection") {
                throw InvalidArgument("strategy must be projection, rlap or random");
            }
            o.xi = xi;
            o.finetune_matcher = !clusters_only;
            const TrainConfig cfg = make_config(model.info.branching, model.info.max_leaf_size, model.beam, lambda,
                                                rounds, model.info.seed, reg_C, threshold);
            RefineResult r;
            {
                py::gil_scoped_release release;
                r = refine(model, data, cfg, o);
            }
            py::list log;
            for (const auto& e : r.rounds) {
                py::dict d;
                d["round"] = e.round;
                d["relaxed_before"] = e.relaxed_before;
                d["relaxed"] = e.relaxed;
                d["binary"] = e.binary;
                d["seconds"] = e.seconds;
                log.append(d);
            }
            return py::make_tuple(std::move(r.model), log);
        },
        py::arg("model"), py::arg("data"), py::arg("lambda_") = 2, py::arg("rounds") = 1,
        py::arg("strategy") = "projection", py::arg("xi") = 0, py::arg("clusters_only") = false,
        py::arg("reg_C") = 1.0, py::arg("threshold") = 0.1, "Returns (refined_model, round_log).");

    m.def(
        "predict",
        [](const XmcModel& model, const Dataset& data, std::size_t topk, bool ranker_only) {
            std::vector<Prediction> preds;
            {
                py::gil_scoped_release release;
                preds = predict(model, data.X, topk, ranker_only ? DedupScore::ranker_only : DedupScore::combined);
            }
            return predictions_to_py(preds);
        },
        py::arg("model"), py::arg("data"), py::arg("topk") = 10, py::arg("ranker_only") = false,
        "List of [(label, score), ...] per instance, best first.");

    m.def(
        "match_matrix",
        [](const XmcModel& model, const Dataset& data, std::size_t beam) {
            return to_csr(match_matrix(model, data.X, beam == 0 ? model.beam : beam));
        },
        py::arg("model"), py::arg("data"), py::arg("beam") = 0);

    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "precision_at_k",
        [](const PyRanking& preds, const Dataset& gold, std::size_t k) {
            return precision_at_k(predictions_from_py(preds), gold.Y, k);
        },
        py::arg("predictions"), py::arg("gold"), py::arg("k"));
    m.def(
        "psp_at_k",
        [](const PyRanking& preds, const Dataset& gold, const Dataset& train, std::size_t k, double A, double B) {
            return psp_at_k(predictions_from_py(preds), gold.Y, compute_propensities(train.Y, A, B), k);
        },
        py::arg("predictions"), py::arg("gold"), py::arg("train"), py::arg("k"), py::arg("A") = 0.55,
        py::arg("B") = 1.5);

    m.def(
        "fuse_labels",
        [](const Dataset& data, const std::string& mode, std::size_t k, std::uint64_t seed, std::size_t group_width) {
            auto f = fuse_labels(data, {fusion_mode_from_string(mode), k, seed, group_width});
            return py::make_tuple(f.data, f.groups);
        },
        py::arg("data"), py::arg("mode") = "hard", py::arg("k") = 5, py::arg("seed") = 0, py::arg("group_width") = 32,
        "Returns (fused_dataset, groups).");
    m.def(
        "make_planted_corpus",
        [](std::size_t n, index_t L, index_t d, std::uint64_t seed) {
            PlantedCorpusSpec s;
            s.n = n;
            s.L = L;
            s.d = d;
            s.seed = seed;
            return make_planted_corpus(s);
        },
        py::arg("n") = 5000, py::arg("L") = 2500, py::arg("d") = 1000, py::arg("seed") = 0);
    m.def(
        "make_bimodal_toy",
        [](std::size_t n_per_mode, std::uint64_t seed) {
            BimodalSpec s;
            s.n_per_mode = n_per_mode;
            s.seed = seed;
            auto toy = make_bimodal_toy(s);
            return py::make_tuple(toy.data, toy.mode);
        },
        py::arg("n_per_mode") = 200, py::arg("seed") = 0, "Returns (dataset, mode per instance); label 0 is fused.");

    m.def(
        "project_assignment",
        [](const py::tuple& y, const py::tuple& mm, std::size_t lambda, const py::tuple& fallback) {
            const SparseMatrix Y = from_csr(y), M = from_csr(mm);
            const ClusterAssignment fb{from_csr(fallback), 1, Provenance::initial_kmeans};
            fb.validate();
            const auto c = project_assignment(Y, M, lambda, fb);
            return py::make_tuple(to_csr(c.C), objective_relaxed(Y, M, c.C), objective_binary(Y, M, c.C));
        },
        py::arg("y"), py::arg("m"), py::arg("lambda_"), py::arg("fallback"),
        "Top-lambda projection of Y^T M. Returns (C, relaxed objective, binary objective).");
}
