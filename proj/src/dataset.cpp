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

#include "oxmc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "oxmc/error.hpp"
#include "oxmc/log.hpp"

namespace oxmc {

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) {
        return false;
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

}  // namespace

std::string format_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<index_t> Dataset::degenerate_rows() const {
    std::vector<index_t> out;
    for (index_t i = 0; i < X.rows(); ++i) {
        if (X.row(i).nnz() == 0) {
            out.push_back(i);
        }
    }
    return out;
}

void Dataset::validate() const {
    if (X.rows() != Y.rows()) {
        throw InvalidArgument("X has " + std::to_string(X.rows()) + " rows but Y has " +
                              std::to_string(Y.rows()));
    }
    if (!Y.is_binary()) {
        throw InvalidArgument("label matrix must be binary");
    }
}

Dataset parse_dataset(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(source, 1, "missing header");
    }
    const auto head = tokens(line);
    index_t n = 0, d = 0, L = 0;
    if (head.size() != 3 || !parse_number(head[0], n) || !parse_number(head[1], d) ||
        !parse_number(head[2], L)) {
        throw ParseError(source, 1, "header must be \"n d L\"");
    }
    std::vector<SparseVector> xs(n), ys(n);
    std::size_t unlabeled = 0;
    for (index_t i = 0; i < n; ++i) {
        const std::size_t lineno = static_cast<std::size_t>(i) + 2;
        if (!std::getline(in, line)) {
            throw ParseError(source, lineno, "expected " + std::to_string(n) + " instances, found " +
                                                 std::to_string(i));
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string_view rest(line);
        // The label field is everything before the first blank; it is empty
        // when the line starts with a blank.
        const auto blank = rest.find_first_of(" \t");
        const std::string_view label_field = rest.substr(0, blank);
        if (!label_field.empty() && label_field.find(':') != std::string_view::npos) {
            throw ParseError(source, lineno, "label field missing (line must start with labels or a space)");
        }
        if (!label_field.empty()) {
            for (auto tok : split(label_field, ',')) {
                index_t l = 0;
                if (!parse_number(tok, l)) {
                    throw ParseError(source, lineno, "non-numeric label '" + std::string(tok) + "'");
                }
                if (l >= L) {
                    throw ParseError(source, lineno, "label " + std::to_string(l) + " >= L=" + std::to_string(L));
                }
                ys[i].push_back(l, 1.0);
            }
            std::sort(ys[i].idx.begin(), ys[i].idx.end());
            ys[i].idx.erase(std::unique(ys[i].idx.begin(), ys[i].idx.end()), ys[i].idx.end());
            ys[i].val.assign(ys[i].idx.size(), 1.0);
        } else {
            ++unlabeled;
        }
        const std::string_view feats = blank == std::string_view::npos ? std::string_view{} : rest.substr(blank);
        bool first = true;
        index_t prev = 0;
        for (auto tok : tokens(feats)) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) {
                throw ParseError(source, lineno, "feature '" + std::string(tok) + "' is not idx:val");
            }
            index_t j = 0;
            double v = 0.0;
            if (!parse_number(tok.substr(0, colon), j)) {
                throw ParseError(source, lineno, "non-numeric feature index in '" + std::string(tok) + "'");
            }
            if (!parse_number(tok.substr(colon + 1), v) || !std::isfinite(v)) {
                throw ParseError(source, lineno, "non-numeric feature value in '" + std::string(tok) + "'");
            }
            if (j >= d) {
                throw ParseError(source, lineno, "feature index " + std::to_string(j) + " >= d=" + std::to_string(d));
            }
            if (!first && j <= prev) {
                throw ParseError(source, lineno, "feature indices not strictly ascending at " + std::to_string(j));
            }
            first = false;
            prev = j;
            if (v != 0.0) {
                xs[i].push_back(j, v);
            }
        }
    }
    while (std::getline(in, line)) {
        if (!tokens(line).empty()) {
            throw ParseError(source, static_cast<std::size_t>(n) + 2, "more instance lines than n=" + std::to_string(n));
        }
    }
    if (unlabeled > 0) {
        log::warn(source + ": " + std::to_string(unlabeled) + " instance(s) without labels");
    }
    Dataset data{SparseMatrix::from_rows(d, std::move(xs)), SparseMatrix::from_rows(L, std::move(ys))};
    return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    return parse_dataset(in, path.string());
}

void write_dataset(const Dataset& data, std::ostream& out) {
    data.validate();
    out << data.n() << ' ' << data.d() << ' ' << data.L() << '\n';
    for (index_t i = 0; i < data.n(); ++i) {
        const auto y = data.Y.row(i);
        for (std::size_t k = 0; k < y.nnz(); ++k) {
            if (k > 0) out << ',';
            out << y.idx[k];
        }
        const auto x = data.X.row(i);
        for (std::size_t k = 0; k < x.nnz(); ++k) {
            out << ' ' << x.idx[k] << ':' << format_exact(x.val[k]);
        }
        out << '\n';
    }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_dataset(data, out);
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

SparseMatrix normalize_rows(const SparseMatrix& x) {
    std::vector<double> val = x.values();
    for (index_t i = 0; i < x.rows(); ++i) {
        const offset_t b = x.row_ptr()[i], e = x.row_ptr()[i + 1];
        double sq = 0.0;
        for (offset_t k = b; k < e; ++k) sq += val[k] * val[k];
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (offset_t k = b; k < e; ++k) val[k] *= inv;
        }
    }
    return SparseMatrix::from_csr(x.rows(), x.cols(), x.row_ptr(), x.col_idx(), std::move(val));
}

void sort_ranked(std::vector<ScoredLabel>& labels) {
    std::sort(labels.begin(), labels.end(), [](const ScoredLabel& a, const ScoredLabel& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
}

void write_predictions(const std::vector<Prediction>& preds, std::ostream& out) {
    char buf[64];
    for (const auto& p : preds) {
        auto ranked = p.labels;
        sort_ranked(ranked);
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), ranked[k].score, std::chars_format::fixed, 6);
            if (k > 0) out << ' ';
            out << ranked[k].label << ':' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_predictions(preds, out);
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path.string(), 0, "cannot open file");
    }
    std::vector<Prediction> preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        Prediction p;
        p.instance = static_cast<index_t>(preds.size());
        for (auto tok : tokens(line)) {
            const auto colon = tok.find(':');
            ScoredLabel s{};
            if (colon == std::string_view::npos || !parse_number(tok.substr(0, colon), s.label) ||
                !parse_number(tok.substr(colon + 1), s.score)) {
                throw ParseError(path.string(), lineno, "bad prediction token '" + std::string(tok) + "'");
            }
            p.labels.push_back(s);
        }
        preds.push_back(std::move(p));
    }
    return preds;
}

}  // namespace oxmc
