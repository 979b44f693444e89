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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oxmc/dataset.hpp"

namespace oxmc {

// How original labels are grouped into fused labels:
//   easy   - balanced ceil(L/k)-means over PIFA label embeddings;
//   medium - balanced ceil(L/(w k))-means, then each cluster of ~w*k labels
//            is split at random into groups of k (w = group_width);
//   hard   - uniformly random groups of k.
enum class FusionMode { easy, medium, hard };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& s);

struct FusionSpec {
    FusionMode mode = FusionMode::hard;
    std::size_t merge_k = 5;
    std::uint64_t seed = 0;
    std::size_t group_width = 32;
};

// Preset merge factors used in fusion experiments.
inline constexpr std::size_t kMergePresets[] = {2, 5, 10, 20};

struct FusedDataset {
    Dataset data;
    std::vector<std::vector<index_t>> groups;  // fused id -> original ids, ascending
    std::vector<index_t> fused_of;             // original id -> fused id
};

// Merges every group of original labels into one label; Y columns are
// OR-merged, X is untouched. Produces ceil(L/k) labels.
FusedDataset fuse_labels(const Dataset& data, const FusionSpec& spec);

// "fused_id: orig_id,orig_id,..."
void write_fusion_mapping(const std::vector<std::vector<index_t>>& groups, std::ostream& out);

struct BimodalSpec {
    std::size_t n_per_mode = 200;
    index_t d = 128;
    std::uint64_t seed = 0;
    std::size_t distractors_per_mode = 3;
    double major_fraction = 0.4;  // share of mode-A instances carrying the fused label
    double minor_fraction = 0.15; // share of mode-B instances carrying the fused label
    std::size_t core_dims = 6;     // features present in every instance of a mode
    double topic_presence = 0.25;  // chance that each sub-topic feature fires
    double topic_weight = 0.4;     // sub-topic values are drawn from [w/2, w]
};

// Two feature modes on disjoint halves of the feature space. Label 0 is
// positive in both modes (more often in mode A); the remaining labels are
// unimodal distractors, first those of mode A, then those of mode B.
struct BimodalToy {
    Dataset data;
    index_t fused_label = 0;
    std::vector<index_t> mode_a_labels;
    std::vector<index_t> mode_b_labels;
    std::vector<int> mode;  // per instance: 0 = mode A, 1 = mode B
};

BimodalToy make_bimodal_toy(const BimodalSpec& spec);
inline BimodalToy make_bimodal_toy(std::size_t n_per_mode, index_t d, std::uint64_t seed) {
    BimodalSpec s;
    s.n_per_mode = n_per_mode;
    s.d = d;
    s.seed = seed;
    return make_bimodal_toy(s);
}

// Unimodal labels with sparse feature prototypes; instances mix one to
// `max_labels` labels. Fusing its labels creates multi-modal labels.
struct PlantedCorpusSpec {
    std::size_t n = 5000;
    index_t L = 2500;
    index_t d = 1000;
    std::size_t prototype_nnz = 8;
    std::size_t noise_nnz = 4;
    std::size_t max_labels = 2;
    std::uint64_t seed = 0;
};

Dataset make_planted_corpus(const PlantedCorpusSpec& spec);

}  // namespace oxmc
