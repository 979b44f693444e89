# Copyright 2026 The oxmc Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings of the oxmc extreme multi-label classification engine."""

from ._oxmc import (
    Dataset,
    DimensionError,
    Error,
    InvalidArgument,
    Model,
    ParseError,
    dataset_from_csr,
    fuse_labels,
    load_dataset,
    load_model,
    make_bimodal_toy,
    make_planted_corpus,
    match_matrix,
    precision_at_k,
    predict,
    project_assignment,
    psp_at_k,
    refine,
    save_dataset,
    save_model,
    train,
)

__all__ = [
    "Dataset",
    "DimensionError",
    "Error",
    "InvalidArgument",
    "Model",
    "ParseError",
    "dataset_from_csr",
    "fuse_labels",
    "load_dataset",
    "load_model",
    "make_bimodal_toy",
    "make_planted_corpus",
    "match_matrix",
    "precision_at_k",
    "predict",
    "project_assignment",
    "psp_at_k",
    "refine",
    "save_dataset",
    "save_model",
    "train",
]
