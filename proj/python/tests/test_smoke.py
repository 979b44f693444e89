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
import os
import subprocess

import numpy as np
import pytest
import scipy.sparse as sp

import oxmc


def _csr(m):
    m = sp.csr_matrix(m)
    return (m.indptr, m.indices, m.data, m.shape)


def _from_csr(t):
    indptr, indices, data, shape = t
    return sp.csr_matrix((data, indices, indptr), shape=shape)


@pytest.fixture(scope="module")
def corpus():
    base = oxmc.make_planted_corpus(n=600, L=200, d=400, seed=1)
    fused, groups = oxmc.fuse_labels(base, mode="hard", k=5, seed=1)
    assert fused.L == 40
    assert sorted(l for g in groups for l in g) == list(range(200))
    return fused


def test_train_refine_predict(corpus, tmp_path):
    train = corpus.subset(list(range(500)))
    test = corpus.subset(list(range(500, 600)))
    model = oxmc.train(train, branching=4, max_leaf=4, beam=3, seed=2)
    assert model.num_labels == 40
    assert model.provenance == "initial-kmeans"

    refined, log = oxmc.refine(model, train, lambda_=2)
    assert refined.lambda_ == 2
    assert log[0]["relaxed"] >= log[0]["relaxed_before"]
    c = _from_csr(refined.assignment_csr())
    assert c.shape == (40, model.num_clusters)
    assert np.all(np.diff(c.indptr) >= 1) and np.all(np.diff(c.indptr) <= 2)

    preds = oxmc.predict(refined, test, topk=5)
    assert len(preds) == 100
    assert all(len(p) <= 5 for p in preds)
    assert all(p[i][1] >= p[i + 1][1] for p in preds for i in range(len(p) - 1))
    p1 = oxmc.precision_at_k(preds, test, 1)
    assert 0.0 <= p1 <= 1.0
    psp = oxmc.psp_at_k(preds, test, train, 5)
    assert 0.0 <= psp <= 1.0

    m = _from_csr(oxmc.match_matrix(refined, test))
    assert np.all(np.diff(m.indptr) == min(3, model.num_clusters))

    oxmc.save_model(refined, str(tmp_path / "m"))
    again = oxmc.load_model(str(tmp_path / "m"))
    assert oxmc.predict(again, test, topk=5) == preds


def test_dataset_from_scipy(tmp_path):
    x = sp.random(30, 12, density=0.3, format="csr", random_state=0)
    x.data += 0.1
    y = sp.csr_matrix((np.ones(30), (np.arange(30), np.arange(30) % 4)), shape=(30, 4))
    data = oxmc.dataset_from_csr(_csr(x), _csr(y))
    assert (data.n, data.d, data.L) == (30, 12, 4)
    assert abs(_from_csr(data.features_csr()) - x).max() == 0
    path = tmp_path / "d.txt"
    oxmc.save_dataset(data, str(path))
    back = oxmc.load_dataset(str(path))
    assert abs(_from_csr(back.labels_csr()) - y).max() == 0
    with pytest.raises(oxmc.InvalidArgument):
        oxmc.dataset_from_csr(_csr(x), _csr(y[:10]))


def test_projection_binding():
    y = sp.csr_matrix(np.array([[1.0], [1.0]]))
    m = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
    fallback = sp.csr_matrix(np.array([[1.0, 0.0]]))
    c, relaxed, binary = oxmc.project_assignment(_csr(y), _csr(m), 2, _csr(fallback))
    assert _from_csr(c).toarray().tolist() == [[1.0, 1.0]]
    assert (relaxed, binary) == (2, 2)
    with pytest.raises(oxmc.InvalidArgument):
        oxmc.project_assignment(_csr(y), _csr(m), 0, _csr(fallback))


def test_bimodal_toy():
    data, mode = oxmc.make_bimodal_toy(n_per_mode=50, seed=3)
    assert data.n == 100
    assert mode.count(0) == 50 and mode.count(1) == 50


def test_parse_error(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 3 2\n5 0:1\n")
    with pytest.raises(oxmc.ParseError, match=":2:"):
        oxmc.load_dataset(str(bad))


@pytest.mark.skipif("OXMC_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_help():
    out = subprocess.run([os.environ["OXMC_CLI"], "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "refine" in out.stdout
    bad = subprocess.run([os.environ["OXMC_CLI"], "train"], capture_output=True, text=True)
    assert bad.returncode == 2
