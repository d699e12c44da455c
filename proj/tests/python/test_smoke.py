# Copyright 2026 The weakpovm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
from pathlib import Path

import numpy as np
import pytest

import weakpovm


def trine():
    out = []
    for k in range(3):
        a = 2 * math.pi * k / 3
        psi = np.array([1, np.exp(1j * a)]) / math.sqrt(2)
        out.append((2 / 3) * np.outer(psi, psi.conj()))
    return out


def sic():
    vs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return [0.25 * (np.eye(2) + v[0] * sx + v[1] * sy + v[2] * sz) for v in vs]


PLUS_X = np.array([1, 1]) / math.sqrt(2)


def test_born_probabilities_trine():
    p = weakpovm.born_probabilities(trine(), PLUS_X)
    assert p == pytest.approx([2 / 3, 1 / 6, 1 / 6], abs=1e-12)


def test_invalid_povm_raises_with_kind():
    with pytest.raises(weakpovm.WeakPovmError) as info:
        weakpovm.validate_povm([np.eye(2), np.eye(2)])
    assert info.value.kind == "validation"
    assert isinstance(info.value, ValueError)


def test_inv_sqrt_psd_matches_eigendecomposition():
    a = np.array([[2.0, 0.5 - 0.25j], [0.5 + 0.25j, 1.0]])
    w, v = np.linalg.eigh(a)
    expected = v @ np.diag(w ** -0.5) @ v.conj().T
    assert np.allclose(weakpovm.inv_sqrt_psd(a), expected, atol=1e-12)


def test_destructive_bloch_length_closed_form():
    phi = math.pi / 6
    assert weakpovm.destructive_bloch_length(0.0, phi) == pytest.approx(math.sin(phi), abs=1e-15)
    assert weakpovm.destructive_bloch_length(-1.0, phi) == pytest.approx(1.0, abs=1e-15)


def test_decompose_dependent_povm_has_small_leaves():
    e = sic()
    five = [0.3 * e[0], 0.7 * e[0], e[1], e[2], e[3]]
    tree = weakpovm.decompose(five)
    leaves = [n["leaf"] for n in tree["nodes"] if n.get("leaf")]
    assert leaves
    assert all(len(leaf["elements"]) <= 4 for leaf in leaves)


def test_to_ppovm_reconstructs_elements():
    plan = weakpovm.to_ppovm(trine())
    assert len(plan["conditional"]) == 3


def test_simulate_trine_is_reproducible_and_close_to_born():
    a = weakpovm.simulate(trine(), PLUS_X, phi=0.4, trajectories=2000, seed=11)
    b = weakpovm.simulate(trine(), PLUS_X, phi=0.4, trajectories=2000, seed=11)
    assert a == b
    assert a["total"] == 2000
    for f, p in zip(a["frequencies"], [2 / 3, 1 / 6, 1 / 6]):
        assert abs(f - p) <= 4 * math.sqrt(p * (1 - p) / 2000)


def test_simulate_uniform_sic():
    s = weakpovm.simulate(sic(), "uniform", phi=0.4, trajectories=1000, seed=2)
    assert sum(s["counts"]) == 1000


def test_oracle_total_probability():
    r = weakpovm.oracle(trine(), PLUS_X, phi=math.pi / 6, depth=4)
    assert r["total_probability"] == pytest.approx(1.0, abs=1e-12)
    assert r["tv_distance"][-1] < r["tv_distance"][0]


def test_oracle_rejects_mixed_state():
    with pytest.raises(weakpovm.WeakPovmError):
        weakpovm.oracle(trine(), "uniform", depth=2)


def test_run_cli_exit_codes():
    data = Path(__file__).resolve().parents[2] / "data"
    assert weakpovm.run_cli(["validate", str(data / "trine.json")]) == 0
    assert weakpovm.run_cli(["validate"]) == 1
