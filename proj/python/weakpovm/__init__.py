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

"""Simulate qubit POVMs with sequences of destructive weak measurements.

POVM elements are 2x2 complex array-likes. States are a ket (length 2), a
density matrix (2x2) or the string "uniform" for I/2 sampled by Haar-random
pure states. Structured results are plain dicts in the JSON schema the
``weakpovm`` command-line tool writes.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

import numpy as np

from . import _core
from ._core import (
    WeakPovmError,
    default_max_steps,
    destructive_bloch_length,
    inv_sqrt_psd,
    run_cli,
)

__version__ = _core.__version__

__all__ = [
    "WeakPovmError",
    "born_probabilities",
    "decompose",
    "default_max_steps",
    "destructive_bloch_length",
    "inv_sqrt_psd",
    "oracle",
    "run_cli",
    "simulate",
    "to_ppovm",
    "validate_povm",
]


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _matrix(m: Any) -> list[list[list[float]]]:
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise WeakPovmError(f"expected a 2x2 matrix, got shape {a.shape}")
    return [[_complex(a[i, j]) for j in range(2)] for i in range(2)]


def _povm(elements: Sequence[Any], labels: Sequence[int] | None = None) -> str:
    doc: dict[str, Any] = {"elements": [_matrix(e) for e in elements]}
    if labels is not None:
        doc["labels"] = [int(i) for i in labels]
    return json.dumps(doc)


def _state(state: Any) -> str:
    if isinstance(state, str):
        if state != "uniform":
            raise WeakPovmError(f"unknown state {state!r}; use 'uniform', a ket or a density matrix")
        return json.dumps({"mixed": "uniform"})
    a = np.asarray(state, dtype=complex)
    if a.shape == (2,):
        return json.dumps({"pure": [_complex(a[0]), _complex(a[1])]})
    return json.dumps({"density": _matrix(a)})


def validate_povm(elements: Sequence[Any], labels: Sequence[int] | None = None) -> dict:
    """Checks positivity and completeness; returns the normalised POVM document."""
    return json.loads(_core.validate_json(_povm(elements, labels)))


def born_probabilities(elements: Sequence[Any], state: Any) -> list[float]:
    """Tr[E_i rho] for every element."""
    return _core.born_json(_povm(elements), _state(state))


def decompose(elements: Sequence[Any]) -> dict:
    """Tree of random choices whose leaves are linearly independent POVMs."""
    return json.loads(_core.decompose_json(_povm(elements)))


def to_ppovm(elements: Sequence[Any]) -> dict:
    """Projective elements plus the conditional output matrix p(i|k)."""
    return json.loads(_core.ppovm_json(_povm(elements)))


def simulate(
    elements: Sequence[Any],
    state: Any,
    *,
    phi: float = 0.1,
    eps: float = 1e-3,
    max_steps: int = 0,
    trajectories: int = 20000,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Monte Carlo outcome statistics of the full pre/walk/post chain."""
    return json.loads(
        _core.simulate_json(_povm(elements), _state(state), phi, eps, max_steps, trajectories, seed, threads)
    )


def oracle(
    elements: Sequence[Any],
    ket: Any,
    *,
    phi: float = 0.1,
    eps: float = 1e-3,
    depth: int = 8,
    include_strings: bool = False,
) -> dict:
    """Exact enumeration of every outcome string up to `depth` for a pure state."""
    return json.loads(_core.oracle_json(_povm(elements), _state(ket), phi, eps, depth, include_strings))
