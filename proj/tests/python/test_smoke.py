"""Smoke tests for the compiled python module.

Run via ctest with PYTHONPATH pointing at the directory that holds _core;
the assertions only skim the surface because the C++ suites already cover
the numerics in depth.
"""

import json
import math
import re

import numpy as np
import pytest

import _core


def test_version_is_semantic():
    assert re.fullmatch(r"\d+\.\d+\.\d+", _core.__version__)


def test_modular_decompose_splits_value():
    q, r = _core.modular_decompose(2.7, 1.0)
    assert q == 2
    assert r == pytest.approx(0.7)
    q, r = _core.modular_decompose(-0.25, 1.0)
    assert q == -1
    assert r == pytest.approx(0.75)


def test_weak_value_of_path_swap():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    state_in = np.array([0.0, 1.0], dtype=complex)
    state_fin = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    wv = _core.weak_value(swap, state_in, state_fin)
    assert wv == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_zn_eigenvalues_are_roots_of_unity():
    eig = _core.zn_eigenvalues(4)
    assert len(eig) == 4
    for k, z in enumerate(eig):
        target = complex(math.cos(2 * math.pi * k / 4), -math.sin(2 * math.pi * k / 4))
        assert z == pytest.approx(target, abs=1e-12)


def test_run_experiment_returns_passing_summary():
    raw = _core.run_experiment("zn", "{}", seed=123)
    summary = json.loads(raw)
    assert summary["experiment"] == "zn"
    assert summary["seed"] == 123
    assert summary["all_pass"] is True
    assert {v["name"] for v in summary["verdicts"]} >= {
        "zn_orthonormal_dev",
        "zn_grid_eigenvalue_dev",
    }


def test_run_experiment_is_reproducible():
    a = _core.run_experiment("flatness", "{}", seed=7)
    b = _core.run_experiment("flatness", "{}", seed=7)
    assert a == b


def test_config_overrides_reach_the_run():
    raw = _core.run_experiment("gedanken", '{"lambda": 0.2, "n_particles": 10}')
    summary = json.loads(raw)
    assert summary["scalars"]["shift"] == pytest.approx(0.2, abs=1e-12)
    assert summary["config"]["n_particles"] == 10


def test_errors_surface_as_value_errors():
    with pytest.raises(ValueError, match="unknown experiment"):
        _core.run_experiment("warp", "{}")
    with pytest.raises(ValueError, match="not valid JSON"):
        _core.run_experiment("zn", "{")
    with pytest.raises(ValueError, match="period"):
        _core.modular_decompose(1.0, 0.0)
