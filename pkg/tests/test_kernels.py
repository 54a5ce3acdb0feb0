import importlib

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cqsdc import _pykernels as py
from cqsdc import kernels

from conftest import random_state

try:
    ext = importlib.import_module("cqsdc._kernels")
except ImportError:  # extension not built
    ext = None

needs_ext = pytest.mark.skipif(ext is None, reason="compiled kernels not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


@needs_ext
def test_compiled_backend_selected_by_default():
    assert kernels.BACKEND == "cython"


@needs_ext
@given(st.integers(1, 7), st.data())
def test_parity_gates(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    v = random_state(rng, n)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    pos = data.draw(st.integers(0, n - 1))
    np.testing.assert_allclose(ext.apply_1q(v, n, pos, g), py.apply_1q(v, n, pos, g), atol=1e-12)
    if n >= 2:
        p1, p2 = data.draw(st.permutations(range(n)))[:2]
        g4 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        np.testing.assert_allclose(ext.apply_2q(v, n, p1, p2, g4), py.apply_2q(v, n, p1, p2, g4), atol=1e-12)
        np.testing.assert_allclose(ext.apply_cnot(v, n, p1, p2), py.apply_cnot(v, n, p1, p2), atol=1e-12)


@needs_ext
@given(st.integers(1, 6), st.data())
def test_parity_measurement_helpers(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    v = random_state(rng, n)
    k = data.draw(st.integers(1, n))
    pos = data.draw(st.permutations(range(n)))[:k]
    np.testing.assert_allclose(ext.marginal(v, n, pos), py.marginal(v, n, pos), atol=1e-12)
    o = data.draw(st.integers(0, 2**k - 1))
    np.testing.assert_allclose(ext.project(v, n, pos, o), py.project(v, n, pos, o), atol=1e-12)
    assert ext.norm2(v) == pytest.approx(py.norm2(v))
    w = random_state(rng, 2)
    np.testing.assert_allclose(ext.kron(v, w), py.kron(v, w), atol=1e-14)


@needs_ext
@given(st.lists(st.floats(0, 1), min_size=1, max_size=16), st.floats(0, 1, exclude_max=True))
def test_parity_sample(weights, u):
    p = np.array(weights)
    if p.sum() == 0:
        return
    p = p / p.sum()
    assert ext.sample(p, u) == py.sample(p, u)


def test_sample_skips_dust():
    p = np.array([0.5, 1e-15, 0.5])
    assert py.sample(p, 0.5) == 2
    assert py.sample(p, 0.49) == 0


def test_pure_fallback_runs_protocol(monkeypatch):
    import subprocess
    import sys

    code = ("import cqsdc, numpy as np; from cqsdc.protocol import *; "
            "t=run_session('1001', SessionConfig(n_message_groups=2)); "
            "print(cqsdc.BACKEND, t.recovered)")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={**__import__("os").environ, "CQSDC_PURE_PYTHON": "1"}, check=True)
    assert out.stdout.split() == ["python", "1001"]
