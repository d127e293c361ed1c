import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiards import builtin_table
from billiards._backend import BACKEND, get_kernels

cy = pytest.importorskip("billiards._ckernels")
py = get_kernels("python")


def test_default_backend_follows_environment():
    forced = os.environ.get("BILLIARDS_PURE_PYTHON") == "1"
    assert BACKEND == ("python" if forced else "cython")


@given(th=st.floats(0, 1, exclude_max=True), r=st.floats(-0.97, 0.97),
       name=st.sampled_from("ABCDE"))
@settings(max_examples=100, deadline=None)
def test_step_parity(th, r, name):
    coef = builtin_table(name).packed()
    a = cy.step(coef, th, r)
    b = py.step(coef, th, r)
    assert a[0] == b[0]
    assert np.allclose(a[1:10], b[1:10], atol=1e-12, equal_nan=True)


def test_orbit_batch_parity():
    coef = builtin_table("B").packed()
    rng = np.random.default_rng(3)
    th = rng.random(8)
    r = rng.uniform(-0.9, 0.9, 8)
    a = cy.orbit_batch(coef, th, r, 100)
    b = py.orbit_batch(coef, th, r, 100)
    assert np.array_equal(a[0], b[0])
    assert np.allclose(a[2], b[2], atol=1e-10)


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_kernels("fortran")
