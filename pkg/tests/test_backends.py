"""Agreement between the compiled kernel and the NumPy fallback."""

import numpy as np
import pytest

from isaccd import BinaryIsacParams, binary_channel
from isaccd.backend import get_backend
from isaccd.bounds import lower_objective, upper_objective

from conftest import random_channel

pure = get_backend("pure")
try:
    ext = get_backend("ext")
except ImportError:  # pragma: no cover - extension is built in CI
    ext = None

needs_ext = pytest.mark.skipif(ext is None, reason="compiled kernel not built")


def _objective_args(obj):
    return obj.l_stack, obj.row_off, obj.gcoef, obj.glin, obj.dcoef


@needs_ext
class TestBackendAgreement:
    def test_project_rows(self, rng):
        v = rng.normal(size=(50, 13))
        a = pure.project_rows(v)
        b = ext.project_rows(v)
        assert np.abs(a - b).max() <= 1e-12
        assert np.allclose(a.sum(axis=1), 1.0, atol=1e-12)
        assert a.min() >= 0.0

    def test_evaluate_lower_and_upper(self, rng):
        ch = random_channel(rng)
        for obj in (lower_objective(ch, 3), upper_objective(ch, 4, 9, "sym"), upper_objective(ch, 4, 9, "seq")):
            n_w = int(np.prod(obj.shape))
            w = rng.dirichlet(np.ones(n_w), size=40)
            ra, da = pure.evaluate(*_objective_args(obj), w)
            rb, db = ext.evaluate(*_objective_args(obj), w)
            assert np.abs(ra - rb).max() <= 1e-12
            assert np.abs(da - db).max() <= 1e-12

    def test_ascend_agreement(self, rng):
        ch = binary_channel(BinaryIsacParams(0.18, 0.2, 0.1))
        obj = lower_objective(ch, 3)
        w0 = rng.dirichlet(np.ones(6), size=12)
        args = (*_objective_args(obj), w0, 0.5, 60, 0.25, 1e-12, 1e-7)
        wa, ra, da, ca = pure.ascend(*args)
        wb, rb, db, cb = ext.ascend(*args)
        assert np.abs(ra - rb).max() <= 1e-8
        assert np.abs(da - db).max() <= 1e-8

    def test_ascend_improves_lagrangian(self, rng):
        ch = random_channel(rng)
        obj = lower_objective(ch, 3)
        w0 = rng.dirichlet(np.ones(6), size=16)
        r0, d0 = pure.evaluate(*_objective_args(obj), w0)
        lam = 0.7
        for impl in (pure, ext):
            _, r, d, _ = impl.ascend(*_objective_args(obj), w0, lam, 150, 0.25, 1e-12, 1e-7)
            assert np.all(r - lam * d >= r0 - lam * d0 - 1e-12)


class TestPureKernelBasics:
    def test_projection_idempotent(self, rng):
        v = rng.dirichlet(np.ones(7), size=20)
        assert np.abs(pure.project_rows(v) - v).max() <= 1e-12

    def test_projection_known_case(self):
        out = pure.project_rows(np.array([[2.0, 0.0]]))
        assert np.allclose(out, [[1.0, 0.0]])
        out = pure.project_rows(np.array([[0.75, 0.25, -1.0]]))
        assert np.allclose(out, [[0.75, 0.25, 0.0]], atol=1e-12)
