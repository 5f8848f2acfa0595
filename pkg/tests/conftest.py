"""Shared reference implementations used as independent test oracles.

These deliberately avoid the library's code paths (plain math.log2 loops,
explicit table construction) so that agreement is a two-route check.
"""

import math

import numpy as np
import pytest

from isaccd import IsacChannel, JointPmf


def hb_ref(p: float) -> float:
    """Reference binary entropy in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def conv_ref(a: float, b: float) -> float:
    """Reference binary convolution."""
    return (1.0 - a) * b + a * (1.0 - b)


def entropy_ref(table) -> float:
    """Reference Shannon entropy in bits of an arbitrary table."""
    total = 0.0
    for v in np.asarray(table, dtype=float).ravel():
        if v > 0.0:
            total -= v * math.log2(v)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_joint(rng, shape, axes) -> JointPmf:
    table = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return JointPmf(table, axes)


def random_channel(rng, nx=2, ns=2, ny1=2, ny2=2) -> IsacChannel:
    kernel = rng.dirichlet(np.ones(ny1 * ny2), size=(nx, ns)).reshape(nx, ns, ny1, ny2)
    p_s = rng.dirichlet(np.ones(ns))
    return IsacChannel(p_s=p_s, kernel=kernel)


def joint_from_lower_aux(ch: IsacChannel, w) -> JointPmf:
    """p(u, x, s, y1, y2) = p(u, x) p_s(s) kernel(y1, y2 | x, s)."""
    w = np.asarray(w, dtype=float)
    table = np.einsum("ux,s,xsab->uxsab", w, ch.p_s, ch.kernel)
    return JointPmf(table, ("U", "X", "S", "Y1", "Y2"))


def joint_from_upper_aux(ch: IsacChannel, w) -> JointPmf:
    """p(u, v, x, s, y1, y2) for three-axis auxiliary joints."""
    w = np.asarray(w, dtype=float)
    table = np.einsum("uvx,s,xsab->uvxsab", w, ch.p_s, ch.kernel)
    return JointPmf(table, ("U", "V", "X", "S", "Y1", "Y2"))
