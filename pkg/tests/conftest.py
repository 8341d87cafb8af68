"""Shared builders for the test suite."""
import numpy as np

from specstream import RowStream


def make_psd(d, rank, seed, scale=1.0):
    """Random d x d PSD matrix whose rank is min(rank, d) almost surely."""
    g = np.random.default_rng(seed).standard_normal((rank, d))
    return scale * (g.T @ g)


def make_stream(arr, meta=None):
    arr = np.asarray(arr, dtype=float)
    return RowStream(arr.shape[1], arr, meta if meta is not None else {"kind": "test"})


def identity_stream(d, copies=1):
    return make_stream(np.tile(np.eye(d), (copies, 1)))
