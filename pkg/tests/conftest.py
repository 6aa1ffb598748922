"""Shared builders and independent oracles for the test suite."""

import numpy as np
import pytest

from lagraph import Graph


def undirected_graph(num_nodes, pairs, add_self_loops=True):
    """Build a Graph from undirected pair list, mirroring both directions."""
    arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    if arr.size:
        arr = np.concatenate([arr, arr[:, ::-1]], axis=0)
    return Graph.from_edges(num_nodes, arr, add_self_loops=add_self_loops)


def dense_adjacency(g):
    """0/1 adjacency matrix straight from the CSR arrays."""
    a = np.zeros((g.num_nodes, g.num_nodes))
    for v in range(g.num_nodes):
        a[v, g.neighbors(v)] = 1.0
    return a


def path_graph(n):
    return undirected_graph(n, [(i, i + 1) for i in range(n - 1)])


def flatten_params(arrays):
    return np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays])


def write_back(arrays, flat):
    """Scatter a flat vector into the given arrays in place."""
    off = 0
    for a in arrays:
        size = a.size
        a.ravel()[:] = flat[off:off + size]
        off += size
    assert off == flat.size


def central_difference(f, arrays, coords, step=1e-5):
    """Central finite differences of scalar f() at selected flat coordinates.

    ``arrays`` are the live parameter arrays f reads; they are restored
    afterwards.
    """
    base = flatten_params(arrays)
    grads = {}
    for idx in coords:
        bumped = base.copy()
        bumped[idx] = base[idx] + step
        write_back(arrays, bumped)
        hi = f()
        bumped[idx] = base[idx] - step
        write_back(arrays, bumped)
        lo = f()
        grads[idx] = (hi - lo) / (2.0 * step)
    write_back(arrays, base)
    return grads


def assert_gradients_match(analytic_flat, fd_grads, rel_tol=1e-4):
    for idx, fd in fd_grads.items():
        an = analytic_flat[idx]
        denom = max(abs(an), abs(fd), 1e-8)
        assert abs(an - fd) / denom < rel_tol, (
            f"coordinate {idx}: analytic {an!r} vs finite-difference {fd!r}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
