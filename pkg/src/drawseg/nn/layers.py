"""Dense layers with explicit forward and backward passes (float64).

Graph operators are sparse matrices built once per (batched) graph:
``mean_operator`` averages neighbour rows and ``gcn_operator`` is the
symmetrically normalised adjacency with self loops.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def _check(h: np.ndarray, w: np.ndarray) -> None:
    if h.ndim != 2 or w.ndim != 2 or h.shape[1] != w.shape[0]:
        raise ValueError(f"shape mismatch: input {h.shape} vs weight {w.shape}")


def adjacency(num_nodes: int, edges) -> sp.csr_matrix:
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(num_nodes, num_nodes))
    a.sum_duplicates()
    a.data[:] = 1.0
    return a


def mean_operator(num_nodes: int, edges) -> sp.csr_matrix:
    """Row-normalised adjacency; rows of isolated nodes are zero."""
    a = adjacency(num_nodes, edges)
    deg = np.asarray(a.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return sp.csr_matrix(sp.diags(inv) @ a)


def gcn_operator(num_nodes: int, edges) -> sp.csr_matrix:
    a = adjacency(num_nodes, edges) + sp.identity(num_nodes, format="csr")
    d = 1.0 / np.sqrt(np.asarray(a.sum(axis=1)).ravel())
    return sp.csr_matrix(sp.diags(d) @ a @ sp.diags(d))


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _act_backward(dout, z, act):
    return dout * (z > 0) if act else dout


# Each forward returns (output, cache); each backward takes (dout, cache) and
# returns (dinput, {param_name: grad}).

def linear_forward(h, w, b, act=True):
    _check(h, w)
    z = h @ w + b
    return (relu(z) if act else z), (h, w, z, act)


def linear_backward(dout, cache):
    h, w, z, act = cache
    dz = _act_backward(dout, z, act)
    return dz @ w.T, {"W": h.T @ dz, "b": dz.sum(axis=0)}


def sage_forward(h, op_mean, w_self, w_neigh, b, act=True):
    _check(h, w_self)
    _check(h, w_neigh)
    m = op_mean @ h
    z = h @ w_self + m @ w_neigh + b
    return (relu(z) if act else z), (h, m, op_mean, w_self, w_neigh, z, act)


def sage_backward(dout, cache):
    h, m, op_mean, w_self, w_neigh, z, act = cache
    dz = _act_backward(dout, z, act)
    dh = dz @ w_self.T + op_mean.T @ (dz @ w_neigh.T)
    return dh, {"W_self": h.T @ dz, "W_neigh": m.T @ dz, "b": dz.sum(axis=0)}


def gcn_forward(h, op_gcn, w, b, act=True):
    _check(h, w)
    sh = op_gcn @ h
    z = sh @ w + b
    return (relu(z) if act else z), (sh, op_gcn, w, z, act)


def gcn_backward(dout, cache):
    sh, op_gcn, w, z, act = cache
    dz = _act_backward(dout, z, act)
    return op_gcn.T @ (dz @ w.T), {"W": sh.T @ dz, "b": dz.sum(axis=0)}


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood and its gradient with respect to the logits."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.size == 0 or len(labels) == 0:
        raise ValueError("empty input")
    if len(labels) != len(logits):
        raise ValueError("label count does not match logits")
    if labels.min() < 0 or labels.max() >= logits.shape[1]:
        raise ValueError("label out of range")
    rows = np.arange(len(labels))
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - z[rows, labels]))
    grad = np.exp(z - lse[:, None])
    grad[rows, labels] -= 1.0
    return loss, grad / len(labels)
