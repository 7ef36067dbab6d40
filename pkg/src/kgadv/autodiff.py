"""Minimal reverse-mode autodiff over numpy arrays.

Every operation returns a Node recording its parents and a vector-Jacobian
closure; backward() walks the graph once in reverse topological order.
Row-oriented convention: batched vectors are (B, k) arrays and reductions
like dot/sq_l2 map them to (B,) arrays. 1-D inputs are treated as a single
row and reduce to scalars. Reductions accumulate in float64 and cast back
to the input dtype.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import _kernels


class Node:
    """One recorded value in a differentiable computation."""

    __slots__ = ("value", "parents", "vjp", "name")

    def __init__(self, value, parents=(), vjp=None, name=None):
        self.value = np.asarray(value)
        self.parents = parents
        self.vjp = vjp
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Node(shape={self.value.shape}, dtype={self.value.dtype}{tag})"


def as_node(x) -> Node:
    return x if isinstance(x, Node) else Node(np.asarray(x))


def leaf(value, name: str) -> Node:
    """A named differentiable input; backward() reports gradients by name."""
    return Node(value, name=name)


def _require_same_shape(a: Node, b: Node, op: str):
    if a.value.shape != b.value.shape:
        raise ValueError(f"{op}: shape mismatch {a.value.shape} vs {b.value.shape}")


def add(a, b) -> Node:
    a, b = as_node(a), as_node(b)
    _require_same_shape(a, b, "add")
    return Node(a.value + b.value, (a, b), lambda g: (g, g))


def sub(a, b) -> Node:
    a, b = as_node(a), as_node(b)
    _require_same_shape(a, b, "sub")
    return Node(a.value - b.value, (a, b), lambda g: (g, -g))


def neg(a) -> Node:
    a = as_node(a)
    return Node(-a.value, (a,), lambda g: (-g,))


def mul(a, b) -> Node:
    a, b = as_node(a), as_node(b)
    _require_same_shape(a, b, "mul")
    av, bv = a.value, b.value
    return Node(av * bv, (a, b), lambda g: (g * bv, g * av))


def smul(a, c: float) -> Node:
    """Multiply by a python scalar."""
    a = as_node(a)
    cv = a.value.dtype.type(c)
    return Node(a.value * cv, (a,), lambda g: (g * cv,))


def sadd(a, c: float) -> Node:
    """Add a python scalar."""
    a = as_node(a)
    return Node(a.value + a.value.dtype.type(c), (a,), lambda g: (g,))


def rowscale(mat, vec) -> Node:
    """Scale row i of mat by vec[i]; mat is (B, k), vec is (B,)."""
    mat, vec = as_node(mat), as_node(vec)
    mv, vv = mat.value, vec.value
    if mv.ndim != 2 or vv.shape != (mv.shape[0],):
        raise ValueError(f"rowscale: incompatible shapes {mv.shape}, {vv.shape}")

    def vjp(g):
        g_mat = g * vv[:, None]
        g_vec = np.einsum("ij,ij->i", g.astype(np.float64), mv.astype(np.float64))
        return g_mat, g_vec.astype(vv.dtype)

    return Node(mv * vv[:, None], (mat, vec), vjp)


def gather(table, idx) -> Node:
    """Select rows of a (n, k) table; gradient scatter-adds into a dense table."""
    table = as_node(table)
    idx = np.asarray(idx, dtype=np.int64)
    tv = table.value

    def vjp(g):
        out = np.zeros_like(tv)
        _kernels.scatter_add_rows(out, idx, np.ascontiguousarray(g))
        return (out,)

    return Node(tv[idx], (table,), vjp)


def affine(x, w, b) -> Node:
    """x @ w + b for x (B, d), w (d, o), b (o,)."""
    x, w, b = as_node(x), as_node(w), as_node(b)
    xv, wv, bv = x.value, w.value, b.value
    if xv.ndim != 2 or wv.ndim != 2 or xv.shape[1] != wv.shape[0] or bv.shape != (wv.shape[1],):
        raise ValueError(f"affine: incompatible shapes {xv.shape}, {wv.shape}, {bv.shape}")

    def vjp(g):
        gx = g @ wv.T
        gw = xv.T @ g
        gb = g.sum(axis=0, dtype=np.float64).astype(bv.dtype)
        return gx, gw, gb

    return Node(xv @ wv + bv, (x, w, b), vjp)


def relu(x) -> Node:
    """Elementwise max(x, 0); subgradient at the kink is 0."""
    x = as_node(x)
    mask = x.value > 0
    return Node(np.where(mask, x.value, x.value.dtype.type(0)), (x,), lambda g: (g * mask,))


def tanh(x) -> Node:
    x = as_node(x)
    t = np.tanh(x.value)
    return Node(t, (x,), lambda g: (g * (1 - t * t),))


def concat(*xs) -> Node:
    """Concatenate along the last axis."""
    nodes = [as_node(x) for x in xs]
    widths = [n.value.shape[-1] for n in nodes]
    splits = np.cumsum(widths)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=-1))

    return Node(np.concatenate([n.value for n in nodes], axis=-1), tuple(nodes), vjp)


def _rowwise(x: np.ndarray) -> np.ndarray:
    return x[None, :] if x.ndim == 1 else x


def dot(a, b) -> Node:
    """Row-wise inner product: (B, k) x (B, k) -> (B,); 1-D inputs -> scalar."""
    a, b = as_node(a), as_node(b)
    _require_same_shape(a, b, "dot")
    av, bv = a.value, b.value
    scalar_out = av.ndim == 1
    a2, b2 = _rowwise(av), _rowwise(bv)
    val = np.einsum("ij,ij->i", a2.astype(np.float64), b2.astype(np.float64)).astype(av.dtype)

    def vjp(g):
        g2 = np.atleast_1d(g)[:, None]
        ga, gb = g2 * b2, g2 * a2
        if scalar_out:
            return ga[0], gb[0]
        return ga, gb

    return Node(val[0] if scalar_out else val, (a, b), vjp)


def sq_l2(x) -> Node:
    """Row-wise squared L2 norm: (B, k) -> (B,); 1-D input -> scalar."""
    x = as_node(x)
    xv = x.value
    scalar_out = xv.ndim == 1
    x2 = _rowwise(xv)
    x64 = x2.astype(np.float64)
    val = np.einsum("ij,ij->i", x64, x64).astype(xv.dtype)

    def vjp(g):
        g2 = np.atleast_1d(g)[:, None]
        gx = g2 * (2 * x2)
        return (gx[0] if scalar_out else gx,)

    return Node(val[0] if scalar_out else val, (x,), vjp)


def l2(x) -> Node:
    """Row-wise L2 norm; gradient at the origin is defined as 0."""
    x = as_node(x)
    xv = x.value
    scalar_out = xv.ndim == 1
    x2 = _rowwise(xv)
    x64 = x2.astype(np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", x64, x64))

    def vjp(g):
        safe = np.where(norms > 0, norms, 1.0)
        unit = (x64 / safe[:, None]) * (norms > 0)[:, None]
        gx = (np.atleast_1d(g)[:, None] * unit).astype(xv.dtype)
        return (gx[0] if scalar_out else gx,)

    val = norms.astype(xv.dtype)
    return Node(val[0] if scalar_out else val, (x,), vjp)


def conv1d(x, filt) -> Node:
    """Valid stride-1 convolution: x (B, L) with filters (tau, w) -> (B, tau, L-w+1)."""
    x, filt = as_node(x), as_node(filt)
    xv, fv = x.value, filt.value
    if xv.ndim != 2 or fv.ndim != 2:
        raise ValueError(f"conv1d: expected 2-D input and filters, got {xv.shape}, {fv.shape}")
    if fv.shape[1] > xv.shape[1]:
        raise ValueError(f"conv1d: filter width {fv.shape[1]} exceeds input length {xv.shape[1]}")
    xc = np.ascontiguousarray(xv)
    fc = np.ascontiguousarray(fv)

    def vjp(g):
        gx, gf = _kernels.conv1d_backward(np.ascontiguousarray(g), xc, fc)
        return gx, gf

    return Node(_kernels.conv1d_forward(xc, fc), (x, filt), vjp)


def reshape(x, shape) -> Node:
    x = as_node(x)
    old = x.value.shape
    return Node(x.value.reshape(shape), (x,), lambda g: (g.reshape(old),))


def total_sum(x) -> Node:
    """Sum of all elements -> scalar."""
    x = as_node(x)
    xv = x.value
    val = xv.dtype.type(xv.sum(dtype=np.float64))

    def vjp(g):
        return (np.full_like(xv, g),)

    return Node(val, (x,), vjp)


def _topo_order(root: Node) -> list[Node]:
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(root: Node, store=None) -> dict[str, np.ndarray]:
    """Gradients of a scalar root with respect to every named leaf.

    With a ParamStore passed, the result covers every parameter in the
    store, zero-filled where the graph does not reach it.
    """
    if np.asarray(root.value).ndim != 0:
        raise ValueError(f"backward: root must be scalar, got shape {root.value.shape}")
    order = _topo_order(root)
    grads: dict[int, np.ndarray] = {id(root): np.ones((), dtype=root.value.dtype)}
    result: dict[str, np.ndarray] = {}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.name is not None:
            if node.name in result:
                result[node.name] = result[node.name] + g
            else:
                result[node.name] = g
        if node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            pid = id(parent)
            if pid in grads:
                grads[pid] = grads[pid] + pg
            else:
                grads[pid] = pg
    if store is not None:
        for name in store.names():
            if name not in result:
                result[name] = np.zeros_like(store[name])
    return result


@dataclass
class GradCheckReport:
    """Outcome of a finite-difference comparison."""

    max_rel_err: float
    checked: int
    excluded: list = field(default_factory=list)

    def __float__(self):
        return self.max_rel_err


def grad_check(
    loss_builder: Callable[[], Node],
    store,
    step: float = 1e-3,
    names: Iterable[str] | None = None,
    coords_per_param: int | None = None,
    rng: np.random.Generator | None = None,
    kink_guard: bool = True,
) -> GradCheckReport:
    """Compare analytic gradients with central finite differences.

    loss_builder must be deterministic and read parameters from the store
    on every call. Coordinates where the two central-difference estimates
    (full step vs half step) disagree are treated as nondifferentiable
    points, excluded from the maximum, and reported separately.
    """
    analytic = backward(loss_builder(), store)
    if names is None:
        names = list(store.names())
    if rng is None:
        rng = np.random.default_rng(0)

    def eval_loss() -> float:
        return float(loss_builder().value)

    max_err = 0.0
    checked = 0
    excluded = []
    for name in names:
        arr = store[name]
        flat = arr.reshape(-1)
        n = flat.shape[0]
        if coords_per_param is None or coords_per_param >= n:
            coords = np.arange(n)
        else:
            coords = rng.choice(n, size=coords_per_param, replace=False)
        a_flat = analytic[name].reshape(-1)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + step
            f_plus = eval_loss()
            flat[i] = orig - step
            f_minus = eval_loss()
            fd = (f_plus - f_minus) / (2 * step)
            if kink_guard:
                half = step / 2
                flat[i] = orig + half
                f_ph = eval_loss()
                flat[i] = orig - half
                f_mh = eval_loss()
                fd_half = (f_ph - f_mh) / (2 * half)
                scale = max(abs(fd), abs(fd_half), 1e-6)
                if abs(fd - fd_half) / scale > 1e-2:
                    flat[i] = orig
                    excluded.append((name, int(i)))
                    continue
                fd = fd_half
            flat[i] = orig
            a = float(a_flat[i])
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-6)
            max_err = max(max_err, err)
            checked += 1
    return GradCheckReport(max_err, checked, excluded)
