"""Kernel dispatch: compiled Cython core when available, numpy fallback otherwise.

Set KGADV_PURE_PYTHON=1 to force the fallback (used by the benchmark and
by equivalence tests). The selected implementation is reported in IMPL.
"""

import os

import numpy as np

from . import pykernels as _py

_impl = _py
if os.environ.get("KGADV_PURE_PYTHON", "") != "1":
    try:
        from . import cykernels as _cy

        _impl = _cy
    except ImportError:
        pass

IMPL = _impl.IMPL


def scatter_add_rows(out, idx, vals):
    """out[idx[i], :] += vals[i, :] with accumulation over repeated indices."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    _impl.scatter_add_rows(out, idx, vals)


def clip_inplace(a, c):
    """Clamp every element of ``a`` to [-c, c] in place."""
    _impl.clip_inplace(a.reshape(-1), float(c))


def rmsprop_update(theta, s, g, rho, eps, eta, lam):
    """Fused RMSProp step with decoupled weight decay, in place."""
    _impl.rmsprop_update(
        theta.reshape(-1), s.reshape(-1), g.reshape(-1),
        float(rho), float(eps), float(eta), float(lam),
    )


def conv1d_forward(x, filt):
    """Valid stride-1 convolution of each row of x with every filter row."""
    return _impl.conv1d_forward(x, filt)


def conv1d_backward(grad, x, filt):
    """Input and filter gradients for conv1d_forward."""
    return _impl.conv1d_backward(grad, x, filt)
