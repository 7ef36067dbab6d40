"""Numpy fallback for the hot kernels.

Mirrors the compiled core in kgadv._kernels.cykernels operation for
operation: elementwise arithmetic is done in the array dtype, reductions
accumulate in float64 before the result is cast back.
"""

import numpy as np

IMPL = "python"


def scatter_add_rows(out, idx, vals):
    """out[idx[i], :] += vals[i, :], repeated indices accumulate."""
    np.add.at(out, idx, vals)


def clip_inplace(a, c):
    """Clamp every element of ``a`` to [-c, c] in place."""
    np.clip(a, -c, c, out=a)


def rmsprop_update(theta, s, g, rho, eps, eta, lam):
    """One RMSProp step with decoupled weight decay, in place.

    s     <- rho * s + (1 - rho) * g^2
    theta <- theta - eta * g / (sqrt(s) + eps) - eta * lam * theta
    """
    dt = theta.dtype.type
    rho = dt(rho)
    one_m_rho = dt(1.0 - float(rho))
    eps = dt(eps)
    eta = dt(eta)
    s *= rho
    s += (one_m_rho * g) * g
    theta -= eta * g / (np.sqrt(s) + eps)
    if lam != 0.0:
        theta -= (dt(eta * lam)) * theta


def conv1d_forward(x, filt):
    """Valid 1-D convolution, stride 1: out[b,t,p] = sum_j x[b,p+j] * filt[t,j]."""
    bsz, length = x.shape
    tau, width = filt.shape
    if width > length:
        raise ValueError(f"filter width {width} exceeds input length {length}")
    pos = length - width + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, width, axis=1)
    out = np.einsum("bpj,tj->btp", windows.astype(np.float64), filt.astype(np.float64))
    return out.astype(x.dtype)


def conv1d_backward(grad, x, filt):
    """Gradients of conv1d_forward w.r.t. input and filters."""
    bsz, length = x.shape
    tau, width = filt.shape
    g64 = grad.astype(np.float64)
    f64 = filt.astype(np.float64)
    windows = np.lib.stride_tricks.sliding_window_view(x, width, axis=1).astype(np.float64)
    grad_filt = np.einsum("btp,bpj->tj", g64, windows)
    gx_cols = np.einsum("btp,tj->bpj", g64, f64)
    grad_x = np.zeros((bsz, length), dtype=np.float64)
    for j in range(width):
        grad_x[:, j : j + gx_cols.shape[1]] += gx_cols[:, :, j]
    return grad_x.astype(x.dtype), grad_filt.astype(filt.dtype)
