"""RMSProp with decoupled weight decay, and critic weight clipping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .errors import NumericError
from .params import ParamStore


@dataclass
class OptState:
    """Per-parameter running mean of squared gradients plus hyperparameters."""

    eta: float
    rho: float = 0.9
    eps: float = 1e-8
    lam: float = 0.0
    mean_sq: dict[str, np.ndarray] = field(default_factory=dict)


def rmsprop_step(store: ParamStore, grads: dict[str, np.ndarray], opt: OptState,
                 names: Iterable[str] | None = None):
    """Apply one update to the named parameters (all parameters by default).

    s     <- rho * s + (1 - rho) * g^2
    theta <- theta - eta * g / (sqrt(s) + eps) - eta * lam * theta

    Parameters without a gradient entry are treated as zero-gradient: the
    running mean decays and only the weight-decay term moves them. The
    whole step aborts, touching nothing, if any gradient is non-finite.
    """
    if names is None:
        names = store.names()
    names = list(names)
    for name in names:
        g = grads.get(name)
        if g is not None and not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}")
    for name in names:
        theta = store[name]
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(theta)
        elif g.dtype != theta.dtype or g.shape != theta.shape:
            g = np.ascontiguousarray(g, dtype=theta.dtype).reshape(theta.shape)
        s = opt.mean_sq.get(name)
        if s is None:
            s = opt.mean_sq[name] = np.zeros_like(theta)
        _kernels.rmsprop_update(theta, s, g, opt.rho, opt.eps, opt.eta, opt.lam)


def clip_weights(store: ParamStore, groups: str | Iterable[str], c: float):
    """Clamp every clip-eligible parameter in the groups to [-c, c].

    Unit-constrained tables (relation hyperplane normals) are registered
    with clip=False and are left alone; their norm constraint is
    incompatible with a small box.
    """
    if not c > 0:
        raise ValueError(f"clip threshold must be positive, got {c}")
    for name in store.clippable(groups):
        _kernels.clip_inplace(store[name], c)
