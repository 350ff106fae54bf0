"""
Quadrature rules: Gauss-Hermite, generalized Gauss-Laguerre and a
trapezoid rule on a log-scale variable for doubly-decaying integrands.
"""
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
import scipy.integrate
import scipy.special

from .errors import ParamError


@lru_cache(maxsize=32)
def gauss_hermite(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ∫ e^{-x²} f(x) dx."""
    if nodes < 1:
        raise ParamError(f"node count must be positive, got {nodes}")
    x, w = np.polynomial.hermite.hermgauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gen_laguerre(nodes: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ∫₀^∞ x^α e^{-x} f(x) dx."""
    if nodes < 1:
        raise ParamError(f"node count must be positive, got {nodes}")
    if alpha <= -1:
        raise ParamError(f"Laguerre exponent must exceed -1, got {alpha}")
    x, w = scipy.special.roots_genlaguerre(nodes, alpha)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def bracket_log_integrand(
    log_f: Callable[[np.ndarray], np.ndarray],
    peak: float,
    drop: float = 40.0,
    step: float = 1.0,
    max_steps: int = 400,
) -> Tuple[float, float]:
    """Walk out from the peak until log_f falls `drop` below its peak value on both sides."""
    top = float(log_f(np.array([peak]))[0])
    lo = hi = peak
    for _ in range(max_steps):
        if float(log_f(np.array([lo]))[0]) < top - drop:
            break
        lo -= step
    for _ in range(max_steps):
        if float(log_f(np.array([hi]))[0]) < top - drop:
            break
        hi += step
    return lo, hi


def log_trapezoid(
    log_f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    nodes: int,
) -> Tuple[float, float]:
    """
    Trapezoid rule for ∫ exp(log_f(x)) dx on [lo, hi].

    Returns (log_scale, value) with the integral equal to exp(log_scale)·value,
    so integrands far below the float range stay representable.
    """
    x = np.linspace(lo, hi, nodes)
    ell = log_f(x)
    scale = float(np.max(ell))
    return scale, float(scipy.integrate.trapezoid(np.exp(ell - scale), x))
