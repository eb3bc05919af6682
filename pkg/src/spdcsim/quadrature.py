"""Quadrature node helpers built on numpy's Gauss rules."""
import numpy as np


def gauss_legendre(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def gauss_hermite(n: int):
    """Physicists' Gauss-Hermite nodes and weights (weight exp(-t^2))."""
    return np.polynomial.hermite.hermgauss(n)


def gauss_hermite_scaled(n: int, center: float, scale: float):
    """Hermite rule mapped to x = center + scale * t.

    Returns nodes and plain dx weights w * exp(t^2) * scale, suitable for
    integrating functions that decay like the envelope exp(-(x-center)^2
    / scale^2) or faster.
    """
    t, w = np.polynomial.hermite.hermgauss(n)
    return center + scale * t, w * np.exp(t * t) * scale
