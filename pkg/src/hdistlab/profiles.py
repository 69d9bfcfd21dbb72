"""Smooth scalar profiles used for cutoffs, windows and test functions."""

import numpy as np


def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(r):
    """C^inf transition: 1 for r <= 1, 0 for r >= 2."""
    r = np.asarray(r, dtype=float)
    a = _g(2.0 - r)
    b = _g(r - 1.0)
    return a / (a + b)


def bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; peak value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def plateau(t, center, width, order=8):
    """Super-Gaussian exp(-((t - center)/width)^order); flat top, entire in t."""
    t = np.asarray(t, dtype=float)
    return np.exp(-(((t - center) / width) ** order))


def gaussian(t, center, sigma):
    t = np.asarray(t, dtype=float)
    return np.exp(-0.5 * ((t - center) / sigma) ** 2)


def step(s):
    """Indicator of [0, 1)."""
    s = np.asarray(s, dtype=float)
    return ((s >= 0) & (s < 1)).astype(float)
