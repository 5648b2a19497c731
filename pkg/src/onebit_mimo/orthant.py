"""Vectorized bivariate normal upper-orthant probabilities.

Implements Genz's method ("Numerical computation of rectangular bivariate and
trivariate normal and t probabilities", Statistics and Computing 14, 2004):
Gauss-Legendre quadrature of Plackett's identity for |r| < 0.925 and a
series-corrected integral near |r| = 1. The absolute error is below 1e-14,
and whole arrays of arguments are processed without Python-level loops.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtr

__all__ = ["bvn_upper", "orthant_prob"]

_TWO_PI = 2.0 * np.pi

_GL_HALF = {
    6: (
        [0.1713244923791705, 0.3607615730481384, 0.4679139345726904],
        [0.9324695142031522, 0.6612093864662647, 0.2386191860831970],
    ),
    12: (
        [0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
         0.2031674267230659, 0.2334925365383547, 0.2491470458134029],
        [0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
         0.5873179542866171, 0.3678314989981802, 0.1252334085114692],
    ),
    20: (
        [0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
         0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
         0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
         0.1527533871307259],
        [0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
         0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
         0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
         0.07652652113349733],
    ),
}


def _nodes(n):
    w, x = (np.asarray(a) for a in _GL_HALF[n])
    return np.concatenate([w, w]), np.concatenate([1 - x, 1 + x])


def _low_corr(h, k, r, n):
    w, x = _nodes(n)
    hk = h * k
    hs = 0.5 * (h * h + k * k)
    asr = 0.5 * np.arcsin(r)
    sn = np.sin(asr[:, None] * x[None, :])
    total = np.exp((sn * hk[:, None] - hs[:, None]) / (1.0 - sn * sn)) @ w
    return total * asr / _TWO_PI + ndtr(-h) * ndtr(-k)


def _high_corr(h, k, r):
    w, x = _nodes(20)
    k = np.where(r < 0, -k, k)
    hk = h * k
    as_ = 1.0 - r * r
    a = np.sqrt(as_)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        asr = -0.5 * (bs / as_ + hk)
        bvn = np.where(asr > -100, a * np.exp(asr) * (1 - c * (bs - as_) * (1 - d * bs) / 3 + c * d * as_ * as_), 0.0)
        b = np.sqrt(bs)
        sp = np.sqrt(_TWO_PI) * ndtr(-b / a)
        bvn = bvn - np.where(hk > -100, np.exp(-hk / 2) * sp * b * (1 - c * bs * (1 - d * bs) / 3), 0.0)
        a2 = a / 2
        for wi, xi in zip(w, x):
            xs = (a2 * xi) ** 2
            asr2 = -0.5 * (bs / xs + hk)
            sp2 = 1 + c * xs * (1 + 5 * d * xs)
            rs = np.sqrt(1 - xs)
            ep = np.exp(-(hk / 2) * xs / (1 + rs) ** 2) / rs
            bvn = bvn + np.where(asr2 > -100, a2 * wi * np.exp(asr2) * (ep - sp2), 0.0)
        bvn = -bvn / _TWO_PI
    bvn = np.where(np.abs(r) < 1, bvn, 0.0)
    pos = r > 0
    res_pos = bvn + ndtr(-np.maximum(h, k))
    strip = np.where(h < 0, ndtr(k) - ndtr(h), ndtr(-h) - ndtr(-k))
    res_neg = np.where(h >= k, -bvn, strip - bvn)
    return np.where(pos, res_pos, res_neg)


def bvn_upper(h, k, r) -> np.ndarray:
    """``P(X > h, Y > k)`` for standard normals with correlation ``r``."""
    h, k, r = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float), np.asarray(r, float))
    shape = h.shape
    h, k, r = h.ravel(), k.ravel(), r.ravel()
    out = np.empty(h.shape)
    ar = np.abs(r)
    for lo, hi, n in ((0.0, 0.3, 6), (0.3, 0.75, 12), (0.75, 0.925, 20)):
        m = (ar >= lo) & (ar < hi)
        if m.any():
            out[m] = _low_corr(h[m], k[m], r[m], n)
    m = ar >= 0.925
    if m.any():
        out[m] = _high_corr(h[m], k[m], r[m])
    return np.clip(out, 0.0, 1.0).reshape(shape)


def orthant_prob(mu1, mu2, var1, var2, cov) -> np.ndarray:
    """``P(z1 > 0, z2 > 0)`` for a bivariate normal with the given moments.

    Raises:
        ValueError: if the covariance matrix is not positive semidefinite.
    """
    var1 = np.asarray(var1, float)
    var2 = np.asarray(var2, float)
    cov = np.asarray(cov, float)
    if np.any(var1 <= 0) or np.any(var2 <= 0):
        raise ValueError("variances must be positive")
    s1, s2 = np.sqrt(var1), np.sqrt(var2)
    r = cov / (s1 * s2)
    if np.any(np.abs(r) > 1 + 1e-12):
        raise ValueError("covariance matrix is not positive semidefinite")
    r = np.clip(r, -1.0, 1.0)
    return bvn_upper(-np.asarray(mu1) / s1, -np.asarray(mu2) / s2, r)
