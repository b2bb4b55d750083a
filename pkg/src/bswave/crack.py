"""Open-crack spring model.

An open transverse crack is a massless spring joining the two crack faces.
The spring flexibilities follow from the stress-intensity correction
functions integrated over the crack depth.  All integrals are written in the
normalized depth ``r = alpha / h``:

    int_0^a (alpha / h**2) f(alpha / h)**2 dalpha = int_0^{a/h} r f(r)**2 dr
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "CrackError",
    "NoCrack",
    "CrackSpec",
    "MAX_DEPTH_RATIO",
    "TADA_MODE_II",
    "f_I",
    "f_II",
    "depth_integral",
    "axial_flexibility",
    "rotational_flexibility",
    "shear_flexibility",
    "make_crack",
    "spring_coupling",
]

MAX_DEPTH_RATIO = 0.95

# Edge crack under in-plane shear, F_II(s) = poly(s) / sqrt(1 - s).
TADA_MODE_II = (1.122, -0.561, 0.085, 0.18)


class CrackError(ValueError):
    """Crack parameters outside the model's domain."""


class NoCrack(CrackError):
    """Zero flexibility: the faces are perfectly bonded, merge the nodes."""


def _check_ratio(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r < 0.0 or r >= 1.0:
        raise CrackError(f"depth ratio must lie in [0, 1), got {r}")
    return r


def f_I(r: float) -> float:
    """Mode-I correction function of an edge crack at depth ratio ``r``."""
    r = _check_ratio(r)
    if r == 0.0:
        return 0.752 + 0.37
    x = 0.5 * math.pi * r
    root = math.sqrt(math.tan(x) / x)
    return root * (0.752 + 2.02 * r + 0.37 * (1.0 - math.sin(x)) ** 3) / math.cos(x)


def f_II(r: float, variant: str = "printed", coeffs: Sequence[float] = TADA_MODE_II) -> float:
    """Mode-II correction function.

    The default ``"printed"`` variant is the same expression as :func:`f_I`.
    ``"tada"`` uses ``sum(c_k r**k) / sqrt(1 - r)`` with ``coeffs``.
    """
    if variant == "printed":
        return f_I(r)
    if variant == "tada":
        r = _check_ratio(r)
        return float(np.polyval(list(coeffs)[::-1], r)) / math.sqrt(1.0 - r)
    raise CrackError(f"unknown f_II variant {variant!r}")


def depth_integral(ratio: float, f=f_I) -> float:
    """``int_0^ratio r f(r)**2 dr`` by adaptive Gauss-Kronrod quadrature."""
    ratio = _check_ratio(ratio)
    if ratio > MAX_DEPTH_RATIO:
        raise CrackError(f"depth ratio {ratio} exceeds the model cap {MAX_DEPTH_RATIO}")
    if ratio == 0.0:
        return 0.0
    val, _ = integrate.quad(lambda r: r * f(r) ** 2, 0.0, ratio, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def _ratio(a: float, h: float) -> float:
    if h <= 0.0:
        raise CrackError(f"section height must be positive, got {h}")
    if a < 0.0 or a >= h:
        raise CrackError(f"crack depth must satisfy 0 <= a < h, got a={a}, h={h}")
    return a / h


def axial_flexibility(a: float, E: float, b: float, h: float) -> float:
    """Axial spring flexibility ``c_a`` (m/N)."""
    return 2.0 * math.pi / (E * b) * depth_integral(_ratio(a, h))


def rotational_flexibility(a: float, E: float, b: float, h: float) -> float:
    """Rotational spring flexibility ``c_b`` (rad/(N m))."""
    return 72.0 * math.pi / (E * b * h**2) * depth_integral(_ratio(a, h))


def shear_flexibility(
    a: float, E: float, b: float, h: float, k_s: float, variant: str = "printed", coeffs=TADA_MODE_II
) -> float:
    """Shear spring flexibility ``c_s`` (m/N)."""
    f = lambda r: f_II(r, variant, coeffs)  # noqa: E731
    return 2.0 * k_s**2 * math.pi / (E * b) * depth_integral(_ratio(a, h), f)


@dataclass(frozen=True)
class CrackSpec:
    """A crack at ``position`` with depth ``depth_ratio * h``."""

    position: float
    depth_ratio: float
    depth: float
    c_a: float
    c_b: float
    c_s: float


def make_crack(
    position: float, depth_ratio: float, E: float, b: float, h: float, k_s: float, fII_variant: str = "printed"
) -> CrackSpec:
    if position <= 0.0:
        raise CrackError(f"crack position must be positive, got {position}")
    a = _check_ratio(depth_ratio) * h
    return CrackSpec(
        position=float(position),
        depth_ratio=float(depth_ratio),
        depth=a,
        c_a=axial_flexibility(a, E, b, h),
        c_b=rotational_flexibility(a, E, b, h),
        c_s=shear_flexibility(a, E, b, h, k_s, fII_variant),
    )


def _spring(c: float) -> np.ndarray:
    if c <= 0.0:
        raise NoCrack("zero flexibility; merge the interface nodes instead")
    k = 1.0 / c
    return k * np.array([[1.0, -1.0], [-1.0, 1.0]])


def spring_coupling(spec: CrackSpec, kind: str) -> np.ndarray:
    """Stiffness on the duplicated interface DOFs.

    Ordering is ``[u_l, u_r]`` for a rod and ``[w_l, th_l, w_r, th_r]`` for a
    beam.
    """
    if kind == "rod":
        return _spring(spec.c_a)
    if kind == "beam":
        ks, kb = _spring(spec.c_s), _spring(spec.c_b)
        out = np.zeros((4, 4))
        out[np.ix_([0, 2], [0, 2])] = ks
        out[np.ix_([1, 3], [1, 3])] = kb
        return out
    raise CrackError(f"unknown structure kind {kind!r}")
