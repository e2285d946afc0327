"""Scaled Legendre basis on [0,1] and its moment-coupling tensors.

The vertical velocity profile is expanded in shifted Legendre polynomials
phi_j on [0,1], sign-fixed so that phi_j(0) = 1.  With that normalization

    int_0^1 phi_i phi_j dzeta = delta_ij / (2i + 1),
    phi_0 = 1,  phi_1 = 1 - 2 zeta,  phi_2 = 1 - 6 zeta + 6 zeta**2, ...

The moment systems couple the basis through three families of integrals,

    a[i,j,k] = (2i+1) int phi_i phi_j phi_k,
    b[i,j,k] = (2i+1) int phi_i' (int_0^zeta phi_j) phi_k,
    c[i,j]   =        int phi_i' phi_j',

with indices i,j,k = 1..N.  All integrands are polynomials, so the tensors
are computed by exact antidifferentiation in the monomial basis rather
than by a sampled quadrature rule; this keeps identities such as
c[1,1] = 4 exact in floating point.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg

__all__ = [
    "BasisTensors",
    "MomentCoefficients",
    "legendre_phi",
    "build_tensors",
    "shared_tensors",
    "project_profile",
    "reconstruct_velocity",
]

# Quadrature for projecting arbitrary callable profiles; exact for
# polynomials up to degree 2*_PROJECT_NODES - 1.
_PROJECT_NODES = 48

# Richardson error estimate threshold for tabulated-profile projection.
_TABULATED_TOL = 1e-10


@dataclass(frozen=True)
class BasisTensors:
    """Coupling tensors of the scaled Legendre basis for a fixed order.

    Arrays are 0-indexed: ``a[i-1, j-1, k-1]`` holds the entry for basis
    indices (i, j, k).  ``a`` is symmetric in its last two indices and
    ``c`` is symmetric.
    """

    order: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for arr in (self.a, self.b, self.c):
            arr.setflags(write=False)


@dataclass
class MomentCoefficients:
    """Mean velocity plus moment coefficients of a vertical profile."""

    mean: float
    alphas: np.ndarray

    @property
    def order(self) -> int:
        return len(self.alphas)


def _check_zeta(zeta):
    z = np.asarray(zeta, dtype=float)
    if np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("zeta must lie in [0, 1]")
    return z


def legendre_phi(j: int, zeta):
    """Evaluate phi_j at zeta in [0,1].

    phi_j(zeta) = P_j(1 - 2 zeta) with P_j the Legendre polynomial, which
    is the unique degree-j polynomial orthogonal to all lower degrees on
    [0,1] with phi_j(0) = 1.
    """
    if j < 0:
        raise ValueError("basis index must be >= 0")
    z = _check_zeta(zeta)
    coeff = np.zeros(j + 1)
    coeff[j] = 1.0
    out = npleg.legval(1.0 - 2.0 * z, coeff)
    return float(out) if np.isscalar(zeta) else out


@lru_cache(maxsize=None)
def _phi_monomial(j: int) -> tuple:
    # phi_j(z) = sum_k (-1)^k C(j,k) C(j+k,k) z^k with integer coefficients.
    return tuple(
        Fraction((-1) ** k * math.comb(j, k) * math.comb(j + k, k))
        for k in range(j + 1)
    )


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for k, qk in enumerate(q):
            out[i + k] += pi * qk
    return out


def _poly_der(p):
    return [k * c for k, c in enumerate(p)][1:] or [Fraction(0)]


def _poly_antider(p):
    # antiderivative vanishing at 0
    return [Fraction(0)] + [c / (k + 1) for k, c in enumerate(p)]


def _integral_01(p) -> Fraction:
    return sum((c / (k + 1) for k, c in enumerate(p)), Fraction(0))


def build_tensors(order: int) -> BasisTensors:
    """Compute the coupling tensors for basis indices 1..order.

    order = 0 yields empty (0-sized) tensors.  The integrands are
    polynomials with rational coefficients, so every entry is evaluated in
    exact rational arithmetic and rounded once to float.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    n = order
    phi = [list(_phi_monomial(j)) for j in range(n + 1)]
    dphi = [_poly_der(p) for p in phi]
    psi = [_poly_antider(p) for p in phi]

    a = np.zeros((n, n, n))
    b = np.zeros((n, n, n))
    c = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            c[i - 1, j - 1] = float(_integral_01(_poly_mul(dphi[i], dphi[j])))
            for k in range(1, n + 1):
                pij = _poly_mul(phi[i], phi[j])
                a[i - 1, j - 1, k - 1] = float(
                    (2 * i + 1) * _integral_01(_poly_mul(pij, phi[k]))
                )
                b[i - 1, j - 1, k - 1] = float(
                    (2 * i + 1)
                    * _integral_01(_poly_mul(_poly_mul(dphi[i], psi[j]), phi[k]))
                )
    return BasisTensors(order=n, a=a, b=b, c=c)


@lru_cache(maxsize=None)
def shared_tensors(order: int) -> BasisTensors:
    """Cached read-only tensors, safe to share across threads."""
    return build_tensors(order)


def _gauss_nodes_01(n: int):
    x, w = npleg.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def project_profile(profile, order: int) -> MomentCoefficients:
    """Project a vertical velocity profile onto the basis.

    mean = int_0^1 u dzeta and alphas[j-1] = (2j+1) int_0^1 u phi_j dzeta.
    ``profile`` is either a callable u(zeta) or a tabulation: a (z, u)
    pair of 1-D arrays or a single (n, 2) array with nodes spanning [0,1].
    Callable profiles are integrated with a Gauss rule that is exact for
    polynomials of degree <= 95; tabulated profiles use the composite
    trapezoid rule with a Richardson error estimate.
    """
    if order < 0:
        raise ValueError("order must be >= 0")

    if callable(profile):
        z, w = _gauss_nodes_01(_PROJECT_NODES)
        u = np.asarray([profile(zi) for zi in z], dtype=float)
        mean = float(np.dot(w, u))
        alphas = np.array(
            [
                (2 * j + 1) * np.dot(w, u * legendre_phi(j, z))
                for j in range(1, order + 1)
            ]
        )
        return MomentCoefficients(mean=mean, alphas=alphas)

    z, u = _as_tabulation(profile)
    phis = [np.ones_like(z)] + [legendre_phi(j, z) for j in range(1, order + 1)]
    vals = []
    for j, ph in enumerate(phis):
        fine = np.trapezoid(u * ph, z)
        if len(z) >= 3:
            coarse = np.trapezoid((u * ph)[::2], z[::2])
            if abs(fine - coarse) / 3.0 > _TABULATED_TOL:
                warnings.warn(
                    "tabulated profile too coarse for requested accuracy "
                    f"(moment {j}, error estimate {abs(fine - coarse) / 3.0:.2e})",
                    stacklevel=2,
                )
        vals.append(fine)
    mean = float(vals[0])
    alphas = np.array([(2 * j + 1) * vals[j] for j in range(1, order + 1)])
    return MomentCoefficients(mean=mean, alphas=alphas)


def _as_tabulation(profile):
    if isinstance(profile, tuple) and len(profile) == 2:
        z = np.asarray(profile[0], dtype=float)
        u = np.asarray(profile[1], dtype=float)
    else:
        arr = np.asarray(profile, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("tabulated profile must be (z, u) arrays or an (n, 2) array")
        z, u = arr[:, 0], arr[:, 1]
    if z.size < 2 or z.size != u.size:
        raise ValueError("tabulated profile needs >= 2 matching (z, u) nodes")
    if np.any(np.diff(z) <= 0):
        raise ValueError("tabulation nodes must be strictly increasing")
    if z[0] > 1e-12 or z[-1] < 1.0 - 1e-12:
        raise ValueError("tabulation nodes must span [0, 1]")
    return z, u


def reconstruct_velocity(coeffs: MomentCoefficients, zeta):
    """Evaluate mean + sum_j alphas[j] phi_j at zeta in [0,1]."""
    z = _check_zeta(zeta)
    out = np.full_like(z, coeffs.mean, dtype=float)
    for j, aj in enumerate(coeffs.alphas, start=1):
        out = out + aj * legendre_phi(j, z)
    return float(out) if np.isscalar(zeta) else out
