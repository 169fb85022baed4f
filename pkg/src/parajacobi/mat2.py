"""Numerically careful 2x2 matrix kernel.

Matrices are plain (2, 2) numpy arrays, real or complex. This module owns
the handful of primitives the transfer-matrix machinery is built on:
ordered products, discriminants, symmetrization, the parabolic normal form
and complex eigendecomposition of elliptic matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateColumnError,
    EmptyProductError,
    NotParabolicError,
    RealSpectrumError,
    TrivialParabolicError,
)

#: Jordan-type normal form shared by every non-trivial parabolic element
#: of SL(2, R) up to the sign of the trace.
PARABOLIC_NORMAL_FORM = np.array([[0.0, 1.0], [-1.0, 2.0]])

_ID = np.eye(2)


def mat2(m11, m12, m21, m22):
    """Build a real 2x2 matrix from its entries."""
    return np.array([[m11, m12], [m21, m22]], dtype=float)


def trace(a):
    a = np.asarray(a)
    return (a[0, 0] + a[1, 1]).item()


def det(a):
    a = np.asarray(a)
    return (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]).item()


def discr(a):
    """Discriminant (tr a)^2 - 4 det a of a 2x2 matrix."""
    a = np.asarray(a)
    t = a[0, 0] + a[1, 1]
    d = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return (t * t - 4.0 * d).item()


def sym(a):
    """Symmetrization (a + a*)/2, with Hermitian transpose in the complex case."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def ordered_product(ms):
    """Product of a matrix sequence with the last element applied last (leftmost).

    Given (C_0, ..., C_k) returns C_k @ ... @ C_0. An empty sequence is an
    error rather than the identity, so that off-by-one index bugs in cocycle
    code fail loudly instead of silently collapsing.
    """
    mats = list(ms)
    if not mats:
        raise EmptyProductError("empty product")
    out = np.array(mats[0], dtype=np.result_type(*(np.asarray(m).dtype for m in mats), float))
    for m in mats[1:]:
        out = np.asarray(m) @ out
    return out


@dataclass(frozen=True)
class ParabolicForm:
    """Conjugator T and sign epsilon with epsilon * T^-1 X T in normal form."""

    T: np.ndarray
    epsilon: int


def parabolic_conjugator(x, v_scale=1.0, tol=1e-9):
    """Conjugate a non-trivial parabolic SL(2, R) element to its normal form.

    Construction: with eps = sign(tr x), the nilpotent part m = eps*x - id
    satisfies m^2 = 0, so its image equals its kernel. Take v as the
    canonically signed unit vector spanning that line (scaled by ``v_scale``,
    a normalization hook), t2 as the minimal-norm solution of m t2 = v, and
    t1 = v - t2; then T = [t1 | t2] works. The choice is deterministic but
    otherwise arbitrary; downstream quantities only use conjugator-invariant
    combinations.

    Raises NotParabolicError if the trace/determinant gate fails and
    TrivialParabolicError if x is a multiple of the identity.
    """
    X = np.asarray(x, dtype=float)
    t = trace(X)
    d = det(X)
    if abs(abs(t) - 2.0) > tol or abs(d - 1.0) > tol:
        raise NotParabolicError(
            f"not parabolic: |tr| = {abs(t):.12g}, det = {d:.12g} (tolerance {tol:g})"
        )
    eps = 1 if t > 0 else -1
    m = eps * X - _ID
    if np.abs(m).max() <= tol:
        raise TrivialParabolicError("trivial parabolic: matrix is (numerically) +/- identity")

    # Rank-one factorization m = s0 * u0 w0^T. The second singular value is
    # zero up to the parabolic gate slack, so only the leading triplet is used.
    u, s, vt = np.linalg.svd(m)
    v = u[:, 0]
    # Canonical sign: first component of significant magnitude made positive.
    k = 0 if abs(v[0]) > 0.5 * abs(v[1]) else 1
    if v[k] < 0:
        v = -v
    sign = np.sign(np.dot(v, u[:, 0]))
    v = v * v_scale
    t2 = (sign * v_scale / s[0]) * vt[0]
    t1 = v - t2
    T = np.column_stack([t1, t2])
    return ParabolicForm(T=T, epsilon=eps)


def eig_complex(r):
    """Eigenvalue with positive imaginary part and eigenvector-column matrix.

    For a real 2x2 matrix with negative discriminant returns (xi, C) where
    xi = (tr r + i sqrt(-discr r))/2 and the columns of C are eigenvectors
    for xi and its conjugate, normalized to leading entry 1.
    """
    R = np.asarray(r, dtype=float)
    dsc = discr(R)
    if dsc >= 0:
        raise RealSpectrumError(f"real spectrum: discriminant {dsc:.6g} >= 0")
    if abs(R[0, 1]) < 1e-14:
        raise DegenerateColumnError("degenerate column: vanishing upper-right entry")
    xi = 0.5 * (trace(R) + 1j * np.sqrt(-dsc))
    c = np.array(
        [
            [1.0, 1.0],
            [(xi - R[0, 0]) / R[0, 1], (np.conj(xi) - R[0, 0]) / R[0, 1]],
        ],
        dtype=complex,
    )
    return xi, c
