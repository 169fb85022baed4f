"""Objects built from the N-periodic data alone.

One-step matrices, the period monodromy, periodic polynomials, trace
polynomial and band structure, the four-way regime classification, and the
chain of conjugators that brings every rotation of the parabolic monodromy
to normal form simultaneously.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import mat2
from .errors import DegenerateBandsError, OutOfClassError, OutsideBandError
from .mat2 import PARABOLIC_NORMAL_FORM, ordered_product, parabolic_conjugator


class Case(enum.Enum):
    """Spectral regime of the periodic limit at the origin."""

    I = "I"          # |trace| < 2: interior of a band
    IIa = "IIa"      # |trace| = 2, diagonalizable (scalar) limit: soft edge
    IIb = "IIb"      # |trace| = 2, non-trivial parabolic limit: hard edge
    III = "III"      # |trace| > 2: spectral gap


@dataclass(frozen=True)
class PeriodicParams:
    """N-periodic positive weights alpha and real diagonal profile beta.

    Indexing is over all integers with wrap-around, so alpha_at(-1) is the
    last entry of the period.
    """

    N: int
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if self.N < 1 or len(alpha) != self.N or len(beta) != self.N:
            raise ValueError("alpha and beta must both have length N >= 1")
        if not np.all(alpha > 0):
            raise ValueError("all alpha entries must be positive")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
            raise ValueError("periodic data must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def alpha_at(self, n):
        return float(self.alpha[n % self.N])

    def beta_at(self, n):
        return float(self.beta[n % self.N])

    def rotated(self, shift):
        """Cyclic rotation of the period by ``shift`` positions."""
        return PeriodicParams(self.N, np.roll(self.alpha, -shift), np.roll(self.beta, -shift))


def step_matrix(p: PeriodicParams, n: int, x: float) -> np.ndarray:
    """One-step transfer matrix of the periodic recurrence at index n."""
    an = p.alpha_at(n)
    return np.array([[0.0, 1.0], [-p.alpha_at(n - 1) / an, (x - p.beta_at(n)) / an]])


def monodromy(p: PeriodicParams, n: int, x: float) -> np.ndarray:
    """Product of one full period of step matrices starting at index n.

    The leftmost factor carries index n + N - 1; determinants telescope to 1.
    """
    return ordered_product(step_matrix(p, j, x) for j in range(n, n + p.N))


def periodic_poly(p: PeriodicParams, k: int, n: int, x: float) -> float:
    """Orthonormal-normalization polynomial of the k-shifted periodic recurrence."""
    if n < 0:
        raise ValueError("polynomial degree must be non-negative")
    if n == 0:
        return 1.0
    prev = 1.0
    cur = (x - p.beta_at(k)) / p.alpha_at(k)
    for m in range(1, n):
        nxt = ((x - p.beta_at(m + k)) * cur - p.alpha_at(m + k - 1) * prev) / p.alpha_at(m + k)
        prev, cur = cur, nxt
    return cur


def classify(p: PeriodicParams, tol: float = 1e-9) -> Case:
    """Four-way regime classification from the monodromy at the origin."""
    X = monodromy(p, 0, 0.0)
    t = mat2.trace(X)
    if abs(t) < 2.0 - tol:
        return Case.I
    if abs(t) > 2.0 + tol:
        return Case.III
    # On the critical circle, diagonalizable in SL(2, R) means scalar.
    eps = 1.0 if t > 0 else -1.0
    if np.abs(X - eps * np.eye(2)).max() <= tol:
        return Case.IIa
    return Case.IIb


def trace_polynomial(p: PeriodicParams) -> np.polynomial.Polynomial:
    """Exact coefficients of x -> tr monodromy(p, 0, x), a degree-N polynomial.

    Recovered by interpolation at N + 1 Chebyshev nodes; exact up to rounding
    because the trace is a polynomial of degree exactly N.
    """
    n = p.N
    scale = 1.0 + float(np.max(np.abs(p.beta))) + 2.0 * float(np.max(p.alpha) / np.min(p.alpha))
    nodes = scale * np.cos(np.pi * (2 * np.arange(n + 1) + 1) / (2 * (n + 1)))
    vals = np.array([mat2.trace(monodromy(p, 0, xk)) for xk in nodes])
    coeffs = np.polynomial.polynomial.polyfit(nodes, vals, n)
    return np.polynomial.Polynomial(coeffs)


def _real_roots(poly: np.polynomial.Polynomial, imag_tol: float) -> np.ndarray:
    roots = poly.roots()
    keep = np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))
    return np.sort(roots.real[keep])


def spectral_bands(p: PeriodicParams, cluster_tol: float = 1e-7) -> list[tuple[float, float]]:
    """Connected components of {x : |tr monodromy(x)| < 2} as open intervals.

    Endpoints are the real roots of the trace polynomial offset by -2 and +2,
    found through companion-matrix root finding on exactly interpolated
    coefficients. Nearly coincident roots (band tangencies) are merged within
    ``cluster_tol``.
    """
    tp = trace_polynomial(p)
    crit = np.sort(
        np.concatenate(
            [_real_roots(tp - 2.0, cluster_tol), _real_roots(tp + 2.0, cluster_tol)]
        )
    )
    if crit.size == 0:
        raise DegenerateBandsError("degenerate band structure: no real critical points found")
    # Cluster near-coincident roots.
    reps = [crit[0]]
    for r in crit[1:]:
        if r - reps[-1] <= cluster_tol * (1.0 + abs(r)):
            reps[-1] = 0.5 * (reps[-1] + r)
        else:
            reps.append(r)
    bands = []
    for lo, hi in zip(reps[:-1], reps[1:]):
        if hi - lo <= cluster_tol * (1.0 + abs(hi)):
            continue
        if abs(tp(0.5 * (lo + hi))) < 2.0:
            bands.append((float(lo), float(hi)))
    if len(bands) > p.N or not bands:
        raise DegenerateBandsError(
            f"degenerate band structure: resolved {len(bands)} bands for period {p.N}"
        )
    return bands


def trace_derivative(p: PeriodicParams, x: float) -> float:
    """Derivative of the monodromy trace, evaluated without numerical differentiation.

    Uses the cyclic-invariance identity that expresses the derivative through
    the lower-left entries of the rotated monodromies.
    """
    total = 0.0
    for i in range(1, p.N + 1):
        total += monodromy(p, i, x)[1, 0] / p.alpha_at(i - 1)
    return -total


def trace_derivative_at_zero(p: PeriodicParams) -> float:
    return trace_derivative(p, 0.0)


def absolute_trace_identity(p: PeriodicParams, x: float, tol: float = 1e-9):
    """Both sides of the in-band equality between Sum|entry| and |Sum entry|.

    Returns (lhs, rhs) with lhs the sum of absolute values of the scaled
    lower-left monodromy entries and rhs the absolute value of their sum.
    The equality holds whenever |tr monodromy(x)| <= 2; the caller asserts it.
    """
    t = mat2.trace(monodromy(p, 0, x))
    if abs(t) > 2.0 + tol:
        raise OutsideBandError(f"outside band closure: |trace| = {abs(t):.6g} > 2 at x = {x:g}")
    entries = np.array(
        [monodromy(p, i, x)[1, 0] / p.alpha_at(i - 1) for i in range(1, p.N + 1)]
    )
    return float(np.abs(entries).sum()), float(abs(entries.sum()))


@dataclass
class PeriodicCache:
    """Classification plus the conjugator chain of a hard-edge period."""

    params: PeriodicParams
    classification: Case
    epsilon: int
    T: np.ndarray  # (N, 2, 2); T[i] conjugates the i-rotated monodromy
    bands: list = field(default_factory=list)

    def monodromy0(self, x: float) -> np.ndarray:
        return monodromy(self.params, 0, x)


def conjugator_chain(p: PeriodicParams) -> PeriodicCache:
    """Conjugators T_i with epsilon * T_i^-1 monodromy_i(0) T_i in normal form.

    T_0 comes from the parabolic normal-form construction; the remaining
    conjugators are pushed forward through the one-step matrices at the
    origin. Requires the hard-edge regime.
    """
    case = classify(p)
    if case is not Case.IIb:
        raise OutOfClassError(
            f"conjugator chain requires the non-trivial parabolic regime, got case {case.value}"
        )
    form = parabolic_conjugator(monodromy(p, 0, 0.0))
    ts = np.empty((p.N, 2, 2))
    ts[0] = form.T
    prefix = np.eye(2)
    for i in range(1, p.N):
        prefix = step_matrix(p, i - 1, 0.0) @ prefix
        ts[i] = prefix @ form.T
    # Sanity: every rotation lands on the same normal form.
    for i in range(p.N):
        resid = form.epsilon * np.linalg.solve(ts[i], monodromy(p, i, 0.0) @ ts[i])
        if np.abs(resid - PARABOLIC_NORMAL_FORM).max() > 1e-8:
            raise OutOfClassError(f"conjugator chain inconsistent at rotation {i}")
    return PeriodicCache(
        params=p,
        classification=case,
        epsilon=form.epsilon,
        T=ts,
        bands=spectral_bands(p),
    )
