"""Independent ground truth from finite truncations.

The leading M x M block of the Jacobi matrix yields a Gauss-type quadrature
measure: atoms at its eigenvalues, weights from squared first eigenvector
components. Everything here goes through LAPACK's bisection and inverse
iteration drivers for reproducibility; only first components are retained so
memory stays O(M) per block.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .errors import ConvergenceFailureError, OutsideBandError
from .modulation import ModulatedModel


def truncate(m: ModulatedModel, M: int):
    """Diagonal and off-diagonal of the leading M x M block (perturbed if the model is)."""
    if M < 1:
        raise ValueError("truncation size must be >= 1")
    a_arr, b_arr = m.coeff_arrays(max(M - 1, 1))
    return b_arr[:M].copy(), a_arr[: M - 1].copy()


@dataclass
class OracleMeasure:
    """Quadrature measure of a finite truncation: sorted atoms and weights."""

    atoms: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.atoms)

    def cdf(self, t) -> np.ndarray:
        """Mass of (-inf, t]."""
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        idx = np.searchsorted(self.atoms, np.atleast_1d(t), side="right")
        return cum[idx]

    def interval_mass(self, c: float, d: float) -> float:
        sel = (self.atoms >= c) & (self.atoms <= d)
        return float(self.weights[sel].sum())

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.atoms ** k))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# size: {self.size}\n")
            writer = csv.writer(fh)
            writer.writerow(["atom", "weight"])
            for a, w in zip(self.atoms, self.weights):
                writer.writerow([f"{a:.17g}", f"{w:.17g}"])


def eigendecomp(diag, offdiag, block: int = 512) -> OracleMeasure:
    """Quadrature measure of a symmetric tridiagonal block.

    Eigenvalues by bisection, weights as squared first components of the
    eigenvectors obtained by inverse iteration in index blocks. An
    irreducible tridiagonal matrix has simple spectrum, so strict atom
    ordering is asserted.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    M = len(diag)
    if len(offdiag) != M - 1:
        raise ValueError("offdiag must have length M - 1")
    if M > 1 and not np.all(offdiag > 0):
        raise ValueError("off-diagonal entries must be strictly positive")
    if M == 1:
        return OracleMeasure(atoms=diag.copy(), weights=np.array([1.0]))
    try:
        atoms = eigvalsh_tridiagonal(diag, offdiag, lapack_driver="stebz")
        weights = np.empty(M)
        for lo in range(0, M, block):
            hi = min(lo + block, M) - 1
            _, vecs = eigh_tridiagonal(
                diag, offdiag, select="i", select_range=(lo, hi), lapack_driver="stebz"
            )
            weights[lo : hi + 1] = vecs[0, :] ** 2
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailureError(f"convergence failure in tridiagonal solver: {exc}")
    if np.any(np.diff(atoms) <= 0):
        raise ConvergenceFailureError("convergence failure: atoms not strictly increasing")
    weights = np.maximum(weights, 0.0)
    weights /= weights.sum()
    return OracleMeasure(atoms=atoms, weights=weights)


def oracle_measure(m: ModulatedModel, M: int) -> OracleMeasure:
    """Quadrature measure of the model's leading M x M truncation."""
    return eigendecomp(*truncate(m, M))


def cdf_compare(om: OracleMeasure, grid, values, c: float, d: float) -> float:
    """Sup gap between the oracle CDF and a density's CDF, both anchored at c.

    The grid must start at c and stay inside [c, d]; the density is
    integrated by the trapezoid rule on its own grid. Atoms outside [c, d]
    never enter, so discrete mass elsewhere cannot pollute the comparison.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if abs(grid[0] - c) > 1e-12 * (1 + abs(c)) or grid[-1] > d + 1e-12 * (1 + abs(d)):
        raise ValueError("grid must start at c and stay within [c, d]")
    sel = (om.atoms >= c) & (om.atoms <= d)
    atoms = om.atoms[sel]
    weights = om.weights[sel]
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    oracle_cdf = cum[np.searchsorted(atoms, grid, side="right")]
    dens_cdf = np.concatenate(
        [[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid))]
    )
    return float(np.abs(oracle_cdf - dens_cdf).max())


@dataclass
class ProbeResult:
    """Eigenvalue counts of growing truncations inside a discrete-half-line window."""

    interval: tuple
    sizes: np.ndarray
    counts: np.ndarray
    excluded_margin: tuple | None


def ess_spectrum_probe(m: ModulatedModel, interval, sizes) -> ProbeResult:
    """Count truncation eigenvalues in a compact window of the discrete half-line.

    The counts stabilize as the size grows because the spectrum there is
    purely atomic without interior accumulation. A safety margin of one tenth
    of the window is carved out around the critical point when it comes too
    close, and reported.
    """
    c, d = float(interval[0]), float(interval[1])
    if not (c < d):
        raise ValueError("interval must be non-trivial")
    tau = m.tau
    if not (tau.in_discrete_halfline(c) and tau.in_discrete_halfline(d)):
        raise OutsideBandError(
            f"probe window [{c:g}, {d:g}] must lie in the discrete half-line"
        )
    margin = 0.1 * (d - c)
    excluded = None
    x0 = tau.x0
    if c - margin <= x0 <= d + margin:
        excluded = (max(c, x0 - margin), min(d, x0 + margin))
        if excluded[0] <= c and excluded[1] >= d:
            raise OutsideBandError("probe window collapsed by the critical-point margin")
        if x0 <= c + margin:
            c = excluded[1]
        else:
            d = excluded[0]
    sizes = np.asarray(sorted(int(s) for s in sizes), dtype=int)
    counts = np.empty(len(sizes), dtype=int)
    for k, M in enumerate(sizes):
        diag, off = truncate(m, M)
        if M == 1:
            counts[k] = int(c < diag[0] <= d)
            continue
        vals = eigvalsh_tridiagonal(
            diag, off, select="v", select_range=(c, d), lapack_driver="stebz"
        )
        counts[k] = len(vals)
    return ProbeResult(interval=(c, d), sizes=sizes, counts=counts, excluded_margin=excluded)


def operator_moment(m: ModulatedModel, k: int) -> float:
    """k-th spectral moment at the first basis vector via sparse matrix powers.

    Uses a (k + 2)-sized block, which is exact because k applications of the
    operator move mass at most k positions from index zero.
    """
    if k < 0:
        raise ValueError("moment order must be non-negative")
    size = k + 2
    diag, off = truncate(m, size)
    v = np.zeros(size)
    v[0] = 1.0
    for _ in range(k):
        w = diag * v
        w[:-1] += off * v[1:]
        w[1:] += off * v[:-1]
        v = w
    return float(v[0])
