"""Evaluation engine for the modulated recurrence.

Orthonormal polynomials and generalized eigenvectors, one-step transfer
matrices, the block cocycle over one period, and the raw Christoffel-Darboux
kernel. Long streams run through the compiled kernels; everything here is a
pure function of (model, x).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import cd_kernel_matrix, diag_square_sum, stream_checkpoints
from .errors import GrowthRegimeError
from .mat2 import ordered_product
from .modulation import ModulatedModel

E2 = (0.0, 1.0)  # seed reproducing the orthonormal polynomials
E1 = (1.0, 0.0)


def _check_eta(eta):
    e1, e2 = float(eta[0]), float(eta[1])
    norm = np.hypot(e1, e2)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"initial vector must have unit norm, got {norm:.12g}")
    return e1, e2


def transfer_B(m: ModulatedModel, n: int, x: float) -> np.ndarray:
    """One-step transfer matrix at index n (index 0 uses the 1/a_0 convention)."""
    a_arr, b_arr = m.coeff_arrays(n)
    am1 = 1.0 if n == 0 else a_arr[n - 1]
    an = a_arr[n]
    return np.array([[0.0, 1.0], [-am1 / an, (x - b_arr[n]) / an]])


def transfer_X(m: ModulatedModel, n: int, x: float) -> np.ndarray:
    """Cocycle over one period: product of N one-step matrices from index n up."""
    return ordered_product(transfer_B(m, j, x) for j in range(n, n + m.N))


@dataclass
class RecurrenceTrace:
    """Streamed recurrence values at a single spectral parameter."""

    x: float
    eta: tuple
    n_max: int
    values: np.ndarray | None
    final_pair: tuple


def eval_stream(m: ModulatedModel, eta, x: float, n_max: int, store: bool = True) -> RecurrenceTrace:
    """Stream u_n(eta, x) for n <= n_max.

    With eta = (0, 1) the stream is the orthonormal polynomial sequence.
    Storage is optional; without it only the final pair is kept. Raises
    GrowthRegimeError once magnitudes pass the overflow guard, which is the
    expected behavior deep in the discrete half-line.
    """
    e1, e2 = _check_eta(eta)
    a_arr, b_arr = m.coeff_arrays(n_max + 1)
    if store:
        ns = np.arange(n_max + 1, dtype=np.int64)
    else:
        ns = np.array([n_max], dtype=np.int64)
    out, bad = stream_checkpoints(a_arr, b_arr, np.array([x]), ns, e1, e2)
    if bad[0]:
        raise GrowthRegimeError(f"growth regime: recurrence magnitude guard tripped at x = {x:g}")
    values = out[:, 1, 0].copy() if store else None
    final_pair = (float(out[-1, 0, 0]), float(out[-1, 1, 0]))
    return RecurrenceTrace(x=x, eta=(e1, e2), n_max=n_max, values=values, final_pair=final_pair)


def pairs_at(m: ModulatedModel, xs, ns, eta=E2) -> np.ndarray:
    """Pairs (u_{n-1}, u_n) at the checkpoint indices ns over a grid of x.

    Returns an array of shape (len(ns), 2, len(xs)). The checkpoints must be
    sorted ascending.
    """
    e1, e2 = _check_eta(eta)
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size and (np.any(np.diff(ns) < 0) or ns[0] < 0):
        raise ValueError("checkpoints must be sorted and non-negative")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    a_arr, b_arr = m.coeff_arrays(int(ns[-1]) + 1 if ns.size else 1)
    out, bad = stream_checkpoints(a_arr, b_arr, xs, ns, e1, e2)
    if bad.any():
        raise GrowthRegimeError(
            f"growth regime at grid points {np.flatnonzero(bad).tolist()} before n = {int(ns[-1])}"
        )
    return out


def cd_kernel(m: ModulatedModel, n: int, x: float, y: float) -> float:
    """Christoffel-Darboux kernel K_n(x, y), compensated accumulation."""
    a_arr, b_arr = m.coeff_arrays(n + 1)
    K, bad = cd_kernel_matrix(a_arr, b_arr, np.array([x, y], dtype=float), n)
    if bad:
        raise GrowthRegimeError(f"growth regime while accumulating kernel at ({x:g}, {y:g})")
    return float(K[0, 1])


def cd_kernel_grid(m: ModulatedModel, n: int, xs) -> np.ndarray:
    """Full kernel matrix K_n(xs[i], xs[j]) over a grid."""
    xs = np.asarray(xs, dtype=float)
    a_arr, b_arr = m.coeff_arrays(n + 1)
    K, bad = cd_kernel_matrix(a_arr, b_arr, xs, n)
    if bad:
        raise GrowthRegimeError("growth regime while accumulating kernel matrix")
    return K


def diagonal_square_sum(m: ModulatedModel, n: int, x: float) -> float:
    """Sum of p_j(x)^2 for j <= n, compensated."""
    a_arr, b_arr = m.coeff_arrays(n + 1)
    s, bad = diag_square_sum(a_arr, b_arr, float(x), n)
    if bad:
        raise GrowthRegimeError(f"growth regime in diagonal sum at x = {x:g}")
    return float(s)
