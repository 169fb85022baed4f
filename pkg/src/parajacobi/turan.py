"""Shifted Turán determinants and the constructive density.

The period-shifted Turán determinant, scaled by the 3/2 power of the
off-diagonal, converges along each residue class on the absolutely
continuous half-line; its limit g determines the spectral density through

    density(x) = sqrt(alpha_{i-1} |tau(x)|) / (pi * g_i(x)).

The module also carries the eventually-periodic truncation route to the
same density and the perturbed variant along dyadic subsequences.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    HorizonExhaustedError,
    HyperbolicTruncationError,
    NonCauchyError,
    OutsideBandError,
)
from .modulation import ModulatedModel, Truncated
from .recurrence import E2, pairs_at, transfer_X, _check_eta


def turan(m: ModulatedModel, n: int, x: float) -> float:
    """Shifted Turán determinant p_n p_{n+N-1} - p_{n-1} p_{n+N} in one pass."""
    if n < 1:
        raise ValueError("Turán determinant requires n >= 1")
    out = pairs_at(m, [x], np.array([n, n + m.N]))
    pm1, pn = out[0, 0, 0], out[0, 1, 0]
    pNm1, pN = out[1, 0, 0], out[1, 1, 0]
    return float(pn * pNm1 - pm1 * pN)


def gen_turan(m: ModulatedModel, eta, n: int, x: float) -> float:
    """Generalized scaled determinant a_{n+N-1}^{3/2} (u_n u_{n+N-1} - u_{n-1} u_{n+N})."""
    _check_eta(eta)
    out = pairs_at(m, [x], np.array([n, n + m.N]), eta=eta)
    um1, un = out[0, 0, 0], out[0, 1, 0]
    uNm1, uN = out[1, 0, 0], out[1, 1, 0]
    return float(m.a(n + m.N - 1) ** 1.5 * (un * uNm1 - um1 * uN))


@dataclass
class TuranState:
    """Dyadic scaled Turán samples at one point and their Cauchy status."""

    i: int
    x: float
    ns: np.ndarray
    samples: np.ndarray       # a_{n+N-1}^{3/2} |D_n| at each dyadic n
    signs: np.ndarray         # sign of D_n at each sample
    g_estimate: float
    cauchy_gap: float
    converged: bool


def _dyadic_blocks(m: ModulatedModel, i: int, horizon: int, j_start: int = 8):
    """Block indices j_start, 2 j_start, ... with n = jN + i + N staying in range."""
    N = m.N
    js = []
    j = j_start
    while j * N + i + N + 1 <= horizon:
        js.append(j)
        j *= 2
    if len(js) < 2:
        raise ValueError("horizon too short for a dyadic Turán ladder")
    return np.array(js, dtype=np.int64)


def turan_samples_grid(m: ModulatedModel, i: int, xs, js, eta=E2):
    """Scaled |D_n| and sign(D_n) at n = jN + i for each dyadic j, over a grid.

    One streamed pass; returns (ns, scaled, signs) with scaled of shape
    (len(js), len(xs)).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    js = np.asarray(js, dtype=np.int64)
    N = m.N
    if not 0 <= i < N:
        raise ValueError(f"residue must lie in [0, {N}), got {i}")
    ns = js * N + i
    checkpoints = np.unique(np.concatenate([ns, ns + N]))
    out = pairs_at(m, xs, checkpoints, eta=eta)
    pos = {int(n): k for k, n in enumerate(checkpoints)}
    a_arr, _ = m.coeff_arrays(int(ns[-1]) + N)
    scaled = np.empty((len(ns), len(xs)))
    signs = np.empty_like(scaled)
    for k, n in enumerate(ns):
        lo = out[pos[int(n)]]
        hi = out[pos[int(n + N)]]
        d = lo[1] * hi[0] - lo[0] * hi[1]
        scaled[k] = a_arr[int(n) + N - 1] ** 1.5 * np.abs(d)
        signs[k] = np.sign(d)
    return ns, scaled, signs


def g_limit(m: ModulatedModel, i: int, x: float, rel_tol: float = 1e-3,
            horizon: int | None = None, j_start: int = 8) -> TuranState:
    """Dyadic limit of the scaled Turán determinants along residue class i.

    Doubles the block index until consecutive samples differ by less than
    rel_tol in relative terms (checked on the final pair after a full pass).
    Non-convergence is flagged on the returned state, not raised.
    """
    if not m.tau.in_ac_halfline(x):
        raise OutsideBandError(f"x = {x:g} is not in the ac half-line")
    horizon = min(horizon or m.horizon, m.horizon)
    js = _dyadic_blocks(m, i, horizon, j_start)
    ns, scaled, signs = turan_samples_grid(m, i, [x], js)
    samples = scaled[:, 0]
    gap = abs(samples[-1] - samples[-2]) / max(abs(samples[-1]), 1e-300)
    return TuranState(
        i=i, x=x, ns=ns, samples=samples, signs=signs[:, 0],
        g_estimate=float(samples[-1]), cauchy_gap=float(gap),
        converged=bool(gap < rel_tol and samples[-1] > 0),
    )


def density(m: ModulatedModel, i: int, x: float, rel_tol: float = 1e-3,
            horizon: int | None = None) -> float:
    """Spectral density at x from the scaled Turán limit along residue i."""
    state = g_limit(m, i, x, rel_tol=rel_tol, horizon=horizon)
    if not state.converged:
        exc = NonCauchyError if m.is_perturbed else HorizonExhaustedError
        label = "non-Cauchy along dyadics" if m.is_perturbed else "horizon exhausted"
        raise exc(
            f"{label}: gap {state.cauchy_gap:.3g} > {rel_tol:g} at x = {x:g} "
            f"(best estimate {state.g_estimate:.6g})",
            state=state,
        )
    tau_abs = abs(float(m.tau(x)))
    return math.sqrt(m.periodic.alpha_at(i - 1) * tau_abs) / (math.pi * state.g_estimate)


def perturbed_density(m: ModulatedModel, i: int, x: float, rel_tol: float = 1e-3,
                      horizon: int | None = None) -> float:
    """Density of a perturbed model; the half-line comes from the unperturbed data."""
    if not m.is_perturbed:
        return density(m, i, x, rel_tol=rel_tol, horizon=horizon)
    if m.summable_perturbation is False:
        warnings.warn("perturbation was flagged non-summable; density is not certified",
                      stacklevel=2)
    return density(m, i, x, rel_tol=rel_tol, horizon=horizon)


@dataclass
class DensityTable:
    """Tabulated densities over a grid inside the ac half-line."""

    grid: np.ndarray
    tau_values: np.ndarray
    mu_prime: np.ndarray
    g_values: np.ndarray
    gaps: np.ndarray
    converged: np.ndarray
    residue: int
    horizon: int
    rel_tol: float
    flags: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            for key, val in sorted(self.flags.items()):
                fh.write(f"# {key}: {val}\n")
            fh.write(f"# residue: {self.residue}\n")
            fh.write(f"# horizon: {self.horizon}\n")
            fh.write(f"# rel_tol: {self.rel_tol:.17g}\n")
            writer = csv.writer(fh)
            writer.writerow(["x", "tau", "g", "mu_prime", "gap", "flags"])
            for k in range(len(self.grid)):
                writer.writerow(
                    [
                        f"{self.grid[k]:.17g}",
                        f"{self.tau_values[k]:.17g}",
                        f"{self.g_values[k]:.17g}",
                        f"{self.mu_prime[k]:.17g}",
                        f"{self.gaps[k]:.17g}",
                        "ok" if self.converged[k] else "not-converged",
                    ]
                )


def density_grid(m: ModulatedModel, i: int, xs, rel_tol: float = 1e-3,
                 horizon: int | None = None, j_start: int = 8) -> DensityTable:
    """Vectorized density table over a grid (single streamed pass).

    Points that fail the dyadic Cauchy criterion are flagged, not rejected.
    All grid points must lie in the ac half-line.
    """
    xs = np.asarray(xs, dtype=float)
    tau_vals = m.tau(xs)
    if np.any(tau_vals >= 0):
        bad = xs[tau_vals >= 0]
        raise OutsideBandError(f"grid leaves the ac half-line at x = {bad[0]:g}")
    horizon = min(horizon or m.horizon, m.horizon)
    js = _dyadic_blocks(m, i, horizon, j_start)
    _, scaled, _ = turan_samples_grid(m, i, xs, js)
    g_vals = scaled[-1]
    gaps = np.abs(scaled[-1] - scaled[-2]) / np.maximum(np.abs(scaled[-1]), 1e-300)
    converged = (gaps < rel_tol) & (g_vals > 0)
    alpha_im1 = m.periodic.alpha_at(i - 1)
    mu = np.sqrt(alpha_im1 * np.abs(tau_vals)) / (np.pi * g_vals)
    flags = {
        "increments_vanish": bool(m.base.increments_vanish),
        "conjectural": not bool(m.base.increments_vanish),
        "perturbed": m.is_perturbed,
    }
    if m.is_perturbed:
        flags["summable_perturbation"] = bool(m.summable_perturbation)
    return DensityTable(
        grid=xs, tau_values=tau_vals, mu_prime=mu, g_values=g_vals, gaps=gaps,
        converged=converged, residue=i, horizon=horizon, rel_tol=rel_tol, flags=flags,
    )


# ---------------------------------------------------------------------------
# Eventually-periodic truncation route
# ---------------------------------------------------------------------------

def truncated_params(m: ModulatedModel, L: int) -> ModulatedModel:
    """Model whose coefficients are frozen to one period beyond index L + N - 1.

    The result is an eventually periodic operator used only as an evaluation
    device; its Turán determinants are exactly stationary past L + N.
    """
    if L < 1:
        raise ValueError("truncation index must be >= 1")
    # The frozen tail must also freeze any perturbation factors, otherwise the
    # tail coefficients would not be exactly periodic.
    mt = ModulatedModel(
        periodic=m.periodic,
        a_base=Truncated(m.a_base, L, m.N),
        b_family=None if m.b_family is None else Truncated(m.b_family, L, m.N),
        s=m.s,
        r=m.r,
        s_r_source=m.s_r_source,
        horizon=m.horizon,
        xi=None if m.xi is None else Truncated(m.xi, L, m.N),
        zeta=None if m.zeta is None else Truncated(m.zeta, L, m.N),
        truncation_of=m,
    )
    return mt


def truncated_density(m: ModulatedModel, L: int, x: float) -> float:
    """Density of the truncated-parameter measure at x via its explicit formula.

    Valid where the scaled discriminant of the frozen-tail cocycle is
    negative; converges to the Turán-route density as L grows.
    """
    mt = truncated_params(m, L)
    N = m.N
    a_edge = mt.a(L + N - 1)
    disc = a_edge * _truncated_discr(mt, L, x)
    if disc >= 0:
        raise HyperbolicTruncationError(
            f"hyperbolic truncation: scaled discriminant {disc:.6g} >= 0 at x = {x:g}"
        )
    d_val = turan(mt, L + N, x)
    return math.sqrt(-disc) / (2.0 * math.pi * a_edge ** 1.5 * abs(d_val))


def truncated_density_grid(m: ModulatedModel, L: int, xs) -> np.ndarray:
    """Vectorized truncated-route density over a grid."""
    xs = np.asarray(xs, dtype=float)
    mt = truncated_params(m, L)
    N = m.N
    a_edge = mt.a(L + N - 1)
    out_pairs = pairs_at(mt, xs, np.array([L + N, L + 2 * N]))
    d_vals = out_pairs[0, 1] * out_pairs[1, 0] - out_pairs[0, 0] * out_pairs[1, 1]
    mu = np.empty(len(xs))
    for k, x in enumerate(xs):
        disc = a_edge * _truncated_discr(mt, L, float(x))
        if disc >= 0:
            raise HyperbolicTruncationError(
                f"hyperbolic truncation: scaled discriminant {disc:.6g} >= 0 at x = {x:g}"
            )
        mu[k] = math.sqrt(-disc) / (2.0 * math.pi * a_edge ** 1.5 * abs(d_vals[k]))
    return mu


def _truncated_discr(mt: ModulatedModel, L: int, x: float) -> float:
    X = transfer_X(mt, L + mt.N, x)
    t = X[0, 0] + X[1, 1]
    return float(t * t - 4.0 * np.linalg.det(X))
