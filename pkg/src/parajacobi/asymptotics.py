"""Oscillatory asymptotics, local frequency and the sinc universality limit.

The scaled polynomials a^{1/4} p oscillate with amplitude determined by the
density and phase increments supplied by the shifted conjugation. Their
Christoffel-Darboux kernel, rescaled by the quarter-power path length rho_n,
converges to a sinc profile with local frequency upsilon. This module
measures all of these and emits prediction and measurement side by side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import compensated_sum
from .conjugation import find_ellipticity_threshold, phase_sum
from .errors import OutsideBandError, ResonantWindowError, UpsilonMismatchError
from .modulation import ModulatedModel
from .periodic import monodromy, trace_derivative_at_zero
from .recurrence import cd_kernel_grid, diagonal_square_sum, pairs_at
from .turan import density


def sinc(t):
    """sin(t)/t with the removable singularity filled."""
    return np.sinc(np.asarray(t) / np.pi)


def upsilon(m: ModulatedModel, x: float) -> float:
    """Local oscillation frequency on the ac half-line.

    Computed through both closed forms (sum of scaled monodromy entries and
    absolute trace derivative); they must agree to 1e-10, which exercises the
    two trace identities of the periodic layer.
    """
    tau_x = float(m.tau(x))
    if tau_x >= 0:
        raise OutsideBandError(f"local frequency is defined on the ac half-line; x = {x:g}")
    p = m.periodic
    root = math.sqrt(abs(tau_x))
    entry_sum = 0.0
    for k in range(p.N):
        entry_sum += abs(monodromy(p, k, 0.0)[1, 0]) / p.alpha_at(k - 1)
    sum_form = entry_sum / (2.0 * math.pi * p.N * root)
    trace_form = abs(trace_derivative_at_zero(p)) / (2.0 * math.pi * p.N * root)
    if abs(sum_form - trace_form) > 1e-10 * max(1.0, abs(trace_form)):
        raise UpsilonMismatchError(
            f"upsilon mismatch: {sum_form:.15g} (entry sum) vs {trace_form:.15g} (trace form)"
        )
    return sum_form


def rho(m: ModulatedModel, n: int) -> float:
    """Quarter-power path length sum_{k<=n} sqrt(alpha_k / a_k), compensated."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a_arr, _ = m.coeff_arrays(n)
    alpha = np.tile(m.periodic.alpha, n // m.N + 2)[: n + 1]
    return float(compensated_sum(np.sqrt(alpha / a_arr[: n + 1])))


@dataclass
class AsymptoticsReport:
    """Measured against predicted oscillation amplitude over a block window."""

    x: float
    i: int
    j_range: tuple
    amplitude_measured: float
    amplitude_predicted: float
    ratio: float
    phase_residuals: np.ndarray
    mu_prime: float
    ellipticity_threshold: int | None = None


def predicted_amplitude(m: ModulatedModel, i: int, x: float, mu_prime: float) -> float:
    """Amplitude of the scaled polynomials from the density and periodic data."""
    p = m.periodic
    entry = abs(monodromy(p, i, 0.0)[1, 0])
    tau_abs = abs(float(m.tau(x)))
    return math.sqrt(entry / (math.pi * mu_prime * math.sqrt(p.alpha_at(i - 1) * tau_abs)))


def two_point_amplitude(w, thetas, sin_floor: float = 1e-3):
    """Squared amplitudes from consecutive samples of a sinusoid with known increments.

    For w_j = A sin(phi_j) and w_{j+1} = A sin(phi_j + theta_j),

        A^2 = (w_j^2 + w_{j+1}^2 - 2 w_j w_{j+1} cos theta_j) / sin^2 theta_j

    exactly. Pairs with sin theta below the floor are masked out; raises when
    every pair is that close to resonance.
    """
    w = np.asarray(w, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if len(w) != len(thetas) + 1:
        raise ValueError("need one more sample than increments")
    w0 = w[:-1]
    w1 = w[1:]
    sin_t = np.sin(thetas)
    good = sin_t >= sin_floor
    if not good.any():
        raise ResonantWindowError(
            f"resonant window: sin(theta) < {sin_floor:g} on every pair"
        )
    amp_sq = (w0[good] ** 2 + w1[good] ** 2
              - 2.0 * w0[good] * w1[good] * np.cos(thetas[good])) / sin_t[good] ** 2
    return amp_sq, good


def amplitude_extract(m: ModulatedModel, i: int, x: float, j_window, mu_prime=None,
                      rel_tol: float = 1e-3) -> AsymptoticsReport:
    """Two-point inversion of the scaled-polynomial amplitude over a window.

    With w_j = a_{(j+1)N+i-1}^{1/4} p_{jN+i}(x) = A sin(phi_j) + o(1) and
    phase increments theta_j, each consecutive pair inverts to

        A^2 = (w_j^2 + w_{j+1}^2 - 2 w_j w_{j+1} cos theta_j) / sin^2 theta_j,

    which is exact for a pure sinusoid. Pairs with sin theta below 1e-3 are
    discarded; if the whole window is that degenerate the inversion is
    ill-conditioned and an error is raised. Phase increments always come from
    the unperturbed frames, the polynomial values from the model itself.
    """
    j_lo, j_hi = int(j_window[0]), int(j_window[1])
    if j_hi - j_lo < 2:
        raise ValueError("window must contain at least two block indices")
    if not m.tau.in_ac_halfline(x):
        raise OutsideBandError(f"x = {x:g} is not in the ac half-line")
    N = m.N
    ns = np.arange(j_lo, j_hi + 1, dtype=np.int64) * N + i
    vals = pairs_at(m, [x], ns)[:, 1, 0]
    a_arr, _ = m.coeff_arrays(int(ns[-1]) + N)
    w = a_arr[(np.arange(j_lo, j_hi + 1) + 1) * N + i - 1] ** 0.25 * vals
    thetas = phase_sum(m.base, i, j_lo, j_hi, x).thetas
    amp_sq, _ = two_point_amplitude(w, thetas)
    measured = math.sqrt(float(np.mean(amp_sq)))
    if mu_prime is None:
        mu_prime = density(m, i, x, rel_tol=rel_tol)
    predicted = predicted_amplitude(m, i, x, mu_prime)
    # Phase residuals: recovered increment from each interior triple against
    # the mean of the two frame increments it spans.
    resid = []
    amp = measured if measured > 0 else 1.0
    for k in range(1, len(w) - 1):
        if abs(w[k]) > 0.1 * amp:
            arg = (w[k - 1] + w[k + 1]) / (2.0 * w[k])
            if abs(arg) <= 1.0:
                resid.append(math.acos(arg) - 0.5 * (thetas[k - 1] + thetas[k]))
    return AsymptoticsReport(
        x=x, i=i, j_range=(j_lo, j_hi),
        amplitude_measured=measured, amplitude_predicted=predicted,
        ratio=measured / predicted,
        phase_residuals=np.asarray(resid),
        mu_prime=mu_prime,
        ellipticity_threshold=find_ellipticity_threshold(m.base, i, x, j_max=j_lo),
    )


def perturbed_asymptotics(m: ModulatedModel, i: int, x: float, j_window,
                          mu_prime=None, rel_tol: float = 1e-3) -> AsymptoticsReport:
    """Amplitude extraction for a perturbed model.

    Identical to amplitude_extract: the polynomials and quarter-power scaling
    use the perturbed coefficients, the phase increments the unperturbed
    frames, and the prediction the perturbed density.
    """
    return amplitude_extract(m, i, x, j_window, mu_prime=mu_prime, rel_tol=rel_tol)


@dataclass
class KernelProfile:
    """Rescaled Christoffel-Darboux kernel against the sinc prediction."""

    x: float
    n: int
    rho_n: float
    u_grid: np.ndarray
    values: np.ndarray       # K_n(x + u/rho, x + v/rho) / rho over the grid
    prediction: np.ndarray   # (upsilon/mu') * sinc((u - v) pi upsilon)
    upsilon: float
    mu_prime: float

    @property
    def max_relative_deviation(self) -> float:
        scale = self.upsilon / self.mu_prime
        return float(np.abs(self.values - self.prediction).max() / scale)


def universality_profile(m: ModulatedModel, n: int, x: float, u_grid,
                         mu_prime=None, rel_tol: float = 1e-3) -> KernelProfile:
    """Kernel profile K_n(x + u/rho_n, x + v/rho_n)/rho_n on a grid of offsets.

    The prediction is the sinc kernel with local frequency upsilon of the
    unperturbed periodic data and the model's own density and path length.
    Measurement and prediction are returned side by side, never merged.
    """
    if not m.tau.in_ac_halfline(x):
        raise OutsideBandError(f"x = {x:g} is not in the ac half-line")
    u_grid = np.asarray(u_grid, dtype=float)
    rho_n = rho(m, n)
    xs = x + u_grid / rho_n
    values = cd_kernel_grid(m, n, xs) / rho_n
    ups = upsilon(m.base, x)
    if mu_prime is None:
        mu_prime = density(m, 0, x, rel_tol=rel_tol)
    du = u_grid[:, None] - u_grid[None, :]
    prediction = (ups / mu_prime) * sinc(du * math.pi * ups)
    return KernelProfile(
        x=x, n=n, rho_n=rho_n, u_grid=u_grid, values=values,
        prediction=prediction, upsilon=ups, mu_prime=mu_prime,
    )


@dataclass
class DiagonalComparison:
    """Normalized diagonal kernel sum against the two candidate constants."""

    x: float
    n: int
    value: float
    candidate_half: float    # upsilon / mu' (sinc-limit diagonal)
    candidate_full: float    # 2 upsilon / mu'
    matched: str             # "half", "full" or "neither"
    tolerance: float


def ignjatovic_diagonal(m: ModulatedModel, n: int, x: float, mu_prime=None,
                        rel_tol: float = 1e-3, match_tol: float = 0.02) -> DiagonalComparison:
    """Diagonal Cesaro limit (sum a_j^{-1/2})^{-1} sum p_j(x)^2 for period-1 models.

    Compares the measured value with both candidate constants that appear in
    the literature for this limit, differing by a factor of two, and records
    which one the data supports. No constant is assumed.
    """
    if m.N != 1:
        raise ValueError("diagonal comparison is defined for period-1 models")
    if not m.tau.in_ac_halfline(x):
        raise OutsideBandError(f"x = {x:g} is not in the ac half-line")
    num = diagonal_square_sum(m, n, x)
    a_arr, _ = m.coeff_arrays(n)
    den = float(compensated_sum(1.0 / np.sqrt(a_arr[: n + 1])))
    value = num / den
    ups = upsilon(m.base, x)
    if mu_prime is None:
        mu_prime = density(m, 0, x, rel_tol=rel_tol)
    half = ups / mu_prime
    full = 2.0 * ups / mu_prime
    if abs(value - half) <= match_tol * half:
        matched = "half"
    elif abs(value - full) <= match_tol * full:
        matched = "full"
    else:
        matched = "neither"
    return DiagonalComparison(
        x=x, n=n, value=value, candidate_half=half, candidate_full=full,
        matched=matched, tolerance=match_tol,
    )
