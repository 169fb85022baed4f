"""Shifted conjugation of the period cocycle.

A j-dependent change of frame turns the cocycle over one period into
epsilon * (Id + scale * R_j) with R_j converging to an explicit rotation-like
limit on compact sets away from the critical point. This module builds the
frames, the normalized remainders, the elliptic eigenvalues and the phase
increments whose sums drive the oscillatory asymptotics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CriticalPointError, EllipticFailureError
from .mat2 import discr as _discr
from .modulation import ModulatedModel
from .recurrence import transfer_X

_ID = np.eye(2)


def vartheta(m: ModulatedModel, i: int, j: int, x: float) -> float:
    """Frame contraction scale sqrt(alpha_{i-1} |tau(x)| / a_{(j+1)N+i-1}).

    Vanishes only at the critical point, where the frame degenerates.
    """
    tau_x = float(m.tau(x))
    if tau_x == 0.0:
        raise CriticalPointError(f"critical point: frame scale vanishes at x = {x:g}")
    n = (j + 1) * m.N + i - 1
    return math.sqrt(m.periodic.alpha_at(i - 1) * abs(tau_x) / m.a(n))


def _frame_leg(th: float) -> np.ndarray:
    return np.array([[1.0, 1.0], [math.exp(th), math.exp(-th)]])


def _safe_arccos(arg: float) -> float:
    if abs(arg) <= 1.0:
        return math.acos(arg)
    if abs(arg) - 1.0 <= 1e-12:
        return math.acos(math.copysign(1.0 - 1e-15, arg))
    raise EllipticFailureError(f"elliptic failure: arccos argument {arg:.6g} out of range")


@dataclass
class ConjugationFrame:
    """All per-(i, j, x) objects of the shifted conjugation."""

    i: int
    j: int
    x: float
    vartheta: float
    Z: np.ndarray          # frame at j
    Z_next: np.ndarray     # frame at j + 1
    Y: np.ndarray          # conjugated one-period cocycle
    R: np.ndarray          # normalized remainder of Y
    Q: np.ndarray          # normalized frame increment
    elliptic: bool
    lam: complex | None    # eigenvalue of Y with positive imaginary part
    theta: float | None    # phase increment in (0, pi)
    R_limit: np.ndarray | None = None  # limit of R on the half-line containing x


def expected_R_limit(sigma: float) -> np.ndarray:
    """Limit matrix of the normalized remainders, 0.5*[[1+s, -1+s], [1-s, -1-s]]."""
    return 0.5 * np.array([[1.0 + sigma, -1.0 + sigma], [1.0 - sigma, -1.0 - sigma]])


def frame(m: ModulatedModel, i: int, j: int, x: float) -> ConjugationFrame:
    """Build the shifted-conjugation frame at block j, residue i, point x."""
    cache = m.base.cache
    eps = cache.epsilon
    Ti = cache.T[i]
    th = vartheta(m, i, j, x)
    th1 = vartheta(m, i, j + 1, x)
    Z = Ti @ _frame_leg(th)
    Z1 = Ti @ _frame_leg(th1)
    X = transfer_X(m, j * m.N + i, x)
    Y = np.linalg.solve(Z1, X @ Z)
    R = (eps * Y - _ID) / th
    Q = (np.linalg.solve(_frame_leg(th), _frame_leg(th1)) - _ID) / th
    dY = _discr(Y)
    elliptic = dY < 0.0
    lam = None
    theta = None
    if elliptic:
        dR = _discr(R)
        xi = 0.5 * ((R[0, 0] + R[1, 1]) + 1j * math.sqrt(max(-dR, 0.0)))
        lam = eps * (1.0 + th * xi)
        det_y = float(np.linalg.det(Y))
        theta = _safe_arccos((Y[0, 0] + Y[1, 1]) / (2.0 * math.sqrt(det_y)))
    return ConjugationFrame(
        i=i, j=j, x=x, vartheta=th, Z=Z, Z_next=Z1, Y=Y, R=R, Q=Q,
        elliptic=elliptic, lam=lam, theta=theta,
        R_limit=expected_R_limit(m.tau.sigma(x)),
    )


def scaled_discriminant(m: ModulatedModel, i: int, j: int, x: float) -> float:
    """a_{(j+1)N+i-1} times the discriminant of the one-period cocycle at block j.

    Converges to 4 alpha_{i-1} tau(x) away from the critical point, negative
    on the absolutely continuous half-line and positive on the discrete one.
    """
    n = (j + 1) * m.N + i - 1
    return m.a(n) * _discr(transfer_X(m, j * m.N + i, x))


def find_ellipticity_threshold(m: ModulatedModel, i: int, x: float, j_max: int | None = None,
                               probes: int = 3) -> int:
    """Smallest probed block index from which the frames stay elliptic.

    Scans geometrically and confirms with a few consecutive probes; raises
    once the search passes j_max. The returned index is the runtime stand-in
    for the existential threshold in the ellipticity statements.
    """
    if j_max is None:
        j_max = max(16, (m.horizon - 2 * m.N) // m.N // 2)
    j = 1
    while j <= j_max:
        if all(frame(m, i, j + k, x).elliptic for k in range(probes)):
            return j
        j *= 2
    raise EllipticFailureError(
        f"elliptic failure: no elliptic threshold below j = {j_max} at x = {x:g} "
        "(point outside the ac half-line, or too close to the critical point for this horizon)"
    )


@dataclass
class PhaseSum:
    """Accumulated phase increments over a block range."""

    i: int
    j_start: int
    j_stop: int
    x: float
    total: float
    thetas: np.ndarray
    scaled_increments: np.ndarray  # sqrt(a_{(j+1)N+i-1} / alpha_{i-1}) * theta_j


def phase_sum(m: ModulatedModel, i: int, j_start: int, j_stop: int, x: float) -> PhaseSum:
    """Compensated sum of theta_j over j in [j_start, j_stop).

    Every frame in the range must be elliptic. Also returns the scaled
    increments, which converge to sqrt(|tau(x)|) on the ac half-line.
    """
    thetas = np.empty(max(j_stop - j_start, 0))
    scaled = np.empty_like(thetas)
    alpha_im1 = m.periodic.alpha_at(i - 1)
    for k, j in enumerate(range(j_start, j_stop)):
        fr = frame(m, i, j, x)
        if not fr.elliptic:
            raise EllipticFailureError(
                f"elliptic failure at block {j}, x = {x:g}: discriminant "
                f"{_discr(fr.Y):.3g} >= 0"
            )
        thetas[k] = fr.theta
        scaled[k] = math.sqrt(m.a((j + 1) * m.N + i - 1) / alpha_im1) * fr.theta
    return PhaseSum(
        i=i, j_start=j_start, j_stop=j_stop, x=x,
        total=math.fsum(thetas), thetas=thetas, scaled_increments=scaled,
    )
