"""Modulated Jacobi parameters and everything derived from them alone.

Closed-form coefficient families, bounded-variation trend diagnostics,
extraction of the periodic shift limits, the affine critical polynomial
splitting the line into an absolutely continuous half-line and a discrete
one, and summable relative perturbations with their comparison matrices.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GrowthRegimeError,
    NegativeCoefficientError,
    OutOfClassError,
    ZeroSlopeError,
)
from .periodic import Case, PeriodicCache, PeriodicParams, classify, conjugator_chain, monodromy, trace_derivative_at_zero

DEFAULT_HORIZON = 4_000_000


# ---------------------------------------------------------------------------
# Coefficient families
# ---------------------------------------------------------------------------

class SequenceFamily:
    """Lazily evaluated positive coefficient sequence."""

    def values(self, n0: int, n1: int) -> np.ndarray:
        raise NotImplementedError

    def value(self, n: int) -> float:
        return float(self.values(n, n + 1)[0])

    def limit_increment(self):
        """Limit of one-step increments when known in closed form, else None."""
        return None

    def vanishing_increments(self):
        """True/False when the one-step increments provably tend to zero, else None."""
        inc = self.limit_increment()
        return None if inc is None else inc == 0.0

    def max_index(self):
        """Largest valid index for finitely supported families, else None."""
        return None


@dataclass(frozen=True, eq=False)
class Power(SequenceFamily):
    """c * (n + 1)**gamma."""

    gamma: float
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0 or self.gamma <= 0:
            raise ValueError("Power family requires c > 0 and gamma > 0")

    def values(self, n0, n1):
        n = np.arange(n0, n1, dtype=float)
        return self.c * (n + 1.0) ** self.gamma

    def limit_increment(self):
        if self.gamma < 1.0:
            return 0.0
        if self.gamma == 1.0:
            return self.c
        return None


@dataclass(frozen=True, eq=False)
class PowerShift(SequenceFamily):
    """c * (n + 1)**gamma plus a bounded shift (scalar or explicit array)."""

    gamma: float
    c: float = 1.0
    shift: object = 0.0

    def _shift_values(self, n0, n1):
        if np.isscalar(self.shift):
            return np.full(n1 - n0, float(self.shift))
        arr = np.asarray(self.shift, dtype=float)
        out = np.zeros(n1 - n0)
        hi = min(n1, len(arr))
        if hi > n0:
            out[: hi - n0] = arr[n0:hi]
        return out

    def values(self, n0, n1):
        n = np.arange(n0, n1, dtype=float)
        return self.c * (n + 1.0) ** self.gamma + self._shift_values(n0, n1)

    def limit_increment(self):
        if not np.isscalar(self.shift):
            return None
        if self.gamma < 1.0:
            return 0.0
        if self.gamma == 1.0:
            return self.c
        return None


@dataclass(frozen=True, eq=False)
class SqrtProduct(SequenceFamily):
    """sqrt((n + 1)(n + 1 + lam)); increments tend to 1, not 0."""

    lam: float = 0.0

    def __post_init__(self):
        if self.lam <= -1:
            raise ValueError("SqrtProduct requires lam > -1")

    def values(self, n0, n1):
        n = np.arange(n0, n1, dtype=float)
        return np.sqrt((n + 1.0) * (n + 1.0 + self.lam))

    def limit_increment(self):
        return 1.0


@dataclass(frozen=True, eq=False)
class Explicit(SequenceFamily):
    """Finite explicit coefficient array."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=float))

    def values(self, n0, n1):
        if n1 > len(self.data):
            raise IndexError(f"explicit family holds {len(self.data)} values, asked up to {n1}")
        return self.data[n0:n1].copy()

    def max_index(self):
        return len(self.data) - 1


@dataclass(frozen=True, eq=False)
class Truncated(SequenceFamily):
    """Sequence frozen to one period of values beyond index L + N - 1."""

    inner: SequenceFamily
    L: int
    N: int

    def values(self, n0, n1):
        cut = self.L + self.N
        out = np.empty(n1 - n0)
        if n0 < cut:
            head = min(n1, cut)
            out[: head - n0] = self.inner.values(n0, head)
        if n1 > cut:
            tail_period = self.inner.values(self.L, self.L + self.N)
            idx = (np.arange(max(n0, cut), n1) - self.L) % self.N
            out[max(n0, cut) - n0:] = tail_period[idx]
        return out

    def max_index(self):
        return None


# Decaying sequences used for relative perturbations (sign-free, may vanish).

@dataclass(frozen=True, eq=False)
class GeometricDecay:
    """c * 2**(-n)."""

    c: float = 1.0

    def values(self, n0, n1):
        return self.c * np.exp2(-np.arange(n0, n1, dtype=float))


@dataclass(frozen=True, eq=False)
class PowerDecay:
    """c * (n + 1)**(-p)."""

    p: float
    c: float = 1.0

    def values(self, n0, n1):
        return self.c * (np.arange(n0, n1, dtype=float) + 1.0) ** (-self.p)


@dataclass(frozen=True, eq=False)
class ExplicitDecay:
    """Explicit perturbation values, zero beyond the stored range."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=float))

    def values(self, n0, n1):
        out = np.zeros(n1 - n0)
        hi = min(n1, len(self.data))
        if hi > n0:
            out[: hi - n0] = self.data[n0:hi]
        return out


@dataclass(frozen=True, eq=False)
class ZeroDecay:
    def values(self, n0, n1):
        return np.zeros(n1 - n0)


# ---------------------------------------------------------------------------
# The critical polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPolynomial:
    """Affine polynomial whose sign splits the line into the two spectral half-lines.

    Negative values mark the absolutely continuous half-line, positive values
    the discrete one; x0 is the single sign change.
    """

    slope: float
    intercept: float
    epsilon: int
    x0: float

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept

    def sigma(self, x):
        return float(np.sign(self(x)))

    def in_ac_halfline(self, x) -> bool:
        return bool(self(x) < 0.0)

    def in_discrete_halfline(self, x) -> bool:
        return bool(self(x) > 0.0)

    def ac_halfline(self):
        """The open half-line carrying the absolutely continuous spectrum."""
        if self.slope > 0:
            return (-math.inf, self.x0)
        return (self.x0, math.inf)

    def discrete_halfline(self):
        if self.slope > 0:
            return (self.x0, math.inf)
        return (-math.inf, self.x0)


# ---------------------------------------------------------------------------
# Modulated model
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ModulatedModel:
    """Periodically modulated Jacobi parameters with derived periodic data.

    The off-diagonal is alpha[n % N] times the base sequence; the diagonal is
    beta[n % N] times the base sequence unless an independent family is given.
    A perturbed model multiplies its own coefficients by (1 + xi_n) and
    (1 + zeta_n) but keeps all periodic-limit objects (conjugators, critical
    polynomial) of its unperturbed base. Instances are immutable in intent;
    the internal caches only grow.
    """

    periodic: PeriodicParams
    a_base: SequenceFamily
    b_family: SequenceFamily | None = None
    s: np.ndarray | None = None
    r: np.ndarray | None = None
    s_r_source: str = "pending"
    horizon: int = DEFAULT_HORIZON
    xi: object = None
    zeta: object = None
    base: "ModulatedModel" = None
    summable_perturbation: bool | None = None
    truncation_of: "ModulatedModel" = None
    _arrays: dict = field(default_factory=dict, repr=False)
    _derived: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.base is None:
            self.base = self
        for fam in (self.a_base, self.b_family):
            mi = fam.max_index() if fam is not None else None
            if mi is not None:
                self.horizon = min(self.horizon, mi)

    # -- coefficients --------------------------------------------------

    @property
    def N(self) -> int:
        return self.periodic.N

    @property
    def is_perturbed(self) -> bool:
        return self.xi is not None or self.zeta is not None

    def coeff_arrays(self, n_max: int):
        """Coefficient arrays a[0..n_max], b[0..n_max] (cached, grow-only)."""
        if n_max > self.horizon:
            raise IndexError(f"requested index {n_max} beyond horizon {self.horizon}")
        cached = self._arrays.get("ab")
        if cached is not None and len(cached[0]) > n_max:
            return cached[0][: n_max + 1], cached[1][: n_max + 1]
        n1 = min(self.horizon, max(n_max, 4096)) + 1
        base = self.a_base.values(0, n1)
        alpha = np.tile(self.periodic.alpha, n1 // self.N + 1)[:n1]
        a = alpha * base
        if self.b_family is None:
            beta = np.tile(self.periodic.beta, n1 // self.N + 1)[:n1]
            b = beta * base
        else:
            b = self.b_family.values(0, n1)
        if self.xi is not None:
            a = a * (1.0 + self.xi.values(0, n1))
        if self.zeta is not None:
            b = b * (1.0 + self.zeta.values(0, n1))
        if not np.all(a > 0):
            bad = int(np.argmin(a > 0))
            kind = "negative perturbed coefficient" if self.xi is not None \
                else "non-positive off-diagonal coefficient"
            raise NegativeCoefficientError(f"{kind}: a_{bad} = {a[bad]:.6g} <= 0")
        self._arrays["ab"] = (a, b)
        return a[: n_max + 1], b[: n_max + 1]

    def a(self, n: int) -> float:
        a, _ = self.coeff_arrays(n)
        return float(a[n])

    def b(self, n: int) -> float:
        _, b = self.coeff_arrays(n)
        return float(b[n])

    # -- derived periodic objects ---------------------------------------

    @property
    def cache(self) -> PeriodicCache:
        got = self._derived.get("cache")
        if got is None:
            if self.truncation_of is not None:
                got = self.truncation_of.base.cache
            else:
                got = conjugator_chain(self.periodic)
            self._derived["cache"] = got
        return got

    @property
    def tau(self) -> CriticalPolynomial:
        if self.base is not self:
            return self.base.tau
        got = self._derived.get("tau")
        if got is None:
            if self.truncation_of is not None:
                got = self.truncation_of.tau
            else:
                got = critical_polynomial(self)
            self._derived["tau"] = got
        return got

    @property
    def increments_vanish(self):
        """Whether one-period coefficient increments vanish (density identification hypothesis)."""
        van = self.a_base.vanishing_increments()
        if van is not None:
            return van
        # Fall back to a numeric trend on the base sequence.
        n = min(self.horizon - self.N, 1 << 16)
        vals = self.a_base.values(n - 64 * self.N, n)
        inc = np.abs(vals[self.N:] - vals[: -self.N])
        return bool(inc.mean() < 1e-3)

    def classification(self) -> Case:
        return classify(self.periodic)


def _aitken(f0, f1, f2):
    """Limit extrapolation from three geometric-like samples (oldest first)."""
    denom = (f2 - f1) - (f1 - f0)
    if abs(denom) < 1e-300:
        return f2
    return f2 - (f2 - f1) ** 2 / denom


def estimate_shift_limits(m: ModulatedModel):
    """Numeric limits of the two periodic shift sequences feeding the critical polynomial.

    Samples the defining differences at four dyadic block indices and removes
    the leading power-law error with Aitken extrapolation, which is exact for
    a pure power tail. Two extrapolations from staggered triples must agree
    to 1e-4 (relative), else the model is flagged as outside the class.
    """
    N = m.N
    p = m.periodic
    if m.horizon < 10_000 * N:
        raise OutOfClassError(
            f"non-convergent s/r: estimation needs a horizon of at least {10_000 * N}, "
            f"got {m.horizon}"
        )
    jmax = (m.horizon - N - 1) // N
    a_arr, b_arr = m.coeff_arrays(min(m.horizon, jmax * N + N))
    # Growth sanity: the off-diagonal must diverge.
    probe_hi = float(np.max(a_arr[-4 * N:]))
    probe_mid = float(np.max(a_arr[len(a_arr) // 2: len(a_arr) // 2 + 4 * N]))
    probe_lo = float(np.max(a_arr[: 4 * N]))
    if not (probe_hi > probe_mid > 0 and probe_hi > 3.0 * probe_lo):
        raise OutOfClassError("non-convergent s/r: off-diagonal does not diverge (a_n -> inf fails)")
    js = [jmax // 8, jmax // 4, jmax // 2, jmax]
    s = np.empty(N)
    r = np.empty(N)
    for i in range(N):
        fs = []
        fr = []
        for j in js:
            n = j * N + i
            fs.append(p.alpha_at(i - 1) / p.alpha_at(i) * a_arr[n] - a_arr[n - 1])
            fr.append(p.beta_at(i) / p.alpha_at(i) * a_arr[n] - b_arr[n])
        s_new = _aitken(fs[1], fs[2], fs[3])
        s_old = _aitken(fs[0], fs[1], fs[2])
        r_new = _aitken(fr[1], fr[2], fr[3])
        r_old = _aitken(fr[0], fr[1], fr[2])
        if abs(s_new - s_old) > 1e-4 * max(1.0, abs(s_new)) or abs(r_new - r_old) > 1e-4 * max(
            1.0, abs(r_new)
        ):
            raise OutOfClassError(
                f"non-convergent s/r at residue {i}: "
                f"staggered extrapolations differ by {max(abs(s_new - s_old), abs(r_new - r_old)):.3g}"
            )
        s[i] = s_new
        r[i] = r_new
    return s, r


def build_model(
    periodic: PeriodicParams,
    a_base: SequenceFamily,
    b_family: SequenceFamily | None = None,
    s=None,
    r=None,
    horizon: int = DEFAULT_HORIZON,
) -> ModulatedModel:
    """Assemble a model, filling the shift limits exactly where possible.

    Priority: user-supplied values, closed-form limits of the base family
    (available when the diagonal is the periodic multiple of the base), and
    finally Aitken-refined numeric estimation.
    """
    m = ModulatedModel(
        periodic=periodic, a_base=a_base, b_family=b_family, horizon=horizon
    )
    N = periodic.N
    if s is not None and r is not None:
        m.s = np.asarray(s, dtype=float)
        m.r = np.asarray(r, dtype=float)
        m.s_r_source = "user"
        if len(m.s) != N or len(m.r) != N:
            raise ValueError("shift-limit overrides must have length N")
        return m
    inc = a_base.limit_increment()
    if b_family is None and inc is not None:
        alpha = periodic.alpha
        m.s = np.array([alpha[(i - 1) % N] * inc for i in range(N)])
        m.r = np.zeros(N)
        m.s_r_source = "exact"
        return m
    m.s, m.r = estimate_shift_limits(m)
    m.s_r_source = "estimated"
    return m


def critical_polynomial(m: ModulatedModel) -> CriticalPolynomial:
    """Affine critical polynomial from the periodic data and the shift limits."""
    cache = m.cache
    if cache.classification is not Case.IIb:
        raise OutOfClassError("critical polynomial requires the hard-edge regime")
    p = m.periodic
    eps = cache.epsilon
    slope = eps * trace_derivative_at_zero(p)
    if abs(slope) < 1e-14:
        raise ZeroSlopeError("zero slope: trace derivative vanishes in the parabolic regime")
    intercept = 0.0
    for i in range(p.N):
        Xi = monodromy(p, i, 0.0)
        intercept += (
            m.s[i] * (1.0 - eps * Xi[0, 0]) - m.r[i] * eps * Xi[1, 0]
        ) / p.alpha_at(i - 1)
    return CriticalPolynomial(
        slope=float(slope),
        intercept=float(intercept),
        epsilon=eps,
        x0=float(-intercept / slope),
    )


# ---------------------------------------------------------------------------
# Bounded-variation trend diagnostic
# ---------------------------------------------------------------------------

class StolzVerdict(enum.Enum):
    CONVERGENT_TREND = "ConvergentTrend"
    INCONCLUSIVE = "Inconclusive"
    DIVERGENT = "Divergent"


@dataclass(frozen=True)
class StolzReport:
    grid: np.ndarray
    partial_variation: np.ndarray
    tail_slope: float
    verdict: StolzVerdict


def stolz_diagnostic(values, N: int, horizon: int | None = None) -> StolzReport:
    """Heuristic trend test for bounded N-step total variation.

    Computes cumulative variation on a log-spaced grid and fits the decay
    exponent of the tail increments. Increments decaying faster than
    n**-1.05 are reported as a convergent trend; this is a diagnostic, not
    a proof.
    """
    x = np.asarray(values, dtype=float)
    horizon = len(x) if horizon is None else min(horizon, len(x))
    if horizon < 10 * N:
        raise ValueError("horizon must be at least 10 N")
    d = np.abs(x[N:horizon] - x[: horizon - N])
    cum = np.cumsum(d)
    grid = np.unique(np.geomspace(1, len(d), num=min(64, len(d))).astype(int)) - 1
    partial = cum[grid]
    tail_lo = max(1, len(d) // 10)
    n_idx = np.arange(tail_lo, len(d))
    dn = d[tail_lo:]
    mask = dn > 1e-300
    if not mask.any():
        return StolzReport(grid + 1, partial, -np.inf, StolzVerdict.CONVERGENT_TREND)
    # Binned medians keep oscillatory increments from polluting the fit.
    logs_n = np.log(n_idx[mask].astype(float))
    logs_d = np.log(dn[mask])
    nbins = 12
    edges = np.linspace(logs_n.min(), logs_n.max() + 1e-12, nbins + 1)
    cx, cy = [], []
    for k in range(nbins):
        sel = (logs_n >= edges[k]) & (logs_n < edges[k + 1])
        if sel.any():
            cx.append(0.5 * (edges[k] + edges[k + 1]))
            cy.append(np.median(logs_d[sel]))
    if len(cx) < 2:
        return StolzReport(grid + 1, partial, 0.0, StolzVerdict.INCONCLUSIVE)
    slope = float(np.polyfit(cx, cy, 1)[0])
    if slope <= -1.05:
        verdict = StolzVerdict.CONVERGENT_TREND
    elif slope >= -0.95:
        verdict = StolzVerdict.DIVERGENT
    else:
        verdict = StolzVerdict.INCONCLUSIVE
    return StolzReport(grid + 1, partial, slope, verdict)


# ---------------------------------------------------------------------------
# Perturbations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummabilityReport:
    partial_sums: np.ndarray
    tail: float
    summable: bool


def summability_report(m: ModulatedModel, xi, zeta, horizon: int | None = None) -> SummabilityReport:
    """Partial sums of sqrt(a_n) (|xi_n| + |zeta_n|) and a Cauchy-tail verdict."""
    horizon = min(horizon or m.horizon, m.horizon)
    a_arr, _ = m.coeff_arrays(horizon - 1)
    pert = np.zeros(horizon)
    if xi is not None:
        pert += np.abs(xi.values(0, horizon))
    if zeta is not None:
        pert += np.abs(zeta.values(0, horizon))
    terms = np.sqrt(a_arr[:horizon]) * pert
    cum = np.cumsum(terms)
    marks = np.unique(np.geomspace(8, horizon, num=24).astype(int)) - 1
    tail = float(cum[-1] - cum[horizon // 2])
    return SummabilityReport(
        partial_sums=cum[marks],
        tail=tail,
        summable=bool(tail <= 1e-3 * (1.0 + cum[-1])),
    )


def perturb(m: ModulatedModel, xi=None, zeta=None) -> ModulatedModel:
    """Relative perturbation a -> a (1 + xi), b -> b (1 + zeta).

    The critical polynomial, conjugators and half-lines of the result are
    those of the unperturbed base. Non-summable perturbations are allowed
    but flagged with a warning.
    """
    if m.is_perturbed:
        raise ValueError("stacking perturbations is not supported; perturb the base model")
    if xi is None and zeta is None:
        xi = ZeroDecay()
    rep = summability_report(m, xi, zeta, horizon=min(m.horizon, 1 << 20))
    if not rep.summable:
        warnings.warn(
            "perturbation summability check failed "
            f"(tail {rep.tail:.3g}); half-line theory may not apply",
            stacklevel=2,
        )
    pm = ModulatedModel(
        periodic=m.periodic,
        a_base=m.a_base,
        b_family=m.b_family,
        s=m.s,
        r=m.r,
        s_r_source=m.s_r_source,
        horizon=m.horizon,
        xi=xi,
        zeta=zeta,
        base=m,
        summable_perturbation=rep.summable,
    )
    pm.coeff_arrays(min(pm.horizon, 1 << 14))  # positivity fail-fast
    return pm


def _transfer(a_arr, b_arr, n, x):
    am1 = 1.0 if n == 0 else a_arr[n - 1]
    an = a_arr[n]
    return np.array([[0.0, 1.0], [-am1 / an, (x - b_arr[n]) / an]])


def comparison_matrices(m: ModulatedModel, js, x: float) -> dict:
    """Comparison matrices between the perturbed and unperturbed cocycles.

    The matrix at step j equals (B_j ... B_0)^{-1} (B~_j ... B~_0), built as a
    running one-step update so the two long products are never formed
    separately. Returns {j: matrix} for each requested j.
    """
    wanted = set(int(j) for j in js)
    jmax = max(wanted)
    out = {}
    if not m.is_perturbed:
        for j in wanted:
            out[j] = np.eye(2)
        return out
    ab, bb = m.base.coeff_arrays(jmax + 1)
    at, bt = m.coeff_arrays(jmax + 1)
    pinv = np.eye(2)
    qtilde = np.eye(2)
    mcur = None
    for k in range(jmax + 1):
        Bk = _transfer(ab, bb, k, x)
        Btk = _transfer(at, bt, k, x)
        pinv = pinv @ np.linalg.inv(Bk)
        if k == 0:
            mcur = pinv @ Btk
        else:
            mcur = mcur + pinv @ (Btk - Bk) @ qtilde
        qtilde = Btk @ qtilde
        if np.abs(pinv).max() > 1e100 or np.abs(qtilde).max() > 1e100:
            raise GrowthRegimeError(f"growth regime in comparison product at step {k}, x = {x:g}")
        if k in wanted:
            out[k] = mcur.copy()
    return out


def m_matrix(m: ModulatedModel, j: int, x: float) -> np.ndarray:
    """Single comparison matrix at step j (identity for unperturbed models)."""
    return comparison_matrices(m, [j], x)[j]


def carleman_partial_sums(m: ModulatedModel, marks) -> np.ndarray:
    """Partial sums of 1/a_n at the given indices (divergence diagnostic)."""
    marks = np.asarray(sorted(marks), dtype=int)
    a_arr, _ = m.coeff_arrays(int(marks[-1]))
    cum = np.cumsum(1.0 / a_arr)
    return cum[marks]


def modulation_diagnostics(m: ModulatedModel, horizon: int | None = None) -> dict:
    """Empirical check of the periodic-modulation axioms over the horizon.

    Reports the growth of the off-diagonal together with the tail residuals
    of the two ratio conditions; all three must trend to their limits for the
    half-line theory to apply. Diagnostic only, nothing is proven.
    """
    horizon = min(horizon or m.horizon, m.horizon)
    a_arr, b_arr = m.coeff_arrays(horizon - 1)
    n_tail = np.arange(horizon - 64 * m.N, horizon - 1)
    alpha = np.array([m.periodic.alpha_at(n) for n in n_tail])
    alpha_prev = np.array([m.periodic.alpha_at(n - 1) for n in n_tail])
    beta = np.array([m.periodic.beta_at(n) for n in n_tail])
    ratio_a = np.abs(a_arr[n_tail - 1] / a_arr[n_tail] - alpha_prev / alpha)
    ratio_b = np.abs(b_arr[n_tail] / a_arr[n_tail] - beta / alpha)
    mid = horizon // 2
    return {
        "a_grows": bool(a_arr[-1] > 2.0 * a_arr[mid] or a_arr[-1] > 10.0 * a_arr[: m.N].max()),
        "offdiagonal_ratio_residual": float(ratio_a.max()),
        "diagonal_ratio_residual": float(ratio_b.max()),
    }
