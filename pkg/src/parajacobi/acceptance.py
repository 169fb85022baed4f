"""Executable exit criteria for the whole pipeline.

Each criterion is a self-contained check with its tolerance pinned at
definition time; the CLI report command and the acceptance test module both
run exactly these functions. The reference model throughout is

    M1: period 1, alpha = (1), beta = (-2), a_n = (n+1)^0.6, b_n = -2 a_n,

for which the shift limits vanish, the critical polynomial is x itself and
the absolutely continuous half-line is the negative axis.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .asymptotics import (
    amplitude_extract,
    ignjatovic_diagonal,
    perturbed_asymptotics,
    universality_profile,
)
from .conjugation import expected_R_limit, frame, scaled_discriminant
from .errors import TrivialParabolicError
from .mat2 import PARABOLIC_NORMAL_FORM, parabolic_conjugator
from .modulation import (
    GeometricDecay,
    ModulatedModel,
    Power,
    PowerShift,
    SqrtProduct,
    build_model,
    comparison_matrices,
    perturb,
)
from .oracle import cdf_compare, ess_spectrum_probe, oracle_measure
from .periodic import (
    Case,
    PeriodicParams,
    classify,
    spectral_bands,
    trace_derivative,
    trace_polynomial,
    absolute_trace_identity,
)
from .turan import density, density_grid, truncated_density_grid, turan, truncated_params

M1_CONFIG = {
    "schema_version": 1,
    "N": 1,
    "alpha": [1.0],
    "beta": [-2.0],
    "a_family": {"kind": "power", "gamma": 0.6, "c": 1.0},
    "b_family": None,
    "horizon": 4_000_000,
    "seed": 0,
}


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)
    skipped: bool = False


_shared = {}


def m1_model() -> ModulatedModel:
    if "m1" not in _shared:
        _shared["m1"] = build_model(
            PeriodicParams(1, [1.0], [-2.0]), Power(gamma=0.6), horizon=4_000_000
        )
    return _shared["m1"]


def m1_perturbed() -> ModulatedModel:
    if "m1p" not in _shared:
        _shared["m1p"] = perturb(m1_model(), xi=GeometricDecay(1.0))
    return _shared["m1p"]


def m1_mu_prime() -> float:
    if "mu1" not in _shared:
        _shared["mu1"] = density(m1_model(), 0, -1.0, rel_tol=1e-3)
    return _shared["mu1"]


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _random_periodic(rng) -> PeriodicParams:
    n = int(rng.integers(1, 4))
    alpha = rng.uniform(0.5, 2.0, size=n)
    beta = rng.uniform(-2.0, 2.0, size=n)
    return PeriodicParams(n, alpha, beta)


def criterion_1_algebraic_identities(seed: int = 12345) -> CriterionResult:
    """Trace-derivative and absolute-sum identities plus the conjugator identities, 1e-9."""

    def run():
        rng = np.random.default_rng(seed)
        worst = {"prop3": 0.0, "prop4": 0.0, "eq12": 0.0, "eq11": 0.0}
        trials = 0
        while trials < 1000:
            p = _random_periodic(rng)
            tp = trace_polynomial(p)
            bands = spectral_bands(p)
            lo, hi = bands[int(rng.integers(0, len(bands)))]
            x = float(rng.uniform(lo, hi))
            d_oracle = float(tp.deriv()(x))
            d_formula = trace_derivative(p, x)
            worst["prop3"] = max(
                worst["prop3"], abs(d_oracle - d_formula) / max(1.0, abs(d_oracle))
            )
            lhs, rhs = absolute_trace_identity(p, x)
            worst["prop4"] = max(worst["prop4"], abs(lhs - rhs) / max(1.0, lhs))
            trials += 1
        for _ in range(1000):
            eps = 1.0 if rng.uniform() < 0.5 else -1.0
            while True:
                S = rng.uniform(-2, 2, size=(2, 2))
                if abs(np.linalg.det(S)) > 0.3:
                    break
            X = eps * S @ PARABOLIC_NORMAL_FORM @ np.linalg.inv(S)
            try:
                form = parabolic_conjugator(X)
            except TrivialParabolicError:  # pragma: no cover
                continue
            T = form.T
            det_t = np.linalg.det(T)
            lhs12 = (T[0, 0] + T[0, 1]) * (T[1, 0] + T[1, 1]) / det_t
            rhs12 = 1.0 - form.epsilon * X[0, 0]
            lhs11 = (T[1, 0] + T[1, 1]) ** 2 / det_t
            rhs11 = -form.epsilon * X[1, 0]
            worst["eq12"] = max(worst["eq12"], abs(lhs12 - rhs12) / max(1.0, abs(rhs12)))
            worst["eq11"] = max(worst["eq11"], abs(lhs11 - rhs11) / max(1.0, abs(rhs11)))
        return worst

    worst, dt = _timed(run)
    passed = all(v <= 1e-9 for v in worst.values()) and dt < 5.0
    return CriterionResult(1, "algebraic identities", passed, dt, worst)


def criterion_2_scaled_discriminant() -> CriterionResult:
    """Scaled discriminant within 2 percent of 4 tau at block 1e5 on five points."""

    def run():
        m = m1_model()
        devs = {}
        for x in (-2.0, -1.0, -0.5, 0.5, 1.0):
            val = scaled_discriminant(m, 0, 10**5, x)
            target = 4.0 * float(m.tau(x))
            devs[x] = abs(val - target) / abs(target)
        return devs

    devs, dt = _timed(run)
    passed = all(v <= 0.02 for v in devs.values()) and dt < 10.0
    return CriterionResult(
        2, "scaled discriminant limit", passed, dt,
        {str(k): v for k, v in devs.items()},
    )


def criterion_3_frame_trends() -> CriterionResult:
    """Remainder and frame-increment norms small at 1e5 and strictly smaller at 4e5."""

    def run():
        m = m1_model()
        grid = np.linspace(-2.0, -0.5, 7)
        out = {"R_1e5": 0.0, "Q_1e5": 0.0, "R_4e5": 0.0, "Q_4e5": 0.0}
        for x in grid:
            rl = expected_R_limit(m.tau.sigma(x))
            for tag, j in (("1e5", 10**5), ("4e5", 4 * 10**5)):
                fr = frame(m, 0, j, float(x))
                out[f"R_{tag}"] = max(out[f"R_{tag}"], float(np.linalg.norm(fr.R - rl, 2)))
                out[f"Q_{tag}"] = max(out[f"Q_{tag}"], float(np.linalg.norm(fr.Q, 2)))
        return out

    out, dt = _timed(run)
    passed = (
        out["R_1e5"] <= 0.05
        and out["Q_1e5"] <= 0.02
        and out["R_4e5"] < out["R_1e5"]
        and out["Q_4e5"] < out["Q_1e5"]
        and dt < 30.0
    )
    return CriterionResult(3, "conjugation frame trends", passed, dt, out)


def _density_cdf(grid, values):
    return np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid))])


def criterion_4_density_triangle() -> CriterionResult:
    """Turán, truncated-parameter and quadrature routes agree on [-2, -1]."""

    def run():
        m = m1_model()
        grid = np.linspace(-2.0, -1.0, 64)
        table = density_grid(m, 0, grid, rel_tol=1e-3)
        mu_turan = table.mu_prime
        mu_trunc = truncated_density_grid(m, 10**5, grid)
        om = oracle_measure(m, 4000)
        mass = om.interval_mass(-2.0, -1.0)
        gap_to = cdf_compare(om, grid, mu_turan, -2.0, -1.0)
        gap_tr = cdf_compare(om, grid, mu_trunc, -2.0, -1.0)
        gap_tt = float(
            np.abs(_density_cdf(grid, mu_turan) - _density_cdf(grid, mu_trunc)).max()
        )
        return {
            "oracle_mass": mass,
            "gap_turan_oracle": gap_to / mass,
            "gap_truncated_oracle": gap_tr / mass,
            "gap_turan_truncated": gap_tt / mass,
            "all_converged": bool(table.converged.all()),
        }

    out, dt = _timed(run)
    passed = (
        out["all_converged"]
        and out["gap_turan_oracle"] <= 0.015
        and out["gap_truncated_oracle"] <= 0.015
        and out["gap_turan_truncated"] <= 0.015
        and dt < 120.0
    )
    return CriterionResult(4, "density triangle", passed, dt, out)


def criterion_5_amplitude() -> CriterionResult:
    """Measured oscillation amplitude within 2 percent of the prediction."""

    def run():
        rep = amplitude_extract(
            m1_model(), 0, -1.0, (10**5, 10**5 + 10**3), mu_prime=m1_mu_prime()
        )
        return rep

    rep, dt = _timed(run)
    passed = 0.98 <= rep.ratio <= 1.02 and dt < 30.0
    return CriterionResult(
        5, "oscillation amplitude", passed, dt,
        {
            "ratio": rep.ratio,
            "measured": rep.amplitude_measured,
            "predicted": rep.amplitude_predicted,
            "mu_prime": rep.mu_prime,
        },
    )


def criterion_6_universality() -> CriterionResult:
    """Rescaled kernel within 5 percent of the sinc profile; diagonal constant adjudicated."""

    def run():
        m = m1_model()
        mu = m1_mu_prime()
        prof = universality_profile(m, 10**5, -1.0, np.linspace(-1.0, 1.0, 9), mu_prime=mu)
        diag = ignjatovic_diagonal(m, 10**6, -1.0, mu_prime=mu)
        return prof, diag

    (prof, diag), dt = _timed(run)
    passed = (
        prof.max_relative_deviation <= 0.05
        and diag.matched == "half"
        and dt < 120.0
    )
    return CriterionResult(
        6, "sinc universality", passed, dt,
        {
            "max_relative_deviation": prof.max_relative_deviation,
            "diagonal_value": diag.value,
            "diagonal_candidate_half": diag.candidate_half,
            "diagonal_candidate_full": diag.candidate_full,
            "diagonal_matched": diag.matched,
        },
    )


def criterion_7_ess_probe() -> CriterionResult:
    """Eigenvalue counts in a discrete-half-line window stabilize across sizes."""

    def run():
        return ess_spectrum_probe(m1_model(), (0.5, 1.5), (1000, 2000, 4000))

    probe, dt = _timed(run)
    diffs = np.abs(np.diff(probe.counts))
    passed = bool((diffs <= 1).all()) and dt < 60.0
    return CriterionResult(
        7, "discrete half-line probe", passed, dt,
        {"counts": probe.counts.tolist(), "max_count_diff": int(diffs.max()) if diffs.size else 0},
    )


def criterion_8_perturbation_suite() -> CriterionResult:
    """Comparison matrices, density, amplitude and kernel under xi_n = 2^-n."""

    def run():
        mp = m1_perturbed()
        out = {}
        mats = comparison_matrices(mp, [1000, 2000], -1.0)
        out["m_cauchy"] = float(np.linalg.norm(mats[2000] - mats[1000], 2))
        out["m_det"] = float(abs(np.linalg.det(mats[2000]) - 1.0))
        grid = np.linspace(-2.0, -1.0, 64)
        table = density_grid(mp, 0, grid, rel_tol=1e-3)
        om = oracle_measure(mp, 4000)
        mass = om.interval_mass(-2.0, -1.0)
        out["density_oracle_gap"] = cdf_compare(om, grid, table.mu_prime, -2.0, -1.0) / mass
        mu_p = density(mp, 0, -1.0, rel_tol=1e-3)
        rep = perturbed_asymptotics(mp, 0, -1.0, (10**5, 10**5 + 10**3), mu_prime=mu_p)
        out["amplitude_ratio"] = rep.ratio
        prof = universality_profile(mp, 10**5, -1.0, np.linspace(-1.0, 1.0, 9), mu_prime=mu_p)
        out["kernel_deviation"] = prof.max_relative_deviation
        out["summable"] = bool(mp.summable_perturbation)
        return out

    out, dt = _timed(run)
    passed = (
        out["summable"]
        and out["m_cauchy"] <= 1e-5
        and out["m_det"] <= 1e-6
        and out["density_oracle_gap"] <= 0.02
        and 0.97 <= out["amplitude_ratio"] <= 1.03
        and out["kernel_deviation"] <= 0.05
        and dt < 180.0
    )
    return CriterionResult(8, "perturbation suite", passed, dt, out)


def criterion_9_fixtures() -> CriterionResult:
    """Classification and half-line signs of the two-periodic fixtures; Laguerre density."""

    def run():
        out = {}
        q = 1.5
        fixtures = {
            # two-periodic diagonal modulation, off-diagonal modulation
            "ex4": (PeriodicParams(2, [1.0, 1.0], [q, 0.0]), "neg"),
            "ex5": (PeriodicParams(2, [1.0, 1.0], [q, 4.0 / q]), "pos"),
            "ex6": (PeriodicParams(2, [1.0 - 0.4, 0.4], [1.0, 1.0]), "pos"),
            "ex7": (PeriodicParams(2, [q, 1.0 + q], [1.0, 1.0]), "neg"),
        }
        ok = True
        for name, (p, side) in fixtures.items():
            case = classify(p)
            model = build_model(p, Power(gamma=0.6), horizon=200_000)
            lo, hi = model.tau.ac_halfline()
            got = "neg" if hi == model.tau.x0 and lo == -np.inf else "pos"
            near_zero = abs(model.tau.x0) < 1e-9
            out[name] = {"case": case.value, "halfline": got, "x0": model.tau.x0}
            ok = ok and case is Case.IIb and got == side and near_zero
        # period-1 families with q = +/- 2 and a nonzero diagonal offset
        r_val = 0.7
        m_pos = build_model(
            PeriodicParams(1, [1.0], [2.0]), Power(gamma=0.6),
            b_family=PowerShift(gamma=0.6, c=2.0, shift=-r_val), horizon=200_000,
        )
        lo, hi = m_pos.tau.ac_halfline()
        out["q_plus_2"] = {"halfline": [lo, hi], "x0": m_pos.tau.x0}
        ok = ok and abs(m_pos.tau.x0 + r_val) < 1e-3 and hi == np.inf
        m_neg = build_model(
            PeriodicParams(1, [1.0], [-2.0]), Power(gamma=0.6),
            b_family=PowerShift(gamma=0.6, c=-2.0, shift=-r_val), horizon=200_000,
        )
        lo, hi = m_neg.tau.ac_halfline()
        out["q_minus_2"] = {"halfline": [lo, hi], "x0": m_neg.tau.x0}
        ok = ok and abs(m_neg.tau.x0 + r_val) < 1e-3 and lo == -np.inf
        # Laguerre-type exponential-weight scaling with kappa = 2
        kappa = 2
        c0 = (2.0 * 8.0 / (kappa * 3.0)) ** (1.0 / kappa)
        m_kappa = build_model(
            PeriodicParams(1, [1.0], [2.0]), Power(gamma=1.0 / kappa, c=c0 / 4.0),
            horizon=200_000,
        )
        lo, hi = m_kappa.tau.ac_halfline()
        out["kappa2"] = {
            "case": classify(m_kappa.periodic).value,
            "halfline": [lo, hi],
            "increments_vanish": bool(m_kappa.increments_vanish),
        }
        ok = ok and classify(m_kappa.periodic) is Case.IIb and lo == m_kappa.tau.x0
        ok = ok and abs(m_kappa.tau.x0) < 1e-9 and m_kappa.increments_vanish
        # classical Laguerre (lam = 0): density at 1 equals exp(-1) within 1 percent
        m_lag = build_model(
            PeriodicParams(1, [1.0], [2.0]), SqrtProduct(0.0),
            b_family=PowerShift(gamma=1.0, c=2.0, shift=-1.0), horizon=4_000_000,
        )
        mu_l = density(m_lag, 0, 1.0, rel_tol=1e-3)
        table = density_grid(m_lag, 0, np.array([0.9, 1.0, 1.1]), rel_tol=1e-3)
        out["laguerre"] = {
            "mu_at_1": mu_l,
            "target": float(np.exp(-1.0)),
            "rel_err": abs(mu_l * np.e - 1.0),
            "conjectural_flag": table.flags["conjectural"],
            "s": m_lag.s.tolist(),
            "r": m_lag.r.tolist(),
        }
        ok = ok and abs(mu_l * np.e - 1.0) <= 0.01 and table.flags["conjectural"]
        out["ok"] = ok
        return out

    out, dt = _timed(run)
    passed = out.pop("ok") and dt < 120.0
    return CriterionResult(9, "fixture classification and Laguerre density", passed, dt, out)


def criterion_10_truncation_stationarity(seed: int = 777) -> CriterionResult:
    """Truncated Turán determinants constant along the frozen tail to 1e-10 relative.

    The determinant is a difference of polynomial products; when the frozen
    tail is hyperbolic at x those products grow while the determinant stays
    fixed, so the comparison carries a rounding floor proportional to the
    magnitude of the cancelled terms (the determinant itself is exact).
    """

    def run():
        from .recurrence import pairs_at

        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(20):
            n_per = int(rng.integers(1, 3))
            alpha = rng.uniform(0.5, 2.0, size=n_per)
            beta = rng.uniform(-2.0, 2.0, size=n_per)
            p = PeriodicParams(n_per, alpha, beta)
            gamma = float(rng.uniform(0.4, 0.8))
            m = build_model(p, Power(gamma=gamma), horizon=10_000)
            L = int(rng.integers(20, 80))
            x = float(rng.uniform(-2.0, 2.0))
            mt = truncated_params(m, L)
            ns = np.array(
                sorted({L + k * p.N for k in range(1, 6)}
                       | {L + k * p.N + p.N for k in range(1, 6)}),
                dtype=np.int64,
            )
            pairs = pairs_at(mt, [x], ns)
            pos = {int(n): idx for idx, n in enumerate(ns)}
            def det_and_scale(n):
                lo = pairs[pos[n], :, 0]
                hi = pairs[pos[n + p.N], :, 0]
                det = lo[1] * hi[0] - lo[0] * hi[1]
                scale = abs(lo[1] * hi[0]) + abs(lo[0] * hi[1])
                return det, scale
            base, scale1 = det_and_scale(L + p.N)
            for k in range(2, 6):
                val, scale_k = det_and_scale(L + k * p.N)
                floor = 64 * np.finfo(float).eps * max(scale1, scale_k)
                err = max(abs(val - base) - floor, 0.0) / max(abs(base), 1e-300)
                worst = max(worst, err)
        return worst

    worst, dt = _timed(run)
    passed = worst <= 1e-10 and dt < 5.0
    return CriterionResult(
        10, "truncated determinant stationarity", passed, dt, {"worst_relative": worst}
    )


ALL_CRITERIA = [
    criterion_1_algebraic_identities,
    criterion_2_scaled_discriminant,
    criterion_3_frame_trends,
    criterion_4_density_triangle,
    criterion_5_amplitude,
    criterion_6_universality,
    criterion_7_ess_probe,
    criterion_8_perturbation_suite,
    criterion_9_fixtures,
    criterion_10_truncation_stationarity,
]

FAST_SUBSET = {1, 2, 3, 5, 10}


def run_all(fast: bool = False):
    """Run the acceptance criteria and return their results.

    Fast mode runs only the quick subset at full fidelity (nothing is
    loosened); skipped criteria are reported as skipped, not passed.
    """
    _kernels.warm_up()
    results = []
    for fn in ALL_CRITERIA:
        index = int(fn.__name__.split("_")[1])
        if fast and index not in FAST_SUBSET:
            results.append(
                CriterionResult(index, fn.__doc__.split("\n")[0], True, 0.0, skipped=True)
            )
            continue
        results.append(fn())
    return results
