"""Acceptance gate: every exit criterion at its frozen tolerance.

Each test runs one criterion from the shared acceptance module (the same
functions the CLI report command executes) and prints a single PASS/FAIL
line with the measured quantities.
"""
from parajacobi import acceptance


def _report(result):
    status = "PASS" if result.passed else "FAIL"
    print(f"\n{status}  criterion {result.index}: {result.name} "
          f"({result.seconds:.1f} s)  {result.details}")
    assert result.passed, f"criterion {result.index} failed: {result.details}"


def test_criterion_01_algebraic_identities():
    _report(acceptance.criterion_1_algebraic_identities())


def test_criterion_02_scaled_discriminant():
    _report(acceptance.criterion_2_scaled_discriminant())


def test_criterion_03_frame_trends():
    _report(acceptance.criterion_3_frame_trends())


def test_criterion_04_density_triangle():
    _report(acceptance.criterion_4_density_triangle())


def test_criterion_05_amplitude():
    _report(acceptance.criterion_5_amplitude())


def test_criterion_06_universality():
    _report(acceptance.criterion_6_universality())


def test_criterion_07_ess_probe():
    _report(acceptance.criterion_7_ess_probe())


def test_criterion_08_perturbation_suite():
    _report(acceptance.criterion_8_perturbation_suite())


def test_criterion_09_fixtures():
    _report(acceptance.criterion_9_fixtures())


def test_criterion_10_truncation_stationarity():
    _report(acceptance.criterion_10_truncation_stationarity())
