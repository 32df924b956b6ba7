import math

import pytest

from abflow import CheckReport, FlowParams, format_report, run_suite, suite_passed

EXPECTED_CHECKS = [
    "cauchy_riemann",
    "circulation_contour_independence",
    "curl_free",
    "derivative_velocity_identity",
    "divergence_free",
    "far_field_decay",
    "gradient_orthogonality",
    "hamiltonian_equals_stream",
    "hamiltonian_gradient_consistency",
    "jacobian_finite_difference",
    "mirror_symmetry",
    "potential_superposition",
    "saddle_eigenvalues",
    "stagnation_zero_velocity",
    "stream_function_harmonic",
    "velocity_potential_harmonic",
]


def test_default_suite_passes():
    reports = run_suite(FlowParams(), seed=42)
    assert suite_passed(reports)
    assert all(rep.verdict == "pass" for rep in reports)


def test_check_names_fixed_and_sorted():
    reports = run_suite(FlowParams(), seed=42)
    assert [rep.name for rep in reports] == EXPECTED_CHECKS


def test_deterministic_given_seed():
    a = run_suite(FlowParams(), seed=7)
    b = run_suite(FlowParams(), seed=7)
    assert a == b


def test_different_seed_changes_residuals():
    a = run_suite(FlowParams(), seed=1)
    b = run_suite(FlowParams(), seed=2)
    assert any(
        ra.residual != rb.residual
        for ra, rb in zip(a, b)
        if not math.isnan(ra.residual) and ra.residual != 0.0
    )


def test_finite_difference_checks_report_second_order():
    reports = {rep.name: rep for rep in run_suite(FlowParams(), seed=42)}
    for name in (
        "divergence_free",
        "curl_free",
        "cauchy_riemann",
        "stream_function_harmonic",
        "velocity_potential_harmonic",
        "hamiltonian_gradient_consistency",
    ):
        assert reports[name].order == pytest.approx(2.0, abs=0.2)


def test_delta_zero_marks_saddle_checks_not_applicable():
    reports = {rep.name: rep for rep in run_suite(FlowParams(delta=0.0), seed=42)}
    assert reports["stagnation_zero_velocity"].verdict == "not_applicable"
    assert reports["saddle_eigenvalues"].verdict == "not_applicable"
    assert suite_passed(reports.values())


def test_pure_rotation_passes():
    assert suite_passed(run_suite(FlowParams(k=0.0, delta=0.5), seed=42))


@pytest.mark.parametrize("kwargs", [
    dict(hbar=10.0, mass=0.1, k=3.0, delta=0.4),
    dict(hbar=0.2, mass=5.0, k=0.3, delta=0.05),
    dict(delta=2.0, allow_any_delta=True),
])
def test_suite_is_unit_invariant(kwargs):
    # residual gates are in field-coefficient units, so rescaled parameters
    # must not trip them
    assert suite_passed(run_suite(FlowParams(**kwargs), seed=9))


def test_tampered_field_is_detected():
    # a shear added to u breaks the divergence, hence both Cauchy-Riemann
    # equations; the curl identity is untouched by an x-linear term in u
    tamper = lambda x, y: (1e-4 * x, 0.0)
    reports = {rep.name: rep for rep in run_suite(FlowParams(), seed=42, tamper=tamper)}
    assert reports["divergence_free"].verdict == "fail"
    assert reports["cauchy_riemann"].verdict == "fail"
    assert reports["curl_free"].verdict == "pass"
    assert not suite_passed(reports.values())


def test_tampered_curl_is_detected():
    tamper = lambda x, y: (0.0, 1e-4 * x)
    reports = {rep.name: rep for rep in run_suite(FlowParams(), seed=42, tamper=tamper)}
    assert reports["curl_free"].verdict == "fail"


def test_report_format():
    reports = run_suite(FlowParams(), seed=42)
    text = format_report(reports)
    lines = text.splitlines()
    for rep in reports:
        assert any(line.startswith(rep.name) and rep.verdict in line for line in lines)
    assert lines[-1] == "suite: PASS"
    assert any("hbar=1" in line for line in lines)


def test_report_dataclass_verdict_rule():
    rep = CheckReport("demo", "p", 1e-9, 1e-6, 2.0, "pass")
    assert rep.residual <= rep.tolerance
