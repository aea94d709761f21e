"""Acceptance gate: one test per release criterion, each printing its verdict.

The critical-consensus criterion is expected to fail: at the critical
attention value the origin is only algebraically attracting, so the
strict 1e-3 norm threshold is unreachable at T = 200 (see README).  The
check is kept faithful rather than loosened.
"""
import pytest

from odyn import acceptance


def _run(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()


def test_acceptance_01_toy_figure():
    _run(acceptance.criterion_toy_figure)


def test_acceptance_02_leading_eigenvalue():
    _run(acceptance.criterion_leading_eigenvalue)


def test_acceptance_03_bifurcation_structure():
    _run(acceptance.criterion_bifurcation_structure)


def test_acceptance_04_critical_consensus():
    _run(acceptance.criterion_critical_consensus)


def test_acceptance_05_dissensus_input():
    _run(acceptance.criterion_dissensus_input)


def test_acceptance_06_energy_stability():
    _run(acceptance.criterion_energy_stability)


def test_acceptance_07_gradient_suite():
    _run(acceptance.criterion_gradient_suite)


def test_acceptance_08_closed_form():
    _run(acceptance.criterion_closed_form)


def test_acceptance_09_scrambling_contraction():
    _run(acceptance.criterion_scrambling_contraction)


def test_acceptance_10_saturation_validity():
    _run(acceptance.criterion_saturation_validity)


def test_acceptance_11_rhs_equivalence():
    _run(acceptance.criterion_rhs_equivalence)


def test_acceptance_12_training_smoke():
    _run(acceptance.criterion_training_smoke)
