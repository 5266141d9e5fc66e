import math

import pytest
from hypothesis import given, settings, strategies as st

from gapsolve import (DomainError, PhysicalParams, SolverConfig, default_u0,
                      denormalize, normalize, validate)
from gapsolve.params import load_config, parse_config_text


def test_default_params_are_admissible():
    assert validate(PhysicalParams()).ok


def test_validate_passes_admissible_box():
    p = PhysicalParams(epsilon=1e-3, debye=1.0, u0=0.2, u1=0.25, u2=0.35)
    report = validate(p)
    assert report.ok
    assert report.violations == ()


def test_validate_flags_epsilon_ordering():
    report = validate(PhysicalParams(epsilon=1.5, debye=1.0))
    assert not report.ok
    assert any("epsilon < debye" in v for v in report.violations)


def test_validate_flags_coupling_ordering():
    report = validate(PhysicalParams(u0=0.3, u1=0.25, u2=0.35))
    assert any("u0 < u1" in v for v in report.violations)


def test_validate_flags_gap_existence_boundary():
    # epsilon = debye * e^(-1/u1) puts the gap formula exactly at zero;
    # the strict inequality must flag it.
    u1 = 0.25
    eps = math.exp(-1.0 / u1)
    p = PhysicalParams(epsilon=eps, debye=1.0, u0=0.2, u1=u1, u2=0.35)
    report = validate(p)
    assert any("e^(1/u1)" in v for v in report.violations)


def test_validate_warns_on_large_epsilon():
    p = PhysicalParams(epsilon=0.2, debye=1.0, u0=2.0, u1=2.1, u2=2.2)
    report = validate(p)
    assert report.ok
    assert report.warnings


def test_normalize_identity_when_already_normalized():
    p = PhysicalParams(epsilon=0.001, debye=1.0, u0=0.25, u1=0.3, u2=0.35)
    assert normalize(p) == p


def test_normalize_rescales_by_debye():
    p = PhysicalParams(epsilon=0.3, debye=30.0, u0=0.2, u1=0.25, u2=0.35)
    n = normalize(p)
    assert n.debye == 1.0
    assert n.epsilon == pytest.approx(0.01, rel=1e-15)
    assert (n.u0, n.u1, n.u2) == (p.u0, p.u1, p.u2)


def test_normalize_idempotent_exactly():
    p = PhysicalParams(epsilon=0.7, debye=13.7, u0=0.2, u1=0.25, u2=0.35)
    once = normalize(p)
    assert normalize(once) == once


def test_normalize_rejects_bad_params():
    with pytest.raises(DomainError, match="u1 < u2"):
        normalize(PhysicalParams(u0=0.2, u1=0.35, u2=0.25))


@given(debye=st.floats(min_value=1e-3, max_value=1e3),
       eps_frac=st.floats(min_value=1e-5, max_value=5e-2))
@settings(max_examples=200, deadline=None)
def test_normalize_denormalize_round_trip(debye, eps_frac):
    p = PhysicalParams(epsilon=eps_frac * debye, debye=debye, u0=2.0, u1=2.1, u2=2.2)
    n = normalize(p)
    back = denormalize(n, debye)
    assert back.debye == pytest.approx(p.debye, rel=1e-15)
    assert back.epsilon == pytest.approx(p.epsilon, rel=1e-12)


def test_default_u0_rule():
    assert default_u0(0.3) == 0.15


def test_solver_config_validates():
    with pytest.raises(DomainError, match="damping"):
        SolverConfig(damping=0.0)
    with pytest.raises(DomainError, match="fp_max_iter"):
        SolverConfig(fp_max_iter=0)
    with pytest.raises(DomainError, match="root_tol"):
        SolverConfig(root_tol=-1e-12)


def test_config_text_round_trip(tmp_path):
    text = """
    # comment line
    epsilon = 0.002
    debye = 2.0
    u1 = 0.27
    root_tol = 1e-11
    fp_max_iter = 500
    """
    entries = parse_config_text(text)
    assert entries == {"epsilon": 0.002, "debye": 2.0, "u1": 0.27,
                       "root_tol": 1e-11, "fp_max_iter": 500}
    path = tmp_path / "box.cfg"
    path.write_text(text)
    pvals, svals = load_config(path)
    assert pvals == {"epsilon": 0.002, "debye": 2.0, "u1": 0.27}
    assert svals == {"root_tol": 1e-11, "fp_max_iter": 500}


def test_config_rejects_unknown_key():
    with pytest.raises(DomainError, match="unknown key 'cutoff'"):
        parse_config_text("cutoff = 1")


def test_config_rejects_garbage_value():
    with pytest.raises(DomainError, match="cannot parse"):
        parse_config_text("epsilon = tiny")
