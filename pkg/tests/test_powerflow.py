import math

import numpy as np
import pytest

from conftest import DATA_DIR, case_text

from quadcert.certificate import certify_unbounded, compute_terms
from quadcert.errors import DegenerateNoLoadError, ModelError, ParseError
from quadcert.linalg import inf_norm_induced, inf_norm_vec
from quadcert.powerflow import (
    build_model,
    kappa,
    kappa_prime,
    model_summary,
    parse_matpower,
    picard_solve,
    serialize_matpower,
    to_quadratic_system,
    zeta,
)
from quadcert.quadform import make_nominal

MINIMAL_2BUS = """\
function mpc = mini
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	12.5	1	1.1	0.9;
	2	1	0	0	0	0	1	1	0	12.5	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1	100	0;
];
mpc.branch = [
	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;
];
"""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_parse_minimal_case():
    case = parse_matpower(MINIMAL_2BUS)
    assert case.base_mva == 100.0
    assert len(case.buses) == 2 and len(case.branches) == 1 and len(case.gens) == 1
    assert case.buses[0].type == "slack"
    assert case.branches[0].x == 0.1


def test_parse_empty_input():
    with pytest.raises(ParseError, match="baseMVA"):
        parse_matpower("")


def test_parse_ignores_comments_inside_matrix():
    commented = MINIMAL_2BUS.replace(
        "mpc.bus = [",
        "mpc.bus = [\n\t% a comment line inside the matrix",
    )
    assert parse_matpower(commented) == parse_matpower(MINIMAL_2BUS)


def test_parse_ignores_unknown_fields():
    extra = MINIMAL_2BUS + "mpc.gencost = [\n\t2 0 0 3 0.01 40 0;\n];\n"
    assert parse_matpower(extra) == parse_matpower(MINIMAL_2BUS)


def test_parse_reports_line_of_bad_number():
    bad = MINIMAL_2BUS.replace("0.1", "0.1oops")
    with pytest.raises(ParseError, match="malformed number") as err:
        parse_matpower(bad)
    assert err.value.line is not None


MALFORMED_EXPECTATIONS = {
    "empty.m": "baseMVA",
    "missing_bus.m": "missing mpc.bus",
    "missing_gen.m": "missing mpc.gen",
    "bad_number.m": "malformed number",
    "no_slack.m": "slack",
    "two_slack.m": "slack",
    "bad_endpoint.m": "unknown bus",
}


@pytest.mark.parametrize("name", sorted(MALFORMED_EXPECTATIONS))
def test_malformed_corpus(name):
    text = (DATA_DIR / "malformed" / name).read_text()
    with pytest.raises(ParseError, match=MALFORMED_EXPECTATIONS[name]):
        parse_matpower(text)


def test_malformed_corpus_has_seven_files():
    files = sorted(p.name for p in (DATA_DIR / "malformed").glob("*.m"))
    assert len(files) == 7
    assert files == sorted(MALFORMED_EXPECTATIONS)


@pytest.mark.parametrize("name", ["case2.m", "case18.m"])
def test_roundtrip_is_idempotent(name):
    case = parse_matpower(case_text(name))
    text1 = serialize_matpower(case)
    case2 = parse_matpower(text1)
    assert case2 == case
    assert serialize_matpower(case2) == text1


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


def test_build_model_2bus_exact(model2):
    assert model2.n == 1
    assert model2.y[0, 0] == pytest.approx(-10j, abs=1e-12)
    assert model2.y0[0] == pytest.approx(10j, abs=1e-12)
    assert model2.w[0] == pytest.approx(1.0, abs=1e-12)
    assert model2.z[0, 0] == pytest.approx(0.1j, abs=1e-12)
    assert model2.v0 == pytest.approx(1.0)


def test_unity_tap_matches_default():
    tapped = MINIMAL_2BUS.replace(
        "	1	2	0	0.1	0	0	0	0	0	0	1",
        "	1	2	0	0.1	0	0	0	0	1	0	1",
    )
    m_default = build_model(parse_matpower(MINIMAL_2BUS))
    m_tap = build_model(parse_matpower(tapped))
    assert np.allclose(m_default.y, m_tap.y)
    assert np.allclose(m_default.y0, m_tap.y0)


def test_parallel_branches_add():
    doubled = MINIMAL_2BUS.replace(
        "	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;",
        "	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;\n"
        "	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;",
    )
    m1 = build_model(parse_matpower(MINIMAL_2BUS))
    m2 = build_model(parse_matpower(doubled))
    assert np.allclose(m2.y, 2 * m1.y)
    assert np.allclose(m2.y0, 2 * m1.y0)


def test_out_of_service_branch_skipped_and_islanding_detected():
    off = MINIMAL_2BUS.replace(
        "	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;",
        "	1	2	0	0.1	0	0	0	0	0	0	0	-360	360;",
    )
    with pytest.raises(ModelError):
        build_model(parse_matpower(off))


def test_pv_bus_conversion_warns():
    pv = MINIMAL_2BUS.replace(
        "	2	1	0	0	0	0	1	1	0	12.5	1	1.1	0.9;",
        "	2	2	0	0	0	0	1	1	0	12.5	1	1.1	0.9;",
    )
    model = build_model(parse_matpower(pv))
    assert model.warnings and "PV" in model.warnings[0]


def test_nominal_injections_from_case(model18):
    # bus 2 carries Pd = 0.20 MW, Qd = 0.12 MVAr on a 10 MVA base
    i = model18.bus_ids.index(2)
    assert model18.s_nominal[i] == pytest.approx((-0.02 - 0.012j), abs=1e-15)


@pytest.mark.parametrize("fixture", ["model2", "model18"])
def test_model_invariants(fixture, request):
    model = request.getfixturevalue(fixture)
    n = model.n
    assert inf_norm_induced(model.y @ model.z - np.eye(n)) <= 1e-8
    assert inf_norm_vec(model.y @ model.w + model.y0 * model.v0) <= 1e-10
    assert np.min(np.abs(model.w)) > 0


def test_model_summary_keys(model2):
    summary = model_summary(model2)
    assert summary == {
        "n": 1,
        "slack_bus": 1,
        "z_inf_norm": pytest.approx(0.1, abs=1e-12),
        "w_min_abs": pytest.approx(1.0, abs=1e-12),
    }


def test_degenerate_no_load_detected():
    # shunt tuned so the no-load voltage at bus 2 vanishes: w = -Z Y0 V0 = 0
    # requires a singular-ish arrangement; easiest is an enormous shunt that
    # swamps the branch so w ~ 0.
    text = MINIMAL_2BUS.replace(
        "	2	1	0	0	0	0	1	1	0	12.5	1	1.1	0.9;",
        "	2	1	0	0	0	1e16	1	1	0	12.5	1	1.1	0.9;",
    )
    with pytest.raises(DegenerateNoLoadError):
        build_model(parse_matpower(text))


# ---------------------------------------------------------------------------
# zeta / kappa / kappa_prime
# ---------------------------------------------------------------------------


def test_zeta_zero_injection(model2):
    assert np.all(zeta(model2, [0.0]) == 0)


def test_zeta_2bus_scalar(model2):
    p = 0.7
    assert zeta(model2, [p])[0, 0] == pytest.approx(0.1j * p, abs=1e-12)


def test_zeta_linear_in_scale(model18):
    rng = np.random.default_rng(2)
    s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    assert np.allclose(zeta(model18, 2 * s), 2 * zeta(model18, s))


def test_kappa_2bus(model2):
    assert kappa(model2, [0.0]) == 0.0
    assert kappa(model2, [1.0]) == pytest.approx(0.4, abs=1e-12)
    assert 1.0 / kappa(model2, [1.0]) == pytest.approx(2.5, abs=1e-12)


def test_kappa_homogeneous(model18):
    rng = np.random.default_rng(4)
    s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    s /= np.linalg.norm(s)
    assert kappa(model18, 3.0 * s) == pytest.approx(3.0 * kappa(model18, s), rel=1e-12)


def test_kappa_prime_equals_kappa_for_scalar(model2):
    assert kappa_prime(model2, [0.0]) == 0.0
    for p in (0.3, 1.0, 2.0):
        assert kappa_prime(model2, [p]) == pytest.approx(kappa(model2, [p]), rel=1e-14)


@pytest.mark.parametrize("fixture", ["model2", "model18"])
def test_kappa_dominance(fixture, request):
    model = request.getfixturevalue(fixture)
    rng = np.random.default_rng(6)
    for _ in range(1000):
        s = rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n)
        assert kappa(model, s) <= kappa_prime(model, s) + 1e-14


def test_kappa_phase_invariance(model18):
    rng = np.random.default_rng(8)
    s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    base_k = kappa(model18, s)
    base_kp = kappa_prime(model18, s)
    for theta in np.linspace(0.0, 2 * math.pi, 16, endpoint=False):
        rot = s * np.exp(1j * theta)
        assert kappa(model18, rot) == pytest.approx(base_k, rel=1e-12)
        assert kappa_prime(model18, rot) == pytest.approx(base_kp, rel=1e-12)


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------


def test_picard_zero_injection_is_no_load(model2):
    res = picard_solve(model2, [0.0])
    assert res.converged and res.iterations == 1
    assert np.allclose(res.v, model2.w)


def test_picard_inside_certified_region(model2):
    t_cert = 1.0 / kappa(model2, [1.0])
    for direction in (1.0, -1.0j):  # active injection and inductive load
        res = picard_solve(model2, [0.99 * t_cert * direction])
        assert res.converged
        assert np.all(np.abs(res.v) > 0)
        assert res.mismatch < 1e-8


def test_picard_beyond_true_loadability(model2):
    # inductive direction: no solution beyond 2.5 pu (discriminant < 0)
    res = picard_solve(model2, [-1.2e0 * 2.5 * 1j])
    assert not res.converged
    assert res.reason


def test_picard_mismatch_scales_with_tolerance(model18):
    rng = np.random.default_rng(10)
    s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    s *= 0.5 / np.linalg.norm(s)
    res = picard_solve(model18, s, tol=1e-12)
    assert res.converged
    scale = (1.0 + inf_norm_induced(model18.y)) * max(1.0, inf_norm_vec(res.v)) ** 2
    assert res.mismatch <= 1e-12 * scale * 10


@pytest.mark.parametrize("fixture", ["model2", "model18"])
def test_picard_soundness_per_case(fixture, request):
    from quadcert.scan import random_directions

    model = request.getfixturevalue(fixture)
    for d in random_directions(model, 200, 123):
        t_cert = 1.0 / kappa(model, d.s_hat)
        res = picard_solve(model, 0.99 * t_cert * d.s_hat)
        assert res.converged


def test_picard_rejects_bad_tolerance(model2):
    with pytest.raises(ValueError):
        picard_solve(model2, [0.0], tol=0.0)


# ---------------------------------------------------------------------------
# Bridge to the generic quadratic form
# ---------------------------------------------------------------------------


def test_bridge_nominal_is_flat(model18):
    sys_, x_star, u_star = to_quadratic_system(model18)
    nom = make_nominal(sys_, x_star, u_star)
    assert np.allclose(nom.m_star, np.eye(model18.n), atol=1e-12)
    assert np.allclose(nom.n_star, 0.0, atol=1e-12)


def test_bridge_terms_match_zeta(model18):
    sys_, x_star, u_star = to_quadratic_system(model18)
    nom = make_nominal(sys_, x_star, u_star)
    rng = np.random.default_rng(12)
    for _ in range(5):
        s = 0.1 * (rng.standard_normal(17) + 1j * rng.standard_normal(17))
        terms = compute_terms(nom, sys_, np.conj(s))
        zt = zeta(model18, s)
        assert terms.e == pytest.approx(inf_norm_vec(zt.sum(axis=1)), rel=1e-12)
        assert terms.h == pytest.approx(inf_norm_induced(zt), rel=1e-12)


def test_bridge_certificate_is_conservative(model18):
    # the generic certificate never certifies farther than kappa does
    sys_, x_star, u_star = to_quadratic_system(model18)
    nom = make_nominal(sys_, x_star, u_star)
    rng = np.random.default_rng(14)
    s_hat = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    s_hat /= np.linalg.norm(s_hat)
    t_cert = 1.0 / kappa(model18, s_hat)
    for frac in (0.05, 0.2):
        s = frac * t_cert * s_hat
        cert = certify_unbounded(nom, sys_, np.conj(s))
        assert cert.certified
        assert cert.lhs_value >= kappa(model18, s) - 1e-12
