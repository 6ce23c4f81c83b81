import math

import pytest

import resolvent_lab as rl


def test_builtins_listed():
    names = rl.builtin_names()
    for n in ["zero", "nn1", "nn2", "nn3", "nn2d_sqrt", "nn2d_squared", "ce_morse_d3"]:
        assert n in names


def test_nn3_eval_and_gradient():
    m = rl.builtin_model("nn3")
    assert m.dim == 3
    assert m.eval([0.25, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-14)
    g = m.gradient([0.25, 0.0, 0.0])
    assert g[0] == pytest.approx(2 * math.pi, rel=1e-14)
    assert g[1] == pytest.approx(0.0, abs=1e-14)


def test_dsl_roundtrip():
    m = rl.builtin_model("ce_morse_d3")
    back = rl.parse_model(m.to_dsl(), "copy")
    x = [0.1, 0.37, -0.2]
    assert back.eval(x) == pytest.approx(m.eval(x), rel=1e-14)


def test_zero_model_integral_is_exact():
    out = rl.crossing_integral("zero", [0, 0, 0], 1.0)
    assert out["schema_version"] == rl.schema_version
    assert out["estimate"]["value"] == pytest.approx(1.0, rel=1e-13)


def test_gtilde_golden():
    g = rl.gtilde(rl.builtin_model("nn3"), [0.25, 0, 0], [0, 1, 0], 3)
    assert g[2] == pytest.approx(math.pi, rel=1e-10)
    assert g[3] == pytest.approx(0.0, abs=1e-10)


def test_classify_ce():
    out = rl.classify("ce_morse_d3", fit_f_omega=False)
    assert out["verdict"] == "DoesNotSuppress"
    assert len(out["certificates"]) >= 1
    assert out["critical_points"]["count"] == 8


def test_trace_stays_on_level():
    out = rl.trace("nn3", [0.25, 0, 0], [0, 1, 0], points=11)
    for p in out["curve"]["points"]:
        assert p["omega"] == pytest.approx(1.0, abs=1e-8)


def test_select_nu_order():
    assert rl.select_nu(3, 2.0, 0.5, 0.5, 0.2) == 1
    # nu = 1 and nu = 2 both cancel here
    assert rl.select_nu(3, -0.5, -3.5, 0.5, 0.2) == 0


def test_errors_raise():
    with pytest.raises(rl.Error):
        rl.builtin_model("nope")
    with pytest.raises(rl.Error):
        rl.crossing_integral("nn3", [1, 1], 0.1)


def test_deterministic_json():
    a = rl.f_omega("nn3", 0.25, samples=20000, workers=1, record_time=False)
    b = rl.f_omega("nn3", 0.25, samples=20000, workers=2, record_time=False)
    assert a == b
