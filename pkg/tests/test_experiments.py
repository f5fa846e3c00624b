import pytest

from cachestream.config import ConfigError, SimConfig
from cachestream.experiments import SweepSpec, feasibility, feasibility_report, run_sweep, sweep_csv
from cachestream.policy import ALL_KINDS, PolicyKind


def test_caching_case_rows(tmp_path):
    out = tmp_path / "s.csv"
    spec = SweepSpec("caching_case", [1, 2, 3], SimConfig(K=2), ALL_KINDS, 1, out, 0)
    points = run_sweep(spec)
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 3 * len(ALL_KINDS)
    keys = [tuple(l.split(",")[1:3]) for l in lines[1:]]
    assert len(set(keys)) == len(keys)
    assert out.read_text() == sweep_csv(spec, points)


@pytest.mark.parametrize("axis, values", [("bogus", [1]), ("caching_case", [4]), ("V", []),
                                          ("V", [0.1, 0.1])])
def test_bad_specs(axis, values):
    with pytest.raises(ConfigError):
        SweepSpec(axis, values)


def test_sweep_deterministic():
    spec = SweepSpec("V", [0.01, 0.1], SimConfig(K=3), [PolicyKind.PROPOSED], 2, None, 11)
    assert sweep_csv(spec, run_sweep(spec)) == sweep_csv(spec, run_sweep(spec))


def test_feasibility_defaults():
    f = feasibility(SimConfig())
    assert abs(f.lambda_min - 0.1113) <= 1e-3
    assert f.rho is not None and f.R_N > 0


def test_low_type_intensity_flagged():
    cfg = SimConfig(lam=0.6)
    f = feasibility(cfg)
    assert f.type_intensity[2] == pytest.approx(0.0857, abs=1e-4)
    assert f.below_min == (False, False, True)
    assert "type 3: lambda*p = 0.0857  BELOW lambda_min" in feasibility_report(cfg)


def test_nothing_flagged_as_eta_vanishes():
    f = feasibility(SimConfig(lam=0.6, eta_min=1e-12))
    assert f.lambda_min < 1e-10 and not any(f.below_min)
