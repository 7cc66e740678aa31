import json

import pytest

from penbm import experiments as E
from penbm.partition import PhaseRegion


def test_registry_layout():
    ids = set(E.REGISTRY)
    assert {f"theorem-1.1/{r.value}" for r in PhaseRegion} <= ids
    assert {"theorem-1.2/R2", "theorem-1.2/R3", "theorem-1.3/L3"} <= ids
    assert {"imhof", "co-imhof", "pitman", "azema-yor", "calibration"} <= ids
    assert set(E.SUITES) >= {"identities", "densities", "partition", "estimator", "calibration",
                             "theorem-1.1", "theorem-1.2", "theorem-1.3"}
    assert all(e.description for e in E.REGISTRY.values())


def test_canonical_points_cover_regions():
    assert set(E.REGION_POINTS) == set(PhaseRegion)


def test_select():
    assert [e.id for e in E.select("theorem-1.1", "L2")] == ["theorem-1.1/L2"]
    assert len(E.select("all")) == len(E.REGISTRY)
    assert [e.id for e in E.select(ids=["pitman"])] == ["pitman"]
    with pytest.raises(KeyError):
        E.select("nope")
    with pytest.raises(KeyError):
        E.select(ids=["nope"])
    with pytest.raises(KeyError):
        E.select("theorem-1.3", "R2")
    with pytest.raises(ValueError):
        E.select("theorem-1.1", "Q9")


def test_streams_are_stable():
    a = E.stream(3, "x").generator().random()
    assert a == E.stream(3, "x").generator().random()
    assert a != E.stream(3, "y").generator().random()


@pytest.mark.parametrize("exp_id", ["updown", "bridge", "pitman", "azema-yor", "density-normalization"])
def test_small_experiments_pass(exp_id):
    reps = E.run_experiments(E.select(ids=[exp_id]), seed=7, scale=0.5)
    assert reps and all(r.passed for r in reps), [r.to_dict() for r in reps if not r.passed]
    for r in reps:
        json.loads(r.to_json())


def test_experiment_determinism():
    a = [r.statistic for r in E.run_experiments(E.select(ids=["updown"]), 3, 0.2)]
    b = [r.statistic for r in E.run_experiments(E.select(ids=["updown"]), 3, 0.2, workers=2)]
    assert a == b


def test_sup_abs_bm_cdf():
    # P(sup|W| < a) tends to 1 for large a and to 0 for small a
    assert E.sup_abs_bm_cdf(6.0) == pytest.approx(1.0, abs=1e-8)
    assert E.sup_abs_bm_cdf(0.2) < 1e-10
    assert E.sup_abs_bm_cdf(2.0) == pytest.approx(0.9089, abs=1e-3)
