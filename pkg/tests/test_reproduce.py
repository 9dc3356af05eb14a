import numpy as np
import pytest

from care.reproduce import FIELDS, run_replicate, run_study, summarize

SMALL = {"n_grid": 8, "n_folds": 3}


def test_study_shape_and_summary():
    res = run_study("band", 10, 40, 3, seed=5, **SMALL)
    assert len(res.reports) == 3 and res.model == "band"
    table = summarize(res)
    for method in ("care", "oracle"):
        for name in FIELDS:
            cell = table[method][name]
            v = res.values(method, name) * (100 if name in ("tpr", "fpr") else 1)
            assert cell["mean"] == pytest.approx(v.mean())
            assert cell["sd"] == pytest.approx(v.std(ddof=1))
            assert cell["se"] == pytest.approx(v.std(ddof=1) / np.sqrt(3))


def test_study_independent_of_threads():
    a = run_study("random", 10, 40, 3, seed=1, **SMALL)
    b = run_study("random", 10, 40, 3, seed=1, threads=2, **SMALL)
    for ra, rb in zip(a.reports, b.reports):
        for m in ra:
            assert ra[m] == rb[m]


def test_replicates_are_order_free():
    full = run_study("band", 10, 40, 3, seed=2, **SMALL)
    rng = np.random.SeedSequence(2).spawn(3)[2]
    alone = run_replicate("band", 10, 40, np.random.default_rng(rng), **SMALL)
    assert alone["care"] == full.reports[2]["care"]


def test_count_replicate():
    out = run_replicate("band", 10, 40, np.random.default_rng(0), methods=("care", "vc_care"), **SMALL)
    assert set(out) == {"care", "vc_care"}
    assert 0 <= out["vc_care"].zero_fraction < 1
    assert np.isfinite(out["vc_care"].spectral_loss)
