import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundreg import reference
from boundreg.experiments import (
    McCell,
    McConfig,
    UndefinedCorrelationError,
    bandwidths,
    correlation_report,
    correlations,
    reproduce_table,
    run_mc,
)


def kendall_tau_b(x, y):
    """Quadratic pair count with tie corrections."""
    n = len(x)
    conc = disc = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = np.sign(x[i] - x[j]), np.sign(y[i] - y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif dx == dy:
                conc += 1
            else:
                disc += 1
    return (conc - disc) / math.sqrt((conc + disc + tx) * (conc + disc + ty))


def ranks(v):
    # average ranks for ties
    order = np.argsort(v, kind="stable")
    r = np.empty(len(v))
    sv = np.asarray(v)[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        r[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return r


def test_bandwidths():
    b, a = bandwidths(125, 2)
    assert b == pytest.approx(0.2) and a == pytest.approx(0.1)
    assert bandwidths(125, 20)[1] == pytest.approx(0.01)


def test_perfect_correlations():
    x = np.linspace(0, 1, 20)
    assert correlations(x, 2 * x + 1) == pytest.approx((1.0, 1.0, 1.0))
    assert correlations(x, -x) == pytest.approx((-1.0, -1.0, -1.0))


def test_constant_input_is_undefined():
    with pytest.raises(UndefinedCorrelationError):
        correlations([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        correlations([0.1], [1.0])


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(-3, 3)), min_size=3, max_size=25))
def test_coefficients_match_oracles(pairs):
    x = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs], dtype=float)
    if np.all(x == x[0]) or np.all(y == y[0]):
        with pytest.raises(UndefinedCorrelationError):
            correlations(x, y)
        return
    p, k, s = correlations(x, y)
    assert p == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert k == pytest.approx(kendall_tau_b(x, y), abs=1e-12)
    assert s == pytest.approx(np.corrcoef(ranks(x), ranks(y))[0, 1], abs=1e-12)


@given(st.lists(st.floats(-0.5, 2.5), min_size=1, max_size=200), st.floats(-0.5, 2.5))
def test_bias_variance_identity(est, theta0):
    cell = McCell(1, 100, "b/2", "TCM", theta0, np.array(est), 0)
    var = float(np.var(est))
    assert cell.mise == pytest.approx((cell.mean - theta0) ** 2 + var, rel=1e-9, abs=1e-15)
    assert cell.mise >= (cell.mean - theta0) ** 2 - 1e-12


def test_failure_flag():
    assert McCell(1, 50, "b/2", "TKS", 0.5, np.zeros(95), 5).valid
    assert not McCell(1, 50, "b/2", "TKS", 0.5, np.zeros(94), 6).valid
    empty = McCell(1, 50, "b/2", "TKS", 0.5, np.zeros(0), 3)
    assert not empty.valid and math.isnan(empty.mean)


def test_single_replication():
    s = run_mc(McConfig(model=1, n_values=(40,), theta0_values=(0.5,), reps=1, criteria=("TCM",)))
    (cell,) = s.cells
    assert cell.reps_used == 1 and cell.failures == 0
    assert cell.mean == cell.median == cell.estimates[0]
    assert cell.mise == (cell.estimates[0] - 0.5) ** 2


def test_run_mc_is_thread_independent():
    cfg = McConfig(model=2, n_values=(30, 40), theta0_values=(0.0, 1.5), reps=6,
                   criteria=("TKS", "TCMKS"))
    serial = run_mc(cfg, threads=1).to_csv()
    assert run_mc(cfg, threads=3).to_csv() == serial
    lines = serial.splitlines()
    assert lines[0] == "model,n,a_rule,criterion,theta0,mean,median,mise,failures"
    assert len(lines) == 1 + 2 * 2 * 2


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(reps=0)
    with pytest.raises(ValueError):
        McConfig(criteria=())
    with pytest.raises(ValueError):
        McConfig(criteria=("TXX",))


def test_correlation_report_reduces_dependence():
    for model in (3, 4):
        rep = correlation_report(model, reps=20)
        orig = abs(rep.rows["original"][0])
        for crit in reference.CRITERIA:
            assert abs(rep.rows[crit][0]) < orig
        assert rep.counts["original"] == 20
        assert rep.to_csv().splitlines()[0] == "row,pearson,kendall,spearman,reps_used"


def test_correlation_report_residual_mode():
    rep = correlation_report(4, reps=5, errors="residuals")
    assert set(rep.rows) == {"original", "true", *reference.CRITERIA}
    with pytest.raises(ValueError):
        correlation_report(4, reps=1, errors="other")


def test_table_without_replications():
    rep = reproduce_table("1", 0)
    assert len(rep.rows) == 2 * 5 * 4 * 3
    assert all(r[5] is None and r[6] is None for r in rep.rows)
    assert "N/A" in rep.to_text()
    assert rep.rows[0][:5] == [50, 0.0, "TKS", "mean", reference.TABLES["1"][50, 0.0, "TKS"][0]]
    cor = reproduce_table("cor2", 0)
    assert len(cor.rows) == 6 * 3 and "NA" in cor.to_csv()


def test_unknown_table():
    with pytest.raises(ValueError):
        reproduce_table("9", 0)
    with pytest.raises(ValueError):
        reproduce_table("1", -1)


def test_reference_values_spot_check():
    # three cells read directly off the published tables
    assert reference.TABLES["1"][100, 0.5, "TCM"] == (0.461, 0.451, 0.026)
    assert reference.TABLES["1"][100, 2.0, "TKS"][0] == pytest.approx(1.96, abs=0.005)
    assert reference.COR_TABLES["cor2"][1]["TCMKS"][0] == 0.003
    assert reference.COR_TABLES["cor2"][1]["original"][0] == -0.273
