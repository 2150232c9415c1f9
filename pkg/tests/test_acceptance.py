"""Acceptance criteria 1-10, each at its stated tolerance."""

import math
import subprocess
import sys
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from qeraser import catalog, nocomm, temporal
from qeraser import experiments as ex
from qeraser import histories as hs
from qeraser.cli import time_ordering_sweep
from qeraser.hilbert import DensityOperator, Operator, StateVector, SystemLayout


# 1. trade-off exactness

@pytest.mark.criterion(1)
def test_tradeoff_coefficients_exact():
    res = ex.complementarity_tradeoff()
    assert abs(res.initial_interference_coeff - float(Fraction(4, 9))) <= 1e-12
    assert abs(res.final_interference_coeff - float(Fraction(12, 37))) <= 1e-12


@pytest.mark.criterion(1)
def test_tradeoff_unitary_maps_initial_to_final():
    res = ex.complementarity_tradeoff()
    assert res.unitary_fidelity >= 1 - 1e-10


# 2. eraser visibilities

@pytest.mark.criterion(2)
def test_eraser_unmarked_and_marked():
    assert abs(ex.run_double_slit_eraser(None).scalars["visibility"] - 1) <= 0.01
    assert ex.run_double_slit_eraser(math.pi / 2).scalars["visibility"] <= 0.01


@pytest.mark.criterion(2)
def test_eraser_polarizer():
    s = ex.run_double_slit_eraser(math.pi / 2, "polarizer", math.pi / 4).scalars
    assert abs(s["visibility"] - 1) <= 0.01
    assert abs(s["survival"] - 0.5) <= 1e-10


@pytest.mark.criterion(2)
@pytest.mark.parametrize("eraser", ["hwp_upper", "hwp_lower", "qwp_pair"])
def test_eraser_unitary(eraser):
    s = ex.run_double_slit_eraser(math.pi / 2, eraser).scalars
    assert abs(s["visibility"] - 1) <= 0.01
    assert s["survival"] == 1.0


@pytest.mark.criterion(2)
@pytest.mark.parametrize("qwp,filt,vis,surv", [(False, False, 1, 1), (True, False, 0, 1), (True, True, 1, 0.5)])
def test_herzog(qwp, filt, vis, surv):
    s = ex.run_herzog(qwp, filt).scalars
    assert abs(s["visibility"] - vis) <= 0.01
    assert abs(s["survival"] - surv) <= 1e-10


# 3. continuous wave/particle transition

@pytest.mark.criterion(3)
@pytest.mark.parametrize("deg", [0, 15, 30, 45, 60, 75, 90])
def test_visibility_tracks_cosine(deg):
    theta = math.radians(deg)
    v = ex.run_double_slit_eraser(theta).scalars["visibility"]
    assert abs(v - abs(math.cos(theta))) <= 0.01


@pytest.mark.criterion(3)
def test_partial_marker_45():
    assert ex.run_double_slit_eraser(math.pi / 4).scalars["visibility"] == pytest.approx(0.707, abs=0.01)


# 4. no-communication

@pytest.mark.criterion(4)
def test_no_communication_sweep():
    res = nocomm.sweep(1000, seed=0)
    assert res.cases >= 1000
    assert res.max_deviation <= 1e-10


@pytest.mark.criterion(4)
def test_no_communication_negative_control():
    layout = SystemLayout([("A", 2), ("B", 2)])
    bell = StateVector(layout, np.array([1, 0, 0, 1]) / np.sqrt(2))
    dev = nocomm.negative_control(bell, Operator(layout, nocomm.cnot(control=1)), ["A"])
    assert dev > 0.1


# 5. free-will no-signalling

@pytest.mark.criterion(5)
def test_free_will_sums_equal():
    push = ex.run_free_will("push").patterns["sum"].intensity
    not_push = ex.run_free_will("not_push").patterns["sum"].intensity
    assert np.max(np.abs(push - not_push)) <= 1e-10


@pytest.mark.criterion(5)
def test_free_will_conditionals_anti_phase():
    rep = ex.run_free_will("not_push")
    d1 = rep.patterns["D1"].intensity
    d2 = rep.patterns["D2"].intensity
    assert np.corrcoef(d1 - d1.mean(), d2 - d2.mean())[0, 1] < 0
    assert rep.scalars["cross_correlation"] < 0


# 6. entanglement swapping

SHOTS = 10_000


@pytest.mark.criterion(6)
def test_swapping_bell_branch():
    s = ex.run_entanglement_swapping("bell", seed=2013, shots=SHOTS).scalars
    for k in ex.bell_basis():
        # the x correlation is +1 or -1 according to the Bell state found
        assert abs(abs(s[f"corr_x_{k}"]) - 1) <= 1e-12
        for b in "zx":
            assert abs(s[f"sampled_corr_{b}_{k}"] - s[f"corr_{b}_{k}"]) <= 3 / math.sqrt(SHOTS)


@pytest.mark.criterion(6)
def test_swapping_separable_branch():
    s = ex.run_entanglement_swapping("separable", seed=2013, shots=SHOTS).scalars
    for k in ex.separable_basis():
        assert abs(s[f"corr_x_{k}"]) <= 1e-12
        for b in "zx":
            assert abs(s[f"sampled_corr_{b}_{k}"] - s[f"corr_{b}_{k}"]) <= 3 / math.sqrt(SHOTS)


@pytest.mark.criterion(6)
def test_swapping_alice_marginal_independent_of_victor():
    bell = ex.run_entanglement_swapping("bell", seed=1, shots=100).scalars
    sep = ex.run_entanglement_swapping("separable", seed=1, shots=100).scalars
    for b in "zx":
        for o in "01":
            assert abs(bell[f"alice_{b}_{o}"] - sep[f"alice_{b}_{o}"]) <= 1e-12


# 7. temporal closed forms

@pytest.mark.criterion(7)
@pytest.mark.parametrize("lam,t,t0", [(1.0, 1.0, 0.5), (0.3, 4.0, 2.5), (2.5, 0.2, 0.1)])
def test_decay_forms(lam, t, t0):
    s = temporal.decay_state(lam)
    assert temporal.detection_density(s, t) == pytest.approx(lam * math.exp(-lam * t), rel=1e-6)
    assert temporal.conditional_density(s, t, t0) == pytest.approx(lam * math.exp(-lam * (t - t0)), rel=1e-6)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("t,t0", [(0.3, 0.1), (0.8, 0.5), (1.4, 1.2)])
def test_cat_forms(t, t0):
    s = temporal.cat_state()
    assert temporal.detection_density(s, t) == pytest.approx(0.5 * math.sin(2 * t), rel=1e-6)
    assert temporal.conditional_density(s, t, t0) == pytest.approx(
        math.sin(2 * t) / (1 + math.cos(2 * t0)), rel=1e-6)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("period,t,t0", [(2.0, 1.2, 0.4), (1.0, 0.9, 0.1), (5.0, 4.9, 4.0)])
def test_passive_zeno_forms(period, t, t0):
    s = temporal.passive_zeno_state(period)
    assert temporal.detection_density(s, t) == pytest.approx(1 / (2 * period), rel=1e-6)
    assert temporal.conditional_density(s, t, t0) == pytest.approx(1 / (2 * period - t0), rel=1e-6)


@pytest.mark.criterion(7)
def test_cat_near_end_asymptotic():
    # the asymptotic is the second-order term separating the first-order value from the exact one
    s = temporal.cat_state()
    dt, t0 = 1e-3, math.pi / 2 - 1e-2
    gap = temporal.next_interval_probability(s, t0, dt) - temporal.next_interval_exact(s, t0, dt)
    asym = temporal.cat_near_end_asymptotic(t0, dt)
    assert abs(gap / asym - 1) <= 0.05


# 8. brainwash round trips and time ordering

@pytest.mark.criterion(8)
@pytest.mark.parametrize("variant", ex.BRAINWASH_VARIANTS)
def test_brainwash(variant):
    assert abs(ex.brainwash_roundtrip(variant).scalars["fidelity"] - 1) <= 1e-12


@pytest.mark.criterion(8)
def test_fixed_matrices_unitary():
    mats = dict(catalog.all_fixed())
    p1, p2 = catalog.tradeoff_frames()
    mats.update(P1=p1, P2=p2, cat_opening=catalog.cat_opening(0.37), decay=catalog.decay(1.3, 0.37))
    for name, m in mats.items():
        assert Operator(SystemLayout([("q", m.shape[0])]), m).is_unitary(1e-12), name


@pytest.mark.criterion(8)
def test_time_ordering():
    assert time_ordering_sweep(20, seed=5) <= 1e-12


# 9. histories

@pytest.mark.criterion(9)
def test_unmarked_inconsistent():
    rep = hs.two_slit_report(False)
    assert rep.max_off_diagonal > 0.1
    assert not rep.consistent


@pytest.mark.criterion(9)
def test_marked_consistent():
    rep = hs.two_slit_report(True, tol=1e-12)
    assert rep.max_off_diagonal <= 1e-12
    assert rep.consistent
    pu, pd = hs.path_marginals(rep)
    assert abs(pu - 0.5) <= 1e-10 and abs(pd - 0.5) <= 1e-10


@pytest.mark.criterion(9)
def test_exhaustive_families_sum_to_one():
    reports = [hs.two_slit_report(False), hs.two_slit_report(True)]
    q = SystemLayout([("q", 2)])
    z = [Operator(q, np.diag([1.0, 0.0])), Operator(q, np.diag([0.0, 1.0]))]
    x = [Operator(q, np.full((2, 2), 0.5)), Operator(q, np.array([[0.5, -0.5], [-0.5, 0.5]]))]
    fam = [hs.History(((0.0, a), (1.0, b))) for a in z for b in x]
    for rho in (np.diag([1.0, 0.0]), np.full((2, 2), 0.5), np.eye(2) / 2):
        reports.append(hs.consistency_matrix(fam, DensityOperator(q, rho)))
    for rep in reports:
        assert abs(rep.probabilities.sum() - 1) <= 1e-10


# 10. determinism

_DRIVER = """
import sys
from importlib import resources
from pathlib import Path
from contextlib import redirect_stdout
from qeraser import cli
out = Path(sys.argv[1])
out.mkdir(parents=True, exist_ok=True)
for p in sorted(resources.files("qeraser").joinpath("scenarios").iterdir()):
    if not p.name.endswith(".scn"):
        continue
    with open(out / (p.name + ".out"), "w", encoding="utf-8", newline="\\n") as fh, redirect_stdout(fh):
        code = cli.main(["run", str(p), "--out", str(out), "--ascii"])
    if code:
        sys.exit(code)
"""


@pytest.mark.criterion(10)
def test_corpus_byte_identical(tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-c", _DRIVER, str(d)], check=True)
        runs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    n_scn = sum(1 for p in resources.files("qeraser").joinpath("scenarios").iterdir() if p.name.endswith(".scn"))
    assert sum(1 for n in runs[0] if n.endswith(".out")) == n_scn
    assert runs[0].keys() == runs[1].keys()
    for name in runs[0]:
        assert runs[0][name] == runs[1][name], name
