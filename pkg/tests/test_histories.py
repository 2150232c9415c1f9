import numpy as np
import pytest

from qeraser import histories as hs
from qeraser.errors import LayoutError, NotProjectorError
from qeraser.hilbert import DensityOperator, Operator, SystemLayout

Q = SystemLayout([("q", 2)])
P0 = Operator(Q, np.diag([1.0, 0.0]))
P1 = Operator(Q, np.diag([0.0, 1.0]))
PLUS = Operator(Q, np.full((2, 2), 0.5))
MINUS = Operator(Q, np.array([[0.5, -0.5], [-0.5, 0.5]]))


def test_history_validation():
    with pytest.raises(ValueError):
        hs.History(((1.0, P0), (1.0, P1)))
    with pytest.raises(NotProjectorError):
        hs.History(((0.0, Operator(Q, np.eye(2) * 2)),))
    with pytest.raises(ValueError):
        hs.History(())


def test_class_operator_order():
    h = hs.History(((0.0, P0), (1.0, PLUS)))
    assert np.allclose(hs.class_operator(h).matrix, PLUS.matrix @ P0.matrix)


def test_qubit_family_z_then_x():
    # |0> start: z-then-x histories; off-diagonals vanish since the first projection is sharp
    rho = DensityOperator(Q, np.diag([1.0, 0.0]))
    fam = [hs.History(((0.0, a), (1.0, b))) for a in (P0, P1) for b in (PLUS, MINUS)]
    rep = hs.consistency_matrix(fam, rho)
    assert rep.consistent
    assert rep.probabilities.sum() == pytest.approx(1)
    assert np.allclose(rep.probabilities, [0.5, 0.5, 0, 0])


def test_qubit_family_inconsistent_for_superposition():
    rho = DensityOperator(Q, np.full((2, 2), 0.5))
    fam = [hs.History(((0.0, a), (1.0, b))) for a in (P0, P1) for b in (PLUS, MINUS)]
    rep = hs.consistency_matrix(fam, rho)
    assert not rep.consistent
    assert rep.max_off_diagonal == pytest.approx(0.25)


def test_layout_mismatch():
    rho = DensityOperator(SystemLayout([("r", 2)]), np.eye(2) / 2)
    with pytest.raises(LayoutError):
        hs.consistency_matrix([hs.History(((0.0, P0),))], rho)


def test_propagation_unitary():
    u = hs._propagation()
    assert np.allclose(u.conj().T @ u, np.eye(6))


@pytest.mark.parametrize("marked", [False, True])
def test_two_slit_weights(marked):
    rep = hs.two_slit_report(marked)
    assert rep.probabilities.sum() == pytest.approx(1, abs=1e-10)
    assert hs.path_marginals(rep) == pytest.approx((0.5, 0.5))
    assert rep.consistent is marked
