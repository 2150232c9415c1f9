"""Fixed unitaries used by the experiments, with their basis conventions.

Every matrix is returned as a fresh numpy array; ``checked`` wraps one in an
:class:`Operator` and refuses it if it is not unitary.
"""

import numpy as np

from .errors import NotUnitaryError
from .hilbert import Operator, SystemLayout

R2 = 1 / np.sqrt(2)


def checked(layout: SystemLayout, matrix, tol: float = 1e-12) -> Operator:
    op = Operator(layout, matrix)
    if not op.is_unitary(tol):
        raise NotUnitaryError(f"matrix on {layout!r} is not unitary to {tol:g}")
    return op


def which_path_marker() -> np.ndarray:
    """Marker qubit (0, 1) times path qubit (u, d): |0>|d> <-> |1>|d>.

    Takes |0>(|u>+|d>)/sqrt2 to (|0>|u>+|1>|d>)/sqrt2. Also the observation
    unitary of the brainwash round trip with (L, R) for (u, d).
    """
    return np.array(
        [[1, 0, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0],
         [0, 1, 0, 0]], dtype=complex)


def alternative_observation() -> np.ndarray:
    """A second unitary with the same action on |0>(|L>+|R>)/sqrt2."""
    return np.array(
        [[0, 1, 0, 0],
         [0, 0, R2, R2],
         [0, 0, R2, -R2],
         [1, 0, 0, 0]], dtype=complex)


def hadamard() -> np.ndarray:
    return R2 * np.array([[1, 1], [1, -1]], dtype=complex)


def tradeoff_frames() -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal frames P1, P2 whose first columns are |i> and |f>.

    Basis (0L, 0R, 1L, 1R). The naive third column of P2,
    (3/(5 sqrt2), 0, -1/sqrt2, 0), has squared norm 0.68; it is replaced
    by its normalized direction (3, 0, -5, 0)/sqrt34 so that P2 is
    orthogonal. The first column, which fixes U|i> = |f>, is unchanged.
    """
    s25, s110 = np.sqrt(2 / 5), 1 / np.sqrt(10)
    p1 = np.array(
        [[s25, R2, 0, -s110],
         [s110, 0, R2, s25],
         [s25, -R2, 0, -s110],
         [s110, 0, -R2, s25]])
    s17 = np.sqrt(17)
    s34 = np.sqrt(34)
    p2 = np.array(
        [[R2, 0, 3 / s34, 2 / s17],
         [0, 1, 0, 0],
         [3 / (5 * np.sqrt(2)), 0, -5 / s34, 6 / (5 * s17)],
         [2 * np.sqrt(2) / 5, 0, 0, -s17 / 5]])
    return p1, p2


def tradeoff_unitary() -> np.ndarray:
    p1, p2 = tradeoff_frames()
    return (p2 @ p1.T).astype(complex)


def switching_u1() -> np.ndarray:
    """Alice (0,1,2) times car (L,R): moves 0L -> 1L and 0R -> 2R."""
    return np.array(
        [[0, 0, 1, 0, 0, 0],
         [0, 0, 0, 0, 0, 1],
         [1, 0, 0, 0, 0, 0],
         [0, 0, 0, 0, 1, 0],
         [0, 0, 0, 1, 0, 0],
         [0, 1, 0, 0, 0, 0]], dtype=complex)


def switching_u2() -> np.ndarray:
    """Alice (0,1,2) times switch (u,d): hands the memory to the switch."""
    return np.array(
        [[0, 0, R2, R2, 0, 0],
         [0, 0, 0, 0, R2, R2],
         [0, 0, R2, -R2, 0, 0],
         [0, 0, 0, 0, R2, -R2],
         [1, 0, 0, 0, 0, 0],
         [0, 1, 0, 0, 0, 0]], dtype=complex)


def switching_u3() -> np.ndarray:
    """Car (L,R) times switch (u,d): disentangles the switch from the car."""
    return R2 * np.array(
        [[1, 1, 0, 0],
         [1, -1, 0, 0],
         [0, 0, -1, 1],
         [0, 0, 1, 1]], dtype=complex)


# basis order of the 6x6 cat matrix, as (cat, observer) pairs
CAT_BASIS = (
    ("alive", "neutral"),
    ("dead", "neutral"),
    ("dead", "smile"),
    ("alive", "frown"),
    ("alive", "smile"),
    ("dead", "frown"),
)


def cat_opening(t: float) -> np.ndarray:
    """Box-opening unitary at time t in the ``CAT_BASIS`` order."""
    c, s = np.cos(t), 1j * np.sin(t)
    m = np.array(
        [[c, 0, s, 0, 0, 0],
         [0, c, 0, s, 0, 0],
         [s, 0, c, 0, 0, 0],
         [0, s, 0, c, 0, 0],
         [0, 0, 0, 0, 1, 0],
         [0, 0, 0, 0, 0, 1]], dtype=complex)
    return np.exp(-1j * t) * m


def cat_opening_product(t: float, layout: SystemLayout) -> np.ndarray:
    """``cat_opening`` reordered to the product basis of ``layout``.

    ``layout`` must be cat(alive, dead) followed by observer(neutral, smile, frown).
    """
    perm = [layout.index(*pair) for pair in CAT_BASIS]
    out = np.zeros((6, 6), dtype=complex)
    out[np.ix_(perm, perm)] = cat_opening(t)
    return out


def decay(lam: float, t: float) -> np.ndarray:
    """Atom (U, Th) times Bob (frown, smile); takes U-frown to the decayed mix."""
    a = np.sqrt(np.exp(-lam * t))
    b = np.sqrt(-np.expm1(-lam * t))
    return np.array(
        [[a, b, 0, 0],
         [0, 0, 0, 1],
         [0, 0, 1, 0],
         [b, -a, 0, 0]], dtype=complex)


def all_fixed() -> dict[str, np.ndarray]:
    """Every time-independent matrix, keyed by a short name."""
    return {
        "which_path_marker": which_path_marker(),
        "alternative_observation": alternative_observation(),
        "hadamard": hadamard(),
        "tradeoff": tradeoff_unitary(),
        "switching_u1": switching_u1(),
        "switching_u2": switching_u2(),
        "switching_u3": switching_u3(),
    }
