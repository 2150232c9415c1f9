"""Consistent histories: class operators, the decoherence matrix and history weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import catalog
from .errors import LayoutError, NotProjectorError
from .hilbert import DensityOperator, Operator, StateVector, SystemLayout, lift

Evolution = Callable[[float, float], Operator]


@dataclass(frozen=True, eq=False)
class History:
    """Projectors at strictly increasing times, all on one layout."""

    steps: tuple

    def __post_init__(self):
        steps = tuple((float(t), p) for t, p in self.steps)
        if not steps:
            raise ValueError("a history needs at least one step")
        layout = steps[0][1].layout
        for k, (t, p) in enumerate(steps):
            if p.layout != layout:
                raise LayoutError("every projector of a history must share one layout")
            if not p.is_projector():
                raise NotProjectorError(f"step {k} at t = {t} is not a projector")
            if k and not t > steps[k - 1][0]:
                raise ValueError("history times must be strictly increasing")
        object.__setattr__(self, "steps", steps)

    @property
    def layout(self) -> SystemLayout:
        return self.steps[0][1].layout

    @property
    def times(self) -> tuple:
        return tuple(t for t, _ in self.steps)


def class_operator(h: History, evolution: Evolution | None = None) -> Operator:
    """C = P_n U(t_{n-1}, t_n) ... U(t_1, t_2) P_1, latest projector leftmost.

    Without ``evolution`` the propagators between steps are the identity.
    """
    (t_prev, first), *rest = h.steps
    c = first.matrix
    for t, p in rest:
        if evolution is not None:
            c = evolution(t_prev, t).matrix @ c
        c = p.matrix @ c
        t_prev = t
    return Operator(h.layout, c)


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    matrix: np.ndarray
    consistent: bool
    probabilities: np.ndarray

    @property
    def max_off_diagonal(self) -> float:
        m = np.abs(self.matrix).copy()
        np.fill_diagonal(m, 0.0)
        return float(m.max()) if m.size > 1 else 0.0


def consistency_matrix(histories: Sequence[History], rho: DensityOperator, tol: float = 1e-10,
                       evolution: Evolution | None = None) -> ConsistencyReport:
    """M_ij = Tr(C_i rho C_j^dagger); consistent when every |M_ij|, i != j, is at most tol."""
    histories = list(histories)
    for h in histories:
        if h.layout != rho.layout:
            raise LayoutError(f"history layout {h.layout!r} differs from {rho.layout!r}")
    cs = [class_operator(h, evolution).matrix for h in histories]
    n = len(cs)
    m = np.empty((n, n), dtype=complex)
    for i in range(n):
        left = cs[i] @ rho.matrix
        for j in range(n):
            m[i, j] = np.trace(left @ cs[j].conj().T)
    off = np.abs(m - np.diag(np.diag(m)))
    probs = np.diag(m).real.copy()
    if probs.min(initial=0.0) < -1e-10:
        raise ValueError("negative history weight")
    return ConsistencyReport(m, bool(off.max(initial=0.0) <= tol), probs)


# ---- two-slit family ----

TWO_SLIT_LAYOUT = SystemLayout([
    ("marker", ("0", "1")),
    ("path", ("u", "d")),
    ("screen", ("x0", "x1", "x2")),
])
SLIT_TIME = 1.0
SCREEN_TIME = 2.0


def _propagation() -> np.ndarray:
    """Unitary on path (x) screen taking |u,x0> and |d,x0> to |u>|phi_u>, |u>|phi_d>.

    phi_u and phi_d are two columns of the 3-point discrete Fourier matrix,
    so every screen point receives equal weight from each slit.
    """
    n = 3
    dft = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n) / np.sqrt(n)
    e_u = np.array([1, 0])
    cols = [np.kron(e_u, dft[:, 0]), np.kron(e_u, dft[:, 1])]
    # complete to an orthonormal basis by Gram-Schmidt over the standard basis
    basis = list(cols)
    for e in np.eye(2 * n):
        v = e - sum(np.vdot(b, e) * b for b in basis)
        if np.linalg.norm(v) > 1e-9:
            basis.append(v / np.linalg.norm(v))
        if len(basis) == 2 * n:
            break
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    u[:, 0] = basis[0]  # |u, x0>
    u[:, n] = basis[1]  # |d, x0>
    rest = [k for k in range(2 * n) if k not in (0, n)]
    for k, v in zip(rest, basis[2:]):
        u[:, k] = v
    return u


def two_slit_evolution(t_from: float, t_to: float) -> Operator:
    """Propagation from the slits to the screen when the interval spans it."""
    sub = TWO_SLIT_LAYOUT.sub(["path", "screen"])
    if t_from < SCREEN_TIME - 0.5 <= t_to:
        return lift(Operator(sub, _propagation()), ["path", "screen"], TWO_SLIT_LAYOUT)
    return Operator.identity(TWO_SLIT_LAYOUT)


def two_slit_state(marked: bool) -> DensityOperator:
    """|0>(|u> + |d>)|x0>/sqrt2, with the path recorded on the marker if ``marked``."""
    psi = StateVector.from_dict(TWO_SLIT_LAYOUT, {("0", "u", "x0"): 1, ("0", "d", "x0"): 1}, normalize=True)
    if marked:
        mark = catalog.checked(TWO_SLIT_LAYOUT.sub(["marker", "path"]), catalog.which_path_marker())
        psi = lift(mark, ["marker", "path"], TWO_SLIT_LAYOUT) @ psi
    return psi.density()


def _local_projector(label: str, name: str) -> Operator:
    sub = TWO_SLIT_LAYOUT.subsystem(label)
    one = SystemLayout([sub])
    p = np.zeros((sub.dim, sub.dim))
    k = sub.basis.index(name)
    p[k, k] = 1.0
    return lift(Operator(one, p), [label], TWO_SLIT_LAYOUT)


def two_slit_histories() -> list[History]:
    """Six histories: slit u or d at the slit time, then one of three screen points."""
    out = []
    for slit in ("u", "d"):
        for x in ("x0", "x1", "x2"):
            out.append(History(((SLIT_TIME, _local_projector("path", slit)),
                                (SCREEN_TIME, _local_projector("screen", x)))))
    return out


def two_slit_report(marked: bool, tol: float = 1e-10) -> ConsistencyReport:
    return consistency_matrix(two_slit_histories(), two_slit_state(marked), tol, two_slit_evolution)


def path_marginals(report: ConsistencyReport) -> tuple[float, float]:
    """Weights of 'went through u' and 'went through d' summed over screen points."""
    p = report.probabilities
    return float(p[:3].sum()), float(p[3:].sum())
