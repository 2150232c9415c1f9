"""Continuously evolving observer-plus-system states and their detection statistics.

An :class:`EvolvingState` gives the joint amplitudes at each time. Basis
states whose observer component is in ``detected_labels`` mean "the observer
has registered something"; the detection CDF is the weight on them and the
detection density is its time derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import catalog
from .errors import DomainError, LayoutError, QuantumError
from .hilbert import Operator, StateVector, SystemLayout, lift

DEFAULT_H = 1e-4
CAT_END = math.pi / 2


@dataclass(frozen=True, eq=False)
class EvolvingState:
    layout: SystemLayout
    amplitude_fn: Callable[[float], np.ndarray]
    observer: str
    detected_labels: frozenset
    signal_labels: frozenset | None = None
    t_start: float = 0.0
    t_end: float = math.inf
    name: str = ""
    unitary_fn: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        obs = self.layout.subsystem(self.observer)
        det = frozenset(self.detected_labels)
        sig = det if self.signal_labels is None else frozenset(self.signal_labels)
        for label in det | sig:
            if label not in obs.basis:
                raise LayoutError(f"{label!r} is not a basis state of observer {self.observer!r}")
        if not sig <= det:
            raise LayoutError("signal labels must be a subset of the detected labels")
        if not self.t_start < self.t_end:
            raise DomainError("empty time domain")
        object.__setattr__(self, "detected_labels", det)
        object.__setattr__(self, "signal_labels", sig)

    def check_time(self, t: float):
        if not self.t_start - 1e-12 <= t <= self.t_end + 1e-12:
            raise DomainError(f"t = {t} outside [{self.t_start}, {self.t_end}]")

    def amplitudes(self, t: float) -> np.ndarray:
        self.check_time(t)
        return np.asarray(self.amplitude_fn(min(max(t, self.t_start), self.t_end)), dtype=complex)

    def state(self, t: float) -> StateVector:
        return StateVector(self.layout, self.amplitudes(t))

    def mask(self, labels) -> np.ndarray:
        """Boolean mask over the product basis for observer values in ``labels``."""
        k = self.layout.position(self.observer)
        obs = self.layout.subsystems[k].basis
        idx = np.unravel_index(np.arange(self.layout.dim), self.layout.dims)[k]
        return np.isin(np.array(obs)[idx], list(labels))


def _channel(state: EvolvingState, channel) -> frozenset:
    if channel == "signal":
        return state.signal_labels
    if channel == "all":
        return state.detected_labels
    return frozenset(channel)


def detection_cdf(state: EvolvingState, t: float, channel="signal") -> float:
    """Weight on the detected observer states at time t.

    ``channel`` is "signal" (the labels of interest), "all" (every detection
    outcome) or an explicit collection of observer labels.
    """
    amps = state.amplitudes(t)
    p = np.abs(amps) ** 2
    return float(p[state.mask(_channel(state, channel))].sum() / p.sum())


def _one_sided(f, t, h, direction):
    def d(step):
        s = direction * step
        return direction * (-3 * f(t) + 4 * f(t + s) - f(t + 2 * s)) / (2 * step)
    # Richardson step on the second-order one-sided formula
    return (4 * d(h / 2) - d(h)) / 3


def detection_density(state: EvolvingState, t: float, h: float = DEFAULT_H, channel="signal") -> float:
    """Derivative of the detection CDF by central differences.

    Within h of an end of the domain a one-sided second-order difference with
    one Richardson refinement is used instead.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    state.check_time(t)
    if state.t_end - state.t_start < 2 * h:
        raise DomainError(f"domain is shorter than two steps of h = {h}")

    def f(x):
        return detection_cdf(state, x, channel)

    if t - h >= state.t_start and t + h <= state.t_end:
        return (f(t + h) - f(t - h)) / (2 * h)
    if t + 2 * h <= state.t_end:
        return _one_sided(f, t, h, +1)
    return _one_sided(f, t, h, -1)


def conditional_density(state: EvolvingState, t: float, t0: float, h: float = DEFAULT_H,
                        channel="signal") -> float:
    """Density at t given that nothing at all was detected before t0.

    The density of ``channel`` is divided by the remaining undetected weight
    1 - CDF_all(t0).
    """
    if t < t0:
        raise DomainError("conditional density needs t >= t0")
    remaining = 1.0 - detection_cdf(state, t0, "all")
    if remaining <= 1e-12:
        raise DomainError(f"nothing left undetected at t0 = {t0}")
    return detection_density(state, t, h, channel) / remaining


def residual_mass(state: EvolvingState, t0: float) -> float:
    """Conditional probability that nothing is ever detected after t0 (finite domains)."""
    if not math.isfinite(state.t_end):
        raise DomainError("residual mass needs a finite domain")
    remaining = 1.0 - detection_cdf(state, t0, "all")
    if remaining <= 1e-12:
        raise DomainError(f"nothing left undetected at t0 = {t0}")
    return (1.0 - detection_cdf(state, state.t_end, "all")) / remaining


@dataclass(frozen=True, eq=False)
class ConditionalDensity:
    t0: float
    density_fn: Callable[[float], float]
    closed_form: str | None = None


def conditional(state: EvolvingState, t0: float, channel="signal") -> ConditionalDensity:
    forms = {
        "decay": "lambda exp(-lambda (t - t0))",
        "cat": "sin(2t) / (1 + cos(2 t0))",
        "passive_zeno": "1 / (2T - t0)",
    }
    return ConditionalDensity(
        t0, lambda t: conditional_density(state, t, t0, channel=channel),
        forms.get(state.name) if channel == "signal" else None,
    )


def next_interval_probability(state: EvolvingState, t0: float, dt: float) -> float:
    """First-order chance of a signal detection in (t0, t0 + dt) given none before t0."""
    return conditional_density(state, t0, t0) * dt


def next_interval_exact(state: EvolvingState, t0: float, dt: float) -> float:
    remaining = 1.0 - detection_cdf(state, t0, "all")
    if remaining <= 1e-12:
        raise DomainError(f"nothing left undetected at t0 = {t0}")
    return (detection_cdf(state, t0 + dt) - detection_cdf(state, t0)) / remaining


def cat_near_end_asymptotic(t0: float, dt: float) -> float:
    """dt^2 / (2 (pi/2 - t0)^2): the second-order term of the cat's next-interval chance."""
    return dt * dt / (2 * (CAT_END - t0) ** 2)


# ---- the three evolving states ----

DECAY_LAYOUT = SystemLayout([("atom", ("U", "Th")), ("bob", ("frown", "smile"))])
CAT_LAYOUT = SystemLayout([("cat", ("alive", "dead")), ("alice", ("neutral", "smile", "frown"))])
ZENO_LAYOUT = SystemLayout([("particle", ("u", "d")), ("eye", ("0", "1"))])


def decay_state(rate: float) -> EvolvingState:
    if not rate > 0:
        raise DomainError("decay rate must be positive")

    def amps(t):
        out = np.zeros(4, dtype=complex)
        out[0] = np.sqrt(np.exp(-rate * t))
        out[3] = np.sqrt(-np.expm1(-rate * t))
        return out

    return EvolvingState(DECAY_LAYOUT, amps, "bob", frozenset({"smile"}), name="decay",
                         unitary_fn=lambda t: catalog.decay(rate, t))


def cat_state() -> EvolvingState:
    """Observer slowly opening the box; a blue (dead) photon makes her smile."""
    lay = CAT_LAYOUT
    idx = {pair: lay.index(*pair) for pair in catalog.CAT_BASIS}

    def amps(t):
        out = np.zeros(6, dtype=complex)
        c, s = np.cos(t), 1j * np.sin(t)
        out[idx["alive", "neutral"]] = c
        out[idx["dead", "neutral"]] = c
        out[idx["dead", "smile"]] = s
        out[idx["alive", "frown"]] = s
        return np.exp(-1j * t) / np.sqrt(2) * out

    return EvolvingState(lay, amps, "alice", frozenset({"smile", "frown"}), frozenset({"smile"}),
                         0.0, CAT_END, "cat", lambda t: catalog.cat_opening_product(t, lay))


def passive_zeno_state(period: float) -> EvolvingState:
    """Particle in two paths while the eye watches the upper one for ``period``."""
    if not period > 0:
        raise DomainError("interaction time must be positive")
    lay = ZENO_LAYOUT

    def amps(t):
        out = np.zeros(4, dtype=complex)
        out[lay.index("u", "0")] = np.sqrt(0.5 * (1 - t / period))
        out[lay.index("u", "1")] = np.sqrt(0.5 * t / period)
        out[lay.index("d", "0")] = np.sqrt(0.5)
        return out

    return EvolvingState(lay, amps, "eye", frozenset({"1"}), t_end=float(period), name="passive_zeno")


def conditional_state(state: EvolvingState, t: float) -> StateVector | None:
    """Joint state at t given that no detection has happened (None if impossible)."""
    amps = state.amplitudes(t).copy()
    amps[state.mask(state.detected_labels)] = 0
    if np.linalg.norm(amps) < 1e-14:
        return None
    return StateVector(state.layout, amps).normalize()


# ---- active Zeno ----

def zeno_survival(n: int, total_time: float) -> float:
    """Probability the cat stays unobserved-alive under n equally spaced checks.

    Starts from |alive>|neutral>, evolves each interval with the box-opening
    unitary and projects the observer back onto "neutral".
    """
    if n < 1:
        raise ValueError("need at least one measurement")
    lay = CAT_LAYOUT
    tau = total_time / n
    u = catalog.cat_opening_product(tau, lay)
    keep = np.diag(_neutral_mask().astype(float))
    psi = np.zeros(6, dtype=complex)
    psi[lay.index("alive", "neutral")] = 1.0
    survival = 1.0
    for _ in range(n):
        psi = keep @ (u @ psi)
        p = float(np.vdot(psi, psi).real)
        survival *= p
        if p < 1e-300:
            return 0.0
        psi = psi / np.sqrt(p)
    return survival


def _neutral_mask() -> np.ndarray:
    k = CAT_LAYOUT.position("alice")
    idx = np.unravel_index(np.arange(CAT_LAYOUT.dim), CAT_LAYOUT.dims)[k]
    return idx == 0


# ---- time-ordering invariance ----

def phase_hamiltonian(layout: SystemLayout, energies) -> Operator:
    """Sum of E_k times the identity on each subsystem."""
    energies = list(energies)
    if len(energies) != len(layout):
        raise LayoutError("one energy per subsystem is required")
    h = np.zeros((layout.dim, layout.dim), dtype=complex)
    for sub, e in zip(layout.subsystems, energies):
        h += lift(Operator(SystemLayout([sub]), e * np.eye(sub.dim)), [sub.label], layout).matrix
    return Operator(layout, h)


def ordered_probability(initial: StateVector, h: Operator, proj_a: Operator, proj_b: Operator,
                        t_a: float, t_b: float) -> float:
    """<psi0| e^{iH tb} P_B e^{iH(ta-tb)} P_A e^{-iH(ta-tb)} P_B e^{-iH tb} |psi0>."""
    m = h.matrix
    psi = initial.normalize().amplitudes

    def u(t):
        return expm(-1j * m * t)

    a, b = proj_a.matrix, proj_b.matrix
    sandwich = u(-t_b) @ b @ u(t_b - t_a) @ a @ u(t_a - t_b) @ b @ u(t_b)
    return float(np.vdot(psi, sandwich @ psi).real)


def time_ordering_invariance(initial: StateVector, energies, proj_a: Operator, targets_a,
                             proj_b: Operator, targets_b, times) -> float:
    """|P(A at t1 | B at t2) - P(A at t3 | B at t4)| for a non-interacting phase Hamiltonian.

    ``times`` is ((t1, t2), (t3, t4)). The conditional divides the sandwich by
    <psi0|P_B|psi0>.
    """
    layout = initial.layout
    ta, tb = list(targets_a), list(targets_b)
    if set(ta) & set(tb):
        raise LayoutError(f"projectors share subsystem(s) {sorted(set(ta) & set(tb))}")
    for p in (proj_a, proj_b):
        if not p.is_projector():
            raise QuantumError("time ordering needs projectors")
    h = phase_hamiltonian(layout, energies)
    pa = lift(proj_a, ta, layout)
    pb = lift(proj_b, tb, layout)
    psi = initial.normalize().amplitudes
    norm_b = float(np.vdot(psi, pb.matrix @ psi).real)
    if norm_b < 1e-14:
        raise DomainError("conditioning event has zero probability")
    (t1, t2), (t3, t4) = times
    p1 = ordered_probability(initial, h, pa, pb, t1, t2) / norm_b
    p2 = ordered_probability(initial, h, pa, pb, t3, t4) / norm_b
    return abs(p1 - p2)
