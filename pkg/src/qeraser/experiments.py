"""Delayed-choice, eraser and observer experiments as pure functions.

Each ``run_*`` function builds its state from scratch, applies the chosen
configuration and returns an :class:`ExperimentReport`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .errors import InvariantViolation, NotUnitaryError
from .hilbert import (
    Operator,
    StateVector,
    SystemLayout,
    apply,
    fidelity,
    max_abs_diff,
    partial_inner,
    project,
    reduced_density,
    tensor,
)
from .optics import (
    PATH_BASIS,
    POL_BASIS,
    ScreenConfig,
    ScreenPattern,
    beam_splitter,
    incoherent_pattern,
    intensity,
    path_conditional,
    polarizer,
    rotation,
    slit_waves,
    wave_plate,
)

ERASERS = ("none", "hwp_upper", "hwp_lower", "qwp_pair", "polarizer")


@dataclass
class ExperimentReport:
    experiment: str
    settings: dict = field(default_factory=dict)
    patterns: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    notes: str = ""

    def __post_init__(self):
        for name, value in self.scalars.items():
            if not math.isfinite(value):
                raise InvariantViolation(f"scalar {name!r} is not finite: {value!r}")

    def add(self, name: str, value: float):
        if name in self.scalars:
            raise ValueError(f"duplicate scalar {name!r}")
        value = float(value)
        if not math.isfinite(value):
            raise InvariantViolation(f"scalar {name!r} is not finite: {value!r}")
        self.scalars[name] = value


# ---- Wheeler ----

def _two_path_state() -> StateVector:
    layout = SystemLayout([("path", PATH_BASIS)])
    return StateVector(layout, np.array([1, 1]) / np.sqrt(2), normalized=True)


def run_wheeler(choice: str, config: ScreenConfig | None = None) -> ExperimentReport:
    """Photon past the first beam splitter; the late choice decides what is read.

    ``interference`` sends both paths to the plate. ``which_path`` images each
    path onto its own detector: D1 collects x < 0, where the lower path lands,
    and D2 collects x > 0.
    """
    config = config or ScreenConfig()
    psi = _two_path_state()
    rep = ExperimentReport("wheeler", {"choice": choice})
    if choice == "interference":
        pat = intensity(psi, config, label="screen")
        rep.patterns["screen"] = pat
        rep.add("visibility", pat.visibility)
    elif choice == "which_path":
        w = np.abs(psi.amplitudes) ** 2
        pat = incoherent_pattern({"upper": w[0], "lower": w[1]}, config, "screen")
        fu, fd = slit_waves(config)
        lower = w[1] * np.abs(fd) ** 2
        lower = lower / (w[0] * np.abs(fu) ** 2 + lower).sum()
        xs = config.xs
        # a sample exactly at x = 0 is shared evenly between the detectors
        d1 = np.where(xs < 0, 1.0, np.where(xs == 0, 0.5, 0.0))
        p1 = float((pat.intensity * d1).sum())
        p2 = float((pat.intensity * (1 - d1)).sum())
        rep.patterns["screen"] = pat
        rep.add("visibility", pat.visibility)
        rep.add("P_D1", p1)
        rep.add("P_D2", p2)
        rep.add("P_lower_given_D1", float((lower * d1).sum()) / p1)
    else:
        raise ValueError(f"choice must be 'interference' or 'which_path', got {choice!r}")
    return rep


# ---- double-slit eraser ----

def eraser_layout() -> SystemLayout:
    return SystemLayout([("path", PATH_BASIS), ("pol", POL_BASIS)])


def marked_state(marker_angle: float | None) -> StateVector:
    """(|u> + |d>)|up>/sqrt2 with the lower path's polarization turned by the marker."""
    layout = eraser_layout()
    psi = StateVector.from_dict(layout, {("u", "up"): 1, ("d", "up"): 1}, normalize=True)
    if marker_angle is None:
        return psi
    return apply(path_conditional(None, rotation(marker_angle)), psi)


def eraser_operator(eraser: str, marker_angle: float | None) -> Operator | None:
    """Unitary eraser on path (x) pol, or None for no eraser."""
    theta = 0.0 if marker_angle is None else marker_angle
    if eraser == "none":
        return None
    if eraser == "hwp_upper":
        return path_conditional(rotation(theta), None)
    if eraser == "hwp_lower":
        return path_conditional(None, rotation(-theta))
    if eraser == "qwp_pair":
        # glued pair for a 90 degree marker: both paths end in the same circular state
        return path_conditional(wave_plate("quarter", np.pi / 4), wave_plate("quarter", -np.pi / 4))
    raise ValueError(f"unknown unitary eraser {eraser!r}")


def run_double_slit_eraser(marker_angle: float | None, eraser: str = "none",
                           polarizer_angle: float = np.pi / 4,
                           config: ScreenConfig | None = None) -> ExperimentReport:
    config = config or ScreenConfig()
    if eraser not in ERASERS:
        raise ValueError(f"eraser must be one of {ERASERS}, got {eraser!r}")
    psi = marked_state(marker_angle)
    settings = {"marker": "none" if marker_angle is None else float(marker_angle), "eraser": eraser}
    survival = 1.0
    if eraser == "polarizer":
        settings["polarizer_angle"] = float(polarizer_angle)
        res = project(psi, polarizer(polarizer_angle), ["pol"])
        if res.is_null:
            rep = ExperimentReport("double_slit_eraser", settings, notes="polarizer blocks every photon")
            rep.add("visibility", 0.0)
            rep.add("survival", 0.0)
            return rep
        psi, survival = res.state, res.survival
    else:
        op = eraser_operator(eraser, marker_angle)
        if op is not None:
            if not op.is_unitary():
                raise NotUnitaryError(f"eraser {eraser!r} is not unitary")
            psi = apply(op, psi)
    pat = intensity(psi, config, survival=survival, label="screen")
    rep = ExperimentReport("double_slit_eraser", settings)
    rep.patterns["screen"] = pat
    rep.add("visibility", pat.visibility)
    rep.add("survival", survival)
    return rep


# ---- Herzog two-pass down-conversion eraser ----

HERZOG_LAYOUT = SystemLayout([
    ("idler_mode", ("i1", "i2")),
    ("idler_pol", POL_BASIS),
    ("signal_pol", POL_BASIS),
])


def default_phase_grid(points: int = 73) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, points)


def herzog_state(theta: float, qwp_on: bool) -> StateVector:
    layout = HERZOG_LAYOUT
    psi = StateVector.from_dict(
        layout,
        {("i1", "up", "up"): 1, ("i2", "up", "up"): np.exp(1j * theta)},
        normalize=True,
    )
    if qwp_on:
        # two passes through the quarter plate on the second-pass idler
        qwp = wave_plate("quarter", np.pi / 4, "idler_pol")
        double = Operator(qwp.layout, qwp.matrix @ qwp.matrix)
        psi = apply(path_conditional(None, double, "idler_mode", ("i1", "i2")), psi)
    return psi


def coincidence_rate(theta: float, qwp_on: bool, filter_on: bool) -> tuple[float, float]:
    """Coincidence probability at mirror phase ``theta`` and the filter survival."""
    psi = herzog_state(theta, qwp_on)
    survival = 1.0
    if filter_on:
        res = project(psi, polarizer(np.pi / 4, "idler_pol"), ["idler_pol"])
        if res.is_null:
            return 0.0, 0.0
        psi, survival = res.state, res.survival
    out = StateVector(SystemLayout([("idler_mode", ("i1", "i2"))]), np.array([1, 1]) / np.sqrt(2))
    rest = partial_inner(out, psi, ["idler_mode"])
    return survival * rest.norm() ** 2, survival


def run_herzog(qwp_on: bool, filter_on: bool, phase_grid=None) -> ExperimentReport:
    grid = default_phase_grid() if phase_grid is None else np.asarray(phase_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("phase grid must be nonempty")
    rates = np.empty(grid.size)
    survival = 1.0
    for k, theta in enumerate(grid):
        rates[k], survival = coincidence_rate(float(theta), qwp_on, filter_on)
    pat = ScreenPattern(grid, rates, survival, window=None, label="coincidence")
    rep = ExperimentReport("herzog", {"qwp": bool(qwp_on), "filter": bool(filter_on),
                                      "phase_points": int(grid.size)})
    rep.patterns["coincidence"] = pat
    rep.add("visibility", pat.visibility)
    rep.add("survival", survival)
    return rep


# ---- free will ----

FREE_WILL_LAYOUT = SystemLayout([("photon1", ("UP", "DOWN")), ("photon2", ("UP", "DOWN"))])


def bell_pair() -> StateVector:
    return StateVector.from_dict(
        FREE_WILL_LAYOUT, {("UP", "UP"): 1, ("DOWN", "DOWN"): 1}, normalize=True)


def _joint_screen_weights(psi: StateVector, detectors: dict, config: ScreenConfig):
    fu, fd = slit_waves(config)
    weights = {}
    for name, bra in detectors.items():
        cond = partial_inner(bra, psi, ["photon2"]).amplitudes
        weights[name] = np.abs(cond[0] * fu + cond[1] * fd) ** 2
    return weights


def run_free_will(choice: str, config: ScreenConfig | None = None) -> ExperimentReport:
    """Photon 1 hits the screen, photon 2 is read late.

    ``push`` reads photon 2 in its path basis (D4 = UP, D3 = DOWN).
    ``not_push`` first sends photon 2 through a beam splitter, then D1 fires
    on its first output and D2 on its second.

    P(outcome) is the joint probability of that detector together with a hit
    on the sampled screen, so the outcome-weighted sum of the conditional
    patterns equals the photon-1 marginal regardless of the choice.
    """
    config = config or ScreenConfig()
    psi = bell_pair()
    one = SystemLayout([("photon2", ("UP", "DOWN"))])
    up = StateVector.basis(one, "UP")
    down = StateVector.basis(one, "DOWN")
    if choice == "push":
        detectors = {"D3": down, "D4": up}
    elif choice == "not_push":
        psi = apply(beam_splitter("photon2", ("UP", "DOWN")), psi)
        detectors = {"D1": up, "D2": down}
    else:
        raise ValueError(f"choice must be 'push' or 'not_push', got {choice!r}")
    weights = _joint_screen_weights(psi, detectors, config)
    z = sum(w.sum() for w in weights.values())
    rep = ExperimentReport("free_will", {"choice": choice})
    parts = []
    fu, fd = slit_waves(config)
    for name, w in weights.items():
        p = float(w.sum() / z)
        born = float(partial_inner(detectors[name], psi, ["photon2"]).norm() ** 2)
        cond = w / w.sum()
        pat = ScreenPattern(config.xs, cond, 1.0, window=config.window, label=name)
        if choice == "push":
            # a definite path: the two humps do not interfere
            pat = ScreenPattern(config.xs, cond, 1.0, cond, np.zeros_like(cond), config.window, name)
        rep.patterns[name] = pat
        rep.add(f"P_{name}", p)
        rep.add(f"born_P_{name}", born)
        parts.append(w / z)
    total = sum(parts)
    rep.patterns["sum"] = ScreenPattern(config.xs, total, float(total.sum()), window=config.window, label="sum")
    if choice == "not_push":
        a = rep.patterns["D1"].intensity
        b = rep.patterns["D2"].intensity
        rep.add("cross_correlation", pattern_correlation(a, b))
    return rep


def pattern_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two sampled patterns after removing their means."""
    a = a - a.mean()
    b = b - b.mean()
    return float((a * b).sum() / np.sqrt((a * a).sum() * (b * b).sum()))


# ---- delayed-choice entanglement swapping ----

SWAP_LAYOUT = SystemLayout([(f"p{k}", ("0", "1")) for k in range(1, 5)])
PAIR = SystemLayout([("a", ("0", "1")), ("b", ("0", "1"))])


def bell_basis() -> dict[str, StateVector]:
    r = 1 / np.sqrt(2)
    vecs = {
        "phi_plus": [r, 0, 0, r],
        "phi_minus": [r, 0, 0, -r],
        "psi_plus": [0, r, r, 0],
        "psi_minus": [0, r, -r, 0],
    }
    return {k: StateVector(PAIR, v, normalized=True) for k, v in vecs.items()}


def separable_basis() -> dict[str, StateVector]:
    eye = np.eye(4)
    return {f"z{a}{b}": StateVector(PAIR, eye[2 * a + b], normalized=True)
            for a in (0, 1) for b in (0, 1)}


def _basis_change(basis: str) -> np.ndarray:
    if basis == "z":
        return np.eye(2)
    if basis == "x":
        return catalog.hadamard()
    raise ValueError(basis)


def joint_distribution(pair: StateVector, basis: str) -> np.ndarray:
    """P(a, b) for outcomes 0 (+1) and 1 (-1) of both qubits in the given basis."""
    h = _basis_change(basis)
    amps = np.kron(h, h).conj().T @ pair.normalize().amplitudes
    return (np.abs(amps) ** 2).reshape(2, 2)


def correlation(dist: np.ndarray) -> float:
    signs = np.array([1.0, -1.0])
    return float(np.einsum("ab,a,b->", dist, signs, signs))


def run_entanglement_swapping(victor_choice: str, seed: int = 0, shots: int = 10_000) -> ExperimentReport:
    """Two Bell pairs (p1,p2) and (p3,p4); Victor measures (p2,p3) late.

    For every Victor outcome the Alice (p1) and Bob (p4) correlation is
    reported in the z and x bases, analytically and from ``shots`` samples
    per basis drawn from that outcome's conditional distribution.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if victor_choice == "bell":
        basis = bell_basis()
    elif victor_choice == "separable":
        basis = separable_basis()
    else:
        raise ValueError(f"victor choice must be 'bell' or 'separable', got {victor_choice!r}")
    phi = StateVector(PAIR, np.array([1, 0, 0, 1]) / np.sqrt(2), normalized=True)
    psi = tensor(phi.relabel(SWAP_LAYOUT.sub(["p1", "p2"])), phi.relabel(SWAP_LAYOUT.sub(["p3", "p4"])))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rep = ExperimentReport("entanglement_swapping",
                           {"victor": victor_choice, "seed": int(seed), "shots": int(shots)})
    alice = {"z": np.zeros(2), "x": np.zeros(2)}
    signs = np.array([1, -1, -1, 1])
    for name, vec in basis.items():
        rest = partial_inner(vec.relabel(SWAP_LAYOUT.sub(["p2", "p3"])), psi, ["p2", "p3"])
        p = rest.norm() ** 2
        rep.add(f"P_{name}", p)
        pair = rest.normalize().relabel(PAIR)
        for b in ("z", "x"):
            dist = joint_distribution(pair, b)
            alice[b] += p * dist.sum(axis=1)
            rep.add(f"corr_{b}_{name}", correlation(dist))
            counts = rng.multinomial(shots, dist.reshape(-1) / dist.sum())
            rep.add(f"sampled_corr_{b}_{name}", float(counts @ signs) / shots)
    for b in ("z", "x"):
        rep.add(f"alice_{b}_0", alice[b][0])
        rep.add(f"alice_{b}_1", alice[b][1])
    return rep


# ---- complementarity of interference and correlation ----

TRADEOFF_LAYOUT = SystemLayout([("marker", ("0", "1")), ("particle", ("L", "R"))])


@dataclass(frozen=True, eq=False)
class TradeoffResult:
    initial_interference_coeff: float
    final_interference_coeff: float
    correlation_measure: float
    constructed_unitary: Operator
    initial_state: StateVector
    final_state: StateVector
    unitary_fidelity: float


def tradeoff_states() -> tuple[StateVector, StateVector]:
    r10, r2 = np.sqrt(10), np.sqrt(2)
    i = StateVector(TRADEOFF_LAYOUT, np.array([2, 1, 2, 1]) / r10, normalized=True)
    f = StateVector(TRADEOFF_LAYOUT, [1 / r2, 0, 3 / (5 * r2), 2 * r2 / 5], normalized=True)
    return i, f


def interference_coefficient(state: StateVector, particle: str = "particle") -> float:
    """Normalized weight of Re(<a|L><a|R>) in sum_m |<a|state_m>|^2.

    Writing the particle amplitudes as c_mL, c_mR, the probability of outcome
    a expands into A|<a|L>|^2 + cross Re(...) + B|<a|R>|^2 with A = sum|c_mL|^2,
    B = sum|c_mR|^2 and cross = 2 Re sum conj(c_mL) c_mR; the returned value is
    cross / (A + B + cross).
    """
    layout = state.layout
    k = layout.position(particle)
    t = np.moveaxis(state.tensor_array(), k, 0).reshape(2, -1)
    a = float(np.vdot(t[0], t[0]).real)
    b = float(np.vdot(t[1], t[1]).real)
    cross = 2 * float(np.vdot(t[0], t[1]).real)
    return cross / (a + b + cross)


def correlation_measure(state: StateVector, keep: str = "marker") -> float:
    """2 (1 - largest eigenvalue of the kept reduced state); 0 for product states."""
    lam = reduced_density(state, [keep]).eigenvalues().max()
    return float(min(1.0, max(0.0, 2 * (1 - lam))))


def complementarity_tradeoff() -> TradeoffResult:
    i, f = tradeoff_states()
    u = Operator(TRADEOFF_LAYOUT, catalog.tradeoff_unitary())
    if not u.is_unitary():
        raise NotUnitaryError("P2 P1^T is not unitary")
    return TradeoffResult(
        interference_coefficient(i),
        interference_coefficient(f),
        correlation_measure(f),
        u,
        i,
        f,
        fidelity(u @ i, f),
    )


def tradeoff_family_state(s: float) -> StateVector:
    """|0>|psi1> + |1>|psi2> (normalized) with real marker overlap <psi1|psi2> = s.

    psi1 = cos a |L> + sin a |R> and psi2 = sin a |L> + cos a |R>, sin 2a = s.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    alpha = 0.5 * np.arcsin(s)
    c, sn = np.cos(alpha), np.sin(alpha)
    return StateVector(TRADEOFF_LAYOUT, [c, sn, sn, c]).normalize()


def run_tradeoff() -> ExperimentReport:
    res = complementarity_tradeoff()
    rep = ExperimentReport("tradeoff")
    rep.add("initial_coefficient", res.initial_interference_coeff)
    rep.add("final_coefficient", res.final_interference_coeff)
    rep.add("correlation_measure", res.correlation_measure)
    rep.add("unitary_fidelity", res.unitary_fidelity)
    rep.add("initial_correlation_measure", correlation_measure(res.initial_state))
    return rep


# ---- brainwash ----

BRAINWASH_VARIANTS = ("inverse", "alt_unitary", "beamsplitter_double_pass", "switching_unit")
OBSERVER_LAYOUT = SystemLayout([("alice", ("0", "1")), ("car", ("L", "R"))])
SWITCH_LAYOUT = SystemLayout([("alice", ("0", "1", "2")), ("car", ("L", "R")), ("switch", ("u", "d"))])


def switching_chain() -> list[StateVector]:
    """The four states of the switching-unit sequence, as expected at each step."""
    lay = SWITCH_LAYOUT
    s0 = StateVector.from_dict(lay, {("0", c, w): 1 for c in "LR" for w in "ud"}, normalize=True)
    s1 = StateVector.from_dict(
        lay, {**{("1", "L", w): 1 for w in "ud"}, **{("2", "R", w): 1 for w in "ud"}}, normalize=True)
    s2 = StateVector.from_dict(lay, {("0", "L", "u"): 1, ("0", "R", "d"): 1}, normalize=True)
    return [s0, s1, s2, s0]


def _op(labels_basis, matrix) -> Operator:
    return catalog.checked(SystemLayout(labels_basis), matrix)


def brainwash_roundtrip(variant: str) -> ExperimentReport:
    if variant not in BRAINWASH_VARIANTS:
        raise ValueError(f"variant must be one of {BRAINWASH_VARIANTS}, got {variant!r}")
    rep = ExperimentReport("brainwash", {"variant": variant})
    if variant == "switching_unit":
        chain = switching_chain()
        u1 = _op([("alice", 3), ("car", 2)], catalog.switching_u1())
        u2 = _op([("alice", 3), ("switch", 2)], catalog.switching_u2())
        u3 = _op([("car", 2), ("switch", 2)], catalog.switching_u3())
        psi = chain[0]
        for k, (op, targets) in enumerate([(u1, ["alice", "car"]), (u2, ["alice", "switch"]),
                                           (u3, ["car", "switch"])], start=1):
            psi = apply(op, psi, targets)
            rep.add(f"step{k}_fidelity", fidelity(psi, chain[k]))
            rep.add(f"step{k}_max_deviation", max_abs_diff(psi.amplitudes, chain[k].amplitudes))
        rep.add("fidelity", fidelity(psi, chain[0]))
        rep.add("max_deviation", max_abs_diff(psi.amplitudes, chain[0].amplitudes))
        return rep

    lay = OBSERVER_LAYOUT
    psi_i = StateVector.from_dict(lay, {("0", "L"): 1, ("0", "R"): 1}, normalize=True)
    psi_f = StateVector.from_dict(lay, {("0", "L"): 1, ("1", "R"): 1}, normalize=True)
    u = catalog.checked(lay, catalog.which_path_marker())
    if variant == "inverse":
        forward, erase = u, u.dagger
    elif variant == "alt_unitary":
        v = catalog.checked(lay, catalog.alternative_observation())
        rep.add("alt_forward_fidelity", fidelity(v @ psi_i, psi_f))
        # observe with U, erase with the inverse of the other observation unitary
        forward, erase = u, v.dagger
    else:
        h = catalog.checked(SystemLayout([("car", ("L", "R"))]), catalog.hadamard())
        forward = erase = Operator(lay, np.kron(np.eye(2), h.matrix))
    mid = forward @ psi_i
    if variant != "beamsplitter_double_pass":
        rep.add("observed_fidelity", fidelity(mid, psi_f))
    final = erase @ mid
    rep.add("fidelity", fidelity(final, psi_i))
    rep.add("max_deviation", max_abs_diff(final.amplitudes, psi_i.amplitudes))
    return rep
