"""Optical components and the two-slit screen model.

The screen model gives each slit a Gaussian envelope and an opposite linear
phase, f_u(x) = exp(-(x-a)^2/4s^2) e^{+ikx} and f_d(x) = exp(-(x+a)^2/4s^2)
e^{-ikx}. A path qubit with any marker attached produces the intensity

    I(x) = sum_m |c_um f_u(x) + c_dm f_d(x)|^2

which is split into an incoherent envelope and the magnitude of the
interference term so that fringe visibility can be read off locally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LayoutError
from .hilbert import Operator, StateVector, SystemLayout

PATH_BASIS = ("u", "d")
POL_BASIS = ("up", "right")


@dataclass(frozen=True)
class ScreenConfig:
    x_min: float = -10.0
    x_max: float = 10.0
    points: int = 401
    slit_half_separation: float = 2.0
    envelope_sigma: float = 3.0
    fringe_wavenumber: float = 1.5

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("screen needs x_min < x_max")
        if int(self.points) != self.points or self.points < 3:
            raise ValueError("screen needs at least 3 grid points")
        if self.slit_half_separation <= 0 or self.envelope_sigma <= 0:
            raise ValueError("slit separation and envelope width must be positive")
        if self.fringe_wavenumber < 0:
            raise ValueError("fringe wavenumber must be non-negative")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.points))

    @property
    def window(self) -> float:
        """Half-width of the central region where both envelopes overlap."""
        return self.envelope_sigma / 2


@dataclass(frozen=True, eq=False)
class ScreenPattern:
    """Sampled intensity over a 1-d grid.

    ``envelope`` and ``fringe`` are optional: when present, I = envelope +
    (oscillating term of amplitude ``fringe``). ``window`` restricts the
    visibility estimate to |x| <= window; None means the whole grid.
    """

    xs: np.ndarray
    intensity: np.ndarray
    survival: float = 1.0
    envelope: np.ndarray | None = None
    fringe: np.ndarray | None = None
    window: float | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.xs) != len(self.intensity) or len(self.xs) == 0:
            raise ValueError("pattern grid and intensity must be nonempty and equal length")
        if np.min(self.intensity) < -1e-12:
            raise ValueError("negative intensity")

    @property
    def visibility(self) -> float:
        return visibility(self)

    def scaled(self, factor: float, label: str | None = None) -> "ScreenPattern":
        def sc(a):
            return None if a is None else a * factor

        return ScreenPattern(
            self.xs, self.intensity * factor, self.survival * factor,
            sc(self.envelope), sc(self.fringe), self.window,
            self.label if label is None else label,
        )


def _in_window(pattern: ScreenPattern) -> np.ndarray:
    if pattern.window is None:
        return np.ones(len(pattern.xs), dtype=bool)
    mask = np.abs(pattern.xs) <= pattern.window + 1e-12
    return mask if mask.any() else np.ones(len(pattern.xs), dtype=bool)


def michelson(values: np.ndarray) -> float:
    hi, lo = float(np.max(values)), float(np.min(values))
    if hi <= 0:
        return 0.0
    return (hi - lo) / (hi + lo)


def visibility(pattern: ScreenPattern) -> float:
    """Fringe visibility (I_max - I_min)/(I_max + I_min) over the central window.

    With a known envelope/fringe split, I_max and I_min are the extremes the
    fringe reaches at each x (envelope +- fringe), so the local value is
    fringe/envelope and the maximum over the window is reported. Otherwise
    the raw extremes of the sampled intensity in the window are used.
    """
    mask = _in_window(pattern)
    if pattern.fringe is None or pattern.envelope is None:
        return michelson(pattern.intensity[mask])
    env = pattern.envelope[mask]
    fr = pattern.fringe[mask]
    good = env > 1e-300
    if not good.any():
        return 0.0
    return float(min(1.0, np.max(fr[good] / env[good])))


def raw_visibility(pattern: ScreenPattern) -> float:
    """Michelson visibility of the sampled intensity in the window, ignoring the split."""
    return michelson(pattern.intensity[_in_window(pattern)])


def _path_index(path: str) -> int:
    if path in ("upper", "u"):
        return 0
    if path in ("lower", "d"):
        return 1
    raise LayoutError(f"path must be 'upper' or 'lower', got {path!r}")


def slit_waves(config: ScreenConfig, xs=None) -> tuple[np.ndarray, np.ndarray]:
    xs = config.xs if xs is None else np.asarray(xs, dtype=float)
    a, s, k = config.slit_half_separation, config.envelope_sigma, config.fringe_wavenumber
    fu = np.exp(-((xs - a) ** 2) / (4 * s * s)) * np.exp(1j * k * xs)
    fd = np.exp(-((xs + a) ** 2) / (4 * s * s)) * np.exp(-1j * k * xs)
    return fu, fd


def screen_amplitude(config: ScreenConfig, path: str, x: float) -> complex:
    if not config.x_min <= x <= config.x_max:
        raise DomainError(f"x = {x} lies outside the screen [{config.x_min}, {config.x_max}]")
    fu, fd = slit_waves(config, np.array([x]))
    return complex((fu if _path_index(path) == 0 else fd)[0])


def path_coefficients(state: StateVector, path: str = "path") -> tuple[np.ndarray, np.ndarray]:
    """Amplitude vectors (c_u, c_d) over the remaining subsystems' product basis."""
    layout = state.layout
    if path not in layout:
        raise LayoutError(f"state has no path subsystem {path!r}")
    k = layout.position(path)
    if layout.dims[k] != 2:
        raise LayoutError(f"path subsystem {path!r} must be a qubit")
    t = np.moveaxis(state.tensor_array(), k, 0).reshape(2, -1)
    return t[0], t[1]


def intensity(state: StateVector, config: ScreenConfig, path: str = "path",
              survival: float = 1.0, label: str = "") -> ScreenPattern:
    """Screen pattern of ``state`` with every non-path subsystem traced out.

    The pattern is scaled so that its grid sum equals ``survival``.
    """
    cu, cd = path_coefficients(state.normalize(), path)
    fu, fd = slit_waves(config)
    wu = float(np.vdot(cu, cu).real)
    wd = float(np.vdot(cd, cd).real)
    cross = complex(np.vdot(cu, cd))
    env = wu * np.abs(fu) ** 2 + wd * np.abs(fd) ** 2
    inter = 2 * (np.conj(fu) * fd * cross).real
    total = np.clip(env + inter, 0.0, None)
    scale = survival / total.sum() if total.sum() > 0 else 0.0
    fringe = 2 * np.abs(np.conj(fu) * fd) * abs(cross)
    return ScreenPattern(
        config.xs, total * scale, float(survival), env * scale, fringe * scale,
        config.window, label,
    )


def incoherent_pattern(weights: dict, config: ScreenConfig, label: str = "") -> ScreenPattern:
    """Pattern of path weights {"upper": w_u, "lower": w_d} with no interference."""
    fu, fd = slit_waves(config)
    env = weights.get("upper", 0.0) * np.abs(fu) ** 2 + weights.get("lower", 0.0) * np.abs(fd) ** 2
    total = float(sum(weights.values()))
    env = env * (total / env.sum()) if env.sum() > 0 else env
    return ScreenPattern(config.xs, env, total, env, np.zeros_like(env), config.window, label)


def sum_patterns(patterns, label: str = "") -> ScreenPattern:
    """Pointwise sum; the envelope/fringe split is kept only if every part is incoherent."""
    patterns = list(patterns)
    xs = patterns[0].xs
    total = sum(p.intensity for p in patterns)
    surv = float(sum(p.survival for p in patterns))
    env = fringe = None
    if all(p.fringe is not None and not np.any(p.fringe) for p in patterns):
        env = sum(p.envelope for p in patterns)
        fringe = np.zeros_like(total)
    return ScreenPattern(xs, total, surv, env, fringe, patterns[0].window, label)


# ---- components ----

def beam_splitter(label: str = "path", basis=PATH_BASIS) -> Operator:
    return Operator.on(label, basis, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation(theta: float, label: str = "pol", basis=POL_BASIS) -> Operator:
    """Rotate linear polarization by ``theta``: R|up> = cos|up> + sin|right>."""
    return Operator.on(label, basis, rotation_matrix(theta))


def wave_plate(kind: str, angle: float, label: str = "pol", basis=POL_BASIS) -> Operator:
    """Half plate as a direct polarization rotation R(angle); quarter plate
    as a retarder with fast axis at ``angle``: R(a) diag(1, i) R(-a).

    Two passes through a quarter plate at 45 degrees turn |up> into |right>.
    """
    if kind == "half":
        return rotation(angle, label, basis)
    if kind == "quarter":
        m = rotation_matrix(angle) @ np.diag([1, 1j]) @ rotation_matrix(-angle)
        return Operator.on(label, basis, m)
    raise ValueError(f"wave plate kind must be 'half' or 'quarter', got {kind!r}")


def polarization_state(theta: float, label: str = "pol", basis=POL_BASIS) -> StateVector:
    layout = SystemLayout([(label, basis)])
    return StateVector(layout, [np.cos(theta), np.sin(theta)], normalized=True)


def polarizer(theta: float, label: str = "pol", basis=POL_BASIS) -> Operator:
    """Projector |theta><theta| with |theta> = cos|up> + sin|right>."""
    return Operator.projector(polarization_state(theta, label, basis))


def path_phase(phi: float, label: str = "path", basis=PATH_BASIS) -> Operator:
    return Operator.on(label, basis, np.diag([1.0, np.exp(1j * phi)]))


def path_conditional(upper: Operator | None, lower: Operator | None,
                     path_label: str = "path", path_basis=PATH_BASIS) -> Operator:
    """|u><u| (x) upper + |d><d| (x) lower, with identity for a missing side."""
    ref = upper if upper is not None else lower
    if ref is None:
        raise ValueError("path_conditional needs at least one operator")
    eye = np.eye(ref.layout.dim)
    a = eye if upper is None else upper.matrix
    b = eye if lower is None else lower.matrix
    layout = SystemLayout([(path_label, path_basis)]).concat(ref.layout)
    m = np.kron(np.diag([1, 0]), a) + np.kron(np.diag([0, 1]), b)
    return Operator(layout, m)
