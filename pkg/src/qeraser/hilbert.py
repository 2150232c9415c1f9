"""Composite Hilbert spaces with labelled subsystems.

States are dense complex vectors over the product basis of a
:class:`SystemLayout`; the index order is row-major over the subsystem list,
so the last subsystem varies fastest (the same convention as ``np.kron``).

All objects are immutable after construction and every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    BasisError,
    DimensionError,
    LayoutError,
    NotProjectorError,
    QuantumError,
)

MAX_DIMENSION = 4096
TOL = 1e-10
PSD_TOL = 1e-10
NULL_SURVIVAL = 1e-14


@dataclass(frozen=True)
class Subsystem:
    label: str
    basis: tuple[str, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)


class SystemLayout:
    """Ordered list of labelled subsystems.

    Each entry is ``(label, dim)`` or ``(label, basis_names)``; an integer
    dimension gets the basis names ``"0" .. "dim-1"``.

    >>> SystemLayout([("path", ("u", "d")), ("pol", 2)]).dim
    4
    """

    __slots__ = ("_subsystems", "_positions")

    def __init__(self, subsystems):
        subs = []
        for entry in subsystems:
            if isinstance(entry, Subsystem):
                sub = entry
            else:
                label, spec = entry
                if isinstance(spec, (int, np.integer)):
                    basis = tuple(str(k) for k in range(int(spec)))
                else:
                    basis = tuple(str(name) for name in spec)
                sub = Subsystem(str(label), basis)
            if sub.dim < 2:
                raise DimensionError(
                    f"subsystem {sub.label!r} has dimension {sub.dim}; at least 2 required"
                )
            if len(set(sub.basis)) != sub.dim:
                raise LayoutError(f"subsystem {sub.label!r} has repeated basis names")
            subs.append(sub)
        if not subs:
            raise LayoutError("layout needs at least one subsystem")
        positions = {}
        for k, sub in enumerate(subs):
            if sub.label in positions:
                raise LayoutError(f"duplicate subsystem label {sub.label!r}")
            positions[sub.label] = k
        total = math.prod(sub.dim for sub in subs)
        if total > MAX_DIMENSION:
            raise DimensionError(
                f"total dimension {total} exceeds the supported maximum {MAX_DIMENSION}"
            )
        self._subsystems = tuple(subs)
        self._positions = positions

    @property
    def subsystems(self) -> tuple[Subsystem, ...]:
        return self._subsystems

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self._subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self._subsystems)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self._subsystems)

    def __iter__(self):
        return iter(self._subsystems)

    def __contains__(self, label):
        return label in self._positions

    def __eq__(self, other):
        return isinstance(other, SystemLayout) and self._subsystems == other._subsystems

    def __hash__(self):
        return hash(self._subsystems)

    def __repr__(self):
        inner = ", ".join(f"{s.label}[{'|'.join(s.basis)}]" for s in self._subsystems)
        return f"SystemLayout({inner})"

    def position(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise LayoutError(f"unknown subsystem label {label!r}") from None

    def subsystem(self, label: str) -> Subsystem:
        return self._subsystems[self.position(label)]

    def positions(self, labels: Sequence[str]) -> list[int]:
        idx = [self.position(label) for label in labels]
        if len(set(idx)) != len(idx):
            raise LayoutError(f"repeated labels in {list(labels)}")
        return idx

    def sub(self, labels: Sequence[str]) -> "SystemLayout":
        """Layout of the named subsystems, in the order given."""
        return SystemLayout([self._subsystems[k] for k in self.positions(labels)])

    def without(self, labels: Sequence[str]) -> "SystemLayout":
        drop = set(self.positions(labels))
        return SystemLayout([s for k, s in enumerate(self._subsystems) if k not in drop])

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        for label in other.labels:
            if label in self:
                raise LayoutError(f"duplicate subsystem label {label!r}")
        return SystemLayout(self._subsystems + other._subsystems)

    def index(self, *names, **by_label) -> int:
        """Flat index of a product basis state.

        Basis names are given positionally in layout order, or by label.
        """
        if names and by_label:
            raise TypeError("give basis names positionally or by label, not both")
        if by_label:
            if set(by_label) != set(self.labels):
                missing = set(self.labels) ^ set(by_label)
                raise LayoutError(f"basis state must name every subsystem; mismatch on {sorted(missing)}")
            names = tuple(by_label[label] for label in self.labels)
        if len(names) == 1 and isinstance(names[0], (tuple, list)):
            names = tuple(names[0])
        if len(names) != len(self._subsystems):
            raise LayoutError(f"expected {len(self._subsystems)} basis names, got {len(names)}")
        multi = []
        for sub, name in zip(self._subsystems, names):
            try:
                multi.append(sub.basis.index(str(name)))
            except ValueError:
                raise LayoutError(f"{name!r} is not a basis state of {sub.label!r}") from None
        return int(np.ravel_multi_index(multi, self.dims))

    def basis_names(self, index: int) -> tuple[str, ...]:
        multi = np.unravel_index(index, self.dims)
        return tuple(sub.basis[k] for sub, k in zip(self._subsystems, multi))


def _single(label, basis):
    return SystemLayout([(label, basis)])


class StateVector:
    """Complex amplitude vector over a layout's product basis.

    Unnormalized kets are allowed; ``normalized=True`` asserts unit norm.
    Every probability-returning function normalizes internally.
    """

    __slots__ = ("layout", "amplitudes", "normalized")

    def __init__(self, layout: SystemLayout, amplitudes, normalized: bool = False):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != layout.dim:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for a layout of dimension {layout.dim}"
            )
        if normalized and abs(np.linalg.norm(amps) - 1.0) > TOL:
            raise QuantumError(f"state flagged normalized has norm {np.linalg.norm(amps)!r}")
        amps.flags.writeable = False
        self.layout = layout
        self.amplitudes = amps
        self.normalized = bool(normalized)

    @classmethod
    def basis(cls, layout: SystemLayout, *names, **by_label) -> "StateVector":
        amps = np.zeros(layout.dim, dtype=complex)
        amps[layout.index(*names, **by_label)] = 1.0
        return cls(layout, amps, normalized=True)

    @classmethod
    def from_dict(cls, layout: SystemLayout, terms: Mapping, normalize: bool = False):
        """Build from ``{(name, name, ...): amplitude}`` over product basis states."""
        amps = np.zeros(layout.dim, dtype=complex)
        for names, value in terms.items():
            if isinstance(names, str):
                names = (names,)
            amps[layout.index(*names)] += value
        state = cls(layout, amps)
        return state.normalize() if normalize else state

    def __repr__(self):
        return f"StateVector({self.layout!r}, norm={self.norm():.6g})"

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n < 1e-300:
            raise QuantumError("cannot normalize the zero vector")
        if self.normalized:
            return self
        return StateVector(self.layout, self.amplitudes / n, normalized=True)

    def amplitude(self, *names, **by_label) -> complex:
        return complex(self.amplitudes[self.layout.index(*names, **by_label)])

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def tensor_array(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def density(self) -> "DensityOperator":
        psi = self.normalize().amplitudes
        return DensityOperator(self.layout, np.outer(psi, psi.conj()))

    def relabel(self, layout: SystemLayout) -> "StateVector":
        if layout.dims != self.layout.dims:
            raise DimensionError("relabel needs identical subsystem dimensions")
        return StateVector(layout, self.amplitudes, self.normalized)

    def allclose(self, other: "StateVector", atol: float = TOL) -> bool:
        _same_layout(self.layout, other.layout)
        return bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0.0, atol=atol))

    def _combine(self, other, sign):
        if not isinstance(other, StateVector):
            return NotImplemented
        _same_layout(self.layout, other.layout)
        return StateVector(self.layout, self.amplitudes + sign * other.amplitudes)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return StateVector(self.layout, -self.amplitudes, self.normalized)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        keeps = self.normalized and abs(abs(scalar) - 1.0) <= TOL
        return StateVector(self.layout, self.amplitudes * scalar, keeps)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        return tensor(self, other)


def _same_layout(a: SystemLayout, b: SystemLayout):
    if a != b:
        raise LayoutError(f"layout mismatch: {a!r} vs {b!r}")


class Operator:
    """Dense square matrix acting on a layout."""

    __slots__ = ("layout", "matrix")

    def __init__(self, layout: SystemLayout, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != layout.dim:
            raise DimensionError(
                f"operator of size {m.shape[0]} on a layout of dimension {layout.dim}"
            )
        m.flags.writeable = False
        self.layout = layout
        self.matrix = m

    @classmethod
    def identity(cls, layout: SystemLayout) -> "Operator":
        return cls(layout, np.eye(layout.dim))

    @classmethod
    def on(cls, label: str, basis, matrix) -> "Operator":
        """Single-subsystem operator, e.g. ``Operator.on("pol", ("up", "right"), m)``."""
        return cls(_single(label, basis), matrix)

    @classmethod
    def projector(cls, state: StateVector) -> "Operator":
        psi = state.normalize().amplitudes
        return cls(state.layout, np.outer(psi, psi.conj()))

    def __repr__(self):
        return f"Operator({self.layout!r})"

    @property
    def dagger(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def is_unitary(self, tol: float = TOL) -> bool:
        eye = np.eye(self.layout.dim)
        return bool(np.max(np.abs(self.matrix.conj().T @ self.matrix - eye)) <= tol)

    def is_hermitian(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_projector(self, tol: float = TOL) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m @ m - m)) <= tol and self.is_hermitian(tol))

    def relabel(self, layout: SystemLayout) -> "Operator":
        if layout.dims != self.layout.dims:
            raise DimensionError("relabel needs identical subsystem dimensions")
        return Operator(layout, self.matrix)

    def kron(self, other: "Operator") -> "Operator":
        return Operator(self.layout.concat(other.layout), np.kron(self.matrix, other.matrix))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _same_layout(self.layout, other.layout)
            return Operator(self.layout, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            _same_layout(self.layout, other.layout)
            out = self.matrix @ other.amplitudes
            return StateVector(self.layout, out)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _same_layout(self.layout, other.layout)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _same_layout(self.layout, other.layout)
        return Operator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__


class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite matrix on a layout."""

    __slots__ = ("layout", "matrix")

    def __init__(self, layout: SystemLayout, matrix, check: bool = True):
        m = np.array(matrix, dtype=complex)
        if m.shape != (layout.dim, layout.dim):
            raise DimensionError(f"density matrix shape {m.shape} on dimension {layout.dim}")
        if check:
            if np.max(np.abs(m - m.conj().T)) > TOL:
                raise QuantumError("density matrix is not hermitian")
            if abs(np.trace(m).real - 1.0) > TOL or abs(np.trace(m).imag) > TOL:
                raise QuantumError(f"density matrix trace is {np.trace(m)!r}, expected 1")
            if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -PSD_TOL:
                raise QuantumError("density matrix has a negative eigenvalue")
        m.flags.writeable = False
        self.layout = layout
        self.matrix = m

    def __repr__(self):
        return f"DensityOperator({self.layout!r})"

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True)
class MeasurementResult:
    outcome_label: str
    probability: float
    post_state: StateVector | None


class ProjectionResult(NamedTuple):
    """Normalized post-projection state and survival probability.

    ``state`` is None for a null projection (survival below 1e-14).
    """

    state: StateVector | None
    survival: float

    @property
    def is_null(self) -> bool:
        return self.state is None


def tensor(*states: StateVector) -> StateVector:
    if not states:
        raise ValueError("tensor needs at least one state")
    out = states[0]
    for nxt in states[1:]:
        layout = out.layout.concat(nxt.layout)
        out = StateVector(
            layout,
            np.kron(out.amplitudes, nxt.amplitudes),
            normalized=out.normalized and nxt.normalized,
        )
    return out


def _target_positions(op: Operator, targets, layout: SystemLayout) -> list[int]:
    labels = op.layout.labels if targets is None else list(targets)
    idx = layout.positions(labels)
    tdim = math.prod(layout.dims[k] for k in idx)
    if tdim != op.layout.dim:
        raise DimensionError(
            f"operator of dimension {op.layout.dim} cannot act on {labels} (dimension {tdim})"
        )
    return idx


def lift(op: Operator, target_labels: Sequence[str] | None, layout: SystemLayout) -> Operator:
    """Embed ``op`` acting on ``target_labels`` into the full ``layout``.

    Targets may be non-contiguous and in any order; the operator's own basis
    order follows ``target_labels``. ``None`` means the operator's own labels.
    """
    idx = _target_positions(op, target_labels, layout)
    n = len(layout)
    rest = [k for k in range(n) if k not in idx]
    order = idx + rest
    rest_dim = math.prod(layout.dims[k] for k in rest)
    big = np.kron(op.matrix, np.eye(rest_dim))
    odims = [layout.dims[k] for k in order]
    inv = list(np.argsort(order))
    big = big.reshape(odims + odims).transpose(inv + [n + k for k in inv])
    return Operator(layout, big.reshape(layout.dim, layout.dim))


def apply(op: Operator, state: StateVector, targets: Sequence[str] | None = None) -> StateVector:
    """Apply ``op`` on ``targets`` of ``state`` without building the lifted matrix."""
    layout = state.layout
    idx = _target_positions(op, targets, layout)
    k = len(idx)
    tdims = [layout.dims[j] for j in idx]
    t = op.matrix.reshape(tdims + tdims)
    psi = state.tensor_array()
    out = np.tensordot(t, psi, axes=(list(range(k, 2 * k)), idx))
    out = np.moveaxis(out, list(range(k)), idx)
    return StateVector(layout, out.reshape(-1))


def partial_inner(bra: StateVector, state: StateVector, labels: Sequence[str] | None = None) -> StateVector:
    """Contract ``<bra|`` against the ``labels`` subsystems of ``state``.

    Returns the unnormalized state of the remaining subsystems.
    """
    layout = state.layout
    labels = bra.layout.labels if labels is None else list(labels)
    idx = layout.positions(labels)
    if [layout.dims[k] for k in idx] != list(bra.layout.dims):
        raise DimensionError(f"bra dimensions {bra.layout.dims} do not match {labels}")
    rest = layout.without(labels)
    b = bra.amplitudes.conj().reshape(bra.layout.dims)
    out = np.tensordot(b, state.tensor_array(), axes=(list(range(len(idx))), idx))
    return StateVector(rest, out.reshape(-1))


def partial_trace(rho: DensityOperator, keep_labels: Sequence[str]) -> DensityOperator:
    """Reduced density operator on ``keep_labels`` (kept in layout order)."""
    keep_labels = list(keep_labels)
    if not keep_labels:
        raise LayoutError("partial trace needs at least one subsystem to keep")
    layout = rho.layout
    keep = sorted(layout.positions(keep_labels))
    n = len(layout)
    t = rho.matrix.reshape(layout.dims + layout.dims)
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out_axes = [k for k in keep] + [n + k for k in keep]
    reduced = np.einsum(t, row + col, out_axes)
    kept = SystemLayout([layout.subsystems[k] for k in keep])
    m = reduced.reshape(kept.dim, kept.dim)
    return DensityOperator(kept, (m + m.conj().T) / 2)


def reduced_density(state: StateVector, keep_labels: Sequence[str]) -> DensityOperator:
    return partial_trace(state.density(), keep_labels)


def project(state: StateVector, projector: Operator, targets: Sequence[str] | None = None) -> ProjectionResult:
    if not projector.is_projector():
        raise NotProjectorError("operator is not an orthogonal projector")
    before = state.norm() ** 2
    if before == 0.0:
        raise QuantumError("cannot project the zero vector")
    post = apply(projector, state, targets)
    survival = post.norm() ** 2 / before
    if survival < NULL_SURVIVAL:
        return ProjectionResult(None, float(survival))
    return ProjectionResult(post.normalize(), float(min(survival, 1.0)))


def computational_basis(layout: SystemLayout) -> dict[str, StateVector]:
    return {
        ",".join(layout.basis_names(k)): StateVector(layout, np.eye(layout.dim)[k], normalized=True)
        for k in range(layout.dim)
    }


def _check_basis(vectors: list[StateVector], sub: SystemLayout):
    for v in vectors:
        if v.layout.dims != sub.dims:
            raise BasisError(f"basis vector dimensions {v.layout.dims} do not match {sub.dims}")
    if len(vectors) != sub.dim:
        raise BasisError(f"basis has {len(vectors)} vectors, target space has dimension {sub.dim}")
    mat = np.array([v.amplitudes for v in vectors])
    gram = mat.conj() @ mat.T
    if np.max(np.abs(gram - np.eye(sub.dim))) > TOL:
        raise BasisError("measurement basis is not orthonormal")


def measure(state: StateVector, target_labels: Sequence[str], basis) -> list[MeasurementResult]:
    """Born-rule measurement of ``target_labels`` in an orthonormal basis.

    ``basis`` is a sequence of states on the target subsystems or a mapping
    from outcome label to state. Results follow the basis order. Outcomes of
    probability below 1e-14 carry ``post_state=None``.
    """
    target_labels = list(target_labels)
    sub = state.layout.sub(target_labels)
    if isinstance(basis, Mapping):
        labels = [str(k) for k in basis]
        vectors = list(basis.values())
    else:
        vectors = list(basis)
        labels = [_outcome_name(v, k) for k, v in enumerate(vectors)]
    _check_basis(vectors, sub)
    psi = state.normalize()
    results = []
    for label, vec in zip(labels, vectors):
        proj = Operator.projector(vec.relabel(sub))
        post = apply(proj, psi, target_labels)
        p = post.norm() ** 2
        post_state = post.normalize() if p >= NULL_SURVIVAL else None
        results.append(MeasurementResult(label, float(p), post_state))
    return results


def _outcome_name(vec: StateVector, k: int) -> str:
    nz = np.flatnonzero(np.abs(vec.amplitudes) > TOL)
    if len(nz) == 1 and abs(abs(vec.amplitudes[nz[0]]) - 1.0) <= TOL:
        return ",".join(vec.layout.basis_names(int(nz[0])))
    return str(k)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    _same_layout(a.layout, b.layout)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def norm(a: StateVector) -> float:
    return a.norm()


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 / (|a|^2 |b|^2); insensitive to global phase."""
    denom = a.norm() ** 2 * b.norm() ** 2
    if denom == 0.0:
        raise QuantumError("fidelity of a zero vector is undefined")
    return float(min(1.0, abs(inner(a, b)) ** 2 / denom))


def expectation(state: StateVector, op: Operator, targets: Sequence[str] | None = None) -> complex:
    psi = state.normalize()
    return complex(np.vdot(psi.amplitudes, apply(op, psi, targets).amplitudes))


def max_abs_diff(a, b) -> float:
    a = getattr(a, "matrix", a)
    b = getattr(b, "matrix", b)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
