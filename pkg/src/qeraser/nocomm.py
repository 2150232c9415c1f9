"""No-communication checks: Alice's marginal under anything Bob does locally.

Bob's measurements are dilated: his system is coupled to fresh ancillas by
a unitary, and the ancillas are traced out together with his system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import InvariantViolation, LayoutError, NotUnitaryError
from .hilbert import (
    DensityOperator,
    Operator,
    StateVector,
    SystemLayout,
    apply,
    max_abs_diff,
    reduced_density,
    tensor,
)

KINDS = ("unitary_on_B", "dilated_measurement")


@dataclass(frozen=True, eq=False)
class BobOperation:
    """A unitary on Bob's ``targets``, followed by any fresh ancillas.

    For ``dilated_measurement`` the operator acts on targets (x) ancillas,
    in that order; ancillas start in their first basis state.
    """

    kind: str
    operator: Operator
    targets: tuple
    ancilla_dims: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "unitary_on_B" and self.ancilla_dims:
            raise ValueError("a plain unitary on B takes no ancillas")
        if self.kind == "dilated_measurement" and not self.ancilla_dims:
            raise ValueError("a dilated measurement needs at least one ancilla")
        if not self.operator.is_unitary():
            raise NotUnitaryError("Bob's operation must be unitary")
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "ancilla_dims", tuple(int(d) for d in self.ancilla_dims))

    @classmethod
    def unitary(cls, matrix, targets: Sequence[str], layout: SystemLayout) -> "BobOperation":
        sub = layout.sub(list(targets))
        return cls("unitary_on_B", Operator(sub, matrix), tuple(targets))


def ancilla_layout(dims) -> SystemLayout:
    return SystemLayout([(f"_anc{k}", d) for k, d in enumerate(dims)])


def dilated_measurement(basis: np.ndarray, targets: Sequence[str], layout: SystemLayout,
                        ancilla_dims=(2,)) -> BobOperation:
    """Record the outcome of measuring ``targets`` in ``basis`` on ancillas.

    ``basis`` holds the measurement vectors as columns. The coupling is
    U = sum_k |b_k><b_k| (x) X^k with X the cyclic shift of the joint
    ancilla register, so outcome k writes the ancilla value k mod D.
    """
    sub = layout.sub(list(targets))
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (sub.dim, sub.dim):
        raise LayoutError(f"basis must be {sub.dim}x{sub.dim} for {list(targets)}")
    anc = ancilla_layout(ancilla_dims)
    shift = np.roll(np.eye(anc.dim), 1, axis=0)
    u = np.zeros((sub.dim * anc.dim,) * 2, dtype=complex)
    power = np.eye(anc.dim)
    for k in range(sub.dim):
        proj = np.outer(basis[:, k], basis[:, k].conj())
        u += np.kron(proj, power)
        power = shift @ power
    return BobOperation("dilated_measurement", Operator(sub.concat(anc), u), tuple(targets), tuple(ancilla_dims))


def _check_split(layout: SystemLayout, alice_labels, op: BobOperation | None = None):
    alice = list(alice_labels)
    if not alice:
        raise LayoutError("Alice needs at least one subsystem")
    layout.positions(alice)
    if len(alice) == len(layout):
        raise LayoutError("Bob needs at least one subsystem")
    if op is not None:
        touched = sorted(set(op.targets) & set(alice))
        if touched:
            raise LayoutError(f"operation touches Alice's subsystem(s) {touched}")
        layout.positions(list(op.targets))
    return alice


def apply_bob(state: StateVector, op: BobOperation, alice_labels) -> StateVector:
    _check_split(state.layout, alice_labels, op)
    psi = state
    targets = list(op.targets)
    if op.ancilla_dims:
        anc = ancilla_layout(op.ancilla_dims)
        for label in anc.labels:
            if label in psi.layout:
                raise LayoutError(f"ancilla label {label!r} already in use")
        psi = tensor(psi, StateVector.basis(anc, *[anc.subsystem(l).basis[0] for l in anc.labels]))
        targets += list(anc.labels)
    return apply(op.operator, psi, targets)


def reduced_after(state: StateVector, op: BobOperation | None, alice_labels) -> DensityOperator:
    """Alice's reduced state after Bob's operation (None for doing nothing)."""
    alice = _check_split(state.layout, alice_labels, op)
    psi = state.normalize()
    if op is not None:
        psi = apply_bob(psi, op, alice)
    return reduced_density(psi, alice)


def verify_no_communication(state: StateVector, ops, alice_labels, tol: float = 1e-10,
                            strict: bool = False) -> float:
    """Largest entrywise change of Alice's marginal over ``ops``.

    With ``strict`` a deviation above ``tol`` raises InvariantViolation.
    """
    before = reduced_after(state, None, alice_labels)
    worst = 0.0
    for op in ops:
        worst = max(worst, max_abs_diff(reduced_after(state, op, alice_labels), before))
    if strict and worst > tol:
        raise InvariantViolation(f"Alice's marginal changed by {worst:.3e} > {tol:g}")
    return worst


def interleaved_deviation(state: StateVector, alice_labels, steps) -> float:
    """Alternate Alice's own unitaries with Bob's operations.

    ``steps`` is a list of (alice_op, bob_op) where alice_op acts on Alice's
    labels. The result is compared with the same run with Bob idle.
    """
    alice = _check_split(state.layout, alice_labels)
    with_bob = state.normalize()
    without = state.normalize()
    for ua, bob in steps:
        with_bob = apply(ua, with_bob, alice)
        without = apply(ua, without, alice)
        if bob is not None:
            with_bob = apply_bob(with_bob, bob, alice)
    return max_abs_diff(reduced_density(with_bob, alice), reduced_density(without, alice))


def negative_control(state: StateVector, global_op: Operator, alice_labels,
                     targets: Sequence[str] | None = None) -> float:
    """Change of Alice's marginal under an operation that is not Bob-confined."""
    alice = _check_split(state.layout, alice_labels)
    psi = state.normalize()
    after = apply(global_op, psi, targets)
    return max_abs_diff(reduced_density(after, alice), reduced_density(psi, alice))


def cnot(control: int = 0) -> np.ndarray:
    """CNOT on two qubits with the given control position (0 or 1)."""
    m = np.zeros((4, 4))
    for a in (0, 1):
        for b in (0, 1):
            bits = [a, b]
            if bits[control]:
                bits[1 - control] ^= 1
            m[2 * bits[0] + bits[1], 2 * a + b] = 1
    return m


# ---- seeded sweep ----

def random_state(layout: SystemLayout, rng: np.random.Generator) -> StateVector:
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(layout, v).normalize()


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_case(rng: np.random.Generator, kind: str, ancillas: int = 1):
    """A random A (x) B state and one B-confined operation of ``kind``."""
    a_dims = [int(rng.choice([2, 3])) for _ in range(int(rng.integers(1, 3)))]
    b_dims = [int(rng.choice([2, 3])) for _ in range(int(rng.integers(1, 3)))]
    layout = SystemLayout([(f"A{k}", d) for k, d in enumerate(a_dims)] +
                          [(f"B{k}", d) for k, d in enumerate(b_dims)])
    alice = [f"A{k}" for k in range(len(a_dims))]
    bob = [f"B{k}" for k in range(len(b_dims))]
    # Bob may act on all of his subsystems or on one of them
    targets = bob if rng.random() < 0.5 else [bob[int(rng.integers(len(bob)))]]
    state = random_state(layout, rng)
    sub = layout.sub(targets)
    if kind == "unitary_on_B":
        op = BobOperation.unitary(random_unitary(sub.dim, rng), targets, layout)
    else:
        op = dilated_measurement(random_unitary(sub.dim, rng), targets, layout, (2,) * ancillas)
    return state, op, alice


@dataclass(frozen=True)
class SweepResult:
    cases: int
    max_deviation: float
    by_kind: dict


def sweep(cases: int = 1000, seed: int = 0) -> SweepResult:
    """Seeded no-communication sweep; case k uses the k-th spawned seed.

    Cases cycle through plain unitaries, dilated measurements with one
    ancilla qubit and dilated measurements with two ancilla qubits.
    """
    children = np.random.SeedSequence(seed).spawn(cases)
    kinds = [("unitary_on_B", 0), ("dilated_measurement", 1), ("dilated_measurement", 2)]
    by_kind = {"unitary_on_B": 0.0, "dilated_1": 0.0, "dilated_2": 0.0}
    worst = 0.0
    for k, child in enumerate(children):
        kind, anc = kinds[k % 3]
        rng = np.random.default_rng(child)
        state, op, alice = random_case(rng, kind, max(anc, 1))
        dev = verify_no_communication(state, [op], alice)
        key = "unitary_on_B" if anc == 0 else f"dilated_{anc}"
        by_kind[key] = max(by_kind[key], dev)
        worst = max(worst, dev)
    return SweepResult(cases, worst, by_kind)
