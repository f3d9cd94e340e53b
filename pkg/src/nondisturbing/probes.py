"""Operators on a composite space that leave a measurement context alone.

An operator ``A`` on base x probe commutes with every context atom
``P_i (x) I`` exactly when it splits into per-atom probe blocks:
``A = sum_i P_i (x) B_i``.  This module detects that structure, extracts
and reassembles the blocks, and provides the closed forms that follow
from it: partial traces, structural classification, operator order, and
conjugation of product operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_ATOL,
    as_complex_matrix,
    is_effect_matrix,
    is_hermitian,
    is_projection_matrix,
    is_unitary,
    kron,
    loewner_leq,
    max_abs,
    partial_trace,
)
from .objects import Context

__all__ = [
    "ProbeDecomposition",
    "ProbeFlags",
    "ReducedTraceFlags",
    "commutator_defect",
    "is_c_nondisturbing",
    "extract_probes",
    "extract_probes_by_matrix_elements",
    "closed_form_partial_traces",
    "classify",
    "reduced_trace_flags",
    "order_leq_via_probes",
    "conjugate",
    "adjoint_probes",
]


@dataclass(frozen=True, eq=False)
class ProbeDecomposition:
    """A nondisturbing operator split into its per-atom probe blocks."""

    context: Context
    probes: tuple[np.ndarray, ...]

    def __post_init__(self):
        probes = tuple(as_complex_matrix(b, "probe block") for b in self.probes)
        if len(probes) != self.context.dim:
            raise ValueError(
                f"need one probe block per context atom: "
                f"{len(probes)} blocks for dimension {self.context.dim}"
            )
        shapes = {b.shape for b in probes}
        if len(shapes) != 1 or probes[0].shape[0] != probes[0].shape[1]:
            raise ValueError(f"probe blocks must be square and same-shaped, got {shapes}")
        object.__setattr__(self, "probes", probes)

    @property
    def dim_base(self) -> int:
        return self.context.dim

    @property
    def dim_probe(self) -> int:
        return self.probes[0].shape[0]

    def assemble(self) -> np.ndarray:
        """Rebuild the full operator ``sum_i P_i (x) B_i``."""
        return sum(
            kron(self.context.atom(i), b) for i, b in enumerate(self.probes)
        )

    def adjoint(self) -> "ProbeDecomposition":
        return ProbeDecomposition(
            self.context, tuple(b.conj().T for b in self.probes)
        )


@dataclass(frozen=True)
class ProbeFlags:
    """Structural properties shared by a nondisturbing operator and its blocks."""

    self_adjoint: bool
    unitary: bool
    projection: bool
    effect: bool
    observable_family: bool


@dataclass(frozen=True)
class ReducedTraceFlags:
    """Structural properties of the probe-traced operator, read off block traces.

    The projection flag tests block traces for membership in the two-point
    set {0, 1}: a diagonal operator is idempotent exactly when each diagonal
    entry is 0 or 1.
    """

    self_adjoint: bool
    unitary: bool
    effect: bool
    projection: bool


def _check_composite(a: np.ndarray, context: Context, dim_probe: int) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    total = context.dim * dim_probe
    if arr.ndim != 2 or arr.shape != (total, total):
        raise ValueError(
            f"operator must be {total} x {total} for base dimension "
            f"{context.dim} and probe dimension {dim_probe}, got {arr.shape}"
        )
    return arr


def commutator_defect(a, context: Context, dim_probe: int) -> float:
    """Largest commutator norm ``max_i ||[A, P_i (x) I]||_max``."""
    arr = _check_composite(a, context, dim_probe)
    eye = np.eye(dim_probe)
    worst = 0.0
    for p in context.atoms:
        lifted = kron(p, eye)
        worst = max(worst, max_abs(arr @ lifted - lifted @ arr))
    return worst


def is_c_nondisturbing(a, context: Context, dim_probe: int, atol: float = DEFAULT_ATOL) -> bool:
    """True iff ``a`` commutes with every lifted context atom within ``atol``."""
    return commutator_defect(a, context, dim_probe) <= atol


def extract_probes(
    a, context: Context, dim_probe: int, atol: float = DEFAULT_ATOL
) -> ProbeDecomposition:
    """Recover the probe blocks of a nondisturbing operator.

    Block ``i`` is the base-side partial trace of ``A (P_i (x) I)``, which
    is independent of any probe-space basis choice.  Rejects operators
    that fail the commutator test, reporting the largest defect.
    """
    arr = _check_composite(a, context, dim_probe)
    defect = commutator_defect(arr, context, dim_probe)
    if defect > atol:
        raise ValueError(
            f"operator is not nondisturbing for this context "
            f"(largest commutator norm {defect:.3e} > {atol:.3e})"
        )
    eye = np.eye(dim_probe)
    blocks = [
        partial_trace(arr @ kron(p, eye), context.dim, dim_probe, over="left")
        for p in context.atoms
    ]
    return ProbeDecomposition(context, tuple(blocks))


def extract_probes_by_matrix_elements(
    a, context: Context, dim_probe: int, probe_basis: np.ndarray | None = None
) -> ProbeDecomposition:
    """Recover probe blocks from matrix elements against an explicit probe basis.

    Computes ``B_i phi = sum_j <v_i (x) u_j, A (v_i (x) phi)> u_j`` column by
    column, for any orthonormal probe basis ``{u_j}`` (default standard).
    Independent implementation of :func:`extract_probes`, kept as a
    cross-check; the result must not depend on the basis chosen.
    """
    arr = _check_composite(a, context, dim_probe)
    if probe_basis is None:
        probe_basis = np.eye(dim_probe, dtype=complex)
    else:
        probe_basis = np.asarray(probe_basis, dtype=complex)
        if probe_basis.shape != (dim_probe, dim_probe):
            raise ValueError(f"probe basis must be {dim_probe} x {dim_probe}")
    eye = np.eye(dim_probe, dtype=complex)
    blocks = []
    for i in range(context.dim):
        v = context.vector(i).reshape(-1, 1)
        bra = kron(v, probe_basis).conj().T     # rows <v_i (x) u_j|
        ket = arr @ kron(v, eye)                # columns A(v_i (x) e_l)
        blocks.append(probe_basis @ (bra @ ket))
    return ProbeDecomposition(context, tuple(blocks))


def closed_form_partial_traces(decomp: ProbeDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Partial traces of the assembled operator, straight from the blocks.

    Returns ``(over_base, over_probe)``: tracing out the base gives the
    block sum (an operator on the probe space); tracing out the probe
    gives the block traces spread over the atoms (an operator on the base
    space, measurable in the context by construction).
    """
    over_base = sum(decomp.probes)
    over_probe = sum(
        np.trace(b) * decomp.context.atom(i) for i, b in enumerate(decomp.probes)
    )
    return over_base, over_probe


def classify(decomp: ProbeDecomposition, atol: float = DEFAULT_ATOL) -> ProbeFlags:
    """Read structural properties of the assembled operator off its blocks.

    Each flag holds for the full operator exactly when it holds for every
    block; the observable-family flag additionally requires the blocks to
    sum to the probe identity.
    """
    probes = decomp.probes
    effect = all(is_effect_matrix(b, atol) for b in probes)
    family = effect and max_abs(
        sum(probes) - np.eye(decomp.dim_probe)
    ) <= atol
    return ProbeFlags(
        self_adjoint=all(is_hermitian(b, atol) for b in probes),
        unitary=all(is_unitary(b, atol) for b in probes),
        projection=all(is_projection_matrix(b, atol) for b in probes),
        effect=effect,
        observable_family=family,
    )


def reduced_trace_flags(decomp: ProbeDecomposition, atol: float = DEFAULT_ATOL) -> ReducedTraceFlags:
    """Classify the probe-traced operator from the block traces alone."""
    traces = np.array([np.trace(b) for b in decomp.probes])
    real = bool(np.all(np.abs(traces.imag) <= atol))
    return ReducedTraceFlags(
        self_adjoint=real,
        unitary=bool(np.all(np.abs(np.abs(traces) - 1.0) <= atol)),
        effect=real and bool(
            np.all(traces.real >= -atol) and np.all(traces.real <= 1 + atol)
        ),
        projection=real and bool(
            np.all(
                (np.abs(traces.real) <= atol)
                | (np.abs(traces.real - 1.0) <= atol)
            )
        ),
    )


def order_leq_via_probes(
    a: ProbeDecomposition, d: ProbeDecomposition, atol: float = DEFAULT_ATOL
) -> bool:
    """Operator order of assembled operators, decided blockwise."""
    if a.context is not d.context and max_abs(a.context.basis - d.context.basis) > atol:
        raise ValueError("decompositions use different contexts")
    if a.dim_probe != d.dim_probe:
        raise ValueError(
            f"probe dimension mismatch: {a.dim_probe} vs {d.dim_probe}"
        )
    return all(
        loewner_leq(b, c, atol) for b, c in zip(a.probes, d.probes)
    )


def conjugate(decomp: ProbeDecomposition, base_factor, probe_factor) -> np.ndarray:
    """Closed form for ``A (B (x) D) A*`` with ``A`` assembled from the blocks.

    Equals ``sum_{i,j} (P_i B P_j) (x) (B_i D B_j*)`` and never touches the
    full operator.
    """
    b = np.asarray(base_factor, dtype=complex)
    d = np.asarray(probe_factor, dtype=complex)
    n, dk = decomp.dim_base, decomp.dim_probe
    if b.shape != (n, n):
        raise ValueError(f"base factor must be {n} x {n}, got {b.shape}")
    if d.shape != (dk, dk):
        raise ValueError(f"probe factor must be {dk} x {dk}, got {d.shape}")
    atoms = decomp.context.atoms
    total = np.zeros((n * dk, n * dk), dtype=complex)
    for i, bi in enumerate(decomp.probes):
        left = atoms[i] @ b
        mid = bi @ d
        for j, bj in enumerate(decomp.probes):
            total += kron(left @ atoms[j], mid @ bj.conj().T)
    return total


def adjoint_probes(decomp: ProbeDecomposition) -> ProbeDecomposition:
    """Blocks of the adjoint operator: the blockwise adjoints."""
    return decomp.adjoint()
