"""Channels on base x probe built from per-atom probe Kraus tables.

A channel is nondisturbing for a context when it has a Kraus
decomposition in which every Kraus operator splits into per-atom probe
blocks.  The canonical representation here is the probe table
``table[i][k]``: row ``i`` collects the probe-side Kraus operators tied
to context atom ``i``, and each row is itself a channel on the probe
space.  The induced Kraus operators on the composite space are derived
views, never the stored form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import (
    DEFAULT_ATOL,
    as_complex_matrix,
    kron,
    max_abs,
    random_kraus_channel,
)
from .objects import Context, KrausOperation, State
from .probes import commutator_defect, extract_probes

__all__ = [
    "NDChannel",
    "ReducedOutputs",
    "nd_channel_from_kraus",
    "random_nd_channel",
    "apply_product",
    "reduced_product_outputs",
    "pair_overlap_kernel",
]


@dataclass(frozen=True, eq=False)
class NDChannel:
    """Nondisturbing channel given by its probe table.

    ``table[i][k]`` is the probe-side Kraus operator for context atom
    ``i`` and Kraus index ``k``.  Every row must satisfy the channel
    completeness relation on the probe space.
    """

    context: Context
    table: tuple[tuple[np.ndarray, ...], ...]
    atol: float = DEFAULT_ATOL

    def __post_init__(self):
        rows = tuple(
            tuple(as_complex_matrix(b, f"table[{i}][{k}]") for k, b in enumerate(row))
            for i, row in enumerate(self.table)
        )
        if len(rows) != self.context.dim:
            raise ValueError(
                f"need one table row per context atom: "
                f"{len(rows)} rows for dimension {self.context.dim}"
            )
        counts = {len(row) for row in rows}
        if counts == {0} or len(counts) != 1:
            raise ValueError(f"table rows must share one nonzero length, got {counts}")
        shapes = {b.shape for row in rows for b in row}
        if len(shapes) != 1 or rows[0][0].shape[0] != rows[0][0].shape[1]:
            raise ValueError(f"table entries must be square and same-shaped, got {shapes}")
        eye = np.eye(rows[0][0].shape[0])
        for i, row in enumerate(rows):
            defect = max_abs(sum(b.conj().T @ b for b in row) - eye)
            if defect > self.atol:
                raise ValueError(
                    f"table row {i} is not a channel on the probe space "
                    f"(completeness defect {defect:.3e})"
                )
        object.__setattr__(self, "table", rows)

    @property
    def dim_base(self) -> int:
        return self.context.dim

    @property
    def dim_probe(self) -> int:
        return self.table[0][0].shape[0]

    @property
    def kraus_count(self) -> int:
        return len(self.table[0])

    @cached_property
    def table_array(self) -> np.ndarray:
        """Stacked table with shape (dim_base, kraus_count, dim_probe, dim_probe)."""
        arr = np.array([[b for b in row] for row in self.table])
        arr.setflags(write=False)
        return arr

    @cached_property
    def induced_kraus(self) -> tuple[np.ndarray, ...]:
        """Kraus operators on the composite space: ``S_k = sum_i P_i (x) B_i^k``."""
        out = []
        for k in range(self.kraus_count):
            s = sum(
                kron(self.context.atom(i), self.table[i][k])
                for i in range(self.dim_base)
            )
            s.setflags(write=False)
            out.append(s)
        total = sum(s.conj().T @ s for s in out)
        defect = max_abs(total - np.eye(self.dim_base * self.dim_probe))
        if defect > self.atol:
            raise ValueError(
                f"induced Kraus operators violate completeness (defect {defect:.3e})"
            )
        return tuple(out)

    def as_operation(self) -> KrausOperation:
        """The channel on the composite space in generic Kraus form."""
        return KrausOperation(self.induced_kraus, channel=True, atol=self.atol)

    def probe_channel(self, i: int) -> KrausOperation:
        """The channel the probe undergoes when the base sits in atom ``i``."""
        if not 0 <= i < self.dim_base:
            raise IndexError(f"atom index {i} out of range 0..{self.dim_base - 1}")
        return KrausOperation(self.table[i], channel=True, atol=self.atol)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix on row-stacked ``vec``; canonical form for channel equality."""
        return self.as_operation().superoperator


def nd_channel_from_kraus(
    kraus: Sequence[np.ndarray], context: Context, dim_probe: int,
    atol: float = DEFAULT_ATOL,
) -> NDChannel:
    """Build the probe table of a channel given by nondisturbing Kraus operators.

    Every Kraus operator must individually pass the commutator test; the
    first failure is reported with its index and defect.  The resulting
    table row ``i`` collects the atom-``i`` block of each Kraus operator.
    """
    mats = [as_complex_matrix(s, f"kraus[{k}]") for k, s in enumerate(kraus)]
    if not mats:
        raise ValueError("need at least one Kraus operator")
    decomps = []
    for k, s in enumerate(mats):
        defect = commutator_defect(s, context, dim_probe)
        if defect > atol:
            raise ValueError(
                f"kraus operator {k} is disturbing for this context "
                f"(largest commutator norm {defect:.3e} > {atol:.3e})"
            )
        decomps.append(extract_probes(s, context, dim_probe, atol))
    total = sum(s.conj().T @ s for s in mats)
    defect = max_abs(total - np.eye(context.dim * dim_probe))
    if defect > atol:
        raise ValueError(f"kraus family is not a channel (defect {defect:.3e})")
    table = tuple(
        tuple(d.probes[i] for d in decomps) for i in range(context.dim)
    )
    return NDChannel(context, table, atol)


def random_nd_channel(
    context: Context, dim_probe: int, kraus_count: int, seed
) -> NDChannel:
    """Random nondisturbing channel: one random probe channel per atom."""
    rng = np.random.default_rng(seed)
    table = tuple(
        tuple(random_kraus_channel(dim_probe, kraus_count, rng))
        for _ in range(context.dim)
    )
    return NDChannel(context, table)


def _pair_block_products(nd: NDChannel, eta: np.ndarray) -> np.ndarray:
    """k[i, j] = sum_k B_i^k eta B_j^k*, shape (n, n, dim_probe, dim_probe)."""
    t = nd.table_array
    left = t @ eta
    return np.einsum("ikab,jkcb->ijac", left, t.conj())


def pair_overlap_kernel(
    nd: NDChannel, eta: np.ndarray, weight: np.ndarray | None = None
) -> np.ndarray:
    """Coefficient kernel ``c[i, j] = sum_k tr(B_i^k eta B_j^k* W)``.

    With ``weight`` omitted, ``W`` is the identity.  These kernels drive
    every closed form for measured and reduced outputs.
    """
    t = nd.table_array
    left = t @ eta
    right = np.conj(np.swapaxes(t, -1, -2))
    if weight is not None:
        right = right @ np.asarray(weight, dtype=complex)
    return np.einsum("ikab,jkba->ij", left, right)


class ReducedOutputs(NamedTuple):
    """Both partial traces of the channel output on a product state."""

    base: np.ndarray   # probe traced out; acts on the base space
    probe: np.ndarray  # base traced out; acts on the probe space


def apply_product(nd: NDChannel, rho: State, eta: State) -> np.ndarray:
    """Channel output on a product state, as a closed-form block sum.

    Computes ``sum_{i,j,k} (P_i rho P_j) (x) (B_i^k eta B_j^k*)`` without
    forming the composite Kraus operators.
    """
    if rho.dim != nd.dim_base:
        raise ValueError(f"base state has dimension {rho.dim}, expected {nd.dim_base}")
    if eta.dim != nd.dim_probe:
        raise ValueError(f"probe state has dimension {eta.dim}, expected {nd.dim_probe}")
    basis = nd.context.basis
    overlaps = basis.conj().T @ rho.matrix @ basis
    blocks = _pair_block_products(nd, eta.matrix)
    n, dk = nd.dim_base, nd.dim_probe
    out = np.einsum("ij,ai,cj,ijbd->abcd", overlaps, basis, basis.conj(), blocks)
    return out.reshape(n * dk, n * dk)


def reduced_product_outputs(nd: NDChannel, rho: State, eta: State) -> ReducedOutputs:
    """Closed-form partial traces of the channel output on a product state.

    The base-side output is ``sum_{i,j,k} tr(B_i^k eta B_j^k*) P_i rho P_j``;
    the probe-side output is the convex mixture of the per-atom probe
    channels weighted by the context diagonal of ``rho``.
    """
    if rho.dim != nd.dim_base:
        raise ValueError(f"base state has dimension {rho.dim}, expected {nd.dim_base}")
    if eta.dim != nd.dim_probe:
        raise ValueError(f"probe state has dimension {eta.dim}, expected {nd.dim_probe}")
    basis = nd.context.basis
    kernel = pair_overlap_kernel(nd, eta.matrix)
    overlaps = basis.conj().T @ rho.matrix @ basis
    base = basis @ (kernel * overlaps) @ basis.conj().T
    weights = nd.context.weights(rho.matrix)
    t = nd.table_array
    left = t @ eta.matrix
    per_atom = np.einsum("ikab,ikcb->iac", left, t.conj())
    probe = np.einsum("i,iac->ac", weights, per_atom)
    return ReducedOutputs(base=base, probe=probe)
