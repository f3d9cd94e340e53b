"""Built-in nondisturbing model families with their closed-form outputs.

Two unitary families, both using the standard context, the standard
probe basis, and the first probe basis state as the initial probe state:

* the swap family, where atom ``i`` of the base swaps probe basis
  vectors 0 and ``i``; and
* the Fourier-phase family, where atom ``j`` applies a discrete-Fourier
  phase unitary to the probe.

Each constructor returns a full :class:`~nondisturbing.models.MeasurementModel`;
the accompanying helpers evaluate the families' pencil-and-paper closed
forms independently of the general machinery, so tests can pit one
against the other.
"""

from __future__ import annotations

from math import gcd

import numpy as np

from .linalg import DEFAULT_ATOL, kron
from .objects import Context, Observable, State, sharp_observable
from .channels import NDChannel
from .models import MeasurementModel

__all__ = [
    "swap_unitaries",
    "swap_model",
    "swap_product_output",
    "swap_instrument_output",
    "swap_observable_effect",
    "fourier_unitaries",
    "fourier_model",
    "fourier_pair_trace",
    "fourier_observable_effect",
]


def _pure_first_basis_state(dim: int) -> State:
    m = np.zeros((dim, dim), dtype=complex)
    m[0, 0] = 1.0
    return State(m)


def swap_unitaries(n: int) -> list[np.ndarray]:
    """Unitaries ``V_i`` exchanging probe basis vectors 0 and ``i``.

    ``V_0`` is the identity and every ``V_i`` is an involution.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    for i in range(n):
        v = np.eye(n, dtype=complex)
        v[[0, i]] = v[[i, 0]]
        out.append(v)
    return out


def swap_model(
    n: int,
    meter: Observable | None = None,
    probe_state: State | None = None,
    atol: float = DEFAULT_ATOL,
) -> MeasurementModel:
    """Swap-interaction model on an ``n``-dimensional base and probe.

    The meter defaults to the sharp observable on the probe basis and the
    probe starts in the first basis state; both can be overridden.
    """
    if meter is None:
        meter = sharp_observable(n, atol)
    if meter.dim != n:
        raise ValueError(f"meter dimension {meter.dim} != {n}")
    if probe_state is None:
        probe_state = _pure_first_basis_state(n)
    channel = NDChannel(
        Context.standard(n), tuple((v,) for v in swap_unitaries(n)), atol
    )
    return MeasurementModel(n, n, probe_state, channel, meter)


def swap_product_output(rho: State) -> np.ndarray:
    """Channel output of the swap model on ``rho (x) |0><0|``.

    Closed form ``sum_{i,j} (P_i rho P_j) (x) |i><j|`` over the standard
    bases.
    """
    n = rho.dim
    eye = np.eye(n, dtype=complex)
    total = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            base = rho.matrix[i, j] * np.outer(eye[:, i], eye[:, j].conj())
            total += kron(base, np.outer(eye[:, i], eye[:, j].conj()))
    return total


def swap_instrument_output(rho: State, meter_effect: np.ndarray) -> np.ndarray:
    """Instrument outcome of the swap model: ``sum_{i,j} <j|F|i> P_i rho P_j``.

    Over the standard bases this is just an entrywise product with the
    transposed meter effect.
    """
    f = np.asarray(meter_effect, dtype=complex)
    if f.shape != (rho.dim, rho.dim):
        raise ValueError(f"meter effect must be {rho.dim} x {rho.dim}, got {f.shape}")
    return f.T * rho.matrix


def swap_observable_effect(meter_effect: np.ndarray) -> np.ndarray:
    """Measured-observable effect of the swap model: ``sum_i <i|F|i> P_i``."""
    f = np.asarray(meter_effect, dtype=complex)
    return np.diag(np.diagonal(f))


def fourier_unitaries(n: int, m: int) -> list[np.ndarray]:
    """Discrete-Fourier phase unitaries ``V_1 .. V_n`` on an ``m``-dimensional probe.

    ``V_j`` maps probe basis vector ``r`` (counted from 1) to
    ``m^(-1/2) sum_s exp(2 pi i j r s / m) |s>``.  The columns are
    orthonormal exactly when ``gcd(j, m) = 1``, so every ``j`` in
    ``1..n`` must be coprime to ``m``; choosing ``m`` prime with
    ``n <= m - 1`` always works.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m < 2:
        raise ValueError("m must be >= 2")
    for j in range(1, n + 1):
        if gcd(j, m) != 1:
            raise ValueError(
                f"phase unitary {j} is not unitary: gcd({j}, {m}) = {gcd(j, m)} != 1"
            )
    out = []
    r = np.arange(1, m + 1)
    s = np.arange(1, m + 1)
    for j in range(1, n + 1):
        phases = np.exp(2j * np.pi * j * np.outer(s, r) / m)
        out.append(phases / np.sqrt(m))
    return out


def fourier_model(
    n: int,
    m: int,
    meter: Observable | None = None,
    probe_state: State | None = None,
    atol: float = DEFAULT_ATOL,
) -> MeasurementModel:
    """Fourier-phase model on an ``n``-dimensional base and ``m``-dimensional probe."""
    if meter is None:
        meter = sharp_observable(m, atol)
    if meter.dim != m:
        raise ValueError(f"meter dimension {meter.dim} != {m}")
    if probe_state is None:
        probe_state = _pure_first_basis_state(m)
    channel = NDChannel(
        Context.standard(n), tuple((v,) for v in fourier_unitaries(n, m)), atol
    )
    return MeasurementModel(n, m, probe_state, channel, meter)


def fourier_pair_trace(j: int, k: int, m: int, meter_effect: np.ndarray) -> complex:
    """Pair coefficient of the Fourier-phase instrument, straight from phases.

    For atoms ``j`` and ``k`` (counted from 1), the coefficient is
    ``(1/m) sum_{s,t} exp(2 pi i (j s - k t) / m) <t|F|s>``.
    """
    f = np.asarray(meter_effect, dtype=complex)
    if f.shape != (m, m):
        raise ValueError(f"meter effect must be {m} x {m}, got {f.shape}")
    s = np.arange(1, m + 1)
    t = np.arange(1, m + 1)
    phases = np.exp(2j * np.pi * (j * s[None, :] - k * t[:, None]) / m)
    return complex(np.sum(phases * f) / m)


def fourier_observable_effect(n: int, m: int, meter_effect: np.ndarray) -> np.ndarray:
    """Measured-observable effect of the Fourier-phase model.

    Diagonal over the base atoms with entries
    ``(1/m) sum_{s,t} exp(2 pi i j (s - t) / m) <t|F|s>`` for atom ``j``.
    """
    diag = [fourier_pair_trace(j, j, m, meter_effect) for j in range(1, n + 1)]
    return np.diag(np.asarray(diag))
