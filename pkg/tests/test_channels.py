import numpy as np
import pytest

from nondisturbing.linalg import (
    is_psd,
    kron,
    max_abs,
    partial_trace,
    random_density,
    random_kraus_channel,
    random_unitary,
)
from nondisturbing.objects import Context, State
from nondisturbing.probes import is_c_nondisturbing
from nondisturbing.channels import (
    NDChannel,
    apply_product,
    nd_channel_from_kraus,
    random_nd_channel,
    reduced_product_outputs,
)


def _unitary_channel(n: int, dk: int, seed: int, context: Context | None = None) -> NDChannel:
    ctx = context if context is not None else Context.standard(n)
    return NDChannel(ctx, tuple((random_unitary(dk, seed + i),) for i in range(n)))


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------


def test_unitary_rows_build_a_valid_channel():
    nd = _unitary_channel(3, 2, 0)
    assert nd.kraus_count == 1
    op = nd.as_operation()
    assert max_abs(op.completeness_operator() - np.eye(6)) < 1e-12


def test_row_completeness_violation_names_the_row():
    ctx = Context.standard(2)
    good = tuple(random_kraus_channel(2, 2, 1))
    bad = tuple(0.5 * k for k in good)
    with pytest.raises(ValueError, match="row 1"):
        NDChannel(ctx, (good, bad))


def test_random_table_channels_are_nondisturbing():
    for seed in range(10):
        ctx = Context.random(2, seed) if seed % 2 else Context.standard(2)
        nd = random_nd_channel(ctx, 3, 2, seed)
        for s in nd.induced_kraus:
            assert is_c_nondisturbing(s, ctx, 3, 1e-10)


def test_ragged_or_empty_tables_are_rejected():
    ctx = Context.standard(2)
    row = tuple(random_kraus_channel(2, 2, 3))
    with pytest.raises(ValueError, match="share one nonzero length"):
        NDChannel(ctx, (row, row[:1]))
    with pytest.raises(ValueError, match="one table row per context atom"):
        NDChannel(ctx, (row,))


# ---------------------------------------------------------------------------
# Kraus decomposition round trips
# ---------------------------------------------------------------------------


def test_from_kraus_identity_channel():
    ctx = Context.standard(3)
    nd = nd_channel_from_kraus([np.eye(6)], ctx, 2)
    for row in nd.table:
        assert len(row) == 1
        assert max_abs(row[0] - np.eye(2)) < 1e-12


def test_from_kraus_recovers_table_built_channels():
    for seed in range(10):
        ctx = Context.random(3, seed)
        nd = random_nd_channel(ctx, 2, 2, seed)
        rebuilt = nd_channel_from_kraus(nd.induced_kraus, ctx, 2)
        for row, other in zip(nd.table, rebuilt.table):
            for b, c in zip(row, other):
                assert max_abs(b - c) < 1e-12
        assert max_abs(rebuilt.superoperator - nd.superoperator) < 1e-10


def test_from_kraus_handles_kraus_freedom():
    # mixing the Kraus operators by a unitary leaves the channel alone but
    # changes every operator; the rebuilt table must give the same map
    for seed in range(5):
        ctx = Context.random(2, seed + 400)
        nd = random_nd_channel(ctx, 2, 2, seed)
        mix = random_unitary(nd.kraus_count, seed + 401)
        rotated = [
            sum(mix[j, k] * nd.induced_kraus[k] for k in range(nd.kraus_count))
            for j in range(nd.kraus_count)
        ]
        rebuilt = nd_channel_from_kraus(rotated, ctx, 2)
        assert max_abs(rebuilt.superoperator - nd.superoperator) < 1e-10
        different = max(
            max_abs(a - b) for a, b in zip(rotated, nd.induced_kraus)
        )
        assert different > 1e-3  # the rotation really changed the operators


def test_from_kraus_rejects_disturbing_member_by_index():
    ctx = Context.standard(2)
    swap = np.zeros((4, 4))
    swap[0, 0] = swap[1, 2] = swap[2, 1] = swap[3, 3] = 1.0
    with pytest.raises(ValueError, match="kraus operator 0 is disturbing"):
        nd_channel_from_kraus([swap], ctx, 2)


def test_from_kraus_checks_total_completeness():
    ctx = Context.standard(2)
    half = kron(np.eye(2), np.eye(2)) / 2
    with pytest.raises(ValueError, match="not a channel"):
        nd_channel_from_kraus([half], ctx, 2)


# ---------------------------------------------------------------------------
# Product-state action
# ---------------------------------------------------------------------------


def test_identity_table_acts_as_identity_on_products():
    ctx = Context.random(2, 41)
    nd = NDChannel(ctx, ((np.eye(3),), (np.eye(3),)))
    rho = State(random_density(2, 42))
    eta = State(random_density(3, 43))
    out = apply_product(nd, rho, eta)
    assert max_abs(out - kron(rho.matrix, eta.matrix)) < 1e-12
    reduced = reduced_product_outputs(nd, rho, eta)
    assert max_abs(reduced.base - rho.matrix) < 1e-12
    assert max_abs(reduced.probe - eta.matrix) < 1e-12


def test_apply_product_matches_direct_kraus_action():
    for seed in range(20):
        ctx = Context.random(2, seed + 60)
        nd = random_nd_channel(ctx, 3, 2, seed)
        rho = State(random_density(2, seed + 70))
        eta = State(random_density(3, seed + 80))
        closed = apply_product(nd, rho, eta)
        direct = nd.as_operation().apply_matrix(kron(rho.matrix, eta.matrix))
        assert max_abs(closed - direct) < 1e-10


def test_apply_product_outputs_states():
    for seed in range(100):
        ctx = Context.standard(2)
        nd = random_nd_channel(ctx, 2, 2, seed)
        rho = State(random_density(2, seed + 1))
        eta = State(random_density(2, seed + 2))
        out = apply_product(nd, rho, eta)
        assert abs(np.trace(out).real - 1.0) < 1e-10
        assert is_psd((out + out.conj().T) / 2, 1e-9)


def test_measurable_input_splits_into_atom_blocks():
    ctx = Context.random(3, 91)
    nd = random_nd_channel(ctx, 2, 2, 92)
    weights = np.array([0.5, 0.3, 0.2])
    rho = State(sum(w * ctx.atom(i) for i, w in enumerate(weights)))
    eta = State(random_density(2, 93))
    expected = sum(
        w * kron(ctx.atom(i), nd.probe_channel(i).apply_matrix(eta.matrix))
        for i, w in enumerate(weights)
    )
    assert max_abs(apply_product(nd, rho, eta) - expected) < 1e-10


# ---------------------------------------------------------------------------
# Per-atom probe channels
# ---------------------------------------------------------------------------


def test_probe_channels_are_channels_on_states():
    nd = random_nd_channel(Context.standard(3), 2, 3, 7)
    eta = State(random_density(2, 8))
    for i in range(3):
        out = nd.probe_channel(i).apply_matrix(eta.matrix)
        assert abs(np.trace(out).real - 1.0) < 1e-10
        assert is_psd((out + out.conj().T) / 2, 1e-9)
    with pytest.raises(IndexError):
        nd.probe_channel(3)


def test_unitary_rows_conjugate_the_probe():
    nd = _unitary_channel(2, 3, 30)
    eta = State(random_density(3, 31))
    for i in range(2):
        v = nd.table[i][0]
        out = nd.probe_channel(i).apply_matrix(eta.matrix)
        assert max_abs(out - v @ eta.matrix @ v.conj().T) < 1e-12


def test_swap_rows_move_the_first_basis_state():
    n = 3
    rows = []
    for i in range(n):
        v = np.eye(n, dtype=complex)
        v[[0, i]] = v[[i, 0]]
        rows.append((v,))
    nd = NDChannel(Context.standard(n), tuple(rows))
    first = np.zeros((n, n), dtype=complex)
    first[0, 0] = 1.0
    for i in range(n):
        out = nd.probe_channel(i).apply_matrix(first)
        expected = np.zeros((n, n), dtype=complex)
        expected[i, i] = 1.0
        assert max_abs(out - expected) == 0.0


# ---------------------------------------------------------------------------
# Reduced outputs
# ---------------------------------------------------------------------------


def test_reduced_outputs_match_partial_trace_oracle():
    for seed in range(20):
        ctx = Context.random(3, seed + 150)
        nd = random_nd_channel(ctx, 2, 2, seed)
        rho = State(random_density(3, seed + 160))
        eta = State(random_density(2, seed + 170))
        direct = nd.as_operation().apply_matrix(kron(rho.matrix, eta.matrix))
        reduced = reduced_product_outputs(nd, rho, eta)
        assert max_abs(reduced.base - partial_trace(direct, 3, 2, "right")) < 1e-10
        assert max_abs(reduced.probe - partial_trace(direct, 3, 2, "left")) < 1e-10


def test_reduced_probe_output_is_convex_mixture_of_probe_channels():
    ctx = Context.random(3, 201)
    nd = random_nd_channel(ctx, 2, 3, 202)
    rho = State(random_density(3, 203))
    eta = State(random_density(2, 204))
    weights = ctx.weights(rho.matrix)
    assert weights.min() >= -1e-10
    assert abs(weights.sum() - 1.0) < 1e-10
    mixture = sum(
        w * nd.probe_channel(i).apply_matrix(eta.matrix)
        for i, w in enumerate(weights)
    )
    reduced = reduced_product_outputs(nd, rho, eta)
    assert max_abs(reduced.probe - mixture) < 1e-10


def test_atom_input_selects_one_probe_channel():
    ctx = Context.random(2, 211)
    nd = random_nd_channel(ctx, 3, 2, 212)
    eta = State(random_density(3, 213))
    rho = State(ctx.atom(0))
    reduced = reduced_product_outputs(nd, rho, eta)
    expected = nd.probe_channel(0).apply_matrix(eta.matrix)
    assert max_abs(reduced.probe - expected) < 1e-12
