import numpy as np
import pytest

from nondisturbing.linalg import (
    kron,
    max_abs,
    psd_sqrt,
    random_density,
    random_kraus_channel,
    random_povm,
    random_unitary,
)
from nondisturbing.objects import (
    Context,
    KrausOperation,
    Observable,
    State,
    sharp_observable,
)
from nondisturbing.channels import NDChannel
from nondisturbing.models import (
    AtomKernelMap,
    MeasurementModel,
    apparatus_from_mm,
    measured_instrument_direct,
    measured_instrument_kernel,
    measured_instrument_nd,
    measured_observable_nd,
    post_probe_instrument_direct,
    post_probe_instrument_nd,
    post_probe_observable,
    random_model,
    remeasure_apparatus,
    remeasured_effect_by_substitution,
)


def _identity_channel_model(n: int, dk: int, eta_seed: int, meter_seed: int) -> MeasurementModel:
    eta = State(random_density(dk, eta_seed))
    meter = Observable.from_matrices(random_povm(dk, 2, meter_seed))
    channel = KrausOperation((np.eye(n * dk),), channel=True)
    return MeasurementModel(n, dk, eta, channel, meter)


def _unitary_nd_model(n: int, dk: int, seed: int, eta: State | None = None) -> MeasurementModel:
    rng = np.random.default_rng(seed)
    ctx = Context.random(n, rng)
    nd = NDChannel(ctx, tuple((random_unitary(dk, rng),) for _ in range(n)))
    if eta is None:
        eta = State(random_density(dk, rng))
    meter = Observable.from_matrices(random_povm(dk, 3, rng))
    return MeasurementModel(n, dk, eta, nd, meter)


# ---------------------------------------------------------------------------
# Model validation
# ---------------------------------------------------------------------------


def test_model_rejects_mismatched_dimensions():
    eta = State(np.eye(2) / 2)
    meter = sharp_observable(2)
    channel = KrausOperation((np.eye(6),), channel=True)
    with pytest.raises(ValueError, match="channel dimension"):
        MeasurementModel(2, 2, eta, channel, meter)
    with pytest.raises(ValueError, match="meter dimension"):
        MeasurementModel(3, 2, eta, channel, sharp_observable(3))
    with pytest.raises(ValueError, match="trace preserving"):
        MeasurementModel(
            3, 2, eta, KrausOperation((np.eye(6) / 2,)), meter
        )


def test_closed_forms_require_nd_channel():
    mm = _identity_channel_model(2, 2, 1, 2)
    rho = State(random_density(2, 3))
    with pytest.raises(ValueError, match="nondisturbing"):
        measured_instrument_nd(mm, "0", rho)
    with pytest.raises(ValueError, match="nondisturbing"):
        measured_observable_nd(mm)
    with pytest.raises(ValueError, match="nondisturbing"):
        post_probe_observable(mm, rho)
    with pytest.raises(ValueError, match="nondisturbing"):
        remeasure_apparatus(mm)


# ---------------------------------------------------------------------------
# Brute-force measured instrument
# ---------------------------------------------------------------------------


def test_single_outcome_meter_gives_trace_one_output():
    eta = State(random_density(3, 4))
    meter = Observable.from_matrices([np.eye(3)], ["all"])
    channel = KrausOperation(tuple(random_kraus_channel(6, 2, 5)), channel=True)
    mm = MeasurementModel(2, 3, eta, channel, meter)
    rho = State(random_density(2, 6))
    out = measured_instrument_direct(mm, "all", rho)
    assert abs(out.trace - 1.0) < 1e-10
    direct = channel.apply_matrix(kron(rho.matrix, eta.matrix))
    from nondisturbing.linalg import partial_trace

    assert max_abs(out.matrix - partial_trace(direct, 2, 3, "right")) < 1e-12


def test_identity_channel_with_sharp_meter_scales_the_input():
    n, dk = 2, 3
    eta = State(random_density(dk, 7))
    mm = MeasurementModel(
        n, dk, eta, KrausOperation((np.eye(n * dk),), channel=True), sharp_observable(dk)
    )
    rho = State(random_density(n, 8))
    for j in range(dk):
        out = measured_instrument_direct(mm, str(j), rho)
        weight = eta.matrix[j, j].real
        assert max_abs(out.matrix - weight * rho.matrix) < 1e-12


def test_outcome_traces_form_a_probability_distribution():
    for seed in range(20):
        mm = random_model(2, 3, 3, 2, seed)
        rho = State(random_density(2, seed + 900))
        traces = [
            measured_instrument_direct(mm, x, rho).trace for x in mm.meter.labels
        ]
        assert min(traces) > -1e-10
        assert abs(sum(traces) - 1.0) < 1e-10


# ---------------------------------------------------------------------------
# Closed-form measured instrument and observable
# ---------------------------------------------------------------------------


def test_closed_form_instrument_matches_direct_path():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        dk = int(rng.integers(2, 5))
        m = int(rng.integers(1, 4))
        mm = random_model(n, dk, 2, m, rng, context=Context.random(n, rng))
        rho = State(random_density(n, rng))
        for x in mm.meter.labels:
            closed = measured_instrument_nd(mm, x, rho).matrix
            direct = measured_instrument_direct(mm, x, rho).matrix
            assert max_abs(closed - direct) < 1e-10


def test_instrument_kernel_is_psd_and_kraus_form_matches():
    mm = random_model(3, 2, 2, 2, 17)
    rho = State(random_density(3, 18))
    for x in mm.meter.labels:
        kernel = measured_instrument_kernel(mm, x)
        w = np.linalg.eigvalsh((kernel.coeff + kernel.coeff.conj().T) / 2)
        assert w[0] > -1e-12
        out = kernel.apply(rho.matrix)
        via_kraus = sum(
            k @ rho.matrix @ k.conj().T for k in kernel.kraus_operators()
        )
        assert max_abs(out - via_kraus) < 1e-10
        via_super = (kernel.superoperator @ rho.matrix.reshape(-1)).reshape(3, 3)
        assert max_abs(out - via_super) < 1e-12


def test_measurable_inputs_stay_measurable():
    mm = random_model(3, 2, 2, 2, 19, context=Context.random(3, 20))
    ctx = mm.nd.context
    weights = np.array([0.2, 0.3, 0.5])
    rho = State(sum(w * ctx.atom(i) for i, w in enumerate(weights)))
    for x in mm.meter.labels:
        out = measured_instrument_nd(mm, x, rho).matrix
        assert ctx.is_measurable(out, 1e-10)
        expected = sum(
            w
            * np.trace(
                mm.nd.probe_channel(i).apply_matrix(mm.probe_state.matrix)
                @ mm.meter.effect_matrix(x)
            ).real
            * ctx.atom(i)
            for i, w in enumerate(weights)
        )
        assert max_abs(out - expected) < 1e-10


def test_measured_observable_is_complete_commuting_and_paired():
    for seed in range(20):
        mm = random_model(3, 3, 3, 2, seed + 40, context=Context.random(3, seed))
        obs = measured_observable_nd(mm)
        mats = [obs.effect_matrix(x) for x in obs.labels]
        assert max_abs(sum(mats) - np.eye(3)) < 1e-10
        for a in range(len(mats)):
            for b in range(a + 1, len(mats)):
                assert max_abs(mats[a] @ mats[b] - mats[b] @ mats[a]) < 1e-10
        rho = State(random_density(3, seed + 41))
        for x in obs.labels:
            paired = np.trace(rho.matrix @ obs.effect_matrix(x)).real
            direct = measured_instrument_direct(mm, x, rho).trace
            assert abs(paired - direct) < 1e-10
        assert all(mm.nd.context.is_measurable(m, 1e-10) for m in mats)


def test_unitary_rows_give_conjugated_coefficient_form():
    mm = _unitary_nd_model(3, 2, 55)
    nd = mm.nd
    eta = mm.probe_state.matrix
    rho = State(random_density(3, 56))
    basis = nd.context.basis
    for x in mm.meter.labels:
        f = mm.meter.effect_matrix(x)
        coeff = np.array(
            [
                [
                    np.trace(nd.table[i][0] @ eta @ nd.table[j][0].conj().T @ f)
                    for j in range(3)
                ]
                for i in range(3)
            ]
        )
        overlaps = basis.conj().T @ rho.matrix @ basis
        explicit = basis @ (coeff * overlaps) @ basis.conj().T
        assert max_abs(explicit - measured_instrument_nd(mm, x, rho).matrix) < 1e-10


def test_commuting_probe_state_collapses_observable_to_scalars():
    n, dk = 3, 4
    rng = np.random.default_rng(57)
    ctx = Context.random(n, rng)
    nd = NDChannel(ctx, tuple((random_unitary(dk, rng),) for _ in range(n)))
    eta = State(np.eye(dk, dtype=complex) / dk)
    meter = Observable.from_matrices(random_povm(dk, 3, rng))
    mm = MeasurementModel(n, dk, eta, nd, meter)
    obs = measured_observable_nd(mm)
    for x in obs.labels:
        scale = np.trace(eta.matrix @ meter.effect_matrix(x)).real
        assert max_abs(obs.effect_matrix(x) - scale * np.eye(n)) < 1e-10


# ---------------------------------------------------------------------------
# Post-interaction probe instrument and observable
# ---------------------------------------------------------------------------


def test_post_probe_single_outcome_reduces_to_plain_partial_trace():
    eta = State(random_density(2, 60))
    meter = Observable.from_matrices([np.eye(2)], ["all"])
    channel = KrausOperation(tuple(random_kraus_channel(6, 2, 61)), channel=True)
    mm = MeasurementModel(3, 2, eta, channel, meter)
    rho = State(random_density(3, 62))
    sigma = State(random_density(2, 63))
    out = post_probe_instrument_direct(mm, rho, "all", sigma)
    from nondisturbing.linalg import partial_trace

    direct = channel.apply_matrix(kron(rho.matrix, sigma.matrix))
    assert max_abs(out.matrix - partial_trace(direct, 3, 2, "left")) < 1e-12
    assert abs(out.trace - 1.0) < 1e-10


def test_post_probe_identity_channel_sandwiches_the_probe():
    n, dk = 2, 3
    eta = State(random_density(dk, 64))
    meter = Observable.from_matrices(random_povm(dk, 2, 65))
    mm = MeasurementModel(
        n, dk, eta, KrausOperation((np.eye(n * dk),), channel=True), meter
    )
    rho = State(random_density(n, 66))
    sigma = State(random_density(dk, 67))
    for x in meter.labels:
        root = psd_sqrt(meter.effect_matrix(x))
        out = post_probe_instrument_direct(mm, rho, x, sigma)
        assert max_abs(out.matrix - root @ sigma.matrix @ root) < 1e-12


def test_post_probe_closed_form_matches_direct_path():
    for seed in range(50):
        rng = np.random.default_rng(seed + 3000)
        n = int(rng.integers(2, 5))
        dk = int(rng.integers(2, 5))
        mm = random_model(n, dk, 3, int(rng.integers(1, 4)), rng,
                          context=Context.random(n, rng))
        rho = State(random_density(n, rng))
        sigma = State(random_density(dk, rng))
        for x in mm.meter.labels:
            closed = post_probe_instrument_nd(mm, rho, x, sigma).matrix
            direct = post_probe_instrument_direct(mm, rho, x, sigma).matrix
            assert max_abs(closed - direct) < 1e-10


def test_post_probe_outputs_sum_to_trace_one():
    mm = random_model(2, 3, 3, 2, 70)
    rho = State(random_density(2, 71))
    sigma = State(random_density(3, 72))
    total = sum(
        post_probe_instrument_nd(mm, rho, x, sigma).trace for x in mm.meter.labels
    )
    assert abs(total - 1.0) < 1e-10


def test_atom_input_selects_single_probe_channel_term():
    mm = random_model(3, 2, 2, 2, 73, context=Context.random(3, 74))
    nd = mm.nd
    sigma = State(random_density(2, 75))
    rho = State(nd.context.atom(1))
    for x in mm.meter.labels:
        root = psd_sqrt(mm.meter.effect_matrix(x))
        expected = root @ nd.probe_channel(1).apply_matrix(sigma.matrix) @ root
        out = post_probe_instrument_nd(mm, rho, x, sigma).matrix
        assert max_abs(out - expected) < 1e-10


def test_post_probe_observable_duality_and_completeness():
    for seed in range(20):
        mm = random_model(2, 3, 3, 2, seed + 80)
        rho = State(random_density(2, seed + 81))
        sigma = State(random_density(3, seed + 82))
        obs = post_probe_observable(mm, rho)
        mats = [obs.effect_matrix(x) for x in obs.labels]
        assert max_abs(sum(mats) - np.eye(3)) < 1e-10
        for x in obs.labels:
            paired = np.trace(sigma.matrix @ obs.effect_matrix(x)).real
            closed = post_probe_instrument_nd(mm, rho, x, sigma).trace
            assert abs(paired - closed) < 1e-10


def test_post_probe_observable_at_atom_is_pulled_back_meter():
    mm = random_model(3, 2, 2, 2, 83, context=Context.random(3, 84))
    nd = mm.nd
    for i in range(3):
        obs = post_probe_observable(mm, State(nd.context.atom(i)))
        for x in obs.labels:
            expected = nd.probe_channel(i).dual_matrix(mm.meter.effect_matrix(x))
            assert max_abs(obs.effect_matrix(x) - expected) < 1e-10


def test_unitary_rows_pull_the_meter_back_by_conjugation():
    mm = _unitary_nd_model(2, 3, 85)
    nd = mm.nd
    rho = State(random_density(2, 86))
    weights = nd.context.weights(rho.matrix)
    sigma = State(random_density(3, 87))
    for x in mm.meter.labels:
        f = mm.meter.effect_matrix(x)
        pulled = sum(
            weights[i] * nd.table[i][0].conj().T @ f @ nd.table[i][0]
            for i in range(2)
        )
        assert max_abs(post_probe_observable(mm, rho).effect_matrix(x) - pulled) < 1e-10
        root = psd_sqrt(f)
        sandwiched = sum(
            weights[i]
            * root @ nd.table[i][0] @ sigma.matrix @ nd.table[i][0].conj().T @ root
            for i in range(2)
        )
        assert max_abs(
            post_probe_instrument_nd(mm, rho, x, sigma).matrix - sandwiched
        ) < 1e-10


# ---------------------------------------------------------------------------
# Apparatus
# ---------------------------------------------------------------------------


def test_apparatus_evaluates_to_post_probe_observable():
    mm = random_model(2, 3, 3, 2, 90)
    app = apparatus_from_mm(mm)
    for i in range(2):
        rho = State(mm.nd.context.atom(i))
        obs = app.observable(rho)
        for x in obs.labels:
            expected = mm.nd.probe_channel(i).dual_matrix(mm.meter.effect_matrix(x))
            assert max_abs(obs.effect_matrix(x) - expected) < 1e-10


def test_apparatus_is_affine_on_random_mixtures():
    mm = random_model(3, 2, 3, 2, 91)
    app = apparatus_from_mm(mm)
    rng = np.random.default_rng(92)
    for _ in range(20):
        states = [State(random_density(3, rng)) for _ in range(3)]
        weights = rng.dirichlet(np.ones(3))
        mixture = State(sum(w * s.matrix for w, s in zip(weights, states)))
        for x in app.labels:
            mixed = sum(
                w * app.effect(s, x) for w, s in zip(weights, states)
            )
            assert max_abs(app.effect(mixture, x) - mixed) < 1e-10


def test_apparatus_is_complete_for_random_states():
    mm = random_model(2, 4, 3, 2, 93)
    app = apparatus_from_mm(mm)
    for seed in range(20):
        rho = State(random_density(2, seed + 94))
        total = sum(app.effect(rho, x) for x in app.labels)
        assert max_abs(total - np.eye(4)) < 1e-10


def test_apparatus_rejects_unknown_labels():
    mm = random_model(2, 2, 2, 1, 95)
    app = apparatus_from_mm(mm)
    with pytest.raises(KeyError):
        app.effect(State(np.eye(2) / 2), "missing")


# ---------------------------------------------------------------------------
# Remeasurement
# ---------------------------------------------------------------------------


def test_remeasure_matches_substitution_oracle():
    for seed in range(50):
        rng = np.random.default_rng(seed + 5000)
        n = int(rng.integers(2, 5))
        dk = int(rng.integers(2, 4))
        mm = random_model(n, dk, 2, int(rng.integers(1, 4)), rng,
                          context=Context.random(n, rng))
        rho = State(random_density(n, rng))
        family = remeasure_apparatus(mm)
        for x in family.labels:
            closed = family.effect(rho, x)
            oracle = remeasured_effect_by_substitution(mm, rho, x)
            assert max_abs(closed - oracle) < 1e-10


def test_remeasure_unitary_case_matches_explicit_double_product():
    mm = _unitary_nd_model(3, 2, 96)
    nd = mm.nd
    eta = mm.probe_state.matrix
    rho = State(random_density(3, 97))
    weights = nd.context.weights(rho.matrix)
    family = remeasure_apparatus(mm)
    for x in mm.meter.labels:
        f = mm.meter.effect_matrix(x)
        diag = np.zeros(3)
        for i in range(3):
            for j in range(3):
                w = nd.table[i][0] @ nd.table[j][0]
                diag[i] += np.trace(w @ eta @ w.conj().T @ f).real
        explicit = (nd.context.basis * (diag * weights)) @ nd.context.basis.conj().T
        assert max_abs(explicit - family.effect(rho, x)) < 1e-10


def test_remeasure_identity_table_scales_the_dephased_state():
    n, dk = 3, 2
    ctx = Context.random(n, 98)
    nd = NDChannel(ctx, ((np.eye(dk),),) * n)
    eta = State(random_density(dk, 99))
    meter = Observable.from_matrices(random_povm(dk, 2, 100))
    mm = MeasurementModel(n, dk, eta, nd, meter)
    rho = State(random_density(n, 101))
    family = remeasure_apparatus(mm)
    dephased = ctx.dephase(rho.matrix)
    for x in meter.labels:
        scale = np.trace(eta.matrix @ meter.effect_matrix(x)).real
        # every atom pair contributes once, so the inner sum scales by n
        assert max_abs(family.effect(rho, x) - n * scale * dephased) < 1e-10


def test_remeasure_outcome_sum_is_scaled_dephasing():
    mm = random_model(3, 2, 3, 2, 102, context=Context.random(3, 103))
    rho = State(random_density(3, 104))
    family = remeasure_apparatus(mm)
    total = sum(family.effect(rho, x) for x in family.labels)
    dephased = mm.nd.context.dephase(rho.matrix)
    assert max_abs(total - 3 * dephased) < 1e-10


def test_remeasure_is_affine_in_the_state():
    mm = random_model(2, 3, 2, 2, 105)
    family = remeasure_apparatus(mm)
    rng = np.random.default_rng(106)
    states = [State(random_density(2, rng)) for _ in range(3)]
    weights = rng.dirichlet(np.ones(3))
    mixture = State(sum(w * s.matrix for w, s in zip(weights, states)))
    for x in family.labels:
        mixed = sum(w * family.effect(s, x) for w, s in zip(weights, states))
        assert max_abs(family.effect(mixture, x) - mixed) < 1e-10


# ---------------------------------------------------------------------------
# Kernel map plumbing
# ---------------------------------------------------------------------------


def test_atom_kernel_map_validates_shape():
    with pytest.raises(ValueError, match="kernel must be"):
        AtomKernelMap(Context.standard(2), np.eye(3))


def test_atom_kernel_map_dephasing_kernel():
    ctx = Context.random(3, 107)
    kernel = AtomKernelMap(ctx, np.eye(3))
    rho = random_density(3, 108)
    assert max_abs(kernel.apply(rho) - ctx.dephase(rho)) < 1e-12


def test_atom_kernel_map_rejects_indefinite_kernel_for_kraus():
    kernel = AtomKernelMap(Context.standard(2), np.diag([1.0, -0.5]))
    with pytest.raises(ValueError, match="not PSD"):
        kernel.kraus_operators()


def test_atom_kernel_map_zero_kernel_has_zero_kraus_form():
    kernel = AtomKernelMap(Context.standard(2), np.zeros((2, 2)))
    ops = kernel.kraus_operators()
    assert len(ops) == 1
    assert max_abs(ops[0]) == 0.0
    rho = random_density(2, 109)
    assert max_abs(kernel.apply(rho)) == 0.0
