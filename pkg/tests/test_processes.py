import numpy as np
import pytest
from hypothesis import given

from jordanopt.composition import cup, tensor_element, tensor_system
from jordanopt.optmodel import basis_state, make_filter, random_pure_state
from jordanopt.processes import (
    KrausFamily,
    NotCompletelyPositiveError,
    ProcessChoi,
    ProcessClass,
    apply,
    choi_distance,
    choi_from_kraus,
    choi_from_process,
    classify_process,
    complete_to_test,
    compose_parallel,
    compose_sequential,
    discard_and_prepare,
    discard_effect,
    effect_process,
    equality_predicates,
    identity_process,
    kraus_from_choi,
    locally_equal,
    process_from_choi,
    processes_equal,
    random_kraus,
    state_process,
    swap_process,
    zero_process,
)
from jordanopt.systems import (
    BlockHermitian,
    SystemMismatchError,
    SystemSpec,
    random_state,
    spanning_states,
)
from strategies import seeds, systems


def test_identity_choi_is_the_cup():
    for system in ["2", "1,2", "3"]:
        ident = identity_process(system)
        assert ident.choi.distance(cup(system).cup) == 0.0
        assert classify_process(ident) is ProcessClass.CP_TP


def test_kraus_examples():
    single = choi_from_kraus(KrausFamily("2", "2", {(0, 0): [np.eye(2)]}))
    assert single.choi.distance(cup("2").cup) == 0.0
    dephase = KrausFamily("2", "2", {(0, 0): [np.diag([1, 0]), np.diag([0, 1])]})
    np.testing.assert_allclose(choi_from_kraus(dephase).choi.blocks[0], np.diag([1, 0, 0, 1]))
    with pytest.raises(ValueError):
        KrausFamily("2", "3", {(0, 0): [np.eye(2)]})


def test_kraus_from_non_cp_choi_raises():
    with pytest.raises(NotCompletelyPositiveError):
        kraus_from_choi(-1.0 * identity_process("2"))


@given(systems(2, 2), systems(2, 2), seeds)
def test_choi_kraus_round_trip(a, b, seed):
    k = random_kraus(a, b, np.random.default_rng(seed), n_ops=2)
    f = choi_from_kraus(k)
    assert choi_distance(choi_from_kraus(kraus_from_choi(f)), f) <= 1e-9
    rho = random_state(a, np.random.default_rng(seed + 1))
    assert apply(f, rho).distance(k.apply(rho)) <= 1e-9
    assert apply(f, rho).distance(kraus_from_choi(f).apply(rho)) <= 1e-9


@given(systems(2, 2), systems(2, 2), seeds)
def test_map_and_choi_are_inverse(a, b, seed):
    f = choi_from_kraus(random_kraus(a, b, np.random.default_rng(seed)))
    g = process_from_choi(f)
    rebuilt = choi_from_process(a, b, lambda blocks: _raw(g, a, blocks))
    assert choi_distance(rebuilt, f) <= 1e-10


def _raw(g, system, blocks):
    # split a complex block list into Hermitian parts so the map sees valid inputs
    herm = BlockHermitian(system, tuple((x + x.conj().T) / 2 for x in blocks))
    anti = BlockHermitian(system, tuple((x - x.conj().T) / 2j for x in blocks))
    return [h + 1j * s for h, s in zip(g(herm).blocks, g(anti).blocks)]


def test_apply_examples():
    rho = random_state("1,2", np.random.default_rng(1))
    assert apply(identity_process("1,2"), rho).distance(rho) == 0.0
    sigma = random_state("2", np.random.default_rng(2))
    out = apply(discard_and_prepare("1,2", sigma), 2.0 * rho)
    assert out.distance(2.0 * sigma) <= 1e-12
    with pytest.raises(SystemMismatchError):
        apply(identity_process("2"), rho)


def test_states_and_effects_as_processes():
    rho = random_state("1,2", np.random.default_rng(4))
    e = random_state("1,2", np.random.default_rng(5), normalized=False)
    assert apply(state_process(rho), BlockHermitian.identity("1")).distance(rho) <= 1e-15
    out = apply(effect_process(e), rho)
    assert out.blocks[0][0, 0].real == pytest.approx(e.pair(rho))


def test_classification_examples():
    assert classify_process(identity_process("2")) is ProcessClass.CP_TP
    f = make_filter(basis_state("2", 0, 0), 0.5)
    assert classify_process(f.process) is ProcessClass.CP_TRACE_NON_INCREASING
    assert classify_process(2.0 * identity_process("2")) is ProcessClass.CP_TRACE_INCREASING
    eta = ProcessChoi(SystemSpec((2,)), SystemSpec((2,)),
                      BlockHermitian("4", (np.eye(4)[[0, 2, 1, 3]],)))
    assert classify_process(eta) is ProcessClass.NOT_CP


@given(systems(2, 2), systems(2, 2), seeds)
def test_trace_preservation_matches_partial_trace(a, b, seed):
    rng = np.random.default_rng(seed)
    tp = choi_from_kraus(random_kraus(a, b, rng, trace_preserving=True))
    assert classify_process(tp) is ProcessClass.CP_TP
    assert discard_effect(tp).distance(BlockHermitian.identity(a)) <= 1e-9
    for rho in spanning_states(a):
        assert apply(tp, rho).trace() == pytest.approx(rho.trace(), abs=1e-9)
    sub = 0.7 * tp
    assert classify_process(sub) is ProcessClass.CP_TRACE_NON_INCREASING
    for _ in range(5):
        rho = random_state(a, rng)
        assert apply(sub, rho).trace() <= rho.trace() + 1e-9


def test_complete_to_test_examples():
    g = complete_to_test(identity_process("2"))
    assert g.choi.norm() <= 1e-12
    half = 0.5 * identity_process("1,2")
    g = complete_to_test(half)
    assert classify_process(half + g) is ProcessClass.CP_TP
    f = make_filter(basis_state("1,2", 1, 1), 0.3).process
    assert classify_process(f + complete_to_test(f)) is ProcessClass.CP_TP
    with pytest.raises(ValueError):
        complete_to_test(2.0 * identity_process("2"))


@given(systems(2, 2), systems(2, 2), seeds)
def test_completion_yields_a_test(a, b, seed):
    rng = np.random.default_rng(seed)
    f = float(rng.uniform(0.05, 1.0)) * choi_from_kraus(random_kraus(a, b, rng, trace_preserving=True))
    g = complete_to_test(f)
    assert classify_process(g) in (ProcessClass.CP_TRACE_NON_INCREASING, ProcessClass.CP_TP)
    assert classify_process(f + g) is ProcessClass.CP_TP


@given(systems(2, 2), systems(2, 2), systems(2, 2), seeds)
def test_sequential_composition(a, b, c, seed):
    rng = np.random.default_rng(seed)
    f = choi_from_kraus(random_kraus(a, b, rng))
    g = choi_from_kraus(random_kraus(b, c, rng))
    rho = random_state(a, rng)
    assert apply(compose_sequential(g, f), rho).distance(apply(g, apply(f, rho))) <= 1e-10
    assert choi_distance(compose_sequential(identity_process(b), f), f) <= 1e-12
    assert choi_distance(compose_sequential(f, identity_process(a)), f) <= 1e-12


def test_sequential_mismatch():
    f = identity_process("1,2")
    with pytest.raises(SystemMismatchError):
        compose_sequential(identity_process("3"), f)


@given(systems(2, 2), systems(2, 2), systems(2, 2), systems(2, 2), seeds)
def test_parallel_composition_and_interchange(a, b, c, d, seed):
    rng = np.random.default_rng(seed)
    f1 = choi_from_kraus(random_kraus(a, b, rng, n_ops=1))
    f2 = choi_from_kraus(random_kraus(c, d, rng, n_ops=1))
    g1 = choi_from_kraus(random_kraus(b, a, rng, n_ops=1))
    g2 = choi_from_kraus(random_kraus(d, c, rng, n_ops=1))
    rho, sigma = random_state(a, rng), random_state(c, rng)
    par = compose_parallel(f1, f2)
    assert apply(par, tensor_element(rho, sigma)).distance(
        tensor_element(apply(f1, rho), apply(f2, sigma))) <= 1e-10
    lhs = compose_sequential(compose_parallel(g1, g2), par)
    rhs = compose_parallel(compose_sequential(g1, f1), compose_sequential(g2, f2))
    assert choi_distance(lhs, rhs) <= 1e-10


def test_filter_composition_multiplies_strengths():
    phi = random_pure_state("1,2", np.random.default_rng(7))
    both = compose_sequential(make_filter(phi, 0.5).process, make_filter(phi, 0.4).process)
    assert apply(both, phi.projector).distance(0.2 * phi.projector) <= 1e-12
    assert choi_distance(both, make_filter(phi, 0.2).process) <= 1e-12


def test_swap_coherence():
    a, b = SystemSpec((1, 2)), SystemSpec((2,))
    rng = np.random.default_rng(3)
    rho, sigma = random_state(a, rng), random_state(b, rng)
    sw = swap_process(a, b)
    assert apply(sw, tensor_element(rho, sigma)).distance(tensor_element(sigma, rho)) <= 1e-12
    ab, _ = tensor_system(a, b)
    assert choi_distance(compose_sequential(swap_process(b, a), sw), identity_process(ab)) <= 1e-12
    assert classify_process(sw) is ProcessClass.CP_TP


def test_equality_examples():
    f = choi_from_kraus(random_kraus("1,2", "2", np.random.default_rng(0)))
    assert processes_equal(f, f)
    filt = make_filter(basis_state("2", 0, 0), 0.5).process
    assert not processes_equal(filt, identity_process("2"))
    assert not locally_equal(filt, identity_process("2"))
    assert choi_distance(zero_process("2", "1"), zero_process("2", "1")) == 0.0
    with pytest.raises(SystemMismatchError):
        processes_equal(f, identity_process("2"))


@given(systems(2, 2), systems(2, 2), seeds)
def test_equality_predicates_coincide(a, b, seed):
    rng = np.random.default_rng(seed)
    composite, _ = tensor_system(a, b)
    f = choi_from_kraus(random_kraus(composite, a, rng, n_ops=1))
    # a copy rebuilt through its Kraus form agrees everywhere
    g = choi_from_kraus(kraus_from_choi(f))
    assert equality_predicates(f, g, 1e-9, factors=(a, b)) == (True, True)
    h = f + 1e-4 * choi_from_kraus(random_kraus(composite, a, rng, n_ops=1))
    assert equality_predicates(f, h, 1e-9, factors=(a, b)) == (False, False)


def test_trace_preserving_kraus_needs_enough_operators():
    k = random_kraus("3", "1", np.random.default_rng(0), n_ops=1, trace_preserving=True)
    assert len(k.ops[(0, 0)]) == 3
    assert classify_process(choi_from_kraus(k)) is ProcessClass.CP_TP
