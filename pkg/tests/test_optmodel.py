import numpy as np
import pytest
from hypothesis import given

from jordanopt.optmodel import (
    BlockHermitian,
    FaceStatus,
    Pds,
    PdsStatus,
    PureState,
    SystemSpec,
    basis_state,
    complementary_pds,
    dagger,
    discard,
    face_kernel_membership,
    face_spanning_states,
    filter_inverse,
    homogeneity_map,
    invariant_state,
    is_feasible_effect,
    is_feasible_state,
    is_measurement,
    make_filter,
    pds_status,
    probability,
    projection_by_filters,
    projection_process,
    random_mpds,
    random_pure_state,
    spectral_peel,
    spectral_state,
    standard_mpds,
)
from jordanopt.processes import (
    apply,
    choi_distance,
    classify_process,
    compose_sequential,
    identity_process,
    ProcessClass,
)
from jordanopt.systems import (
    SystemMismatchError,
    orthonormal_basis,
    random_hermitian,
    random_state,
    spanning_states,
)
from strategies import seeds, systems


def diag(*values, system=None):
    system = system or SystemSpec((len(values),))
    return BlockHermitian(system, (np.diag(values),))


def _reconstruct(weights, frame):
    out = BlockHermitian.zeros(frame.system)
    for p, phi in zip(weights, frame.members):
        out = out + p * phi.projector
    return out


# --- systems and elements ----------------------------------------------------


def test_system_spec_parsing_and_counts():
    s = SystemSpec.parse("1, 2")
    assert s.blocks == (1, 2) and (s.rank, s.dimension, s.n_blocks) == (3, 5, 2)
    assert SystemSpec.parse("(3)").blocks == (3,)
    assert SystemSpec.parse([1, 1, 1]).is_classical
    assert SystemSpec((4,)).is_fully_quantum
    assert str(s) == "1,2"
    with pytest.raises(ValueError):
        SystemSpec.parse("1,x")
    with pytest.raises(ValueError):
        SystemSpec(())
    with pytest.raises(ValueError):
        SystemSpec((2, 0))


def test_block_hermitian_validation():
    with pytest.raises(ValueError):
        BlockHermitian(SystemSpec((2,)), (np.array([[0, 1], [0, 0]]),))
    with pytest.raises(ValueError):
        BlockHermitian(SystemSpec((2,)), (np.eye(3),))
    with pytest.raises(SystemMismatchError):
        discard((2,)) + discard((1, 1))


def test_from_dense_rejects_coherences_across_blocks():
    dense = np.eye(3, dtype=complex)
    x = BlockHermitian.from_dense((1, 2), dense)
    np.testing.assert_allclose(x.to_dense(), dense)
    dense[0, 1] = dense[1, 0] = 0.5
    with pytest.raises(ValueError):
        BlockHermitian.from_dense((1, 2), dense)


@given(systems(), seeds)
def test_orthonormal_basis(system, seed):
    basis = orthonormal_basis(system)
    assert len(basis) == system.dimension
    gram = np.array([[u.pair(v) for v in basis] for u in basis])
    np.testing.assert_allclose(gram, np.eye(system.dimension), atol=1e-12)
    x = random_hermitian(system, np.random.default_rng(seed))
    assert np.linalg.norm(x.to_real_vector()) == pytest.approx(x.norm(), abs=1e-12)


def test_spanning_states_are_independent_states():
    for system in [(2,), (1, 3), (2, 2)]:
        states = spanning_states(system)
        vecs = np.array([s.to_real_vector() for s in states])
        assert np.linalg.matrix_rank(vecs) == SystemSpec(system).dimension
        assert all(s.is_psd() and s.trace() == pytest.approx(1.0) for s in states)


# --- pairing -----------------------------------------------------------------------


def test_probability_examples():
    rho = random_state((1, 2), np.random.default_rng(0))
    assert probability(discard((1, 2)), rho) == pytest.approx(1.0)
    assert probability(basis_state((2,), 0, 0).projector, basis_state((2,), 0, 1).projector) == 0.0
    assert probability(0.5 * discard((2,)), diag(0.6, 0.4)) == pytest.approx(0.5)
    with pytest.raises(SystemMismatchError):
        probability(discard((2,)), discard((1, 1)))


def test_discard_and_chi():
    assert [b.tolist() for b in discard((1, 1)).blocks] == [[[1]], [[1]]]
    np.testing.assert_allclose(discard((2,)).blocks[0], np.eye(2))
    for system in [(2,), (1, 2), (3, 1, 1)]:
        assert probability(discard(system), invariant_state(system)) == SystemSpec(system).rank
        assert dagger(invariant_state(system)).allclose(discard(system))


def test_feasibility_predicates():
    assert is_feasible_effect(discard((2,)))
    assert not is_feasible_effect(1.5 * basis_state((2,), 0, 0).projector)
    phi = Pds((1, 2), (basis_state((1, 2), 1, 0), basis_state((1, 2), 0, 0)))
    assert is_feasible_effect(dagger(phi.chi))
    assert is_feasible_effect(discard((1, 2)) - dagger(phi.chi))
    assert is_feasible_state(diag(0.6, 0.4))
    assert not is_feasible_state(diag(0.9, 0.4))


def test_measurements():
    e0, e1 = (basis_state((2,), 0, i).projector for i in range(2))
    assert is_measurement([e0, e1])
    assert is_measurement([discard((2,))])
    assert not is_measurement([0.5 * discard((2,))])


@given(systems(), seeds)
def test_pairing_positivity_and_sharpness_symmetry(system, seed):
    rng = np.random.default_rng(seed)
    rho, e = random_state(system, rng), random_state(system, rng, normalized=False)
    assert probability(dagger(e), rho) >= -1e-12
    phi, psi = random_pure_state(system, rng), random_pure_state(system, rng)
    fwd = probability(dagger(psi.projector), phi.projector)
    bwd = probability(dagger(phi.projector), psi.projector)
    assert fwd == pytest.approx(bwd, abs=1e-12)
    assert fwd == pytest.approx(phi.overlap(psi), abs=1e-12)
    assert probability(dagger(phi.projector), phi.projector) == pytest.approx(1.0, abs=1e-12)


@given(systems(), seeds)
def test_dagger_is_an_involution(system, seed):
    x = random_hermitian(system, np.random.default_rng(seed))
    assert dagger(dagger(x), "effect_to_state").allclose(x, 0.0)
    with pytest.raises(ValueError):
        dagger(x, "sideways")


# --- PDS machinery -------------------------------------------------------------------


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState((2,), 0, [1.0, 1.0])
    with pytest.raises(ValueError):
        PureState((2,), 1, [1.0, 0.0])
    assert PureState.normalized((2,), 0, [3.0, 4.0]).vector[1] == pytest.approx(0.8)


def test_pds_status_examples():
    k0, k1 = basis_state((2,), 0, 0), basis_state((2,), 0, 1)
    plus = PureState.normalized((2,), 0, [1, 1])
    assert pds_status([k0, k1]) is PdsStatus.MPDS
    assert pds_status([k0, plus]) is PdsStatus.NOT_PDS
    assert pds_status([k0]) is PdsStatus.PDS
    with pytest.raises(ValueError):
        Pds((2,), (k0, plus))


def test_complementary_pds_examples(rng):
    comp = complementary_pds(Pds((2,), (basis_state((2,), 0, 0),)))
    assert len(comp) == 1 and comp.members[0].overlap(basis_state((2,), 0, 1)) == pytest.approx(1.0)
    assert len(complementary_pds(standard_mpds((1, 2)))) == 0
    frame = random_mpds((4,), rng)
    phi = Pds((4,), frame.members[:2])
    psi = complementary_pds(phi)
    assert (phi.chi + psi.chi).distance(invariant_state((4,))) <= 1e-10
    assert pds_status(list(phi) + list(psi)) is PdsStatus.MPDS


@given(systems(), seeds)
def test_chi_is_frame_independent(system, seed):
    frame = random_mpds(system, np.random.default_rng(seed))
    assert pds_status(list(frame)) is PdsStatus.MPDS
    assert frame.chi.distance(invariant_state(system)) <= 1e-10


def test_face_kernel_examples(rng):
    frame = random_mpds((1, 3), rng)
    phi = Pds(frame.system, frame.members[:2])
    psi = complementary_pds(phi)
    assert face_kernel_membership(phi.chi, phi) is FaceStatus.IN_FACE
    assert face_kernel_membership(psi.chi, phi) is FaceStatus.IN_KERNEL
    assert face_kernel_membership(invariant_state((1, 3)), phi) is FaceStatus.NEITHER
    assert face_kernel_membership(BlockHermitian.zeros((1, 3)), phi) is FaceStatus.BOTH


@given(systems(), seeds)
def test_face_characterisation_on_random_supports(system, seed):
    rng = np.random.default_rng(seed)
    frame = random_mpds(system, rng)
    k = int(rng.integers(1, system.rank + 1))
    phi = Pds(system, frame.members[:k])
    weights = rng.uniform(0.1, 1.0, size=system.rank)
    inside = sum((w * m.projector for w, m in zip(weights[:k], phi.members)),
                 BlockHermitian.zeros(system))
    assert face_kernel_membership(inside, phi) is FaceStatus.IN_FACE
    if k < system.rank:
        outside = sum((w * m.projector for w, m in zip(weights[k:], frame.members[k:])),
                      BlockHermitian.zeros(system))
        assert face_kernel_membership(outside, phi) is FaceStatus.IN_KERNEL


# --- filters ------------------------------------------------------------------------


def test_filter_matrix_example():
    f = make_filter(basis_state((2,), 0, 0), 0.25)
    np.testing.assert_allclose(f.kraus[0], np.diag([0.5, 1.0]))
    target = basis_state((2,), 0, 0).projector
    assert f(target).allclose(0.25 * target, 1e-15)
    a, b = 0.3, 0.7
    np.testing.assert_allclose(apply(f.process, diag(a, b)).blocks[0], np.diag([0.25 * a, b]), atol=1e-15)


def test_filter_classical_block():
    system = SystemSpec((1, 1))
    f = make_filter(basis_state(system, 1, 0), 0.3)
    # c|j><j| + (identity on the other outcomes)
    out = f(BlockHermitian(system, (np.array([[0.4]]), np.array([[0.6]]))))
    assert out.blocks[0][0, 0] == pytest.approx(0.4)
    assert out.blocks[1][0, 0] == pytest.approx(0.3 * 0.6)


def test_filter_bounds():
    phi = basis_state((2,), 0, 0)
    with pytest.raises(ValueError):
        make_filter(phi, 1.2)
    with pytest.raises(ValueError):
        make_filter(phi, -0.1)
    with pytest.raises(ValueError):
        filter_inverse(make_filter(phi, 0.0))
    assert choi_distance(make_filter(phi, 1.0).process, identity_process((2,))) == 0.0


@given(systems(), seeds)
def test_filter_axioms_and_reversibility(system, seed):
    rng = np.random.default_rng(seed)
    phi = random_pure_state(system, rng)
    c = float(rng.uniform(0.1, 1.0))
    f = make_filter(phi, c)
    assert f(phi.projector).distance(c * phi.projector) <= 1e-10
    for rho in face_spanning_states(complementary_pds(Pds(system, (phi,)))):
        assert f(rho).distance(rho) <= 1e-10
    assert classify_process(f.process) in (ProcessClass.CP_TRACE_NON_INCREASING, ProcessClass.CP_TP)
    back = compose_sequential(filter_inverse(f), f.process)
    assert choi_distance(back, identity_process(system)) <= 1e-9
    e_dag_e = [k.conj().T @ k for k in f.kraus]
    assert is_feasible_effect(BlockHermitian(system, tuple(e_dag_e)))


# --- projections ----------------------------------------------------------------------


def test_projection_examples():
    assert choi_distance(projection_process(standard_mpds((1, 2))), identity_process((1, 2))) <= 1e-15
    empty = Pds((1, 2), ())
    assert projection_process(empty).choi.norm() == 0.0
    p = projection_process(Pds((2,), (basis_state((2,), 0, 0),)))
    rho = BlockHermitian((2,), (np.array([[0.6, 0.2 + 0.1j], [0.2 - 0.1j, 0.4]]),))
    np.testing.assert_allclose(apply(p, rho).blocks[0], np.diag([0.6, 0.0]), atol=1e-15)


@given(systems(), seeds)
def test_projection_two_ways(system, seed):
    rng = np.random.default_rng(seed)
    frame = random_mpds(system, rng)
    k = int(rng.integers(0, system.rank + 1))
    phi = Pds(system, frame.members[:k])
    assert choi_distance(projection_process(phi), projection_by_filters(phi)) <= 1e-9


# --- spectral algorithms -----------------------------------------------------------------


def test_spectral_state_examples():
    w, frame = spectral_state(diag(0.7, 0.3))
    np.testing.assert_allclose(w, [0.7, 0.3])
    assert frame.members[0].overlap(basis_state((2,), 0, 0)) == pytest.approx(1.0)
    w, _ = spectral_state(invariant_state((1, 2)))
    np.testing.assert_allclose(w, [1, 1, 1])
    w, frame = spectral_state(diag(1.0, -1.0))
    np.testing.assert_allclose(w, [1.0, -1.0])


@given(systems(), seeds)
def test_spectral_state_reconstructs(system, seed):
    x = random_hermitian(system, np.random.default_rng(seed))
    w, frame = spectral_state(x)
    assert pds_status(list(frame)) is PdsStatus.MPDS
    assert _reconstruct(w, frame).distance(x) <= 1e-9
    assert frame.chi.distance(invariant_state(system)) <= 1e-10


def test_peel_examples():
    w, _ = spectral_peel(diag(0.7, 0.3))
    assert w[0] == pytest.approx(0.3) and w[1] == pytest.approx(0.7)
    w, _ = spectral_peel(0.4 * invariant_state((1, 2)))
    np.testing.assert_allclose(w, [0.4, 0.4, 0.4])
    with pytest.raises(ValueError):
        spectral_peel(diag(1.0, -0.5))


def test_peel_rank_deficient_state():
    w, frame = spectral_peel(diag(0.0, 1.0, 0.0))
    np.testing.assert_allclose(w, [0.0, 0.0, 1.0], atol=1e-15)
    assert pds_status(list(frame)) is PdsStatus.MPDS


@given(systems(), seeds)
def test_peel_matches_eigensolver(system, seed):
    rho = random_state(system, np.random.default_rng(seed))
    w, frame = spectral_peel(rho)
    assert len(w) == system.rank
    np.testing.assert_allclose(np.sort(w), np.sort(rho.eigenvalues()), atol=1e-7)
    assert pds_status(list(frame)) is PdsStatus.MPDS
    assert _reconstruct(w, frame).distance(rho) <= 1e-9


@given(systems(max_block=2), seeds)
def test_peel_is_unitarily_covariant(system, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(system, rng)
    u = random_mpds(system, rng)
    blocks = []
    for l, n in enumerate(system.blocks):
        cols = [m.vector for m in u.members if m.block_index == l]
        q = np.array(cols).T
        blocks.append(q @ rho.blocks[l] @ q.conj().T)
    rotated = BlockHermitian(system, tuple(blocks))
    np.testing.assert_allclose(np.sort(spectral_peel(rotated)[0]), np.sort(spectral_peel(rho)[0]), atol=1e-9)


# --- homogeneity -----------------------------------------------------------------------


def test_homogeneity_examples():
    f, f_inv = homogeneity_map(invariant_state((2,)))
    assert choi_distance(f, identity_process((2,))) <= 1e-12
    rho = diag(0.5, 2.0)
    f, f_inv = homogeneity_map(rho)
    assert apply(f, invariant_state((2,))).distance(rho) <= 1e-9
    with pytest.raises(ValueError):
        homogeneity_map(diag(1.0, 0.0))


@given(systems(), seeds)
def test_homogeneity_map_is_reversible(system, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(system, rng) * float(rng.uniform(0.5, 4.0)) + 0.05 * invariant_state(system)
    f, f_inv = homogeneity_map(rho)
    assert apply(f, invariant_state(system)).distance(rho) <= 1e-9
    assert choi_distance(compose_sequential(f_inv, f), identity_process(system)) <= 1e-9
