"""Executable checks of the postulates on block-Hermitian systems.

Each verifier draws its samples from ``np.random.default_rng([seed, trial])``
so a trial's randomness depends only on its own index, and reports are
identical across runs.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .composition import local_tomography_span, tensor_system
from .optmodel import (
    Pds,
    PureState,
    basis_state,
    complementary_pds,
    dagger,
    face_spanning_states,
    filter_inverse,
    invariant_state,
    is_feasible_effect,
    make_filter,
    probability,
    projection_process,
    random_pure_state,
    spectral_state,
)
from .processes import (
    choi_distance,
    choi_from_kraus,
    compose_sequential,
    identity_process,
    locally_equal,
    processes_equal,
    random_kraus,
)
from .systems import DEFAULT_TOL, BlockHermitian, SystemSpec, random_hermitian, random_state

AXIOM_TOL = 1e-10
REVERSIBILITY_TOL = 1e-9
UNIQUENESS_TOL = 1e-6
FILTER_GRID = (0.0, 0.1, 0.5, 0.9, 1.0)


class Postulate(enum.Enum):
    SYMMETRIC_SHARPNESS = "SymmetricSharpness"
    COMPLETE_MIXING = "CompleteMixing"
    FILTERING = "Filtering"
    LOCAL_EQUALITY = "LocalEquality"
    PERFECT_DISTINGUISHABILITY = "PerfectDistinguishability"
    INDISTINGUISHABILITY = "Indistinguishability"

    @classmethod
    def parse(cls, text: str) -> "Postulate":
        key = text.replace("-", "").replace("_", "").lower()
        for p in cls:
            if p.value.lower() == key or p.name.replace("_", "").lower() == key:
                return p
        raise ValueError(f"unknown postulate {text!r}")


@dataclass
class VerificationReport:
    postulate: Postulate
    system: SystemSpec
    trials: int
    max_deviation: float
    tolerance: float
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses and self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "postulate": self.postulate.value,
            "system": list(self.system.blocks),
            "trials": self.trials,
            "max_deviation": float(self.max_deviation),
            "passed": self.passed,
            "witnesses": list(self.witnesses),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.postulate.value} on ({self.system}): {status} "
                f"trials={self.trials} max_deviation={self.max_deviation:.3e}")


class _Tracker:
    """Accumulates deviations against check-specific tolerances."""

    def __init__(self):
        self.max_deviation = 0.0
        self.tolerance = 0.0
        self.witnesses = []

    def check(self, deviation: float, tol: float, label: str):
        deviation = float(deviation)
        self.tolerance = max(self.tolerance, tol)
        self.max_deviation = max(self.max_deviation, deviation)
        if not deviation <= tol:
            self.witnesses.append(f"{label}: deviation {deviation:.3e} > {tol:.0e}")

    def flag(self, label: str):
        self.witnesses.append(label)

    def report(self, postulate, system, trials) -> VerificationReport:
        return VerificationReport(postulate, system, trials, self.max_deviation,
                                  self.tolerance or DEFAULT_TOL, self.witnesses)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _check_trials(trials: int):
    if trials < 1:
        raise ValueError("trials must be at least 1")


@lru_cache(maxsize=None)
def _identity(system: SystemSpec):
    return identity_process(system)


def is_maximal_effect(e: BlockHermitian, tol: float = AXIOM_TOL) -> bool:
    """Feasible, unit trace, rank one and supported in a single block."""
    if not is_feasible_effect(e, tol) or abs(e.trace() - 1.0) > tol:
        return False
    support = [b for b in e.blocks if np.max(np.abs(b)) > tol]
    if len(support) != 1:
        return False
    w = np.linalg.eigvalsh(support[0])
    return abs(w[-1] - 1.0) <= tol and np.all(np.abs(w[:-1]) <= tol)


def _perturbed(phi: PureState, rng, scale: float) -> PureState:
    n = phi.vector.size
    return PureState.normalized(
        phi.system, phi.block_index,
        phi.vector + scale * (rng.normal(size=n) + 1j * rng.normal(size=n)),
    )


# --- postulate 1 -------------------------------------------------------------------


def verify_symmetric_sharpness(system, trials: int = 100, seed: int = 0) -> VerificationReport:
    """Pure states have a unique maximal effect (their dagger) and
    ``<psi^dagger|phi> = <phi^dagger|psi>``."""
    system = SystemSpec.parse(system)
    _check_trials(trials)
    t = _Tracker()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        phi, psi = random_pure_state(system, rng), random_pure_state(system, rng)
        p_phi, p_psi = phi.projector, psi.projector
        t.check(abs(probability(dagger(p_phi), p_phi) - 1.0), AXIOM_TOL, f"trial {trial}: <phi+|phi> != 1")
        forward = probability(dagger(p_psi), p_phi)
        backward = probability(dagger(p_phi), p_psi)
        t.check(abs(forward - backward), AXIOM_TOL, f"trial {trial}: asymmetric pairing")
        t.check(abs(forward - phi.overlap(psi)), AXIOM_TOL, f"trial {trial}: pairing != |<psi|phi>|^2")

        # uniqueness: every maximal effect that gives phi probability one is phi's dagger
        candidates = [dagger(p_phi), dagger(p_psi), dagger(_perturbed(phi, rng, 1e-8).projector),
                      dagger(_perturbed(phi, rng, 1e-2).projector),
                      0.5 * (dagger(p_phi) + dagger(p_psi))]
        for k, e in enumerate(candidates):
            if not is_maximal_effect(e):
                continue
            p = probability(e, p_phi)
            # for unit-trace rank-one effects ||e - phi+||^2 = 2 (1 - <e|phi>) exactly
            t.check(abs(e.distance(p_phi) ** 2 - 2.0 * (1.0 - p)), AXIOM_TOL,
                    f"trial {trial}: candidate {k} distance identity")
            if p >= 1.0 - AXIOM_TOL:
                t.check(e.distance(dagger(p_phi)), UNIQUENESS_TOL,
                        f"trial {trial}: second maximal effect {k} with unit probability")
    return t.report(Postulate.SYMMETRIC_SHARPNESS, system, trials)


# --- postulate 2 -------------------------------------------------------------------


def minimal_maximal_effect(rho: BlockHermitian) -> tuple:
    """The maximal effect minimising ``<e|rho>``: the lowest eigenvector over blocks."""
    best = None
    for l, b in enumerate(rho.blocks):
        w, v = np.linalg.eigh(b)
        if best is None or w[0] < best[0]:
            best = (w[0], l, v[:, 0])
    _, l, v = best
    e = dagger(PureState.normalized(rho.system, l, v).projector)
    return probability(e, rho), e


def _mixing_sample(system: SystemSpec, trial: int, rng) -> BlockHermitian:
    if trial == 0:
        return invariant_state(system)
    rho = random_state(system, rng)
    if trial % 2:
        return 0.5 * rho + 0.5 * invariant_state(system) / system.rank
    # rank-deficient: remove a random pure direction
    psi = random_pure_state(system, rng)
    keep = [np.eye(n, dtype=complex) for n in system.blocks]
    keep[psi.block_index] -= np.outer(psi.vector, psi.vector.conj())
    return BlockHermitian(system, tuple(k @ b @ k for k, b in zip(keep, rho.blocks)))


def verify_complete_mixing(system, trials: int = 100, seed: int = 0,
                           tol: float = DEFAULT_TOL) -> VerificationReport:
    """A state has no maximal effect with zero probability iff it has full rank."""
    system = SystemSpec.parse(system)
    _check_trials(trials)
    t = _Tracker()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        rho = _mixing_sample(system, trial, rng)
        p_min, witness = minimal_maximal_effect(rho)
        if not is_maximal_effect(witness):
            t.flag(f"trial {trial}: minimising effect is not maximal")
        lam_min = rho.min_eigenvalue()
        t.check(abs(p_min - lam_min), AXIOM_TOL, f"trial {trial}: effect minimum != eigenvalue minimum")
        if (p_min > tol) != (lam_min > tol):
            t.flag(f"trial {trial}: mixing criterion disagrees with full rank "
                   f"(min prob {p_min:.3e}, min eig {lam_min:.3e})")
    return t.report(Postulate.COMPLETE_MIXING, system, trials)


# --- postulate 3 -------------------------------------------------------------------


def verify_filtering(system, trials: int = 100, seed: int = 0) -> VerificationReport:
    """Every pure state can be filtered with every strength on the grid.

    Checks ``F(phi) = c phi``, ``F(rho) = rho`` on a spanning set of the kernel
    of ``phi``, reversibility for ``c > 0`` and, for ``c = 0``, agreement with
    the projection onto the complementary face.
    """
    system = SystemSpec.parse(system)
    _check_trials(trials)
    ident = _identity(system)
    t = _Tracker()
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        phi = random_pure_state(system, rng)
        c = FILTER_GRID[trial % len(FILTER_GRID)]
        f = make_filter(phi, c)
        t.check(f(phi.projector).distance(c * phi.projector), AXIOM_TOL,
                f"trial {trial}: F(phi) != c phi at c={c}")
        complement = complementary_pds(Pds(system, (phi,)))
        for k, rho in enumerate(face_spanning_states(complement)):
            t.check(f(rho).distance(rho), AXIOM_TOL, f"trial {trial}: kernel state {k} moved at c={c}")
        proc = f.process
        if c > 0:
            t.check(choi_distance(compose_sequential(filter_inverse(f), proc), ident),
                    REVERSIBILITY_TOL, f"trial {trial}: filter not reversed at c={c}")
        else:
            t.check(choi_distance(proc, projection_process(complement)), REVERSIBILITY_TOL,
                    f"trial {trial}: c=0 filter differs from projection")
    return t.report(Postulate.FILTERING, system, trials)


# --- postulate 4 -------------------------------------------------------------------


def verify_local_equality(a, b, trials: int = 12, seed: int = 0) -> VerificationReport:
    """Dimension multiplicativity, product-state span, and agreement of
    ``processes_equal`` with product-state ``locally_equal`` on process pairs
    ``A (x) B -> A``."""
    a, b = SystemSpec.parse(a), SystemSpec.parse(b)
    _check_trials(trials)
    composite, _ = tensor_system(a, b)
    t = _Tracker()
    if composite.dimension != a.dimension * b.dimension:
        t.flag(f"D(A(x)B) = {composite.dimension} != {a.dimension} * {b.dimension}")
    if not local_tomography_span(a, b, seed=seed):
        t.flag("product states do not span the composite")
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        f = choi_from_kraus(random_kraus(composite, a, rng, n_ops=1))
        kind = trial % 3
        if kind == 0:
            g = f
        elif kind == 1:
            g = f + 1e-3 * choi_from_kraus(random_kraus(composite, a, rng, n_ops=1))
        else:
            g = choi_from_kraus(random_kraus(composite, a, rng, n_ops=1))
        equal = processes_equal(f, g)
        local = locally_equal(f, g, factors=(a, b))
        if equal != local:
            t.flag(f"trial {trial}: processes_equal={equal} but locally_equal={local}")
        if kind == 0:
            t.check(choi_distance(f, g), DEFAULT_TOL, f"trial {trial}: identical processes differ")
    return t.report(Postulate.LOCAL_EQUALITY, composite, trials)


# --- self-duality -------------------------------------------------------------------


def dual_cone_test(x: BlockHermitian, rng: np.random.Generator, n_random: int = 8,
                   tol: float = DEFAULT_TOL) -> tuple:
    """Whether ``<x^dagger|rho> >= -tol`` on a witness set of states.

    The witnesses are random pure states plus the spectral frame of ``x``; when
    ``x`` leaves the cone the frame element of its negative weight separates
    it, otherwise every witness pairs nonnegatively. Returns the verdict and
    the smallest pairing found.
    """
    witnesses = [random_pure_state(x.system, rng).projector for _ in range(n_random)]
    witnesses += [m.projector for m in spectral_state(x)[1].members]
    worst = min(probability(dagger(x), w) for w in witnesses)
    return worst >= -tol, worst


def sample_extended_vector(system: SystemSpec, rng: np.random.Generator) -> BlockHermitian:
    """Random Hermitian vector shifted by a multiple of chi so that both cone
    members and non-members occur."""
    x = random_hermitian(system, rng)
    return x + float(rng.uniform(-1.0, 3.0)) * invariant_state(system)


def self_duality_disagreements(system, samples: int = 1000, seed: int = 0,
                               tol: float = DEFAULT_TOL) -> tuple:
    """Count samples where the eigenvalue cone test and the dual pairing test
    disagree; also returns how many samples were cone members."""
    system = SystemSpec.parse(system)
    disagreements = members = 0
    for trial in range(samples):
        rng = _trial_rng(seed, trial)
        x = sample_extended_vector(system, rng)
        in_cone = x.is_psd(tol)
        members += in_cone
        if dual_cone_test(x, rng, tol=tol)[0] != in_cone:
            disagreements += 1
    return disagreements, members


# --- postulates 5C / 5Q ------------------------------------------------------------


def _corner_pairs(system: SystemSpec) -> list:
    pairs = []
    if system.n_blocks > 1:
        pairs.append((basis_state(system, 0, 0), basis_state(system, 1, 0)))
    for l, n in enumerate(system.blocks):
        if n > 1:
            v = np.zeros(n, dtype=complex)
            v[:2] = 1.0
            pairs.append((basis_state(system, l, 0), PureState.normalized(system, l, v)))
            break
    return pairs


def _pure_pairs(system: SystemSpec, trials: int, seed: int):
    for k, pair in enumerate(_corner_pairs(system)):
        yield f"corner {k}", pair
    for trial in range(trials):
        rng = _trial_rng(seed, trial)
        yield f"trial {trial}", (random_pure_state(system, rng), random_pure_state(system, rng))


def verify_perfect_distinguishability(system, trials: int = 50, seed: int = 0,
                                      tol: float = DEFAULT_TOL) -> VerificationReport:
    """Distinct pure states are always orthogonal."""
    system = SystemSpec.parse(system)
    _check_trials(trials)
    t = _Tracker()
    for label, (phi, psi) in _pure_pairs(system, trials, seed):
        ov = phi.overlap(psi)
        if tol < ov < 1.0 - tol:
            t.flag(f"{label}: distinct pure states with overlap {ov:.3f}")
    return t.report(Postulate.PERFECT_DISTINGUISHABILITY, system, trials)


def common_witness(phi: PureState, psi: PureState):
    """A pure state overlapping both ``phi`` and ``psi``, or None across blocks."""
    if phi.block_index != psi.block_index:
        return None
    inner = np.vdot(psi.vector, phi.vector)
    phase = inner / abs(inner) if abs(inner) > 1e-12 else 1.0
    return PureState.normalized(phi.system, phi.block_index, phi.vector + phase * psi.vector)


def verify_indistinguishability(system, trials: int = 50, seed: int = 0,
                                tol: float = DEFAULT_TOL) -> VerificationReport:
    """Every pair of pure states has a third pure state not orthogonal to either."""
    system = SystemSpec.parse(system)
    _check_trials(trials)
    t = _Tracker()
    for label, (phi, psi) in _pure_pairs(system, trials, seed):
        omega = common_witness(phi, psi)
        if omega is None:
            t.flag(f"{label}: pure states in blocks {phi.block_index} and {psi.block_index} "
                   "have no common non-orthogonal pure state")
        elif min(omega.overlap(phi), omega.overlap(psi)) <= tol:
            t.flag(f"{label}: constructed witness is orthogonal to one of the pair")
    return t.report(Postulate.INDISTINGUISHABILITY, system, trials)


class TheoryClass(enum.Enum):
    CLASSICAL = "Classical"
    FULLY_QUANTUM = "FullyQuantum"
    HYBRID = "Hybrid"
    TRIVIAL_BOTH = "TrivialBoth"


@dataclass
class TheoryReport:
    system: SystemSpec
    structural: TheoryClass
    distinguishability: VerificationReport
    indistinguishability: VerificationReport

    @property
    def operational(self) -> TheoryClass:
        pd, ind = self.distinguishability.passed, self.indistinguishability.passed
        if pd and ind:
            return TheoryClass.TRIVIAL_BOTH
        if pd:
            return TheoryClass.CLASSICAL
        if ind:
            return TheoryClass.FULLY_QUANTUM
        return TheoryClass.HYBRID

    @property
    def agree(self) -> bool:
        return self.structural == self.operational

    def to_dict(self) -> dict:
        return {
            "system": list(self.system.blocks),
            "class": self.structural.value,
            "operational_class": self.operational.value,
            "agree": self.agree,
            "perfect_distinguishability": self.distinguishability.to_dict(),
            "indistinguishability": self.indistinguishability.to_dict(),
        }


def structural_class(system) -> TheoryClass:
    system = SystemSpec.parse(system)
    if system.rank == 1:
        return TheoryClass.TRIVIAL_BOTH
    if system.is_classical:
        return TheoryClass.CLASSICAL
    if system.is_fully_quantum:
        return TheoryClass.FULLY_QUANTUM
    return TheoryClass.HYBRID


def classify_theory(system, trials: int = 50, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> TheoryReport:
    system = SystemSpec.parse(system)
    return TheoryReport(
        system,
        structural_class(system),
        verify_perfect_distinguishability(system, trials, seed, tol),
        verify_indistinguishability(system, trials, seed, tol),
    )


def verify_all(system, trials: int = 100, seed: int = 0, tol: float = DEFAULT_TOL) -> list:
    """Reports for postulates 1-4; local equality is checked on ``system (x) system``."""
    system = SystemSpec.parse(system)
    return [
        verify_symmetric_sharpness(system, trials, seed),
        verify_complete_mixing(system, trials, seed, tol),
        verify_filtering(system, trials, seed),
        verify_local_equality(system, system, seed=seed),
    ]


def verify(system, postulate: Postulate, trials: int = 100, seed: int = 0,
           tol: float = DEFAULT_TOL) -> VerificationReport:
    system = SystemSpec.parse(system)
    if postulate is Postulate.LOCAL_EQUALITY:
        return verify_local_equality(system, system, seed=seed)
    if postulate is Postulate.SYMMETRIC_SHARPNESS:
        return verify_symmetric_sharpness(system, trials, seed)
    if postulate is Postulate.FILTERING:
        return verify_filtering(system, trials, seed)
    fn = {
        Postulate.COMPLETE_MIXING: verify_complete_mixing,
        Postulate.PERFECT_DISTINGUISHABILITY: verify_perfect_distinguishability,
        Postulate.INDISTINGUISHABILITY: verify_indistinguishability,
    }[postulate]
    return fn(system, trials, seed, tol)
