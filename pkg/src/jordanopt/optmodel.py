"""Single-system operational layer: states, effects, PDSs, filters and spectral algorithms.

States and effects share the :class:`BlockHermitian` representation; the
dagger between them is the identity on coordinates and is kept only to make
the state/effect distinction explicit at call sites.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .processes import (
    ProcessChoi,
    compose_many,
    conjugation_process,
)
from .systems import (
    DEFAULT_TOL,
    BlockHermitian,
    SystemMismatchError,
    SystemSpec,
)

__all__ = [
    "SystemSpec", "BlockHermitian", "PureState", "Pds", "Filter", "PdsStatus", "FaceStatus",
    "probability", "discard", "invariant_state", "is_feasible_effect", "is_feasible_state",
    "is_measurement", "dagger", "basis_state", "standard_mpds", "pds_status",
    "complementary_pds", "face_spanning_states", "face_kernel_membership", "make_filter", "filter_inverse",
    "projection_process", "projection_by_filters", "spectral_state", "spectral_peel",
    "homogeneity_map", "random_pure_state", "random_mpds", "empty_pds",
]

UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized pure state ``|v><v|`` living in block ``block_index``."""

    system: SystemSpec
    block_index: int
    vector: np.ndarray

    def __post_init__(self):
        system = SystemSpec.parse(self.system)
        if not 0 <= self.block_index < system.n_blocks:
            raise ValueError(f"block index {self.block_index} out of range for system {system}")
        v = np.array(self.vector, dtype=complex).reshape(-1)
        if v.shape != (system.blocks[self.block_index],):
            raise ValueError(f"vector length {v.size} does not match block dimension "
                             f"{system.blocks[self.block_index]}")
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise ValueError(f"pure state vector must be a unit vector (norm {np.linalg.norm(v):.3g})")
        v.flags.writeable = False
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "vector", v)

    @classmethod
    def normalized(cls, system, block_index: int, vector) -> "PureState":
        v = np.asarray(vector, dtype=complex)
        return cls(system, block_index, v / np.linalg.norm(v))

    @property
    def projector(self) -> BlockHermitian:
        blocks = [np.zeros((n, n), dtype=complex) for n in self.system.blocks]
        blocks[self.block_index] = np.outer(self.vector, self.vector.conj())
        return BlockHermitian._trusted(self.system, blocks)

    def overlap(self, other: "PureState") -> float:
        """``<other^dagger | self> = |<other|self>|^2`` (zero across blocks)."""
        if other.system != self.system:
            raise SystemMismatchError(f"system {self.system} vs {other.system}")
        if other.block_index != self.block_index:
            return 0.0
        return float(abs(np.vdot(other.vector, self.vector)) ** 2)


@dataclass(frozen=True, eq=False)
class Pds:
    """A set of perfectly distinguishable pure states and its sum ``chi``."""

    system: SystemSpec
    members: tuple = ()
    chi: BlockHermitian = field(init=False, repr=False)

    def __post_init__(self):
        system = SystemSpec.parse(self.system)
        members = tuple(self.members)
        for m in members:
            if m.system != system:
                raise SystemMismatchError(f"member on {m.system}, PDS on {system}")
        if len(members) > system.rank:
            raise ValueError(f"a PDS on {system} has at most {system.rank} members")
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                if members[a].overlap(members[b]) > DEFAULT_TOL:
                    raise ValueError(f"members {a} and {b} are not orthogonal")
        chi = BlockHermitian.zeros(system)
        for m in members:
            chi = chi + m.projector
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "chi", chi)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def is_maximal(self) -> bool:
        return len(self.members) == self.system.rank


class PdsStatus(enum.Enum):
    NOT_PDS = "NotPds"
    PDS = "Pds"
    MPDS = "Mpds"


class FaceStatus(enum.Enum):
    IN_FACE = "InFace"
    IN_KERNEL = "InKernel"
    NEITHER = "Neither"
    BOTH = "Both"


# --- pairing and predicates -------------------------------------------------


def probability(e: BlockHermitian, rho: BlockHermitian) -> float:
    """``<e|rho> = sum_i Tr(e_i rho_i)``."""
    return e.pair(rho)


def discard(system) -> BlockHermitian:
    return BlockHermitian.identity(system)


def invariant_state(system) -> BlockHermitian:
    """chi: the sum of any MPDS (the identity matrix)."""
    return BlockHermitian.identity(system)


def dagger(x: BlockHermitian, direction: str = "state_to_effect") -> BlockHermitian:
    if direction not in ("state_to_effect", "effect_to_state"):
        raise ValueError(f"unknown dagger direction {direction!r}")
    return x


def is_feasible_effect(e: BlockHermitian, tol: float = DEFAULT_TOL) -> bool:
    return (discard(e.system) - e).is_psd(tol)


def is_feasible_state(rho: BlockHermitian, tol: float = DEFAULT_TOL) -> bool:
    return rho.is_psd(tol) and rho.trace() <= 1.0 + tol


def is_measurement(effects: Sequence[BlockHermitian], tol: float = DEFAULT_TOL) -> bool:
    if not effects:
        return False
    total = BlockHermitian.zeros(effects[0].system)
    for e in effects:
        total = total + e
    return total.allclose(discard(total.system), tol)


# --- PDS machinery ------------------------------------------------------------


def basis_state(system, block_index: int, index: int) -> PureState:
    """``|index>`` (0-based) inside block ``block_index``."""
    system = SystemSpec.parse(system)
    v = np.zeros(system.blocks[block_index], dtype=complex)
    v[index] = 1.0
    return PureState(system, block_index, v)


def standard_mpds(system) -> Pds:
    system = SystemSpec.parse(system)
    return Pds(system, tuple(basis_state(system, l, s)
                             for l, n in enumerate(system.blocks) for s in range(n)))


def pds_status(states: Sequence[PureState], tol: float = DEFAULT_TOL) -> PdsStatus:
    if not states:
        return PdsStatus.PDS
    system = states[0].system
    for a in range(len(states)):
        for b in range(a + 1, len(states)):
            if states[a].overlap(states[b]) > tol:
                return PdsStatus.NOT_PDS
    return PdsStatus.MPDS if len(states) == system.rank else PdsStatus.PDS


def _complement_basis(chi_block: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the range of ``1 - chi`` (chi a projector)."""
    w, v = np.linalg.eigh(np.eye(chi_block.shape[0]) - chi_block)
    return v[:, w > 0.5]


def complementary_pds(phi: Pds) -> Pds:
    members = []
    for l, chi_l in enumerate(phi.chi.blocks):
        q = _complement_basis(chi_l)
        members += [PureState.normalized(phi.system, l, q[:, r]) for r in range(q.shape[1])]
    return Pds(phi.system, tuple(members))


def face_spanning_states(phi: Pds) -> list:
    """States spanning the face of ``chi_phi``: every member and, for each pair
    of members in a common block, the projectors onto ``(u + v)/sqrt2`` and
    ``(u + iv)/sqrt2``."""
    out = [m.projector for m in phi.members]
    members = phi.members
    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            u, v = members[a], members[b]
            if u.block_index != v.block_index:
                continue
            for phase in (1.0, 1j):
                w = PureState.normalized(phi.system, u.block_index, u.vector + phase * v.vector)
                out.append(w.projector)
    return out


def face_kernel_membership(rho: BlockHermitian, phi: Pds, tol: float = DEFAULT_TOL) -> FaceStatus:
    weight = probability(dagger(phi.chi), rho)
    in_face = abs(weight - rho.trace()) <= tol
    in_kernel = abs(weight) <= tol
    if in_face and in_kernel:
        return FaceStatus.BOTH
    if in_face:
        return FaceStatus.IN_FACE
    if in_kernel:
        return FaceStatus.IN_KERNEL
    return FaceStatus.NEITHER


# --- filters and projections -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Filter:
    """``F^c_phi``: conjugation by ``E = sqrt(c)|phi><phi| + (1 - |phi><phi|)``
    in the target's block and by the identity elsewhere."""

    target: PureState
    c: float

    def __post_init__(self):
        c = float(self.c)
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"filter strength must lie in [0, 1], got {c}")
        object.__setattr__(self, "c", c)

    @property
    def system(self) -> SystemSpec:
        return self.target.system

    def _operator(self, on_target: float, off_target: float) -> tuple:
        # the complement of |phi><phi| also covers every other block
        blocks = [off_target * np.eye(n, dtype=complex) for n in self.system.blocks]
        l = self.target.block_index
        proj = np.outer(self.target.vector, self.target.vector.conj())
        blocks[l] = on_target * proj + off_target * (np.eye(proj.shape[0]) - proj)
        return tuple(blocks)

    @property
    def kraus(self) -> tuple:
        return self._operator(np.sqrt(self.c), 1.0)

    @property
    def process(self) -> ProcessChoi:
        return conjugation_process(self.system, self.kraus)

    def __call__(self, rho: BlockHermitian) -> BlockHermitian:
        out = [e @ b @ e.conj().T for e, b in zip(self.kraus, rho.blocks)]
        return BlockHermitian(rho.system, tuple(out))


def make_filter(phi: PureState, c: float) -> Filter:
    return Filter(phi, c)


def filter_inverse(f: Filter) -> ProcessChoi:
    """``c^-1`` times conjugation by ``|phi><phi| + sqrt(c)(1 - |phi><phi|)``."""
    if f.c <= 0.0:
        raise ValueError("a filter with c = 0 is not reversible")
    ops = tuple(e / np.sqrt(f.c) for e in f._operator(1.0, np.sqrt(f.c)))
    return conjugation_process(f.system, ops)


def projection_process(phi: Pds) -> ProcessChoi:
    """``rho -> chi_phi rho chi_phi`` blockwise."""
    return conjugation_process(phi.system, phi.chi.blocks)


def projection_by_filters(phi: Pds) -> ProcessChoi:
    """The same projection built as a composition of c = 0 filters over the complement."""
    complement = complementary_pds(phi)
    if not complement.members:
        return conjugation_process(phi.system, [np.eye(n) for n in phi.system.blocks])
    return compose_many(*(make_filter(psi, 0.0).process for psi in complement.members))


# --- spectral algorithms ------------------------------------------------------------


def spectral_state(rho: BlockHermitian) -> tuple:
    """Weights (descending) and an MPDS with ``rho = sum_i p_i phi_i``.

    Works for extended vectors too, in which case weights may be negative.
    """
    entries = []
    for l, b in enumerate(rho.blocks):
        w, v = np.linalg.eigh(b)
        entries += [(w[r], l, v[:, r]) for r in range(len(w))]
    entries.sort(key=lambda e: -e[0])
    weights = np.array([e[0] for e in entries])
    frame = Pds(rho.system, tuple(PureState.normalized(rho.system, l, v) for _, l, v in entries))
    return weights, frame


def spectral_peel(rho: BlockHermitian, tol: float = DEFAULT_TOL) -> tuple:
    """Constructive decomposition that peels off one pure component per step.

    At each step the residual is compressed onto the face complementary to the
    states already chosen; its smallest eigenvalue ``p`` is the largest weight
    for which the residual still dominates ``p`` times that face's projector,
    and the matching eigenvector is the next pure state. Ties go to the lowest
    block, then to the lowest eigen-index. Returns weights in peel order.
    """
    if rho.min_eigenvalue() < -tol:
        raise ValueError(f"state has eigenvalue {rho.min_eigenvalue():.3g} < -{tol}")
    system = rho.system
    members, weights = [], []
    residual = rho
    chi = BlockHermitian.zeros(system)
    for _ in range(system.rank):
        best = None
        for l, (r_l, chi_l) in enumerate(zip(residual.blocks, chi.blocks)):
            q = _complement_basis(chi_l)
            if q.shape[1] == 0:
                continue
            w, v = np.linalg.eigh(q.conj().T @ r_l @ q)
            if best is None or w[0] < best[0]:
                best = (w[0], l, q @ v[:, 0])
        p, l, vec = best
        phi = PureState.normalized(system, l, vec)
        members.append(phi)
        weights.append(float(p))
        residual = residual - p * phi.projector
        chi = chi + phi.projector
    return np.array(weights), Pds(system, tuple(members))


def homogeneity_map(rho: BlockHermitian, tol: float = DEFAULT_TOL) -> tuple:
    """A reversible process ``f`` with ``f(chi) = rho`` and its inverse.

    ``f`` is a product of filters along a spectral frame of ``rho``. Filter
    strengths must not exceed 1, so weights are divided by ``s = max(1, p_max)``
    and the composition is multiplied by ``s`` afterwards.
    """
    weights, frame = spectral_state(rho)
    if weights.min() <= tol:
        raise ValueError("state is not completely mixed")
    s = max(1.0, float(weights.max()))
    filters = [make_filter(phi, p / s) for p, phi in zip(weights, frame.members)]
    forward = s * compose_many(*(f.process for f in reversed(filters)))
    inverse = (1.0 / s) * compose_many(*(filter_inverse(f) for f in filters))
    return forward, inverse


# --- sampling ----------------------------------------------------------------------


def random_pure_state(system, rng: np.random.Generator) -> PureState:
    """Block chosen with probability proportional to its dimension, then a
    normalized complex Gaussian vector."""
    system = SystemSpec.parse(system)
    p = np.array(system.blocks, dtype=float) / system.rank
    l = int(rng.choice(system.n_blocks, p=p))
    n = system.blocks[l]
    return PureState.normalized(system, l, rng.normal(size=n) + 1j * rng.normal(size=n))


def random_mpds(system, rng: np.random.Generator) -> Pds:
    """Columns of a random unitary in every block."""
    system = SystemSpec.parse(system)
    members = []
    for l, n in enumerate(system.blocks):
        q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        members += [PureState.normalized(system, l, q[:, r]) for r in range(n)]
    return Pds(system, tuple(members))


def empty_pds(system) -> Pds:
    return Pds(SystemSpec.parse(system), ())

