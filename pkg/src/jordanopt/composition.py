"""Composite systems: tensor products, cup/cap, snake identities and local tomography.

Composite blocks are ordered row-major: block ``(i, j)`` of ``A (x) B`` sits at
index ``i * k_B + j`` (0-based) and has dimension ``m_i * n_j``. Because the
ordering is row-major and blocks are Kronecker products, ``A (x) (B (x) C)``
and ``(A (x) B) (x) C`` have literally the same representation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .systems import (
    DEFAULT_TOL,
    BlockHermitian,
    SystemMismatchError,
    SystemSpec,
    basis_signs,
    orthonormal_basis,
    random_state,
    spanning_states,
)

SNAKE_TOL = 1e-10


@dataclass(frozen=True)
class CompositeIndexMap:
    left: SystemSpec
    right: SystemSpec

    def index(self, i: int, j: int) -> int:
        return i * self.right.n_blocks + j

    def pair(self, index: int) -> tuple:
        return divmod(index, self.right.n_blocks)

    @property
    def pairs(self) -> dict:
        return {
            (i, j): self.index(i, j)
            for i in range(self.left.n_blocks)
            for j in range(self.right.n_blocks)
        }

    @property
    def system(self) -> SystemSpec:
        return SystemSpec(tuple(m * n for m in self.left.blocks for n in self.right.blocks))


def tensor_system(a, b) -> tuple:
    """Composite system and its block index map."""
    a, b = SystemSpec.parse(a), SystemSpec.parse(b)
    imap = CompositeIndexMap(a, b)
    return imap.system, imap


def tensor_element(x: BlockHermitian, y: BlockHermitian) -> BlockHermitian:
    """Kronecker product blockwise: composite block (i, j) is ``x_i (x) y_j``."""
    system, _ = tensor_system(x.system, y.system)
    return BlockHermitian(system, tuple(np.kron(xi, yj) for xi in x.blocks for yj in y.blocks))


def tensor_many(*elems: BlockHermitian) -> BlockHermitian:
    out = elems[0]
    for e in elems[1:]:
        out = tensor_element(out, e)
    return out


def _split_blocks(x: BlockHermitian, left: SystemSpec, right: SystemSpec):
    system, imap = tensor_system(left, right)
    if x.system != system:
        raise SystemMismatchError(f"element lives on {x.system}, expected {left} (x) {right} = {system}")
    for (i, j), idx in imap.pairs.items():
        m, n = left.blocks[i], right.blocks[j]
        yield i, j, x.blocks[idx].reshape(m, n, m, n)


def partial_pair_left(e: BlockHermitian, x: BlockHermitian, rest) -> BlockHermitian:
    """``(e (x) id) o x`` for ``x`` on ``X (x) rest`` and an effect ``e`` on ``X``."""
    rest = SystemSpec.parse(rest)
    out = [np.zeros((n, n), dtype=complex) for n in rest.blocks]
    for i, j, t in _split_blocks(x, e.system, rest):
        out[j] += np.einsum("ab,bxay->xy", e.blocks[i], t)
    return BlockHermitian(rest, tuple(out))


def partial_pair_right(e: BlockHermitian, x: BlockHermitian, rest) -> BlockHermitian:
    """``(id (x) e) o x`` for ``x`` on ``rest (x) X`` and an effect ``e`` on ``X``."""
    rest = SystemSpec.parse(rest)
    out = [np.zeros((n, n), dtype=complex) for n in rest.blocks]
    for i, j, t in _split_blocks(x, rest, e.system):
        out[i] += np.einsum("ab,xbya->xy", e.blocks[j], t)
    return BlockHermitian(rest, tuple(out))


def partial_trace(x: BlockHermitian, left, right, keep: str = "left") -> BlockHermitian:
    """Discard one factor of ``x`` on ``left (x) right``."""
    left, right = SystemSpec.parse(left), SystemSpec.parse(right)
    if keep == "left":
        return partial_pair_right(BlockHermitian.identity(right), x, left)
    return partial_pair_left(BlockHermitian.identity(left), x, right)


@dataclass(frozen=True)
class CupCap:
    system: SystemSpec
    cup: BlockHermitian
    cap: BlockHermitian


def cup(system) -> CupCap:
    """The state ``|Gamma><Gamma|`` on each diagonal block pair (l, l) of ``A (x) A``,
    zero elsewhere; the cap is the same matrix read as an effect."""
    system = SystemSpec.parse(system)
    composite, imap = tensor_system(system, system)
    blocks = [np.zeros((n, n), dtype=complex) for n in composite.blocks]
    for l, n in enumerate(system.blocks):
        gamma = np.eye(n).reshape(-1)
        blocks[imap.index(l, l)] = np.outer(gamma, gamma)
    c = BlockHermitian(composite, tuple(blocks))
    return CupCap(system, c, c)


def basis_cup(system) -> BlockHermitian:
    """The cup rebuilt from the orthonormal basis as ``sum_mu gamma_mu w_mu (x) w_mu``."""
    system = SystemSpec.parse(system)
    basis = orthonormal_basis(system)
    total = BlockHermitian.zeros(tensor_system(system, system)[0])
    for g, w in zip(basis_signs(system), basis):
        total = total + g * tensor_element(w, w)
    return total


def eta_epsilon(system) -> tuple:
    """``eta = sum_i w_i (x) w_i`` and ``epsilon = sum_i v_i (x) v_i`` for the
    orthonormal basis, whose dual basis consists of the same matrices."""
    system = SystemSpec.parse(system)
    basis = orthonormal_basis(system)
    eta = BlockHermitian.zeros(tensor_system(system, system)[0])
    for w in basis:
        eta = eta + tensor_element(w, w)
    return eta, eta


def _zigzag_deviation(system: SystemSpec, state: BlockHermitian, effect: BlockHermitian) -> float:
    worst = 0.0
    for rho in spanning_states(system) + orthonormal_basis(system):
        # (effect (x) id) o (id (x) state) applied to rho
        first = partial_pair_left(effect, tensor_element(rho, state), system)
        # (id (x) effect) o (state (x) id) applied to rho
        second = partial_pair_right(effect, tensor_element(state, rho), system)
        worst = max(worst, first.distance(rho), second.distance(rho))
    return worst


def snake_check(system) -> float:
    """Largest deviation of either zig-zag composition of cup and cap from the
    identity, over a spanning set of states and the orthonormal basis."""
    system = SystemSpec.parse(system)
    cc = cup(system)
    return _zigzag_deviation(system, cc.cup, cc.cap)


@dataclass(frozen=True)
class EtaEpsilonReport:
    eta: BlockHermitian
    epsilon: BlockHermitian
    deviation: float
    eta_in_cone: bool


def eta_epsilon_check(system, tol: float = DEFAULT_TOL) -> EtaEpsilonReport:
    """Snake identity for the dual-basis pair (eta, epsilon), plus whether eta is a state.

    eta is a state only when every block has dimension 1 (it then equals the cup).
    """
    system = SystemSpec.parse(system)
    eta, eps = eta_epsilon(system)
    dev = _zigzag_deviation(system, eta, eps)
    return EtaEpsilonReport(eta, eps, dev, eta.is_psd(tol))


def product_span_rank(states: Sequence[BlockHermitian], rel_tol: float = 1e-10) -> int:
    """Numerical rank of the span of ``states``.

    Singular values come from the coordinate vectors themselves; a Gram matrix
    would square their spread, and random products of mixed states are often
    conditioned around 1e-6.
    """
    vecs = np.array([s.to_real_vector() for s in states])
    sv = np.linalg.svd(vecs, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def local_tomography_span(a, b, seed: int = 0,
                          products: Optional[Sequence[BlockHermitian]] = None) -> bool:
    """Whether D_A * D_B product states span the extended states of ``A (x) B``.

    By default the product states are ``rho_A (x) rho_B`` for random full-rank
    states drawn with ``seed``; an explicit list can be passed instead.
    """
    a, b = SystemSpec.parse(a), SystemSpec.parse(b)
    composite, _ = tensor_system(a, b)
    if products is None:
        rng = np.random.default_rng(seed)
        products = [
            tensor_element(random_state(a, rng), random_state(b, rng))
            for _ in range(a.dimension * b.dimension)
        ]
    return product_span_rank(products) == composite.dimension


def product_spanning_states(a, b) -> list:
    """Products of the deterministic spanning sets of both factors."""
    return [tensor_element(x, y) for x in spanning_states(a) for y in spanning_states(b)]


def composite_mpds(phi_a, phi_b):
    """``{phi_i (x) psi_j}`` as a PDS of the composite, in row-major order."""
    from .optmodel import Pds, PureState

    composite, imap = tensor_system(phi_a.system, phi_b.system)
    members = [
        PureState(composite, imap.index(p.block_index, q.block_index), np.kron(p.vector, q.vector))
        for p in phi_a.members
        for q in phi_b.members
    ]
    return Pds(composite, tuple(members))


def kron_dense(x: BlockHermitian, left, right) -> np.ndarray:
    """Embed an element of ``left (x) right`` into the ``N_A N_B`` square matrix
    ordered as the Kronecker product of the two dense factor spaces."""
    left, right = SystemSpec.parse(left), SystemSpec.parse(right)
    na, nb = left.rank, right.rank
    out = np.zeros((na, nb, na, nb), dtype=complex)
    offa, offb = left.offsets(), right.offsets()
    for i, j, t in _split_blocks(x, left, right):
        m, n = left.blocks[i], right.blocks[j]
        sa = slice(offa[i], offa[i] + m)
        sb = slice(offb[j], offb[j] + n)
        out[sa, sb, sa, sb] = t
    return out.reshape(na * nb, na * nb)
