"""Systems and block-Hermitian elements.

A system is a list of block dimensions ``(n_1, ..., n_k)``; its states,
effects and extended vectors are tuples of complex Hermitian matrices, one
per block. Everything here is immutable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .ejacore import ComplexHerm, EjaElement

DEFAULT_TOL = 1e-9
HERMITIAN_TOL = 1e-12


class SystemMismatchError(ValueError):
    """Raised when elements of different systems are combined."""


@dataclass(frozen=True)
class SystemSpec:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks:
            raise ValueError("a system needs at least one block")
        if any(b < 1 for b in blocks):
            raise ValueError(f"block dimensions must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: Union[str, Sequence[int], "SystemSpec"]) -> "SystemSpec":
        """Accept ``"1,2"``, ``"(1, 2)"``, a sequence of ints, or a SystemSpec."""
        if isinstance(text, SystemSpec):
            return text
        if isinstance(text, str):
            stripped = text.strip().strip("()[]")
            try:
                parts = [int(p) for p in stripped.split(",") if p.strip()]
            except ValueError:
                raise ValueError(f"cannot parse system spec {text!r}") from None
            return cls(tuple(parts))
        return cls(tuple(text))

    @property
    def rank(self) -> int:
        """N: the number of outcomes of a maximal measurement."""
        return sum(self.blocks)

    @property
    def dimension(self) -> int:
        """D: the real dimension of the space of extended states."""
        return sum(n * n for n in self.blocks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def is_classical(self) -> bool:
        return self.n_blocks == self.rank

    @property
    def is_fully_quantum(self) -> bool:
        return self.n_blocks == 1

    def offsets(self) -> list:
        """Start index of each block inside the dense N x N embedding."""
        return list(np.cumsum((0,) + self.blocks[:-1]))

    def __str__(self):
        return ",".join(str(b) for b in self.blocks)


def _as_system(system) -> SystemSpec:
    return system if isinstance(system, SystemSpec) else SystemSpec.parse(system)


@dataclass(frozen=True, eq=False)
class BlockHermitian:
    """One complex Hermitian matrix per block of ``system``.

    Used for states, effects and extended (not necessarily positive) vectors
    alike; the probability pairing is ``sum_i Tr(e_i rho_i)``.
    """

    system: SystemSpec
    blocks: tuple = field(repr=False)

    def __post_init__(self):
        system = _as_system(self.system)
        if len(self.blocks) != system.n_blocks:
            raise ValueError(f"system {system} has {system.n_blocks} blocks, got {len(self.blocks)}")
        out = []
        for n, b in zip(system.blocks, self.blocks):
            m = np.array(b, dtype=complex)
            if m.shape != (n, n):
                raise ValueError(f"block of system {system} must be {n}x{n}, got {m.shape}")
            mh = m.conj().T
            scale = max(1.0, np.abs(m).max())
            if np.abs(m - mh).max() > HERMITIAN_TOL * scale:
                raise ValueError("block is not Hermitian")
            m = (m + mh) / 2
            m.flags.writeable = False
            out.append(m)
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "blocks", tuple(out))

    @classmethod
    def _trusted(cls, system: SystemSpec, blocks) -> "BlockHermitian":
        """Skip validation for results of Hermiticity-preserving arithmetic."""
        obj = object.__new__(cls)
        frozen = []
        for b in blocks:
            b.flags.writeable = False
            frozen.append(b)
        object.__setattr__(obj, "system", system)
        object.__setattr__(obj, "blocks", tuple(frozen))
        return obj

    # --- constructors ---

    @classmethod
    def zeros(cls, system) -> "BlockHermitian":
        system = _as_system(system)
        return cls._trusted(system, [np.zeros((n, n), dtype=complex) for n in system.blocks])

    @classmethod
    def identity(cls, system) -> "BlockHermitian":
        system = _as_system(system)
        return cls._trusted(system, [np.eye(n, dtype=complex) for n in system.blocks])

    @classmethod
    def from_dense(cls, system, dense: np.ndarray, tol: float = DEFAULT_TOL) -> "BlockHermitian":
        """Read the diagonal blocks of an N x N matrix; off-block entries must vanish."""
        system = _as_system(system)
        dense = np.asarray(dense, dtype=complex)
        if dense.shape != (system.rank, system.rank):
            raise ValueError(f"expected a {system.rank}x{system.rank} matrix")
        blocks = []
        mask = np.zeros(dense.shape, dtype=bool)
        for off, n in zip(system.offsets(), system.blocks):
            blocks.append(dense[off:off + n, off:off + n])
            mask[off:off + n, off:off + n] = True
        if np.max(np.abs(dense[~mask]), initial=0.0) > tol:
            raise ValueError("matrix has entries outside the superselection blocks")
        return cls(system, tuple(blocks))

    # --- arithmetic ---

    def _check(self, other: "BlockHermitian"):
        if not isinstance(other, BlockHermitian):
            raise TypeError(f"expected BlockHermitian, got {type(other).__name__}")
        if other.system != self.system:
            raise SystemMismatchError(f"system {self.system} vs {other.system}")

    def __add__(self, other):
        self._check(other)
        return BlockHermitian._trusted(self.system, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return BlockHermitian._trusted(self.system, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return BlockHermitian._trusted(self.system, [-a for a in self.blocks])

    def __mul__(self, scalar):
        s = float(scalar)
        return BlockHermitian._trusted(self.system, [s * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    # --- queries ---

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    def pair(self, other: "BlockHermitian") -> float:
        """``sum_i Tr(self_i other_i)``."""
        self._check(other)
        return float(sum(np.sum(a * b.T).real for a, b in zip(self.blocks, other.blocks)))

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues, descending."""
        w = np.concatenate([np.linalg.eigvalsh(b) for b in self.blocks])
        return np.sort(w)[::-1]

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(b)[0] for b in self.blocks))

    def is_psd(self, tol: float = DEFAULT_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def norm(self) -> float:
        """Frobenius norm over all blocks."""
        return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks)))

    def distance(self, other: "BlockHermitian") -> float:
        return (self - other).norm()

    def allclose(self, other: "BlockHermitian", tol: float = DEFAULT_TOL) -> bool:
        return self.distance(other) <= tol

    def to_dense(self) -> np.ndarray:
        """Block-diagonal N x N matrix."""
        out = np.zeros((self.system.rank, self.system.rank), dtype=complex)
        for off, n, b in zip(self.system.offsets(), self.system.blocks, self.blocks):
            out[off:off + n, off:off + n] = b
        return out

    def as_eja(self) -> list:
        """Components as elements of the simple algebras ``ComplexHerm(n_i)``."""
        return [EjaElement(ComplexHerm(n), b) for n, b in zip(self.system.blocks, self.blocks)]

    def to_real_vector(self) -> np.ndarray:
        """Coordinates in the orthonormal basis returned by :func:`orthonormal_basis`."""
        out = []
        r2 = np.sqrt(2.0)
        for b in self.blocks:
            n = b.shape[0]
            coords = np.empty((n, n))
            upper = np.triu_indices(n, 1)
            coords[np.diag_indices(n)] = b.diagonal().real
            coords[upper] = r2 * b[upper].real
            # entry (s, t) with s > t pairs with i(|s><t| - |t><s|)/sqrt2
            coords[upper[1], upper[0]] = -r2 * b[upper].imag
            out.append(coords.reshape(-1))
        return np.concatenate(out)

    def __repr__(self):
        return f"BlockHermitian(system=({self.system}), trace={self.trace():.6g})"


def orthonormal_basis(system) -> list:
    """Orthonormal basis ``w_mu`` of the extended-state space, mu = mu(l, s, t).

    Within block ``l``: ``|s><s|`` for s = t, ``(|s><t| + |t><s|)/sqrt2`` for
    s < t and ``i(|s><t| - |t><s|)/sqrt2`` for s > t. Ordering is block-major,
    then row ``s``, then column ``t``.
    """
    system = _as_system(system)
    out = []
    r2 = np.sqrt(2.0)
    for l, n in enumerate(system.blocks):
        for s in range(n):
            for t in range(n):
                m = np.zeros((n, n), dtype=complex)
                if s == t:
                    m[s, s] = 1.0
                elif s < t:
                    m[s, t] = m[t, s] = 1 / r2
                else:
                    m[s, t] = 1j / r2
                    m[t, s] = -1j / r2
                blocks = [np.zeros((k, k)) for k in system.blocks]
                blocks[l] = m
                out.append(BlockHermitian(system, tuple(blocks)))
    return out


def basis_signs(system) -> np.ndarray:
    """Signs gamma_mu: +1 for s <= t, -1 for s > t (same ordering as the basis)."""
    system = _as_system(system)
    signs = []
    for n in system.blocks:
        for s in range(n):
            for t in range(n):
                signs.append(1.0 if s <= t else -1.0)
    return np.array(signs)


def from_real_vector(system, coords: Sequence[float]) -> BlockHermitian:
    system = _as_system(system)
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (system.dimension,):
        raise ValueError(f"expected {system.dimension} coordinates")
    total = BlockHermitian.zeros(system)
    for c, w in zip(coords, orthonormal_basis(system)):
        total = total + c * w
    return total


def spanning_states(system) -> list:
    """D linearly independent states: ``|s><s|`` and the projectors onto
    ``(|s>+|t>)/sqrt2`` and ``(|s>+i|t>)/sqrt2`` within every block."""
    system = _as_system(system)
    out = []
    for l, n in enumerate(system.blocks):
        vecs = []
        for s in range(n):
            e = np.zeros(n, dtype=complex)
            e[s] = 1
            vecs.append(e)
        for s in range(n):
            for t in range(s + 1, n):
                for phase in (1.0, 1j):
                    v = np.zeros(n, dtype=complex)
                    v[s] = 1 / np.sqrt(2)
                    v[t] = phase / np.sqrt(2)
                    vecs.append(v)
        for v in vecs:
            blocks = [np.zeros((k, k)) for k in system.blocks]
            blocks[l] = np.outer(v, v.conj())
            out.append(BlockHermitian(system, tuple(blocks)))
    return out


def random_hermitian(system, rng: np.random.Generator) -> BlockHermitian:
    """Extended vector with independent GUE-like blocks."""
    system = _as_system(system)
    blocks = []
    for n in system.blocks:
        g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        blocks.append((g + g.conj().T) / 2)
    return BlockHermitian(system, tuple(blocks))


def random_state(system, rng: np.random.Generator, rank: Union[int, None] = None,
                 normalized: bool = True) -> BlockHermitian:
    """Wishart-type state ``G G^dagger`` per block; ``rank`` caps each block's rank."""
    system = _as_system(system)
    blocks = []
    for n in system.blocks:
        r = n if rank is None else min(rank, n)
        if r <= 0:
            blocks.append(np.zeros((n, n)))
            continue
        g = rng.normal(size=(n, r)) + 1j * rng.normal(size=(n, r))
        blocks.append(g @ g.conj().T)
    rho = BlockHermitian(system, tuple(blocks))
    if normalized and rho.trace() > 0:
        rho = rho / rho.trace()
    return rho

