"""Euclidean Jordan algebra arithmetic for the simple algebras and their direct sums.

Supported kinds are real symmetric, complex Hermitian and quaternionic
Hermitian matrices, and spin factors. The exceptional algebra ``OctHerm3``
exists only as classification metadata (rank 3, dimension 27); asking it for
arithmetic raises.

Quaternion-valued matrices are stored as real arrays of shape ``(n, n, 4)``
holding the components ``(a, b, c, d)`` of ``a + b i + c j + d k``. Spin factor
elements are stored as a real vector ``(t, x_1, ..., x_{s-1})``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

REAL_SYM = "RealSym"
COMPLEX_HERM = "ComplexHerm"
QUAT_HERM = "QuatHerm"
SPIN = "Spin"
OCT_HERM3 = "OctHerm3"

_MATRIX_FAMILIES = (REAL_SYM, COMPLEX_HERM, QUAT_HERM)
_FAMILIES = _MATRIX_FAMILIES + (SPIN, OCT_HERM3)


class KindMismatchError(ValueError):
    """Raised when two elements of different algebras are combined."""


@dataclass(frozen=True)
class EjaKind:
    """A simple Euclidean Jordan algebra, identified by family and size.

    ``n`` is the matrix order for matrix families and the dimension ``s`` for
    spin factors; it is fixed to 3 for ``OctHerm3``.
    """

    family: str
    n: int = 3

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown EJA family {self.family!r}")
        if self.family == OCT_HERM3 and self.n != 3:
            raise ValueError("OctHerm3 has fixed order 3")
        if self.family == SPIN and self.n < 5:
            raise ValueError(f"spin factors need s >= 5, got {self.n}")
        if self.n < 1:
            raise ValueError(f"order must be >= 1, got {self.n}")

    @property
    def rank(self) -> int:
        if self.family == SPIN:
            return 2
        return self.n

    @property
    def dim(self) -> int:
        n = self.n
        if self.family == REAL_SYM:
            return n * (n + 1) // 2
        if self.family == COMPLEX_HERM:
            return n * n
        if self.family == QUAT_HERM:
            return n * (2 * n - 1)
        if self.family == SPIN:
            return n
        return 27

    @property
    def is_matrix(self) -> bool:
        return self.family in _MATRIX_FAMILIES

    def __str__(self):
        if self.family == OCT_HERM3:
            return OCT_HERM3
        return f"{self.family}({self.n})"


def RealSym(n: int) -> EjaKind:
    return EjaKind(REAL_SYM, n)


def ComplexHerm(n: int) -> EjaKind:
    return EjaKind(COMPLEX_HERM, n)


def QuatHerm(n: int) -> EjaKind:
    return EjaKind(QUAT_HERM, n)


def Spin(s: int) -> EjaKind:
    return EjaKind(SPIN, s)


OctHerm3 = EjaKind(OCT_HERM3, 3)

_KIND_RE = re.compile(r"^\s*(RealSym|ComplexHerm|QuatHerm|Spin)\s*\(\s*(\d+)\s*\)\s*$")


def parse_kind(text: str) -> EjaKind:
    """Parse ``"ComplexHerm(3)"``, ``"Spin(7)"`` or ``"OctHerm3"``."""
    if text.strip() == OCT_HERM3:
        return OctHerm3
    m = _KIND_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse EJA kind {text!r}")
    return EjaKind(m.group(1), int(m.group(2)))


# --- quaternions -----------------------------------------------------------

# _QMUL[i, j, k]: coefficient of basis unit k in e_i * e_j, with e = (1, i, j, k).
_QMUL = np.zeros((4, 4, 4))
for _i, _j, _k, _s in [
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
]:
    _QMUL[_i, _j, _k] = _s

_QCONJ = np.array([1.0, -1.0, -1.0, -1.0])


def quat_matmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Product of quaternion matrices stored as ``(n, m, 4)`` and ``(m, p, 4)``."""
    return np.einsum("ija,jkb,abc->ikc", x, y, _QMUL)


def quat_conj_transpose(x: np.ndarray) -> np.ndarray:
    return np.transpose(x, (1, 0, 2)) * _QCONJ


def quat_to_complex(x: np.ndarray) -> np.ndarray:
    """Complex 2n x 2n representation of a quaternion matrix.

    Uses ``a + b i + c j + d k = z1 + z2 j`` with ``z1 = a + b i``,
    ``z2 = c + d i``, mapped to ``[[Z1, Z2], [-conj(Z2), conj(Z1)]]``.
    The map is an injective real-algebra homomorphism and sends
    quaternionic-Hermitian matrices to complex Hermitian ones.
    """
    z1 = x[..., 0] + 1j * x[..., 1]
    z2 = x[..., 2] + 1j * x[..., 3]
    return np.block([[z1, z2], [-z2.conj(), z1.conj()]])


def complex_to_quat(z: np.ndarray) -> np.ndarray:
    n = z.shape[0] // 2
    z1 = z[:n, :n]
    z2 = z[:n, n:]
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


# --- elements --------------------------------------------------------------


def _expected_shape(kind: EjaKind) -> tuple:
    if kind.family == QUAT_HERM:
        return (kind.n, kind.n, 4)
    if kind.family == SPIN:
        return (kind.n,)
    return (kind.n, kind.n)


def _conj_transpose(kind: EjaKind, x: np.ndarray) -> np.ndarray:
    if kind.family == QUAT_HERM:
        return quat_conj_transpose(x)
    return x.conj().T


@dataclass(frozen=True, eq=False)
class EjaElement:
    """An element of a simple EJA, immutable after construction."""

    kind: EjaKind
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.kind.is_matrix and self.kind.family != SPIN:
            raise ValueError(f"{self.kind} supports classification only, not arithmetic")
        dtype = complex if self.kind.family == COMPLEX_HERM else float
        coords = np.array(self.coords, dtype=dtype)
        if coords.shape != _expected_shape(self.kind):
            raise ValueError(
                f"{self.kind} expects coordinates of shape {_expected_shape(self.kind)}, "
                f"got {coords.shape}"
            )
        if self.kind.is_matrix:
            scale = max(1.0, float(np.max(np.abs(coords), initial=0.0)))
            if np.max(np.abs(coords - _conj_transpose(self.kind, coords)), initial=0.0) > 1e-9 * scale:
                raise ValueError(f"coordinates are not Hermitian for {self.kind}")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    def _check(self, other: "EjaElement"):
        if not isinstance(other, EjaElement):
            raise TypeError(f"expected EjaElement, got {type(other).__name__}")
        if other.kind != self.kind:
            raise KindMismatchError(f"cannot combine {self.kind} with {other.kind}")

    def __add__(self, other):
        self._check(other)
        return EjaElement(self.kind, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return EjaElement(self.kind, self.coords - other.coords)

    def __neg__(self):
        return EjaElement(self.kind, -self.coords)

    def __mul__(self, scalar):
        return EjaElement(self.kind, float(scalar) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return EjaElement(self.kind, self.coords / float(scalar))

    def norm(self) -> float:
        """Norm induced by the trace inner product."""
        return float(np.sqrt(max(inner_product(self, self), 0.0)))

    def allclose(self, other: "EjaElement", tol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        return (self - other).norm() <= tol


def identity(kind: EjaKind) -> EjaElement:
    if kind.family == SPIN:
        e = np.zeros(kind.n)
        e[0] = 1.0
        return EjaElement(kind, e)
    if kind.family == QUAT_HERM:
        e = np.zeros((kind.n, kind.n, 4))
        e[np.arange(kind.n), np.arange(kind.n), 0] = 1.0
        return EjaElement(kind, e)
    return EjaElement(kind, np.eye(kind.n))


def zero(kind: EjaKind) -> EjaElement:
    return EjaElement(kind, np.zeros(_expected_shape(kind)))


def spin_element(t: float, x: Sequence[float]) -> EjaElement:
    x = np.asarray(x, dtype=float)
    return EjaElement(Spin(len(x) + 1), np.concatenate([[t], x]))


def random_element(kind: EjaKind, rng: np.random.Generator, scale: float = 1.0) -> EjaElement:
    """Gaussian element normalised to trace-norm ``scale``."""
    shape = _expected_shape(kind)
    if kind.family == COMPLEX_HERM:
        g = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        raw = (g + g.conj().T) / 2
    elif kind.family == QUAT_HERM:
        g = rng.normal(size=shape)
        raw = (g + quat_conj_transpose(g)) / 2
    elif kind.family == REAL_SYM:
        g = rng.normal(size=shape)
        raw = (g + g.T) / 2
    else:
        raw = rng.normal(size=shape)
    a = EjaElement(kind, raw)
    return a * (scale / a.norm())


def jordan_product(a: EjaElement, b: EjaElement) -> EjaElement:
    """Symmetrised product ``(ab + ba)/2``; for spin factors
    ``(t, x) o (u, y) = (tu + x.y, ty + ux)``."""
    a._check(b)
    kind = a.kind
    if kind.family == SPIN:
        t, x = a.coords[0], a.coords[1:]
        u, y = b.coords[0], b.coords[1:]
        return EjaElement(kind, np.concatenate([[t * u + x @ y], t * y + u * x]))
    if kind.family == QUAT_HERM:
        xy = quat_matmul(a.coords, b.coords)
        yx = quat_matmul(b.coords, a.coords)
        return EjaElement(kind, (xy + yx) / 2)
    return EjaElement(kind, (a.coords @ b.coords + b.coords @ a.coords) / 2)


def trace(a: EjaElement) -> float:
    """Sum of eigenvalues (equals rank on the identity)."""
    if a.kind.family == SPIN:
        return 2.0 * float(a.coords[0])
    if a.kind.family == QUAT_HERM:
        return float(np.trace(a.coords[..., 0]))
    return float(np.real(np.trace(a.coords)))


def inner_product(a: EjaElement, b: EjaElement) -> float:
    """``tr(a o b)``."""
    return trace(jordan_product(a, b))


# --- orthonormal coordinates -----------------------------------------------

_SQRT2 = np.sqrt(2.0)


def to_vector(a: EjaElement) -> np.ndarray:
    """Real coordinates of ``a`` in an orthonormal basis for the trace inner product.

    Diagonal entries come first, then the upper off-diagonal entries scaled
    by sqrt(2) (real part, then imaginary parts). For spin factors the raw
    coordinates are scaled by sqrt(2).
    """
    kind = a.kind
    if kind.family == SPIN:
        return _SQRT2 * np.array(a.coords, dtype=float)
    n = kind.n
    iu = np.triu_indices(n, 1)
    c = a.coords
    if kind.family == REAL_SYM:
        return np.concatenate([np.diag(c), _SQRT2 * c[iu]])
    if kind.family == COMPLEX_HERM:
        return np.concatenate([np.real(np.diag(c)), _SQRT2 * c[iu].real, _SQRT2 * c[iu].imag])
    diag = c[np.arange(n), np.arange(n), 0]
    return np.concatenate([diag, _SQRT2 * c[iu].T.reshape(-1)])


def from_vector(kind: EjaKind, v: Sequence[float]) -> EjaElement:
    v = np.asarray(v, dtype=float)
    if v.shape != (kind.dim,):
        raise ValueError(f"{kind} needs {kind.dim} coordinates, got {v.shape}")
    if kind.family == SPIN:
        return EjaElement(kind, v / _SQRT2)
    n = kind.n
    iu = np.triu_indices(n, 1)
    m = len(iu[0])
    if kind.family == REAL_SYM:
        x = np.diag(v[:n])
        x[iu] = v[n:] / _SQRT2
        x = x + np.triu(x, 1).T
        return EjaElement(kind, x)
    if kind.family == COMPLEX_HERM:
        x = np.diag(v[:n]).astype(complex)
        x[iu] = (v[n:n + m] + 1j * v[n + m:]) / _SQRT2
        x = x + np.triu(x, 1).conj().T
        return EjaElement(kind, x)
    upper = np.zeros((n, n, 4))
    upper[iu] = v[n:].reshape(4, m).T / _SQRT2
    x = upper + quat_conj_transpose(upper)
    x[np.arange(n), np.arange(n), 0] = v[:n]
    return EjaElement(kind, x)


# --- spectral theory -------------------------------------------------------


@dataclass(frozen=True)
class SpectralResult:
    """Eigenvalues (descending) with a Jordan frame of primitive idempotents."""

    eigenvalues: np.ndarray
    frame: tuple

    def reconstruct(self) -> EjaElement:
        out = self.eigenvalues[0] * self.frame[0]
        for lam, p in zip(self.eigenvalues[1:], self.frame[1:]):
            out = out + lam * p
        return out


def _quaternionic_basis(vecs: np.ndarray) -> list:
    """Split a complex eigenspace of a quaternion matrix's complex image into
    pairs ``(v, J conj(v))`` spanning quaternionic lines."""
    two_n = vecs.shape[0]
    n = two_n // 2

    def partner(v):
        return np.concatenate([-v[n:].conj(), v[:n].conj()])

    chosen = []
    remaining = [vecs[:, i] for i in range(vecs.shape[1])]
    while remaining:
        v = remaining.pop(0)
        for w in chosen:
            v = v - (w.conj() @ v) * w
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            continue
        v = v / nv
        w = partner(v)
        for u in chosen:
            w = w - (u.conj() @ w) * u
        w = w / np.linalg.norm(w)
        chosen.extend([v, w])
    return [(chosen[i], chosen[i + 1]) for i in range(0, len(chosen), 2)]


def spectral_decompose(a: EjaElement) -> SpectralResult:
    """Spectral decomposition ``a = sum_i lambda_i p_i`` over a Jordan frame.

    Eigenvalues are returned in descending order. Under degeneracy the frame
    is one valid choice among many; for a spin factor with ``x = 0`` the
    first coordinate axis is used as the direction.
    """
    kind = a.kind
    if kind.family == SPIN:
        t, x = a.coords[0], a.coords[1:]
        r = float(np.linalg.norm(x))
        if r > 0:
            u = x / r
        else:
            u = np.zeros_like(x)
            u[0] = 1.0
        p_plus = EjaElement(kind, np.concatenate([[0.5], 0.5 * u]))
        p_minus = EjaElement(kind, np.concatenate([[0.5], -0.5 * u]))
        return SpectralResult(np.array([t + r, t - r]), (p_plus, p_minus))

    if kind.family == QUAT_HERM:
        z = quat_to_complex(a.coords)
        w, v = np.linalg.eigh(z)
        order = np.argsort(-w, kind="stable")
        w, v = w[order], v[:, order]
        eigenvalues, frame = [], []
        scale = max(1.0, float(np.max(np.abs(w))))
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and abs(w[j] - w[i]) <= 1e-8 * scale:
                j += 1
            for p, q in _quaternionic_basis(v[:, i:j]):
                proj = np.outer(p, p.conj()) + np.outer(q, q.conj())
                eigenvalues.append(float(np.mean(w[i:j])))
                frame.append(EjaElement(kind, complex_to_quat(proj)))
            i = j
        return SpectralResult(np.array(eigenvalues), tuple(frame))

    w, v = np.linalg.eigh(a.coords)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    frame = tuple(EjaElement(kind, np.outer(v[:, i], v[:, i].conj())) for i in range(kind.n))
    return SpectralResult(np.asarray(w, dtype=float), frame)


def eigenvalues(a: EjaElement) -> np.ndarray:
    return spectral_decompose(a).eigenvalues


def is_jordan_frame(elems: Sequence[EjaElement], tol: float = DEFAULT_TOL) -> bool:
    """Primitive idempotents, pairwise orthogonal, summing to the identity."""
    if not elems:
        return False
    kind = elems[0].kind
    for p in elems[1:]:
        elems[0]._check(p)
    for p in elems:
        if not jordan_product(p, p).allclose(p, tol) or abs(trace(p) - 1.0) > tol:
            return False
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            if abs(inner_product(elems[i], elems[j])) > tol:
                return False
    total = elems[0]
    for p in elems[1:]:
        total = total + p
    return total.allclose(identity(kind), tol)


def cone_membership(a: EjaElement, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``a`` lies in the cone of squares (all eigenvalues >= -tol)."""
    return bool(np.min(eigenvalues(a)) >= -tol)


# --- classification --------------------------------------------------------


def classify_simple(rank: int, dim: int) -> Optional[EjaKind]:
    """Return the simple EJA with the given rank and dimension, or ``None``.

    Overlapping rows are resolved to one representative: rank 1 gives
    ``ComplexHerm(1)`` (all three rank-one algebras coincide), and rank 2 with
    dimension 6 gives ``QuatHerm(2)``, which is isomorphic to ``Spin(6)``.
    """
    if rank < 1 or dim < 1:
        raise ValueError("rank and dim must be positive")
    if rank == 1:
        return ComplexHerm(1) if dim == 1 else None
    n = rank
    if dim == n * n:
        return ComplexHerm(n)
    if dim == n * (n + 1) // 2:
        return RealSym(n)
    if dim == n * (2 * n - 1):
        return QuatHerm(n)
    if n == 2 and dim >= 5:
        return Spin(dim)
    if n == 3 and dim == 27:
        return OctHerm3
    return None


def canonical_kind(kind: EjaKind) -> EjaKind:
    """Representative of the isomorphism class of ``kind`` among the simple-EJA classification rows."""
    found = classify_simple(kind.rank, kind.dim)
    assert found is not None
    return found


@dataclass(frozen=True)
class ExclusionReport:
    """Rank/dimension bookkeeping for the self-composite ``E (x) E`` of a simple algebra."""

    kind: EjaKind
    rank: int
    dim: int
    match: Optional[EjaKind]

    @property
    def ruled_out(self) -> bool:
        """True when no simple algebra has this (rank, dim), i.e. ``kind`` cannot
        be the state space of a system whose self-composite is simple."""
        return self.match is None

    def __str__(self):
        verdict = f"match {self.match}" if self.match is not None else "NoMatch (ruled out)"
        return f"{self.kind}: r={self.rank}, d={self.dim} -> {verdict}"


def exclusion_check(kind: EjaKind) -> ExclusionReport:
    """Check whether ``E (x) E`` can be a simple EJA: rank ``n^2``, dimension ``dim^2``."""
    if kind.rank < 2:
        raise ValueError(f"{kind} has rank 1 and is trivially complex")
    r = kind.rank ** 2
    d = kind.dim ** 2
    return ExclusionReport(kind, r, d, classify_simple(r, d))


def table_rows(max_n: int = 8, max_s: int = 12) -> list:
    """All simple-EJA kinds with matrix order ``<= max_n`` and spin dimension ``<= max_s``."""
    rows = []
    for n in range(1, max_n + 1):
        rows += [RealSym(n), ComplexHerm(n), QuatHerm(n)]
    rows += [Spin(s) for s in range(5, max_s + 1)]
    rows.append(OctHerm3)
    return rows


# --- direct sums -----------------------------------------------------------


@dataclass(frozen=True)
class DirectSumSpace:
    summands: tuple

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))

    @property
    def rank(self) -> int:
        return sum(k.rank for k in self.summands)

    @property
    def dim(self) -> int:
        return sum(k.dim for k in self.summands)

    def identity_vector(self) -> np.ndarray:
        return direct_sum_join(self, [identity(k) for k in self.summands])


def direct_sum_split(space: DirectSumSpace, a: Sequence[float]) -> list:
    """Split orthonormal coordinates of a direct-sum element into its summands."""
    a = np.asarray(a, dtype=float)
    if a.shape != (space.dim,):
        raise ValueError(f"expected {space.dim} coordinates, got {a.shape}")
    out, start = [], 0
    for kind in space.summands:
        out.append(from_vector(kind, a[start:start + kind.dim]))
        start += kind.dim
    return out


def direct_sum_join(space: DirectSumSpace, parts: Sequence[EjaElement]) -> np.ndarray:
    if len(parts) != len(space.summands):
        raise ValueError("one component per summand required")
    for kind, p in zip(space.summands, parts):
        if p.kind != kind:
            raise KindMismatchError(f"component of kind {p.kind} given for summand {kind}")
    return np.concatenate([to_vector(p) for p in parts])
