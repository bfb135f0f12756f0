"""Processes as completely positive maps between block-Hermitian spaces.

The canonical representation is the block Choi matrix on ``input (x) output``:
block ``(i, j)`` holds ``sum_{a,b} |a><b| (x) L(|a><b|)_j`` where ``a, b`` run
over input block ``i``. This is ``(id (x) L)`` applied to the cup, so a map is
CP exactly when its Choi matrix is positive. Kraus operators are vectorised
column-stacked, ``vec(K)[a * n + c] = K[c, a]``, which makes the Choi block
of a single Kraus operator ``vec(K) vec(K)^dagger``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .composition import product_spanning_states, tensor_system
from .systems import (
    DEFAULT_TOL,
    BlockHermitian,
    SystemMismatchError,
    SystemSpec,
    spanning_states,
)

TRIVIAL = SystemSpec((1,))


class NotCompletelyPositiveError(ValueError):
    pass


class ProcessClass(enum.Enum):
    NOT_CP = "NotCP"
    CP_TRACE_NON_INCREASING = "CP_TraceNonIncreasing"
    CP_TP = "CP_TP"
    CP_TRACE_INCREASING = "CP_TraceIncreasing"

    @property
    def feasible(self) -> bool:
        return self in (ProcessClass.CP_TRACE_NON_INCREASING, ProcessClass.CP_TP)


@dataclass(frozen=True, eq=False)
class ProcessChoi:
    """A (possibly extended) process ``input -> output`` stored by its Choi matrix."""

    input: SystemSpec
    output: SystemSpec
    choi: BlockHermitian

    def __post_init__(self):
        inp, out = SystemSpec.parse(self.input), SystemSpec.parse(self.output)
        expected, _ = tensor_system(inp, out)
        if self.choi.system != expected:
            raise SystemMismatchError(
                f"Choi matrix lives on {self.choi.system}, expected {inp} (x) {out} = {expected}"
            )
        object.__setattr__(self, "input", inp)
        object.__setattr__(self, "output", out)

    def _check(self, other: "ProcessChoi"):
        if (self.input, self.output) != (other.input, other.output):
            raise SystemMismatchError(
                f"process {self.input}->{self.output} vs {other.input}->{other.output}"
            )

    def __add__(self, other):
        self._check(other)
        return ProcessChoi(self.input, self.output, self.choi + other.choi)

    def __sub__(self, other):
        self._check(other)
        return ProcessChoi(self.input, self.output, self.choi - other.choi)

    def __mul__(self, scalar):
        return ProcessChoi(self.input, self.output, self.choi * scalar)

    __rmul__ = __mul__

    def block(self, i: int, j: int) -> np.ndarray:
        """Choi block for input block ``i`` and output block ``j`` as a 4-tensor
        indexed ``[a_in, x_out, b_in, y_out]``."""
        m, n = self.input.blocks[i], self.output.blocks[j]
        return self.choi.blocks[i * self.output.n_blocks + j].reshape(m, n, m, n)

    def __call__(self, rho: BlockHermitian) -> BlockHermitian:
        return apply(self, rho)


@dataclass(frozen=True)
class KrausFamily:
    """Kraus operators grouped by (input block, output block); each operator
    maps input block ``i`` (dim m_i) into output block ``j`` (dim n_j)."""

    input: SystemSpec
    output: SystemSpec
    ops: dict

    def __post_init__(self):
        inp, out = SystemSpec.parse(self.input), SystemSpec.parse(self.output)
        ops = {}
        for (i, j), family in self.ops.items():
            arrs = tuple(np.asarray(k, dtype=complex) for k in family)
            for k in arrs:
                if k.shape != (out.blocks[j], inp.blocks[i]):
                    raise ValueError(
                        f"Kraus operator for blocks ({i},{j}) must be "
                        f"{out.blocks[j]}x{inp.blocks[i]}, got {k.shape}"
                    )
            ops[(i, j)] = arrs
        object.__setattr__(self, "input", inp)
        object.__setattr__(self, "output", out)
        object.__setattr__(self, "ops", ops)

    def apply(self, rho: BlockHermitian) -> BlockHermitian:
        if rho.system != self.input:
            raise SystemMismatchError(f"state on {rho.system}, Kraus family expects {self.input}")
        out = [np.zeros((n, n), dtype=complex) for n in self.output.blocks]
        for (i, j), family in self.ops.items():
            for k in family:
                out[j] += k @ rho.blocks[i] @ k.conj().T
        return BlockHermitian(self.output, tuple(out))


# --- construction ----------------------------------------------------------


def choi_from_process(input, output, linear_map: Callable[[list], Sequence[np.ndarray]]) -> ProcessChoi:
    """Choi matrix of a linear map given on raw block lists.

    ``linear_map`` receives one complex array per input block (matrix units,
    not necessarily Hermitian) and returns one array per output block.
    """
    inp, out = SystemSpec.parse(input), SystemSpec.parse(output)
    blocks = []
    for i, m in enumerate(inp.blocks):
        per_out = [np.zeros((m, n, m, n), dtype=complex) for n in out.blocks]
        for a in range(m):
            for b in range(m):
                args = [np.zeros((k, k), dtype=complex) for k in inp.blocks]
                args[i][a, b] = 1.0
                res = linear_map(args)
                for j in range(out.n_blocks):
                    per_out[j][a, :, b, :] = res[j]
        blocks += [t.reshape(m * n, m * n) for t, n in zip(per_out, out.blocks)]
    composite, _ = tensor_system(inp, out)
    return ProcessChoi(inp, out, BlockHermitian(composite, tuple(blocks)))


def apply_raw(f: ProcessChoi, blocks: Sequence[np.ndarray]) -> list:
    """Apply the linear extension of ``f`` to arbitrary complex block matrices."""
    out = [np.zeros((n, n), dtype=complex) for n in f.output.blocks]
    for i, x in enumerate(blocks):
        for j in range(f.output.n_blocks):
            out[j] += np.einsum("ab,axby->xy", x, f.block(i, j))
    return out


def apply(f: ProcessChoi, rho: BlockHermitian) -> BlockHermitian:
    """Output block j is ``sum_i Tr_in[(rho_i^T (x) 1) C_ij]``."""
    if rho.system != f.input:
        raise SystemMismatchError(f"state on {rho.system}, process expects {f.input}")
    return BlockHermitian(f.output, tuple(apply_raw(f, rho.blocks)))


def process_from_choi(f: ProcessChoi) -> Callable[[BlockHermitian], BlockHermitian]:
    return lambda rho: apply(f, rho)


def identity_process(system) -> ProcessChoi:
    system = SystemSpec.parse(system)
    return choi_from_process(system, system, lambda blocks: blocks)


def discard_and_prepare(input, sigma: BlockHermitian) -> ProcessChoi:
    """``rho -> Tr(rho) sigma``."""
    inp = SystemSpec.parse(input)
    return choi_from_process(inp, sigma.system,
                             lambda blocks: [sum(np.trace(b) for b in blocks) * s for s in sigma.blocks])


def zero_process(input, output) -> ProcessChoi:
    inp, out = SystemSpec.parse(input), SystemSpec.parse(output)
    return ProcessChoi(inp, out, BlockHermitian.zeros(tensor_system(inp, out)[0]))


def state_process(rho: BlockHermitian) -> ProcessChoi:
    """A state as a process from the trivial system."""
    composite, _ = tensor_system(TRIVIAL, rho.system)
    return ProcessChoi(TRIVIAL, rho.system, BlockHermitian(composite, rho.blocks))


def effect_process(e: BlockHermitian) -> ProcessChoi:
    """An effect as a process to the trivial system (Choi matrix ``e^T``)."""
    composite, _ = tensor_system(e.system, TRIVIAL)
    return ProcessChoi(e.system, TRIVIAL, BlockHermitian(composite, tuple(b.T for b in e.blocks)))


def conjugation_process(system, op_blocks: Sequence[np.ndarray]) -> ProcessChoi:
    """``rho -> E rho E^dagger`` for a block-diagonal operator E."""
    system = SystemSpec.parse(system)
    ops = {(i, i): (np.asarray(e, dtype=complex),) for i, e in enumerate(op_blocks)}
    return choi_from_kraus(KrausFamily(system, system, ops))


def swap_process(a, b) -> ProcessChoi:
    """The deterministic process ``A (x) B -> B (x) A`` exchanging the factors."""
    a, b = SystemSpec.parse(a), SystemSpec.parse(b)
    ab, imap_ab = tensor_system(a, b)
    ba, imap_ba = tensor_system(b, a)

    def swap(blocks):
        out = [np.zeros((n, n), dtype=complex) for n in ba.blocks]
        for (i, j), idx in imap_ab.pairs.items():
            m, n = a.blocks[i], b.blocks[j]
            t = blocks[idx].reshape(m, n, m, n).transpose(1, 0, 3, 2)
            out[imap_ba.index(j, i)] = t.reshape(m * n, m * n)
        return out

    return choi_from_process(ab, ba, swap)


# --- Kraus ------------------------------------------------------------------


def choi_from_kraus(k: KrausFamily) -> ProcessChoi:
    composite, _ = tensor_system(k.input, k.output)
    blocks = [np.zeros((n, n), dtype=complex) for n in composite.blocks]
    for (i, j), family in k.ops.items():
        idx = i * k.output.n_blocks + j
        for op in family:
            v = op.T.reshape(-1)
            blocks[idx] += np.outer(v, v.conj())
    return ProcessChoi(k.input, k.output, BlockHermitian(composite, tuple(blocks)))


def kraus_from_choi(f: ProcessChoi, tol: float = DEFAULT_TOL) -> KrausFamily:
    """Kraus operators from the eigendecomposition of each Choi block."""
    if not f.choi.is_psd(tol):
        raise NotCompletelyPositiveError(
            f"Choi matrix has eigenvalue {f.choi.min_eigenvalue():.3g} < -{tol}"
        )
    ops = {}
    for i, m in enumerate(f.input.blocks):
        for j, n in enumerate(f.output.blocks):
            w, v = np.linalg.eigh(f.choi.blocks[i * f.output.n_blocks + j])
            family = [
                (np.sqrt(lam) * v[:, r]).reshape(m, n).T
                for r, lam in enumerate(w)
                if lam > tol
            ]
            if family:
                ops[(i, j)] = tuple(family)
    return KrausFamily(f.input, f.output, ops)


# --- classification and completion -----------------------------------------


def discard_effect(f: ProcessChoi) -> BlockHermitian:
    """The effect ``discard_B o f`` on the input, i.e. ``sum_k K^dagger K`` per block."""
    out = []
    for i, m in enumerate(f.input.blocks):
        t = np.zeros((m, m), dtype=complex)
        for j in range(f.output.n_blocks):
            t += np.einsum("axbx->ab", f.block(i, j))
        out.append(t.T)
    return BlockHermitian(f.input, tuple(out))


def classify_process(f: ProcessChoi, tol: float = DEFAULT_TOL) -> ProcessClass:
    if not f.choi.is_psd(tol):
        return ProcessClass.NOT_CP
    e = discard_effect(f)
    ident = BlockHermitian.identity(f.input)
    if e.allclose(ident, tol):
        return ProcessClass.CP_TP
    if (ident - e).is_psd(tol):
        return ProcessClass.CP_TRACE_NON_INCREASING
    return ProcessClass.CP_TRACE_INCREASING


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def complete_to_test(f: ProcessChoi, tol: float = DEFAULT_TOL) -> ProcessChoi:
    """A CP map ``g`` such that ``f + g`` is trace preserving.

    ``g(rho) = Tr(D rho) |0><0|`` with defect ``D = 1 - sum_k K^dagger K`` and
    ``|0>`` the first basis vector of the first output block; its Kraus
    operators are ``|0><r| sqrt(D)``.
    """
    if not classify_process(f, tol).feasible:
        raise ValueError("process is not feasible (CP and trace non-increasing)")
    defect = BlockHermitian.identity(f.input) - discard_effect(f)
    n0 = f.output.blocks[0]
    ops = {}
    for i, m in enumerate(f.input.blocks):
        root = _psd_sqrt(defect.blocks[i])
        family = []
        for r in range(m):
            k = np.zeros((n0, m), dtype=complex)
            k[0, :] = root[r, :]
            family.append(k)
        ops[(i, 0)] = tuple(family)
    return choi_from_kraus(KrausFamily(f.input, f.output, ops))


# --- composition ------------------------------------------------------------


def compose_sequential(g: ProcessChoi, f: ProcessChoi) -> ProcessChoi:
    """``g o f``: first ``f``, then ``g``."""
    if f.output != g.input:
        raise SystemMismatchError(f"cannot compose {f.input}->{f.output} with {g.input}->{g.output}")
    composite, _ = tensor_system(f.input, g.output)
    blocks = []
    for i, m in enumerate(f.input.blocks):
        for k, p in enumerate(g.output.blocks):
            t = np.zeros((m, p, m, p), dtype=complex)
            for j in range(f.output.n_blocks):
                t += np.einsum("axby,xuyv->aubv", f.block(i, j), g.block(j, k))
            blocks.append(t.reshape(m * p, m * p))
    return ProcessChoi(f.input, g.output, BlockHermitian(composite, tuple(blocks)))


def compose_many(*procs: ProcessChoi) -> ProcessChoi:
    """``procs[0] o procs[1] o ... o procs[-1]`` (rightmost acts first)."""
    out = procs[-1]
    for p in reversed(procs[:-1]):
        out = compose_sequential(p, out)
    return out


def compose_parallel(f: ProcessChoi, h: ProcessChoi) -> ProcessChoi:
    """``f (x) h`` from ``A (x) C`` to ``B (x) D``."""
    inp, _ = tensor_system(f.input, h.input)
    out, _ = tensor_system(f.output, h.output)
    composite, _ = tensor_system(inp, out)
    blocks = []
    for i in range(f.input.n_blocks):
        for k in range(h.input.n_blocks):
            for j in range(f.output.n_blocks):
                for l in range(h.output.n_blocks):
                    t = np.einsum("axby,czdw->acxzbdyw", f.block(i, j), h.block(k, l))
                    d = int(np.prod(t.shape[:4]))
                    blocks.append(t.reshape(d, d))
    return ProcessChoi(inp, out, BlockHermitian(composite, tuple(blocks)))


# --- equality ----------------------------------------------------------------


def choi_distance(f: ProcessChoi, g: ProcessChoi) -> float:
    f._check(g)
    return f.choi.distance(g.choi)


def processes_equal(f: ProcessChoi, g: ProcessChoi, tol: float = DEFAULT_TOL) -> bool:
    return choi_distance(f, g) <= tol


def locally_equal(f: ProcessChoi, g: ProcessChoi, tol: float = DEFAULT_TOL,
                  factors: Optional[tuple] = None) -> bool:
    """Agreement of ``f`` and ``g`` on a spanning set of input states.

    With ``factors=(A, B)`` the input is treated as ``A (x) B`` and only
    product states ``rho_A (x) rho_B`` are used.
    """
    f._check(g)
    if factors is not None:
        states = product_spanning_states(*factors)
    else:
        states = spanning_states(f.input)
    return all(apply(f, rho).distance(apply(g, rho)) <= tol for rho in states)


def equality_predicates(f: ProcessChoi, g: ProcessChoi, tol: float = DEFAULT_TOL,
                        factors: Optional[tuple] = None) -> tuple:
    """``(processes_equal, locally_equal)``; the two coincide under local tomography."""
    return processes_equal(f, g, tol), locally_equal(f, g, tol, factors)


def random_kraus(input, output, rng: np.random.Generator, n_ops: int = 2,
                 trace_preserving: bool = False) -> KrausFamily:
    """Random Kraus family; optionally normalised to be trace preserving.

    A trace-preserving family needs ``n_ops * N_out >= n`` for every input
    block of order ``n``; ``n_ops`` is raised to that minimum if necessary.
    """
    inp, out = SystemSpec.parse(input), SystemSpec.parse(output)
    if trace_preserving:
        n_ops = max(n_ops, -(-max(inp.blocks) // out.rank))
    ops = {}
    for i, m in enumerate(inp.blocks):
        for j, n in enumerate(out.blocks):
            ops[(i, j)] = [
                rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)) for _ in range(n_ops)
            ]
    if trace_preserving:
        for i, m in enumerate(inp.blocks):
            s = sum(k.conj().T @ k for j in range(out.n_blocks) for k in ops[(i, j)])
            w, v = np.linalg.eigh(s)
            inv_root = (v / np.sqrt(w)) @ v.conj().T
            for j in range(out.n_blocks):
                ops[(i, j)] = [k @ inv_root for k in ops[(i, j)]]
    return KrausFamily(inp, out, {key: tuple(val) for key, val in ops.items()})
