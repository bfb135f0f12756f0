"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a verification fails, 2 on
malformed input. ``JORDANOPT_TOL`` overrides the default tolerance.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .composition import SNAKE_TOL, eta_epsilon_check, snake_check, tensor_system
from .ejacore import classify_simple, exclusion_check, parse_kind
from .optmodel import spectral_peel, spectral_state
from .processes import (
    NotCompletelyPositiveError,
    ProcessChoi,
    choi_distance,
    choi_from_kraus,
    classify_process,
    kraus_from_choi,
)
from .systems import DEFAULT_TOL, BlockHermitian, SystemSpec
from .verifier import Postulate, classify_theory, verify, verify_all

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed command-line or file input; reported with exit code 2."""


# --- input parsing -------------------------------------------------------------


def _tolerance(args) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get("JORDANOPT_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError:
        raise InputError(f"JORDANOPT_TOL: not a number: {env!r}") from None


def _system(text, where: str = "--system") -> SystemSpec:
    try:
        return SystemSpec.parse(text)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _field(obj, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field '{key}'")
    return obj[key]


def load_theory_spec(path: str) -> dict:
    """``{"systems": {label: [dims]}, "tolerance": float, "seed": int}``."""
    data = _load_json(path)
    systems = _field(data, "systems", path)
    if not isinstance(systems, dict) or not systems:
        raise InputError(f"{path}: field 'systems' must be a non-empty object")
    parsed = {label: _system(dims, f"{path}: systems.{label}") for label, dims in systems.items()}
    tol = data.get("tolerance", DEFAULT_TOL)
    seed = data.get("seed", 0)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise InputError(f"{path}: field 'tolerance' must be a positive number")
    if not isinstance(seed, int) or seed < 0:
        raise InputError(f"{path}: field 'seed' must be a non-negative integer")
    return {"systems": parsed, "tolerance": float(tol), "seed": seed}


def _hermitian_blocks(raw, dims, where: str) -> list:
    if not isinstance(raw, list) or len(raw) != len(dims):
        raise InputError(f"{where}: expected {len(dims)} blocks")
    out = []
    for i, (blk, n) in enumerate(zip(raw, dims)):
        loc = f"{where}[{i}]"
        try:
            re_part = np.asarray(_field(blk, "re", loc), dtype=float)
            im_part = np.asarray(blk.get("im", np.zeros((n, n))), dtype=float)
        except (TypeError, ValueError):
            raise InputError(f"{loc}: 're'/'im' must be numeric square arrays") from None
        if re_part.shape != (n, n) or im_part.shape != (n, n):
            raise InputError(f"{loc}: expected {n}x{n} arrays")
        if np.abs(re_part - re_part.T).max() > 1e-9 or np.abs(im_part + im_part.T).max() > 1e-9:
            raise InputError(f"{loc}: matrix is not Hermitian")
        out.append(re_part + 1j * im_part)
    return out


def load_matrix(path: str) -> BlockHermitian:
    """``{"system": [dims], "blocks": [{"re": [[..]], "im": [[..]]}, ...]}``."""
    data = _load_json(path)
    system = _system(_field(data, "system", path), f"{path}: system")
    blocks = _hermitian_blocks(_field(data, "blocks", path), system.blocks, f"{path}: blocks")
    return BlockHermitian(system, tuple(blocks))


def load_process(path: str) -> ProcessChoi:
    """``{"input": [dims], "output": [dims], "blocks": [...]}`` with Choi blocks
    in composite row-major order."""
    data = _load_json(path)
    inp = _system(_field(data, "input", path), f"{path}: input")
    out = _system(_field(data, "output", path), f"{path}: output")
    composite, _ = tensor_system(inp, out)
    blocks = _hermitian_blocks(_field(data, "blocks", path), composite.blocks, f"{path}: blocks")
    return ProcessChoi(inp, out, BlockHermitian(composite, tuple(blocks)))


# --- subcommands -----------------------------------------------------------------


def cmd_classify(args):
    kind = classify_simple(args.rank, args.dim)
    payload = {"rank": args.rank, "dim": args.dim, "kind": str(kind) if kind else None}
    text = str(kind) if kind else f"no simple EJA with rank {args.rank} and dim {args.dim}"
    return payload, text, EXIT_OK if kind else EXIT_FAILED


def cmd_exclude(args):
    try:
        kind = parse_kind(args.kind)
        report = exclusion_check(kind)
    except ValueError as exc:
        raise InputError(f"--kind: {exc}") from None
    payload = {
        "kind": str(report.kind),
        "rank": report.rank,
        "dim": report.dim,
        "match": str(report.match) if report.match else "NoMatch",
        "ruled_out": report.ruled_out,
    }
    return payload, str(report), EXIT_OK


def _verify_targets(args):
    tol = _tolerance(args)
    seed = args.seed
    if args.spec:
        spec = load_theory_spec(args.spec)
        tol = spec["tolerance"] if args.tol is None else tol
        seed = spec["seed"] if args.seed is None else seed
        targets = spec["systems"]
        if args.system:
            if args.system in targets:
                targets = {args.system: targets[args.system]}
            else:
                targets = {args.system: _system(args.system)}
    elif args.system:
        targets = {args.system: _system(args.system)}
    else:
        raise InputError("--system or --spec is required")
    return targets, tol, 0 if seed is None else seed


def cmd_verify(args):
    targets, tol, seed = _verify_targets(args)
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    try:
        postulate = Postulate.parse(args.postulate) if args.postulate else None
    except ValueError as exc:
        raise InputError(f"--postulate: {exc}") from None
    reports = []
    for system in targets.values():
        if postulate is None:
            reports += verify_all(system, args.trials, seed, tol)
        else:
            reports.append(verify(system, postulate, args.trials, seed, tol))
    lines = []
    for r in reports:
        lines.append(str(r))
        lines += [f"  witness: {w}" for w in r.witnesses]
    ok = all(r.passed for r in reports)
    return [r.to_dict() for r in reports], "\n".join(lines), EXIT_OK if ok else EXIT_FAILED


def cmd_spectral(args):
    rho = load_matrix(args.input)
    tol = _tolerance(args)
    try:
        weights, frame = spectral_peel(rho, tol) if args.peel else spectral_state(rho)
    except ValueError as exc:
        raise InputError(f"{args.input}: {exc}") from None
    recon = BlockHermitian.zeros(rho.system)
    for p, phi in zip(weights, frame.members):
        recon = recon + p * phi.projector
    error = recon.distance(rho)
    payload = {
        "system": list(rho.system.blocks),
        "method": "peel" if args.peel else "eigen",
        "weights": [float(w) for w in weights],
        "frame": [
            {"block": m.block_index, "re": m.vector.real.tolist(), "im": m.vector.imag.tolist()}
            for m in frame.members
        ],
        "reconstruction_error": error,
    }
    lines = [f"weights: {' '.join(f'{w:.10g}' for w in weights)}",
             f"reconstruction error: {error:.3e}"]
    return payload, "\n".join(lines), EXIT_OK if error <= tol else EXIT_FAILED


def cmd_tensor(args):
    a, b = _system(args.a, "--a"), _system(args.b, "--b")
    composite, _ = tensor_system(a, b)
    payload = {"blocks": list(composite.blocks), "N": composite.rank, "D": composite.dimension}
    text = f"blocks {composite}  N={composite.rank}  D={composite.dimension}"
    return payload, text, EXIT_OK


def cmd_snake(args):
    system = _system(args.system)
    snake = snake_check(system)
    eta = eta_epsilon_check(system)
    payload = {
        "system": list(system.blocks),
        "snake_deviation": snake,
        "eta_epsilon_deviation": eta.deviation,
        "eta_is_state": eta.eta_in_cone,
    }
    text = (f"snake deviation {snake:.3e}; eta/epsilon deviation {eta.deviation:.3e}; "
            f"eta is {'a state' if eta.eta_in_cone else 'not a state'}")
    ok = snake <= SNAKE_TOL and eta.deviation <= SNAKE_TOL
    return payload, text, EXIT_OK if ok else EXIT_FAILED


def cmd_choi_roundtrip(args):
    f = load_process(args.input)
    tol = _tolerance(args)
    cls = classify_process(f, tol)
    payload = {"input": list(f.input.blocks), "output": list(f.output.blocks), "class": cls.value}
    try:
        kraus = kraus_from_choi(f, tol)
    except NotCompletelyPositiveError as exc:
        payload.update(roundtrip_error=None, kraus_count=0)
        return payload, f"class {cls.value}; no Kraus form: {exc}", EXIT_FAILED
    error = choi_distance(choi_from_kraus(kraus), f)
    count = sum(len(v) for v in kraus.ops.values())
    payload.update(roundtrip_error=error, kraus_count=count)
    text = f"class {cls.value}; {count} Kraus operators; round-trip error {error:.3e}"
    return payload, text, EXIT_OK if error <= tol else EXIT_FAILED


def cmd_theory_class(args):
    targets, tol, seed = _verify_targets(args)
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    reports = [classify_theory(system, args.trials, seed, tol) for system in targets.values()]
    lines = []
    for label, r in zip(targets, reports):
        lines.append(f"{label} ({r.system}): {r.structural.value}"
                     + ("" if r.agree else f" (operational witnesses say {r.operational.value})"))
    payload = [r.to_dict() for r in reports]
    return payload, "\n".join(lines), EXIT_OK if all(r.agree for r in reports) else EXIT_FAILED


# --- driver -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance")

    parser = argparse.ArgumentParser(prog="jordanopt",
                                     description="Jordan-algebraic state spaces and postulate checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="simple EJA with the given rank and dimension")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("exclude", parents=[common], help="self-composite exclusion report")
    p.add_argument("--kind", required=True, help='e.g. "RealSym(3)", "Spin(7)", "OctHerm3"')
    p.set_defaults(func=cmd_exclude)

    for name, func, default_trials, text in (
            ("verify", cmd_verify, 100, "randomized postulate checks"),
            ("theory-class", cmd_theory_class, 50, "classical / quantum / hybrid classification")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--system", help='block dimensions, e.g. "1,2", or a label from --spec')
        p.add_argument("--spec", help="theory spec JSON file")
        p.add_argument("--trials", type=int, default=default_trials, help="random trials per check")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: spec seed or 0)")
        if name == "verify":
            p.add_argument("--postulate", help="run a single postulate (default: postulates 1-4)")
        p.set_defaults(func=func)

    p = sub.add_parser("spectral", parents=[common], help="spectral decomposition of a matrix file")
    p.add_argument("--input", required=True)
    p.add_argument("--peel", action="store_true", help="use the constructive peel")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("tensor", parents=[common], help="composite system of two systems")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("snake", parents=[common], help="cup/cap and eta/epsilon identities")
    p.add_argument("--system", required=True)
    p.set_defaults(func=cmd_snake)

    p = sub.add_parser("choi-roundtrip", parents=[common], help="Choi to Kraus and back")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_choi_roundtrip)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        payload, text, code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps(payload, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
