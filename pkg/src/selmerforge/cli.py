"""Batch front door: one binary with subcommands for every capability.

Machine output goes to stdout (JSON by default, tab-separated with
``--format tsv``); diagnostics go to stderr.  Exit codes: 0 success or
verified, 1 verified-negative, 2 search exhaustion, 3 invalid input,
4 internal consistency violation.  Flags override environment variables
(prefix ``SELMERFORGE_``), which override defaults.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from fractions import Fraction

from .arith import (
    INFINITY,
    FactorizationError,
    PrimeSearchError,
    hilbert_symbol,
    jacobi_symbol,
)
from .curve import OutsideScope, TwoTorsionCurve, reduction_type
from .finfield import SquareSystemInstance, UnsolvableInstance, solve_square_system
from .genericity import (
    ConicSearchError,
    GenericityFailure,
    construct_3generic,
    is_n_generic,
)
from .pipeline import (
    PipelineConfig,
    QuadrupleSearchError,
    StageFailure,
    SuitableTwistCertificate,
    ensure_text_int_capacity,
    hunt_rank1,
    verify_certificate,
)
from .rootnumber import parity_flip_crosscheck, twist_parity_ratio
from .selmer import ConsistencyViolation, SelmerStructureSpec, sel2, structure_group

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_EXHAUSTED = 2
EXIT_INVALID = 3
EXIT_INCONSISTENT = 4

_ENV_PREFIX = "SELMERFORGE_"


def _env_default(name: str, fallback=None):
    return os.environ.get(_ENV_PREFIX + name.upper().replace("-", "_"), fallback)


def _parse_curve(text: str) -> TwoTorsionCurve:
    parts = [int(v) for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError("curve must be three comma-separated integers")
    return TwoTorsionCurve(*parts)


_CURVE_HELP = (
    'three comma-separated roots "a1,a2,a3"; use --curve=-1,2,3 '
    "when the first root is negative"
)


def _parse_chain(text: str):
    out = []
    if ":" in text:
        items = [item.replace(":", ",") for item in text.split(",")]
    else:
        items = text.split(";")
    for item in items:
        if not item:
            continue
        p, bit = (int(v) for v in item.split(","))
        if bit not in (0, 1):
            raise ValueError("chain bits must be 0 or 1")
        out.append((p, bit))
    return out


def _emit(payload, fmt: str, out_path):
    ensure_text_int_capacity(1 << 16)
    if fmt == "tsv":
        lines = []
        flat = payload if isinstance(payload, dict) else {"value": payload}
        for k in sorted(flat):
            v = flat[k]
            if isinstance(v, (dict, list)):
                v = json.dumps(v, sort_keys=True)
            lines.append(f"{k}\t{v}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _config_from(args) -> PipelineConfig:
    cfg = PipelineConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    pairs = (
        ("bound_prime_search", "progression_budget"),
        ("bound_box", "box_bound"),
        ("bound_sieve", "sieve_bound"),
        ("bound_retries", "stage_retry_budget"),
    )
    for flag, fieldname in pairs:
        val = getattr(args, flag, None)
        if val is not None:
            if val <= 0:
                raise ValueError(f"--{flag.replace('_', '-')} must be positive")
            updates[fieldname] = val
    return dataclasses.replace(cfg, **updates)


def _add_common(p):
    p.add_argument("--format", choices=("json", "tsv"),
                   default=_env_default("format", "json"))
    p.add_argument("--out", default=_env_default("out"))
    p.add_argument("--seed", type=int,
                   default=_int_env("seed"))


def _int_env(name):
    v = _env_default(name)
    return int(v) if v is not None else None


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="selmerforge", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symbols", help="evaluate Jacobi and Hilbert symbols")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("--place", type=int, default=None,
                   help="place for the Hilbert symbol (0 = real place)")
    _add_common(p)

    p = sub.add_parser("curve", help="curve-level reports")
    csub = p.add_subparsers(dest="subcommand", required=True)
    pr = csub.add_parser("reduce", help="reduction type at each bad prime")
    pr.add_argument("--curve", required=True, help=_CURVE_HELP)
    _add_common(pr)

    p = sub.add_parser("selmer", help="Selmer group computations")
    ssub = p.add_subparsers(dest="subcommand", required=True)
    pr = ssub.add_parser("rank", help="dimension of the 2-Selmer group")
    pr.add_argument("--curve", required=True, help=_CURVE_HELP)
    pr.add_argument("--twist", type=int, default=None)
    _add_common(pr)
    pc = ssub.add_parser("chain", help="structure dimensions along a chain")
    pc.add_argument("--curve", required=True, help=_CURVE_HELP)
    pc.add_argument("--chain", required=True,
                    help='semicolon-separated "prime,bit" pairs')
    _add_common(pc)

    p = sub.add_parser("parity", help="parity of twisted Selmer dimensions")
    psub = p.add_subparsers(dest="subcommand", required=True)
    pk = psub.add_parser("check", help="check the parity flip under a prime twist")
    pk.add_argument("--curve", required=True, help=_CURVE_HELP)
    pk.add_argument("--twist", type=int, required=True)
    _add_common(pk)

    p = sub.add_parser("generic", help="genericity checks and construction")
    gsub = p.add_subparsers(dest="subcommand", required=True)
    gc = gsub.add_parser("check", help="test n-genericity")
    gc.add_argument("--curve", required=True, help=_CURVE_HELP)
    gc.add_argument("--n", type=int, required=True)
    _add_common(gc)
    gb = gsub.add_parser("construct", help="build a 3-generic curve")
    _add_common(gb)

    p = sub.add_parser("finfield", help="finite-field square-system solver")
    fsub = p.add_subparsers(dest="subcommand", required=True)
    fs = fsub.add_parser("solve")
    fs.add_argument("--q", type=int, required=True)
    fs.add_argument("--c", required=True, help="six comma-separated coefficients")
    fs.add_argument("--delta", required=True, help="three comma-separated values")
    fs.add_argument("--lam", required=True, help="three comma-separated values")
    _add_common(fs)

    p = sub.add_parser("hunt", help="full pipeline runs")
    hsub = p.add_subparsers(dest="subcommand", required=True)
    hr = hsub.add_parser("rank1", help="construct a rank-1 twist certificate")
    hr.add_argument("--bound-prime-search", type=int, dest="bound_prime_search",
                    default=_int_env("bound_prime_search"))
    hr.add_argument("--bound-box", type=int, dest="bound_box",
                    default=_int_env("bound_box"))
    hr.add_argument("--bound-sieve", type=int, dest="bound_sieve",
                    default=_int_env("bound_sieve"))
    hr.add_argument("--bound-retries", type=int, dest="bound_retries",
                    default=_int_env("bound_retries"))
    _add_common(hr)

    p = sub.add_parser("verify", help="re-verify a certificate from scratch")
    p.add_argument("certificate", help="path to a certificate JSON file")
    _add_common(p)

    return top


def _run(args) -> int:
    fmt = args.format
    out = args.out
    cmd = args.command
    subcmd = getattr(args, "subcommand", None)

    if cmd == "symbols":
        payload = {"a": args.a, "b": args.b, "jacobi": jacobi_symbol(args.a, args.b)}
        if args.place is not None:
            v = INFINITY if args.place == 0 else args.place
            payload["hilbert"] = hilbert_symbol(args.a, args.b, v)
        _emit(payload, fmt, out)
        return EXIT_OK

    if cmd == "curve" and subcmd == "reduce":
        curve = _parse_curve(args.curve)
        report = {
            str(p): reduction_type(curve, p).name.lower()
            for p in curve.bad_primes()
            if p >= 5
        }
        _emit({"curve": list(curve.roots), "reduction": report}, fmt, out)
        return EXIT_OK

    if cmd == "selmer" and subcmd == "rank":
        curve = _parse_curve(args.curve)
        if args.twist is not None:
            curve = curve.quadratic_twist(args.twist)
        _emit({"dim": sel2(curve).dim}, fmt, out)
        return EXIT_OK

    if cmd == "selmer" and subcmd == "chain":
        curve = _parse_curve(args.curve)
        chain = _parse_chain(args.chain)
        T = sel2(curve).spec.T
        spec = SelmerStructureSpec(curve, T)
        dims = [structure_group(spec).dim]
        for p, bit in chain:
            spec = spec.extend(p, bit)
            dims.append(structure_group(spec).dim)
        _emit({"dims": dims}, fmt, out)
        return EXIT_OK

    if cmd == "parity" and subcmd == "check":
        curve = _parse_curve(args.curve)
        ratio = twist_parity_ratio(curve, args.twist)
        flipped = parity_flip_crosscheck(curve, args.twist)
        _emit({"ratio": ratio, "parityFlips": flipped}, fmt, out)
        return EXIT_OK if flipped == (ratio == -1) else EXIT_NEGATIVE

    if cmd == "generic" and subcmd == "check":
        curve = _parse_curve(args.curve)
        result = is_n_generic(curve, args.n)
        if isinstance(result, GenericityFailure):
            _emit({"generic": False, "reason": str(result)}, fmt, out)
            return EXIT_NEGATIVE
        _emit(
            {
                "generic": True,
                "primesByPair": [list(ps) for ps in result.primes_by_pair],
            },
            fmt,
            out,
        )
        return EXIT_OK

    if cmd == "generic" and subcmd == "construct":
        seed = args.seed if args.seed is not None else 0
        curve, witness = construct_3generic(seed)
        _emit(
            {
                "curve": list(curve.roots),
                "seed": seed,
                "primesByPair": [list(ps) for ps in witness.primes_by_pair],
            },
            fmt,
            out,
        )
        return EXIT_OK

    if cmd == "finfield" and subcmd == "solve":
        cs = tuple(int(v) for v in args.c.split(","))
        deltas = tuple(int(v) for v in args.delta.split(","))
        lams = tuple(int(v) for v in args.lam.split(","))
        inst = SquareSystemInstance(args.q, cs, deltas, lams)
        seed = args.seed if args.seed is not None else 0
        sol = solve_square_system(inst, seed=seed)
        _emit({"u": sol[0], "v": sol[1], "s": list(sol[2:]), "seed": seed}, fmt, out)
        return EXIT_OK

    if cmd == "hunt" and subcmd == "rank1":
        cfg = _config_from(args)
        cert = hunt_rank1(cfg)
        _emit(cert.to_dict(), fmt, out)
        return EXIT_OK

    if cmd == "verify":
        with open(args.certificate) as f:
            cert = SuitableTwistCertificate.from_json(f.read())
        verdict = verify_certificate(cert)
        _emit(
            {
                "accepted": verdict.accepted,
                "rank": verdict.rank,
                "checks": [
                    {"name": n, "ok": ok, "detail": d} for n, ok, d in verdict.checks
                ],
            },
            fmt,
            out,
        )
        return EXIT_OK if verdict.accepted else EXIT_NEGATIVE

    raise ValueError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(asctime)s %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else 0
    try:
        return _run(args)
    except (PrimeSearchError, QuadrupleSearchError, StageFailure,
            ConicSearchError, UnsolvableInstance, FactorizationError) as exc:
        print(f"search exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (ValueError, OSError, KeyError, OutsideScope,
            json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConsistencyViolation as exc:
        print(f"consistency violation: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
