"""Command-line front end: ``run``, ``attack``, ``verify`` and ``efficiency``.

Every command prints one report object to stdout.  Diagnostics go to stderr.
Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 protocol abort.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import kernels
from .adversary import AttackSpec, InvalidSpec, estimate_detection, parse_unitary
from .metrics import TABLE4, efficiency, table4_rows
from .protocol import InvalidConfig, InvalidMessage, ProtocolAborted, SessionConfig, run_session

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3
DEFAULT_SEED = 7


class UsageError(Exception):
    pass


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _targets(text: str) -> tuple[str, ...]:
    return tuple(t.strip().upper() for t in text.split(",") if t.strip())


def _attack_spec(kind: str, args) -> AttackSpec:
    targets = _targets(args.target)
    if kind == "intercept":
        return AttackSpec.intercept_resend(args.eve_basis if args.eve_basis == "random"
                                           else args.eve_basis.upper(), targets)
    if kind == "cnot":
        return AttackSpec.cnot(args.a, args.b, targets)
    return AttackSpec.entangle_measure(parse_unitary(args.p), targets)


def _report(command: list[str], config: dict, results, audit: list[dict]) -> dict:
    return {"command": command, "config": config, "results": results, "paper_claim_audit": audit}


def cmd_run(args) -> tuple[dict, int]:
    msg = args.message
    if not msg or len(msg) % 2 or set(msg) - {"0", "1"}:
        raise UsageError("--message must be a non-empty bit string of even length")
    groups = args.groups if args.groups is not None else len(msg) // 2
    if groups != len(msg) // 2:
        raise UsageError(f"--groups {groups} does not fit a {len(msg)}-bit message")
    config = SessionConfig(n_message_groups=groups, check_fraction=args.check_fraction,
                           error_threshold=args.threshold, seed=args.seed)
    attack = _attack_spec(args.attack, args) if args.attack else None
    rng = np.random.default_rng(args.seed)
    code = EXIT_OK
    try:
        transcript = run_session(msg, config, rng, attack)
    except ProtocolAborted as e:
        print(f"aborted: {e}", file=sys.stderr)
        transcript = e.transcript
        code = EXIT_ABORT
    results = transcript.to_dict()
    results["provenance"] = {"method": "simulation", "seed": args.seed}
    return _report(["run", msg], config.to_dict(), results, []), code


def cmd_attack(args) -> tuple[dict, int]:
    spec = _attack_spec(args.kind, args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    basis = args.basis if args.basis == "random" else args.basis.upper()
    rep = estimate_detection(spec, basis, args.trials, args.seed)
    audit = []
    if rep.claim is not None:
        audit.append({
            "citation": rep.claim.citation,
            "claimed": rep.claim.value,
            "computed": rep.exact_probability,
            "agrees": bool(rep.claim_agrees),
        })
    config = {"attack": spec.to_dict(), "check_basis": rep.check_basis,
              "trials": args.trials, "seed": args.seed}
    return _report(["attack", args.kind], config, rep.to_dict(), audit), EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    from .verification import run_verification

    v = run_verification()
    for item in v["items"]:
        if not item["passed"]:
            print(f"FAILED {item['name']}", file=sys.stderr)
    results = {"all_passed": v["all_passed"], "items": v["items"],
               "provenance": {"method": "exact"}}
    return (_report(["verify"], {"backend": kernels.BACKEND}, results, v["paper_claim_audit"]),
            EXIT_OK if v["all_passed"] else EXIT_VERIFY)


def cmd_efficiency(args) -> tuple[dict, int]:
    rows = table4_rows()
    audit = [{
        "citation": f"efficiency table, {r['protocol']}",
        "claimed": [r["printed_eta1"], r["printed_eta2"]],
        "computed": [r["eta1_percent"], r["eta2_percent"]],
        "agrees": r["matches"],
    } for r in rows]
    exact = {c.name: [str(efficiency(c).eta1), str(efficiency(c).eta2)] for c in TABLE4}
    results = {"rows": rows, "fractions": exact, "provenance": {"method": "exact"}}
    return _report(["efficiency"], {}, results, audit), EXIT_OK


def _text(obj, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out += _text(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        out = []
        for i, v in enumerate(obj):
            out += _text(v, f"{prefix}[{i}]")
        return out
    return [f"{prefix}: {json.dumps(obj)}"]


def render(report: dict, fmt: str) -> str:
    if fmt == "text":
        return "\n".join(_text(report))
    return json.dumps(report, indent=2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for all randomness")
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)

    # attack parameters are shared by `attack` and `run --attack`
    atk = argparse.ArgumentParser(add_help=False)
    atk.add_argument("--a", type=_complex, default=1.0, help="CNOT ancilla amplitude of |0>")
    atk.add_argument("--b", type=_complex, default=0.0, help="CNOT ancilla amplitude of |1>")
    atk.add_argument("--p", default="identity", help="unitary name or p00,p01,p10,p11")
    atk.add_argument("--eve-basis", choices=("z", "x", "random"), default="random")
    atk.add_argument("--target", default="B", help="attacked sequences, e.g. B or A,C")

    ap = argparse.ArgumentParser(prog="cqsdc", parents=[common],
                                 description="Controlled QSDC simulator and verifier")
    ap.set_defaults(seed=DEFAULT_SEED, format="json")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common, atk], help="run one protocol session")
    r.add_argument("--message", required=True)
    r.add_argument("--groups", type=int)
    r.add_argument("--check-fraction", type=float, default=0.5)
    r.add_argument("--threshold", type=float, default=0.0)
    r.add_argument("--attack", choices=("intercept", "cnot", "entangle"))
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("attack", parents=[common, atk], help="detection probability of an attack")
    a.add_argument("kind", choices=("intercept", "cnot", "entangle"))
    a.add_argument("--basis", choices=("z", "x", "random"), default="z")
    a.add_argument("--trials", type=int, default=10_000)
    a.set_defaults(func=cmd_attack)

    sub.add_parser("verify", parents=[common], help="run the verification matrix").set_defaults(func=cmd_verify)
    sub.add_parser("efficiency", parents=[common], help="efficiency table").set_defaults(func=cmd_efficiency)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = args.func(args)
    except (UsageError, InvalidConfig, InvalidMessage, InvalidSpec) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(report, args.format) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
