"""Command-line front end.

Subcommands::

    bb84eve construct    --family F --dxy D --duv D [--a A] [--seed S] [--bits] [--stats-csv PATH]
    bb84eve sweep        --dmin D --dmax D --steps N --family F --out PATH [--a A] [--seed S] [--bits] [--workers K]
    bb84eve verify       [--trials N] [--seed S]
    bb84eve canonicalize --input PATH

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np

from .interaction import (
    FAMILIES, DisturbancePair, InteractionDocumentError, InteractionVectors,
    build_family, build_fuchs_equal, build_fuchs_unequal, build_one_param,
    build_optimal_general, build_rotated, from_document, joint_states, to_document,
)
from .optimality import (
    FullReport, check_prop3, full_report, perturbed_povm, theoretical_eigenvalues,
)
from .oracle import (
    SampleConfig, povm_gains, random_interactions, random_orthogonal,
    random_orthogonals, random_povm_bases, closed_form_gain_error,
)
from .qcore import trace_norm

SWEEP_HEADER = ["d_xy", "d_uv", "g_bound", "g_achieved", "i_bound", "i_achieved",
                "max_prop3_residual", "canonical_ok"]
NATS_TO_BITS = 1.0 / math.log(2.0)


def _vec_json(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in v]


def _rate(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or not 0.0 <= value <= 0.5:
        raise argparse.ArgumentTypeError(f"error rate must lie in [0, 0.5], got {text}")
    return value


def _build(family: str, d: DisturbancePair, a: float | None, seed: int | None) -> InteractionVectors:
    r = random_orthogonal(SampleConfig(seed or 0, 1)) if family == "rotated" else None
    return build_family(family, d, a=a, r=r)


def _check_family_flags(parser: argparse.ArgumentParser, args) -> None:
    if args.a is not None and args.family != "one-param":
        parser.error("--a is only valid with --family one-param")
    if args.a is not None and not 0.0 <= args.a <= 1.0:
        parser.error("--a must lie in [0, 1]")
    if args.seed is not None and args.family != "rotated":
        parser.error("--seed is only valid with --family rotated")


def report_json(family: str, rep: FullReport, iv: InteractionVectors, bits: bool = False) -> dict:
    unit = NATS_TO_BITS if bits else 1.0
    canon = rep.canonical
    return {
        "family": family,
        "d_xy": rep.d.d_xy,
        "d_uv": rep.d.d_uv,
        "measured_disturbance": {"d_xy": rep.measured.d_xy, "d_uv": rep.measured.d_uv},
        "interaction": to_document(iv, rep.d),
        "povm": [_vec_json(v) for v in rep.povm.vectors],
        "eigenvalues": [float(x) for x in canon.eigenvalues],
        "theoretical_eigenvalues": [float(x) for x in rep.theoretical],
        "gain": {
            "bound": rep.bounds.g_bound,
            "achieved": rep.bounds.g_achieved,
            "per_outcome": [float(x) for x in rep.stats.gain_l],
        },
        "mutual_information": {
            "unit": "bits" if bits else "nats",
            "bound": rep.bounds.i_bound * unit,
            "achieved": rep.bounds.i_achieved * unit,
        },
        "prop3": {
            "epsilon": list(rep.prop3.epsilon),
            "max_residual": rep.prop3.max_residual,
            "verdict": rep.prop3.verdict,
        },
        "canonical": {
            "coefficients": canon.coefficients.tolist(),
            "matches_pattern": canon.matches_pattern,
            "unique": canon.unique,
        },
        "degenerate": rep.degenerate,
        "optimal": rep.optimal,
    }


# ------------------------------------------------------------------ construct


def cmd_construct(args, parser) -> int:
    _check_family_flags(parser, args)
    d = DisturbancePair(args.dxy, args.duv)
    iv = _build(args.family, d, args.a, args.seed)
    rep = full_report(iv, d)
    print(json.dumps(report_json(args.family, rep, iv, args.bits), indent=2))
    if args.stats_csv:
        rows = rep.stats.rows(bits=args.bits)
        try:
            with open(args.stats_csv, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
                w.writeheader()
                w.writerows({k: _fmt(v) for k, v in row.items()} for row in rows)
        except OSError as exc:
            print(f"error: cannot write {args.stats_csv}: {exc.strerror}", file=sys.stderr)
            return 2
    return 0


# ------------------------------------------------------------------ sweep


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def sweep_row(task: tuple) -> list:
    family, d_xy, d_uv, a, seed, bits = task
    d = DisturbancePair(d_xy, d_uv)
    rep = full_report(_build(family, d, a, seed), d)
    unit = NATS_TO_BITS if bits else 1.0
    return [
        d_xy, d_uv,
        rep.bounds.g_bound, rep.bounds.g_achieved,
        rep.bounds.i_bound * unit, rep.bounds.i_achieved * unit,
        rep.prop3.max_residual,
        rep.canonical.unique and rep.canonical.matches_pattern,
    ]


def sweep_rows(family: str, dmin: float, dmax: float, steps: int, a=None, seed=None,
               bits: bool = False, workers: int = 1) -> list[list]:
    grid = [dmin] if steps == 1 else list(np.linspace(dmin, dmax, steps))
    grid = [float(x) for x in grid]
    tasks = [(family, x, y, a, seed, bits) for x in grid for y in grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [sweep_row(t) for t in tasks]


def write_sweep_csv(rows: list[list], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def cmd_sweep(args, parser) -> int:
    _check_family_flags(parser, args)
    if args.dmin > args.dmax:
        parser.error("--dmin must not exceed --dmax")
    if args.steps < 1:
        parser.error("--steps must be at least 1")
    rows = sweep_rows(args.family, args.dmin, args.dmax, args.steps, args.a, args.seed,
                      args.bits, args.workers)
    if args.out == "-":
        write_sweep_csv(rows, sys.stdout)
        return 0
    try:
        with open(args.out, "w", newline="") as fh:
            write_sweep_csv(rows, fh)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return 2
    return 0


# ------------------------------------------------------------------ verify

GRID = [round(0.05 * k, 2) for k in range(1, 10)]


class Check:
    def __init__(self, name: str):
        self.name = name
        self.ok = True
        self.detail = ""
        self.offender: dict | None = None

    def fail(self, detail: str, iv: InteractionVectors | None = None, d: DisturbancePair | None = None):
        if self.ok:
            self.ok = False
            self.detail = detail
            if iv is not None and d is not None:
                self.offender = to_document(iv, d)


def _named_families(d: DisturbancePair, seed: int) -> list[tuple[str, InteractionVectors]]:
    return [
        ("general", build_optimal_general(d)),
        ("fuchs1", build_fuchs_unequal(d)),
        ("fuchs2", build_fuchs_equal(d.d_uv)),
        ("one-param", build_one_param(d, 0.5)),
        ("rotated", build_rotated(d, random_orthogonal(SampleConfig(seed, 1)))),
    ]


def run_checks(trials: int, seed: int) -> list[Check]:
    bounds, eig, dominance, prop3, sign = (
        Check("bound achievement (81-point grid, 5 families)"),
        Check("Gamma eigenvalues match closed form"),
        Check(f"oracle dominance ({trials} random POVMs per instance)"),
        Check("proportionality conditions on optimal pairs"),
        Check("sign rule eps = sgn(gamma)"),
    )
    worst_g = worst_res = 0.0
    worst_dom = -math.inf
    bases = random_povm_bases(SampleConfig(seed, trials))
    for dx in GRID:
        for du in GRID:
            d = DisturbancePair(dx, du)
            theory = theoretical_eigenvalues(d)
            for name, iv in _named_families(d, seed):
                rep = full_report(iv, d)
                worst_g = max(worst_g, abs(rep.bounds.slack_g), abs(rep.bounds.slack_i))
                if abs(rep.bounds.slack_g) >= 1e-9 or abs(rep.bounds.slack_i) >= 1e-9:
                    bounds.fail(f"{name} at {dx},{du}: slack {rep.bounds.slack_g:.3g}", iv, d)
                if np.max(np.abs(np.sort(rep.canonical.eigenvalues) - np.sort(theory))) >= 1e-10:
                    eig.fail(f"{name} at {dx},{du}", iv, d)
                worst_res = max(worst_res, rep.prop3.max_residual)
                if not rep.prop3.verdict or rep.prop3.epsilon != (1, -1, 1, -1):
                    prop3.fail(f"{name} at {dx},{du}: eps={rep.prop3.epsilon}", iv, d)
                if tuple(int(np.sign(g)) for g in rep.canonical.eigenvalues) != rep.prop3.epsilon:
                    sign.fail(f"{name} at {dx},{du}", iv, d)
                if name == "general":
                    best = float(povm_gains(rep.gamma, bases).max())
                    tn = trace_norm(rep.gamma)
                    worst_dom = max(worst_dom, best - tn)
                    if best > tn + 1e-9 or abs(rep.stats.gain_total - tn) >= 1e-10:
                        dominance.fail(f"at {dx},{du}: sampled {best!r} vs tr|Gamma| {tn!r}", iv, d)
    bounds.detail = bounds.detail or f"max |slack| {worst_g:.2e}"
    dominance.detail = dominance.detail or f"max(sampled - tr|Gamma|) {worst_dom:.2e}"
    prop3.detail = prop3.detail or f"max residual {worst_res:.2e}"

    unique = Check("uniqueness up to rotation (100 rotations + 4 families)")
    d = DisturbancePair(0.25, 0.25)
    ivs = [build_rotated(d, r) for r in random_orthogonals(SampleConfig(seed, 100))]
    ivs += [iv for name, iv in _named_families(d, seed) if name != "rotated"]
    coeffs = []
    for iv in ivs:
        c = full_report(iv, d).canonical
        coeffs.append(c.coefficients)
        if not (c.unique and c.matches_pattern):
            unique.fail(f"deviation {c.max_deviation:.3g}", iv, d)
    spread = float(np.max(np.ptp(np.array(coeffs), axis=0)))
    if spread >= 1e-9:
        unique.fail(f"coefficient spread {spread:.3g}")
    unique.detail = unique.detail or f"spread {spread:.2e}"

    canary = Check("perturbed-POVM canary fails the conditions (expected)")
    iv = build_optimal_general(d)
    rep = full_report(iv, d)
    bad = check_prop3(joint_states(iv, d), perturbed_povm(rep.povm, 0.1), d)
    if bad.verdict or bad.max_residual <= 1e-3:
        canary.fail(f"canary passed unexpectedly (residual {bad.max_residual:.3g})", iv, d)
    canary.detail = canary.detail or f"residual {bad.max_residual:.3g}"

    random_dom = Check("random interactions never beat the bounds")
    strict = 0
    samples = random_interactions(d, SampleConfig(seed, min(trials, 1000)))
    for ri in samples:
        rep = full_report(ri.interaction, d)
        if rep.bounds.slack_g < -1e-9 or rep.bounds.slack_i < -1e-9:
            random_dom.fail(f"slack {rep.bounds.slack_g:.3g}", ri.interaction, d)
        strict += rep.bounds.slack_g > 1e-9
    random_dom.detail = random_dom.detail or f"strict slack in {strict}/{len(samples)}"

    table = Check("closed-form per-outcome gains (eigen-aligned random samples)")
    worst = 0.0
    for ri in random_interactions(d, SampleConfig(seed, min(trials, 1000)), eigen_aligned=True):
        err = closed_form_gain_error(ri, d)
        worst = max(worst, err)
        if err >= 1e-9:
            table.fail(f"error {err:.3g}", ri.interaction, d)
    table.detail = table.detail or f"max error {worst:.2e}"

    return [bounds, eig, dominance, unique, prop3, sign, canary, random_dom, table]


def cmd_verify(args, parser) -> int:
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    checks = run_checks(args.trials, args.seed)
    width = max(len(c.name) for c in checks)
    print(f"{'check'.ljust(width)}  result  detail")
    for c in checks:
        print(f"{c.name.ljust(width)}  {'PASS' if c.ok else 'FAIL'}    {c.detail}")
    failed = [c for c in checks if not c.ok]
    for c in failed:
        if c.offender is not None:
            print(f"offending instance for '{c.name}':", file=sys.stderr)
            print(json.dumps(c.offender), file=sys.stderr)
    print("all checks passed" if not failed else f"{len(failed)} check(s) failed")
    return 1 if failed else 0


# ------------------------------------------------------------------ canonicalize


def cmd_canonicalize(args, parser) -> int:
    try:
        with open(args.input) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: {args.input}: line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        iv, d = from_document(doc)
    except InteractionDocumentError as exc:
        where = f" (field '{exc.field}')" if exc.field else ""
        print(f"error: {args.input}{where}: {exc}", file=sys.stderr)
        return 2
    rep = full_report(iv, d)
    canon = rep.canonical
    out = {
        "basis": iv.basis,
        "d_xy": d.d_xy,
        "d_uv": d.d_uv,
        "measured_d_uv": rep.measured.d_uv,
        "coefficients": canon.coefficients.tolist(),
        "pattern": canon.pattern.tolist(),
        "permutation": list(canon.permutation),
        "signs": list(canon.signs),
        "eigenvalues": [float(x) for x in canon.eigenvalues],
        "unique": canon.unique,
        "matches_pattern": canon.matches_pattern,
        "max_deviation": canon.max_deviation,
        "optimal": rep.optimal,
        "slack_g": rep.bounds.slack_g,
        "slack_i": rep.bounds.slack_i,
        "prop3_verdict": rep.prop3.verdict,
    }
    print(json.dumps(out, indent=2))
    if not canon.unique:
        print("notice: Gamma has a repeated eigenvalue; the canonical form is not unique", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bb84eve", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def family_flags(p):
        p.add_argument("--family", choices=FAMILIES, required=True)
        p.add_argument("--a", type=float, default=None, help="rotation parameter for one-param (default 0.5)")
        p.add_argument("--seed", type=int, default=None, help="rotation seed for the rotated family")
        p.add_argument("--bits", action="store_true", help="report mutual information in bits")

    p = sub.add_parser("construct", help="build one interaction and report on it as JSON")
    family_flags(p)
    p.add_argument("--dxy", type=_rate, required=True)
    p.add_argument("--duv", type=_rate, required=True)
    p.add_argument("--stats-csv", default=None, help="also write per-outcome statistics here")
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("sweep", help="evaluate a (d_xy, d_uv) grid and write CSV")
    family_flags(p)
    p.add_argument("--dmin", type=_rate, required=True)
    p.add_argument("--dmax", type=_rate, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV path, or - for stdout")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("verify", help="run the property suite and print a pass/fail table")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("canonicalize", help="reduce an interaction document to its eigenbasis form")
    p.add_argument("--input", required=True)
    p.set_defaults(handler=cmd_canonicalize)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.handler(args, parser)


if __name__ == "__main__":
    sys.exit(main())
