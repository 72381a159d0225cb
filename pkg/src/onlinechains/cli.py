"""Command line entry points: generate, run, adversary, verify, lambda, stats.

Exit status is 0 when every check passes, 1 on a detected violation and 2 on
unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from .coloring import lambda_budget
from .harness import (ContractError, FirstFitPlayer, GeneratorConfig, adversary_fig1, adversary_regular,
                      generate_regular_presentation, read_transcript, run_events, verify_transcript)
from .presentation import EventFormatError, dump_event, read_events

OK, VIOLATION, INPUT_ERROR = 0, 1, 2


def _write_lines(path: str | None, lines) -> None:
    if path is None or path == "-":
        for line in lines:
            print(line)
        return
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def cmd_generate(args) -> int:
    lo, hi = args.permutations
    cfg = GeneratorConfig(w=args.w, rounds=args.rounds, seed=args.seed, scheme=args.scheme,
                          permutations=(lo, hi))
    events = generate_regular_presentation(cfg)
    _write_lines(args.out, [dump_event(e) for e in events])
    return OK


def cmd_run(args) -> int:
    events = read_events(args.events)
    alg, lines = run_events(events, strict=args.strict_accounting, audit=args.audit)
    _write_lines(args.out, lines)
    alarms = alg.all_alarms()
    for a in alarms[:20]:
        print(f"alarm: {a}", file=sys.stderr)
    return VIOLATION if alarms else OK


def cmd_adversary(args) -> int:
    if args.algo == "firstfit":
        res = adversary_fig1(FirstFitPlayer)
        lines = [json.dumps(res.as_dict(), sort_keys=True)]
        ok = res.chains_used >= 3 and res.certified_width == 2
        print(f"firstfit: {res.chains_used} chains on {res.elements} elements, width {res.certified_width}",
              file=sys.stderr)
    else:
        alg, events, used = adversary_regular()
        _, lines = run_events(events)
        ok = used >= 3 and alg.stats()["invariant_alarms"] == 0
        print(f"main: {used} chains, width {alg.w}", file=sys.stderr)
    _write_lines(args.out, lines)
    return OK if ok else VIOLATION


def cmd_verify(args) -> int:
    events, colors, stats = read_transcript(args.transcript)
    rep = verify_transcript(events, colors, stats)
    print(json.dumps(rep.as_dict(), sort_keys=True))
    return OK if rep.ok else VIOLATION


def cmd_lambda(args) -> int:
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["w", "lambda", "lambda1", "lambda2", "lambda3"])
    for w in range(1, args.max_w + 1):
        b = lambda_budget(w)
        out.writerow([w, b.lam, b.lam1, b.lam2, b.lam3])
    return OK


def cmd_stats(args) -> int:
    events, colors, stats = read_transcript(args.transcript)
    if stats is None:
        alg, _ = run_events(events)
        stats = alg.stats()
    if args.format == "json":
        print(json.dumps(stats, sort_keys=True))
    else:
        out = csv.writer(sys.stdout, lineterminator="\n")
        keys = sorted(stats)
        out.writerow(keys)
        out.writerow([stats[k] for k in keys])
    if args.tree:
        alg, _ = run_events(events)
        with open(args.tree, "w", encoding="utf-8") as fh:
            fh.write(alg.tree.to_json() + "\n")
    return OK


def _pair(text: str) -> tuple[int, int]:
    parts = text.split(",") if "," in text else text.split("-")
    try:
        lo, hi = (int(parts[0]), int(parts[-1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("need 1 <= LO <= HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="onlinechains", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a random regular presentation as JSONL")
    g.add_argument("--w", type=int, required=True)
    g.add_argument("--rounds", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scheme", choices=["rejection", "factorization"], default="rejection")
    g.add_argument("--permutations", type=_pair, default=(1, 3), metavar="LO,HI")
    g.add_argument("--out")
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run the regular-poset partitioner on an event file")
    r.add_argument("--events", required=True)
    r.add_argument("--out")
    r.add_argument("--strict-accounting", action="store_true")
    r.add_argument("--audit", action="store_true", help="also run the expensive width probes")
    r.set_defaults(fn=cmd_run)

    a = sub.add_parser("adversary", help="play the three-chain game at width 2")
    a.add_argument("--algo", choices=["firstfit", "main"], required=True)
    a.add_argument("--out")
    a.set_defaults(fn=cmd_adversary)

    v = sub.add_parser("verify", help="replay a transcript and check every chain")
    v.add_argument("--transcript", required=True)
    v.set_defaults(fn=cmd_verify)

    lam = sub.add_parser("lambda", help="print the color budget table as CSV")
    lam.add_argument("--max-w", type=int, required=True)
    lam.set_defaults(fn=cmd_lambda)

    s = sub.add_parser("stats", help="print run statistics of a transcript")
    s.add_argument("--transcript", required=True)
    s.add_argument("--format", choices=["csv", "json"], default="json")
    s.add_argument("--tree", help="also dump the node tree as JSON to this path")
    s.set_defaults(fn=cmd_stats)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (EventFormatError, OSError, ValueError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
