"""Command-line driver: generate, check and analyse crystals, emitting JSON reports."""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from .cancoord import (
    canonical_coordinates,
    canonical_form,
    q_chart_defect,
    qprime,
    to_q_chart,
    verify_club,
    verify_frame,
)
from .crystal import HodgeFCrystal, check_axioms, hodge_polygon, is_ordinary, newton_polygon
from .cy3 import mirror_map, symplectic_frame, verify_cy3_frame
from .frobenius import FrobLift
from .instanton import check_ksv, extract_instanton, integrality_report, dwork_integrality
from .periods import LogWPoint, hodge_equals_slope, neutral, period_check
from .synth import random_cy3_seed, random_weight1_seed, synth_cy3, synth_weight1
from .witt import PrecisionError, WittElem

EXIT_OK, EXIT_INVARIANT, EXIT_PARSE, EXIT_PRECISION = 0, 1, 2, 3
COMMANDS = ("check", "cancoord", "cy3", "instanton", "periods", "gen")


@dataclass
class JobConfig:
    command: str
    input: str | None = None
    output: str | None = None
    primes: tuple = (5,)
    s: int = 1
    N: int = 5
    D: int = 4
    seed: int = 0
    kind: str = "weight1"
    m: int = 1
    r: int | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command}")
        if self.N < 1 or self.D < 1 or self.s < 1:
            raise ValueError("precision, truncation and degree must be >= 1")
        for p in self.primes:
            if p < 3 or any(p % k == 0 for k in range(2, int(p**0.5) + 1)):
                raise ValueError(f"prime must be an odd prime, got {p}")


class InputError(Exception):
    pass


def _min_precision(series_list) -> int:
    return min((min(x.pr) for x in series_list), default=0)


def _loss(R, series_list) -> dict:
    got = _min_precision(series_list)
    return {"N": R.W.N, "min_output_precision": got, "loss": R.W.N - got}


def _random_lift(R, rng: random.Random) -> FrobLift:
    from .synth import random_unit_series

    p = R.W.p
    return FrobLift(R, [random_unit_series(R, rng) * R(1 + p * rng.randrange(p)) for _ in range(R.m)])


# -- jobs -------------------------------------------------------------------------------


def job_gen(cfg: JobConfig, p: int) -> tuple:
    rng = random.Random(cfg.seed)
    r = cfg.m if cfg.r is None else cfg.r
    if cfg.kind in ("weight1", "broken"):
        seed, _ = random_weight1_seed(p, cfg.s, cfg.N, cfg.D, cfg.m, r, rng)
        X = synth_weight1(seed)
        if cfg.kind == "broken":
            X = X.with_data(filtration=[list(range(X.rank)), list(range(X.rank - 1))])
        out = X.to_json()
        out["seed"] = seed.to_json()
    elif cfg.kind == "cy3":
        seed = random_cy3_seed(p, cfg.s, cfg.N, cfg.D, cfg.m, rng)
        out = synth_cy3(seed).to_json()
        out["seed"] = seed.to_json()
    else:
        raise InputError(f"unknown kind {cfg.kind}")
    out["kind"] = cfg.kind
    return EXIT_OK, out


def job_check(X: HodgeFCrystal, cfg: JobConfig) -> tuple:
    rep = check_axioms(X)
    out = {"axioms": rep.to_json(), "hodge_polygon": hodge_polygon(X).to_json()}
    if rep.ok:
        try:
            out["newton_polygon"] = newton_polygon(X).to_json()
            out["ordinary"] = is_ordinary(X)
        except PrecisionError as exc:
            out["newton_polygon"] = f"unresolved: {exc}"
    return (EXIT_OK if rep.ok else EXIT_INVARIANT), out


def job_cancoord(X: HodgeFCrystal, cfg: JobConfig) -> tuple:
    R = X.ring
    qc = canonical_coordinates(X)
    frame_rep = verify_frame(qc.frame)
    rng = random.Random(cfg.seed)
    residual_ok = []
    for _ in range(5):
        res = verify_club(qc.frame, qc.tau, _random_lift(R, rng))
        residual_ok.append(all(x.is_zero() for row in res for x in row))
    qp = qprime(qc.tau)
    dwork = [dwork_integrality(x.scale(x.constant().inverse())) for row in qp for x in row]
    qrep = q_chart_defect(to_q_chart(X, qc))
    ok = frame_rep.ok and all(residual_ok) and all(dwork) and qrep.ok
    out = {
        "coordinates": qc.to_json(),
        "frame_checks": frame_rep.to_json(),
        "club_residuals_vanish": residual_ok,
        "dwork_integrality": dwork,
        "q_chart": qrep.to_json(),
        "precision": _loss(R, qc.q),
    }
    return (EXIT_OK if ok else EXIT_INVARIANT), out


def job_cy3(X: HodgeFCrystal, cfg: JobConfig) -> tuple:
    fr = symplectic_frame(X)
    rep = verify_cy3_frame(fr)
    qt = mirror_map(fr)
    out = {
        "frame": fr.to_json(),
        "checks": rep.to_json(),
        "mirror_map": [x.to_json() for x in qt],
        "precision": _loss(X.ring, list(fr.kappa.values()) + fr.a + [fr.c]),
    }
    return (EXIT_OK if rep.ok else EXIT_INVARIANT), out


def job_instanton(X: HodgeFCrystal, cfg: JobConfig) -> tuple:
    fr = symplectic_frame(X)
    R = fr.crystal_q.ring
    m = R.m
    # f = (c - c(0)) / 2 satisfies phi(kappa) - kappa = theta^3 f
    f = (fr.c - R(fr.c.constant())) * R.W.from_fraction(1, 2)
    tables, ok = [], True
    for i in range(m):
        for j in range(i, m):
            for l in range(j, m):
                kappa = fr.kappa[(i, j, l)]
                ksv = check_ksv(kappa, f, (i, j, l))
                expansion = extract_instanton(kappa, (i, j, l))
                rep = integrality_report(expansion)
                ok = ok and ksv and rep.ok
                tables.append({"expansion": expansion.to_json(), "ksv": ksv, "integrality": rep.to_json()})
    return (EXIT_OK if ok else EXIT_INVARIANT), {"instantons": tables}


def job_periods(X: HodgeFCrystal, cfg: JobConfig) -> tuple:
    Xc = canonical_form(X)
    R = Xc.ring
    W = R.W
    rng = random.Random(cfg.seed)
    rows, ok = [], True
    for _ in range(10):
        beta = [W(1) + WittElem(W, tuple(rng.randrange(W.p**W.N) for _ in range(W.s))).mul_p(1) for _ in range(R.m)]
        got, want, agree = period_check(Xc, LogWPoint(beta))
        ok = ok and agree
        rows.append(
            {
                "beta": [b.to_json() for b in beta],
                "periods": [[x.to_json() for x in row] for row in got],
                "log_beta": [[x.to_json() for x in row] for row in want],
                "agree": agree,
            }
        )
    neutral_ok = hodge_equals_slope(Xc, neutral(W, R.m))
    ok = ok and neutral_ok
    return (EXIT_OK if ok else EXIT_INVARIANT), {"points": rows, "neutral_hodge_equals_slope": neutral_ok}


JOBS = {
    "check": job_check,
    "cancoord": job_cancoord,
    "cy3": job_cy3,
    "instanton": job_instanton,
    "periods": job_periods,
}


def _load_crystals(path: str) -> list:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    items = data["sweep"] if isinstance(data, dict) and "sweep" in data else [data]
    out = []
    for item in items:
        try:
            out.append(HodgeFCrystal.from_json(item))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"input does not match the crystal schema: {exc}") from None
    return out


def run(cfg: JobConfig) -> tuple:
    """Execute one job; returns (exit code, report)."""
    try:
        cfg.validate()
        if cfg.command == "gen":
            results = [job_gen(cfg, p) for p in cfg.primes]
        else:
            if not cfg.input:
                raise InputError("--in is required")
            crystals = _load_crystals(cfg.input)
            results = []
            for X in crystals:
                try:
                    results.append(JOBS[cfg.command](X, cfg))
                except PrecisionError:
                    raise
                except (ValueError, ArithmeticError) as exc:
                    results.append((EXIT_INVARIANT, {"error": str(exc)}))
    except InputError as exc:
        return EXIT_PARSE, {"error": str(exc), "exit_code": EXIT_PARSE}
    except PrecisionError as exc:
        return EXIT_PRECISION, {"error": str(exc), "exit_code": EXIT_PRECISION}
    except ValueError as exc:
        return EXIT_PARSE, {"error": str(exc), "exit_code": EXIT_PARSE}
    code = max(c for c, _ in results)
    if len(results) == 1:
        report = results[0][1]
    else:
        report = {"sweep": [r for _, r in results], "verdicts": [c for c, _ in results]}
    if cfg.command != "gen":
        report = {"command": cfg.command, "exit_code": code, "result": report}
    return code, report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logcrystal", description="Logarithmic F-crystals and canonical coordinates")
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--in", dest="input")
    ap.add_argument("--out", dest="output")
    ap.add_argument("--prime", type=int, nargs="+", default=[5])
    ap.add_argument("--degree-s", type=int, default=1, help="residue field degree s")
    ap.add_argument("--precision", type=int, default=5, help="p-adic precision N")
    ap.add_argument("--trunc", type=int, default=4, help="series truncation degree D")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kind", choices=("weight1", "cy3", "broken"), default="weight1", help="generator kind")
    ap.add_argument("--vars", type=int, default=1, help="number of base variables m")
    ap.add_argument("--log-vars", type=int, default=None, help="number of log variables r (default m)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    cfg = JobConfig(
        command=args.command,
        input=args.input,
        output=args.output,
        primes=tuple(args.prime),
        s=args.degree_s,
        N=args.precision,
        D=args.trunc,
        seed=args.seed,
        kind=args.kind,
        m=args.vars,
        r=args.log_vars,
    )
    code, report = run(cfg)
    if cfg.command == "gen" and len(cfg.primes) > 1 and code == EXIT_OK:
        report = {"sweep": report["sweep"]}
    text = json.dumps(report, sort_keys=True, indent=1)
    if cfg.output:
        Path(cfg.output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
