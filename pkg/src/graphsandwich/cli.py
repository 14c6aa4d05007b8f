"""Command-line front end.

Subcommands: ``run`` (trial records to disk), ``verify`` (statistical
suites with pass/fail lines), ``params`` (parameter recipes + constraint
report as JSON), ``probe`` (one conditional edge probability), ``sweep``
(grid of configurations to CSV).

Exit codes: 0 success, 1 configuration/usage error, 2 invariant violation.
All outputs are byte-identical across reruns with the same configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .edgeprob import EstimatorHandle, conditional_edge_prob, exact_edge_counts
from .errors import BudgetExceeded, ConfigError, GraphSandwichError
from .graphs import DegreeSequence, HostedFactorSpec, SimpleGraph
from .params import (
    DEFAULT_RATIO_THRESHOLD,
    DEFAULT_SAFETY,
    select_params,
    validate_constraints,
)
from .sampling import RngStream, derive_trial_stream
from .scheme import PipelineConfig, run_sandwich, run_stage1, run_stage2
from . import verify as verify_mod

OVERRIDE_KEYS = {
    "xi1": ("slack1", float),
    "xi": ("slack2", float),
    "f": (None, float),
    "sigma": (None, float),
    "C": ("safety", float),
    "mu1": ("mean_steps1", float),
    "mu2": ("mean_steps2", float),
    "zeta1": ("thinning1", float),
    "zeta2": ("thinning2", float),
    "fixedSteps1": ("fixed_steps1", int),
    "fixedSteps2": ("fixed_steps2", int),
}


@dataclass
class ExperimentConfig:
    n: int = 5
    d: int = 2
    seed: int = 0
    trials: int = 1
    estimator: str = "exact"
    stage: str = "full"
    out: str = "runs.jsonl"
    fmt: str = "jsonl"
    debug_asserts: bool = False
    threads: int | None = None  # None: available parallelism
    overrides: dict = field(default_factory=dict)

    def resolved_threads(self) -> int:
        import os

        if self.threads is not None:
            return max(1, self.threads)
        return os.cpu_count() or 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.stage not in ("one", "two", "full"):
            raise ConfigError(f"unknown stage {self.stage!r}")
        if self.fmt not in ("jsonl", "csv"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if not (3 <= self.n):
            raise ConfigError("n must be >= 3")
        if not (1 <= self.d <= self.n - 1):
            raise ConfigError("d must satisfy 1 <= d <= n-1")
        try:
            EstimatorHandle.parse(self.estimator)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for key, raw in self.overrides.items():
            if key not in OVERRIDE_KEYS:
                raise ConfigError(f"unknown override key {key!r}")
            if key in ("zeta1", "zeta2") and not 0.0 < float(raw) < 1.0:
                raise ConfigError(
                    f"override {key}={raw} must lie strictly inside (0, 1)"
                )

    def pipeline_config(self) -> PipelineConfig:
        cfg = PipelineConfig(estimator=EstimatorHandle.parse(self.estimator),
                             debug_asserts=self.debug_asserts)
        for key, raw in self.overrides.items():
            attr, conv = OVERRIDE_KEYS[key]
            if attr is None:
                continue  # f and sigma only matter to the params subcommand
            value = conv(raw)
            if attr == "safety":
                cfg.safety1 = value
                cfg.safety2 = value
            else:
                setattr(cfg, attr, value)
        return cfg


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        mapping = {
            "n": "n", "d": "d", "seed": "seed", "trials": "trials",
            "estimator": "estimator", "stage": "stage", "out": "out",
            "format": "fmt", "debugAsserts": "debug_asserts", "threads": "threads",
        }
        for key, attr in mapping.items():
            if key in data:
                setattr(cfg, attr, data[key])
        cfg.overrides.update(data.get("overrides", {}))
    # flags win over the config file
    for attr in ("n", "d", "seed", "trials", "estimator", "stage", "out", "threads"):
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "format", None) is not None:
        cfg.fmt = args.format
    if getattr(args, "debug_asserts", False):
        cfg.debug_asserts = True
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        cfg.overrides[key] = value
    cfg.validate()
    return cfg


def _stage1_record(out) -> dict:
    return {
        "edges": out.partial.edge_count,
        "deltaT": out.deficit.max_value,
        "rangeT": out.deficit.spread,
        "viaIndSample": out.via_fallback,
    }


def _stage2_record(out) -> dict:
    return {
        "edges": out.core.edge_count,
        "viaIndSample": out.via_fallback,
        "etaExceedCount": out.shortfall_breaches,
        "maxEtaSeen": out.max_shortfall,
    }


def _run_one_trial(payload) -> dict:
    cfg_dict, index = payload
    cfg = ExperimentConfig(**cfg_dict)
    pipe = cfg.pipeline_config()
    trial = derive_trial_stream(cfg.seed, index)
    record = {"trialIndex": index, "seedDerived": trial.seed}
    if cfg.stage == "full":
        res = run_sandwich(cfg.n, cfg.d, cfg.seed, pipe, trial_index=index)
        record["stage1"] = _stage1_record(res.stage1)
        record["stage2"] = _stage2_record(res.stage2)
        record["containsLower"] = res.contains_lower
        record["containsUpper"] = res.contains_upper
        record["densityGL"] = res.lower.density()
        record["densityGU"] = res.upper.density()
    else:
        s1 = run_stage1(cfg.n, cfg.d, pipe, trial.child(1))
        record["stage1"] = _stage1_record(s1)
        if cfg.stage == "two":
            s2, _ = run_stage2(cfg.n, cfg.d, s1, pipe, trial.child(2))
            record["stage2"] = _stage2_record(s2)
    return record


def _write_records(cfg: ExperimentConfig, records: list[dict]) -> None:
    if cfg.fmt == "jsonl":
        with open(cfg.out, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    else:  # csv: flattened keys
        import csv as _csv

        def flatten(rec):
            flat = {}
            for k, v in rec.items():
                if isinstance(v, dict):
                    for kk, vv in v.items():
                        flat[f"{k}.{kk}"] = vv
                else:
                    flat[k] = v
            return flat

        flats = [flatten(r) for r in records]
        header = list(flats[0]) if flats else []
        with open(cfg.out, "w", newline="", encoding="utf-8") as fh:
            w = _csv.DictWriter(fh, fieldnames=header)
            w.writeheader()
            w.writerows(flats)


def summarize_records(path: str) -> dict:
    """Aggregate a previously written trial file (auditable second pass)."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    if not records:
        return {"trials": 0}

    def mean(xs):
        xs = list(xs)
        return sum(xs) / len(xs) if xs else None

    summary = {
        "trials": len(records),
        "meanStage1Edges": mean(r["stage1"]["edges"] for r in records if "stage1" in r),
        "meanDeltaT": mean(r["stage1"]["deltaT"] for r in records if "stage1" in r),
        "deficitSpreadOkRate": mean(
            1.0 if r["stage1"]["rangeT"] <= r["stage1"]["deltaT"] ** (2.0 / 3.0) else 0.0
            for r in records
            if "stage1" in r
        ),
        "stage1FallbackRate": mean(
            1.0 if r["stage1"]["viaIndSample"] else 0.0 for r in records if "stage1" in r
        ),
    }
    if any("stage2" in r for r in records):
        summary["stage2FallbackRate"] = mean(
            1.0 if r["stage2"]["viaIndSample"] else 0.0 for r in records if "stage2" in r
        )
    if any("containsLower" in r for r in records):
        summary["containsLowerRate"] = mean(
            1.0 if r["containsLower"] else 0.0 for r in records
        )
        summary["containsUpperRate"] = mean(
            1.0 if r["containsUpper"] else 0.0 for r in records
        )
        summary["bothRate"] = mean(
            1.0 if (r["containsLower"] and r["containsUpper"]) else 0.0 for r in records
        )
        summary["meanDensityGL"] = mean(r["densityGL"] for r in records)
        summary["meanDensityGU"] = mean(r["densityGU"] for r in records)
    return summary


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    payloads = [
        (
            {
                "n": cfg.n, "d": cfg.d, "seed": cfg.seed, "trials": cfg.trials,
                "estimator": cfg.estimator, "stage": cfg.stage, "out": cfg.out,
                "fmt": cfg.fmt, "debug_asserts": cfg.debug_asserts,
                "threads": 1, "overrides": dict(cfg.overrides),
            },
            i,
        )
        for i in range(cfg.trials)
    ]
    workers = cfg.resolved_threads()
    if workers > 1 and cfg.trials >= 64:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one_trial, payloads, chunksize=64))
    else:
        records = [_run_one_trial(p) for p in payloads]
    records.sort(key=lambda r: r["trialIndex"])
    _write_records(cfg, records)
    summary = {"config": {
        "n": cfg.n, "d": cfg.d, "seed": cfg.seed, "trials": cfg.trials,
        "estimator": cfg.estimator, "stage": cfg.stage,
        "overrides": dict(cfg.overrides),
    }}
    if cfg.fmt == "jsonl":
        summary.update(summarize_records(cfg.out))
    summary_path = cfg.out + ".summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, separators=(",", ":")) + "\n")
    print(f"wrote {cfg.trials} records to {cfg.out} and summary to {summary_path}")
    return 0


def _desk_pipeline(cfg: ExperimentConfig) -> PipelineConfig:
    return cfg.pipeline_config()


def cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    estimator = EstimatorHandle.parse(cfg.estimator)
    suites = (
        ["marginals", "uniformity", "independence", "containment", "estimators"]
        if args.suite == "all"
        else [args.suite]
    )
    if "uniformity" in suites and estimator.mode != "exact":
        print("refused: the uniformity suite needs the exact estimator", file=sys.stderr)
        return 1
    trials = cfg.trials if cfg.trials > 1 else 20000
    rows = []
    ok_all = True

    def emit(name, stat, threshold, ok):
        nonlocal ok_all
        ok_all = ok_all and ok
        rows.append((name, stat, threshold, ok))
        print(f"{'PASS' if ok else 'FAIL'} {name}: statistic={stat:.6g} threshold={threshold:.6g}")

    pipe = _desk_pipeline(cfg)
    if "marginals" in suites:
        from .coupling import CouplingConfig, run_coupling

        mean1 = pipe.resolved_mean_steps1(cfg.n, cfg.d)
        thin1 = pipe.resolved_thinning1()
        npairs = cfg.n * (cfg.n - 1) // 2
        q1 = 1.0 - math.exp(-mean1 / npairs)
        p1 = 1.0 - math.exp(-mean1 * (1.0 - thin1) / npairs)
        uppers, lowers = [], []
        for i in range(trials):
            s1 = run_stage1(cfg.n, cfg.d, pipe, derive_trial_stream(cfg.seed, i).child(1))
            uppers.append(s1.upper)
            lowers.append(s1.lower)
        rep_u = verify_mod.edge_margin_test(uppers, q1)
        rep_l = verify_mod.edge_margin_test(lowers, p1)
        emit("marginals.upper", len(rep_u.outliers), 0.5, rep_u.all_within_band)
        emit("marginals.lower", len(rep_l.outliers), 0.5, rep_l.all_within_band)
    if "uniformity" in suites:
        from .coupling import CouplingConfig, run_coupling
        from .sampling import enumerate_factors

        support = enumerate_factors(
            HostedFactorSpec(SimpleGraph.complete(cfg.n), DegreeSequence.constant(cfg.n, cfg.d))
        )
        ccfg = CouplingConfig(
            n=cfg.n,
            target=DegreeSequence.constant(cfg.n, cfg.d),
            thinning=pipe.resolved_thinning1(),
            mean_steps=pipe.resolved_mean_steps1(cfg.n, cfg.d),
            estimator=estimator,
            run_completion=True,
        )
        rep = verify_mod.exact_distribution_test(
            lambda r: run_coupling(ccfg, r).core,
            support,
            trials,
            derive_trial_stream(cfg.seed, 1),
        )
        emit("uniformity.core", rep.p_value, 1e-3, rep.p_value > 1e-3)
    if "independence" in suites:
        from .graphs import complement

        uppers, covers = [], []
        for i in range(trials):
            res = run_sandwich(cfg.n, cfg.d, cfg.seed, pipe, trial_index=i)
            uppers.append(res.stage1.upper)
            covers.append(complement(res.stage2.lower))
        rep = verify_mod.pairwise_independence_test(uppers, covers)
        emit("independence.crossCorrelation", rep.max_abs_correlation, 0.05,
             rep.max_abs_correlation < 0.05)
    if "containment" in suites:
        results = [run_sandwich(cfg.n, cfg.d, cfg.seed, pipe, trial_index=i) for i in range(trials)]
        clean = [r for r in results if not r.any_fallback]
        bad = sum(1 for r in clean if not (r.contains_lower and r.contains_upper))
        rates = verify_mod.containment_rate(results)
        emit("containment.noFallbackViolations", bad, 0.5, bad == 0)
        print(f"     rates: both={rates.both_rate:.4f} fallback={rates.fallback_rate:.4f}")
    if "estimators" in suites:
        rng = derive_trial_stream(cfg.seed, 99)
        specs = random_small_specs(20, rng)
        worst_sum = 0.0
        exact = EstimatorHandle.exact()
        from .edgeprob import complement_edge_prob, factor_statistics

        mismatch = 0
        for spec in specs:
            stats = factor_statistics(spec)
            if stats.total == 0:
                continue
            total_p = math.fsum(
                conditional_edge_prob(spec, e, exact) for e in spec.host.sorted_edges()
            )
            worst_sum = max(worst_sum, abs(total_p - spec.target.total / 2))
            host_deg = DegreeSequence(spec.host.degrees())
            comp_target = DegreeSequence(
                [h - t for h, t in zip(host_deg, spec.target)]
            )
            comp_spec = HostedFactorSpec(spec.host, comp_target)
            for e in spec.host.sorted_edges():
                a = complement_edge_prob(spec, e, exact)
                b = conditional_edge_prob(comp_spec, e, exact)
                if a != b:
                    mismatch += 1
        emit("estimators.edgeProbSumIdentity", worst_sum, 1e-9, worst_sum <= 1e-9)
        emit("estimators.complementIdentity", mismatch, 0.5, mismatch == 0)
    if args.out:
        verify_mod.write_summary_csv(args.out, rows)
    return 0 if ok_all else 1


def random_small_specs(count: int, rng: RngStream, max_n: int = 6):
    """Seeded feasible specs: random host, target from a random subgraph."""
    from .sampling import gnp

    specs = []
    while len(specs) < count:
        n = 3 + rng.integers(0, max_n - 2)
        host = gnp(n, 0.4 + 0.5 * rng.random(), rng)
        if host.edge_count == 0:
            continue
        sub = SimpleGraph(n)
        for e in host.sorted_edges():
            if rng.random() < 0.55:
                sub.add_edge(*e)
        target = DegreeSequence(sub.degrees())
        if target.total == 0:
            continue
        specs.append(HostedFactorSpec(host, target))
    return specs


def cmd_params(args) -> int:
    sp = select_params(args.n, args.d, safety=args.safety)
    report = validate_constraints(
        args.n, args.d, sp.slack1, sp.inflation, sp.exponent,
        ratio_threshold=args.ratio_threshold,
    )
    print(json.dumps({"params": sp.to_dict(), "constraints": report.to_dict()},
                     indent=2, sort_keys=False))
    return 0


def cmd_probe(args) -> int:
    host = SimpleGraph.read_file(args.host)
    target_vals = [int(x) for x in args.target.replace(",", " ").split()]
    if len(target_vals) != host.n:
        raise ConfigError(
            f"target length {len(target_vals)} != host vertex count {host.n}"
        )
    target = DegreeSequence(target_vals)
    spec = HostedFactorSpec(host, target)
    u, v = args.edge
    est = EstimatorHandle.parse(args.estimator)
    rng = RngStream(args.seed) if est.mode == "empirical" else None
    if est.mode == "exact":
        containing, total = exact_edge_counts(spec, (u, v))
        print(f"{containing}/{total} ({containing} of {total} factors)")
    else:
        p = conditional_edge_prob(spec, (u, v), est, rng)
        print(f"{p:.12g}")
    return 0


def cmd_sweep(args) -> int:
    import csv as _csv

    ns = [int(x) for x in args.grid_n.split(",")] if args.grid_n else []
    ds = [int(x) for x in args.grid_d.split(",")] if args.grid_d else []
    mults = [float(x) for x in args.grid_zeta_mult.split(",")] if args.grid_zeta_mult else [1.0]
    estimators = args.grid_estimator.split(",") if args.grid_estimator else ["exact"]
    header = [
        "n", "d", "zetaMultiplier", "estimator", "trials",
        "bothRate", "lowerRate", "upperRate", "fallbackRate",
        "meanDensityGL", "meanDensityGU", "error",
    ]
    rows = []
    for n, d, mult, est in product(ns, ds, mults, estimators):
        row = {k: "" for k in header}
        row.update({"n": n, "d": d, "zetaMultiplier": f"{mult:.12g}",
                    "estimator": est, "trials": args.trials})
        try:
            cfg = ExperimentConfig(n=n, d=d, seed=args.seed, trials=args.trials,
                                   estimator=est)
            cfg.validate()
            pipe = cfg.pipeline_config()
            pipe.thinning1 = pipe.resolved_thinning1() * mult
            if pipe.thinning2 is not None:
                pipe.thinning2 = pipe.thinning2 * mult
            if not (0.0 < pipe.thinning1 < 1.0):
                raise ConfigError(f"scaled zeta1 {pipe.thinning1} outside (0,1)")
            results = [
                run_sandwich(n, d, args.seed, pipe, trial_index=i)
                for i in range(args.trials)
            ]
            rates = verify_mod.containment_rate(results)
            row.update({
                "bothRate": f"{rates.both_rate:.12g}",
                "lowerRate": f"{rates.lower_rate:.12g}",
                "upperRate": f"{rates.upper_rate:.12g}",
                "fallbackRate": f"{rates.fallback_rate:.12g}",
                "meanDensityGL": f"{sum(r.lower.density() for r in results)/len(results):.12g}",
                "meanDensityGU": f"{sum(r.upper.density() for r in results)/len(results):.12g}",
            })
        except GraphSandwichError as exc:
            row["error"] = str(exc)
        rows.append(row)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = _csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphsandwich", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--d", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--estimator", type=str, default=None,
                        help="exact | heuristic | empirical:K")
        sp.add_argument("--stage", type=str, default=None, choices=["one", "two", "full"])
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--format", type=str, default=None, choices=["jsonl", "csv"])
        sp.add_argument("--debug-asserts", dest="debug_asserts", action="store_true")
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--config", type=str, default=None, help="JSON config file; flags win")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="parameter override (xi1, xi, f, sigma, C, mu1, mu2, "
                             "zeta1, zeta2, fixedSteps1, fixedSteps2)")

    sp = sub.add_parser("run", help="run trials and write one JSON line each")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("verify", help="run a statistical verification suite")
    sp.add_argument("suite", choices=["marginals", "uniformity", "independence",
                                      "containment", "estimators", "all"])
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("params", help="print parameter recipes and constraint report")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--safety", type=float, default=DEFAULT_SAFETY)
    sp.add_argument("--ratio-threshold", type=float, default=DEFAULT_RATIO_THRESHOLD)
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("probe", help="conditional edge probability for a host file")
    sp.add_argument("--host", type=str, required=True, help="edge-list file")
    sp.add_argument("--target", type=str, required=True,
                    help="space- or comma-separated degree targets")
    sp.add_argument("--edge", type=int, nargs=2, required=True, metavar=("U", "V"))
    sp.add_argument("--estimator", type=str, default="exact")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("sweep", help="summary CSV over a configuration grid")
    sp.add_argument("--grid-n", type=str, default="")
    sp.add_argument("--grid-d", type=str, default="")
    sp.add_argument("--grid-zeta-mult", type=str, default="")
    sp.add_argument("--grid-estimator", type=str, default="")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=str, required=True)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GraphSandwichError as exc:
        # invariant violations and mid-run feasibility breakdowns
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
