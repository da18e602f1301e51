"""Command line entry point: ``cubfuzz {fit,fuzzy,aggregate,simulate,distance,report}``."""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import hamming_distance
from .cub import CubParams, CubShelterParams, simulate
from .fuzzy import EMPIRICAL, SYSTEMS
from .io import ingest_csv, read_ifs_csv, write_json, write_ratings_csv, write_table
from .pipeline import (
    AnalysisConfig, build_config, build_profiles, load_config_file, run_aggregate, run_fits,
)

log = logging.getLogger("cubfuzz")

FIT_HEADER = [
    "item", "n", "model", "pi", "se_pi", "xi", "se_xi", "loglik", "bic", "converged", "boundary",
    "c", "pi_star", "se_pi_star", "xi_shelter", "se_xi_shelter", "delta", "se_delta",
    "pi1", "se_pi1", "pi2", "se_pi2", "loglik_shelter", "bic_shelter",
    "lrt_stat", "lrt_p", "lrt_candidates", "shelter_retained", "pi1_used", "error",
]
PROFILE_HEADER = ["item", "system", "category", "mu", "nu", "u", "score", "accuracy"]
AGG_HEADER = ["system", "item", "weight", "mu", "nu", "u", "score", "accuracy"]
COMPOSITE_HEADER = ["system", "weights", "n", "mu", "nu", "u", "score", "accuracy"]


def simulate_items(params, m: int, n: int, items: int, seed) -> list:
    """``items`` independent samples drawn from one generator seeded with ``seed``."""
    rng = np.random.default_rng(seed)
    return [simulate(params, m, n, rng) for _ in range(items)]


# -- report assembly ---------------------------------------------------------

def fit_records(fits) -> list[dict]:
    recs = []
    for f in fits:
        rec = dict.fromkeys(FIT_HEADER)
        rec.update(item=f.item, n=f.n, error=f.error)
        if f.choice is not None:
            ch = f.choice
            b = ch.base
            se = b.std_errors
            rec.update(
                model="cub_shelter" if ch.retained else "cub",
                pi=b.params.pi, se_pi=se.get("pi"), xi=b.params.xi, se_xi=se.get("xi"),
                loglik=b.loglik, bic=b.bic, converged=ch.chosen.converged,
                boundary=ch.chosen.boundary, pi1_used=ch.pi1,
            )
            if ch.shelter is not None:
                s = ch.shelter
                p = s.params
                sse = s.std_errors
                rec.update(
                    c=p.c, pi_star=p.pi_star, se_pi_star=sse.get("pi_star"),
                    xi_shelter=p.xi, se_xi_shelter=sse.get("xi"),
                    delta=p.delta, se_delta=sse.get("delta"),
                    pi1=p.pi1, se_pi1=sse.get("pi1"), pi2=p.pi2, se_pi2=sse.get("pi2"),
                    loglik_shelter=s.loglik, bic_shelter=s.bic,
                    lrt_stat=ch.statistic, lrt_p=ch.p_value,
                    lrt_candidates=ch.n_candidates, shelter_retained=ch.retained,
                )
        recs.append(rec)
    return recs


def profile_rows(profiles: dict) -> list[list]:
    rows = []
    for system, by_item in profiles.items():
        for item, p in by_item.items():
            for r in range(1, p.m + 1):
                i = r - 1
                if p.membership_only:
                    rows.append([item, system, r, p.mu[i], None, None, None, None])
                else:
                    rows.append([item, system, r, p.mu[i], p.nu[i], p.u[i], p.score[i], p.accuracy[i]])
    return rows


def aggregate_rows(results) -> tuple[list, list, list]:
    item_rows, comp_rows, cat_rows = [], [], []
    for res in results:
        w = res.weights.weights
        if res.composite is not None:
            c = res.composite
            for k, item in enumerate(res.items):
                item_rows.append([res.system, item, w[k], *c.item_means[k]])
            comp_rows.append([res.system, res.scheme, res.n, c.mu_bar, c.nu_bar, c.u_bar, c.s_bar, c.a_bar])
        else:
            for k, item in enumerate(res.items):
                item_rows.append([res.system, item, w[k], res.item_mu[k], None, None, None, None])
            comp_rows.append([res.system, res.scheme, res.n, res.mu_bar, None, None, None, None])
        for r, v in enumerate(res.category_membership, start=1):
            cat_rows.append([res.system, r, v])
    return item_rows, comp_rows, cat_rows


def _records(header, rows):
    return [dict(zip(header, r)) for r in rows]


# -- commands ----------------------------------------------------------------

def _load(args) -> tuple[AnalysisConfig, object]:
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    systems = None
    if getattr(args, "system", None):
        systems = [s for item in args.system for s in item.split(",") if s]
    overrides = dict(
        m=args.m, ip=args.ip, lb=args.lb, ub=args.ub, orientation=args.orientation,
        systems=systems, weights=args.weights, shelter=args.shelter, alpha=args.alpha,
        seed=args.seed,
    )
    cfg = build_config(file_values, overrides)
    if not args.data:
        raise ValueError("--data is required")
    return cfg, ingest_csv(args.data, cfg.m)


def _config_doc(cfg: AnalysisConfig) -> dict:
    return {
        "scale": {"m": cfg.m, "ip": cfg.scale.ip, "lb": cfg.lb, "ub": cfg.scale.ub,
                  "orientation": cfg.orientation},
        "systems": cfg.systems, "shelter": cfg.shelter, "alpha": cfg.alpha,
        "weights": cfg.weights, "seed": cfg.seed,
        "spline": vars(cfg.spline), "em": {"max_iter": cfg.max_iter, "tol": cfg.tol},
    }


def do_fit(cfg, table, out: Path) -> tuple[dict, list, list]:
    fits = run_fits(table, cfg)
    recs = fit_records(fits)
    write_table(out / "fit.csv", FIT_HEADER, [[r[h] for h in FIT_HEADER] for r in recs])
    errors = [f"{f.item}: {f.error}" for f in fits if f.error]
    return {"fits": recs}, fits, errors


def do_fuzzy(cfg, table, out: Path, fits=None):
    profiles, errors = build_profiles(table, cfg, fits)
    rows = profile_rows(profiles)
    # the long format doubles as plot data (category vs mu/nu/u per system)
    write_table(out / "profiles.csv", PROFILE_HEADER, rows)
    return {"profiles": _records(PROFILE_HEADER, rows)}, profiles, errors


def do_aggregate(cfg, table, out: Path, profiles, iwam: bool = False):
    results, errors = run_aggregate(table, cfg, profiles)
    item_rows, comp_rows, cat_rows = aggregate_rows(results)
    write_table(out / "item_aggregates.csv", AGG_HEADER, item_rows)
    write_table(out / "composite.csv", COMPOSITE_HEADER, comp_rows)
    write_table(out / "category_membership.csv", ["system", "category", "mu_tilde"], cat_rows)
    if iwam:
        for res in results:
            if res.composite is not None:
                c = res.composite
                rows = [[j + 1, a, b] for j, (a, b) in enumerate(zip(c.respondent_mu, c.respondent_nu))]
                write_table(out / f"iwam_{res.system}.csv", ["respondent", "mu", "nu"], rows)
            else:
                rows = [[j + 1, a, None] for j, a in enumerate(res.respondent_mu)]
                write_table(out / f"iwam_{res.system}.csv", ["respondent", "mu", "nu"], rows)
    doc = {
        "item_aggregates": _records(AGG_HEADER, item_rows),
        "composite": _records(COMPOSITE_HEADER, comp_rows),
        "weights": {r.system: dict(zip(r.items, r.weights.weights)) for r in results},
    }
    for r in results:
        if r.composite is not None and r.composite.u_bar_closed_form is not None:
            doc.setdefault("u_bar_closed_form", {})[r.system] = r.composite.u_bar_closed_form
    return doc, results, errors


def cmd_fit(args) -> int:
    cfg, table = _load(args)
    out = Path(args.out)
    doc, _, errors = do_fit(cfg, table, out)
    return _finish(out / "fit.json", cfg, doc, errors, out / "fit.csv")


def cmd_fuzzy(args) -> int:
    cfg, table = _load(args)
    out = Path(args.out)
    doc, _, errors = do_fuzzy(cfg, table, out)
    return _finish(out / "fuzzy.json", cfg, doc, errors, out / "profiles.csv")


def cmd_aggregate(args) -> int:
    cfg, table = _load(args)
    out = Path(args.out)
    _, profiles, errors = do_fuzzy(cfg, table, out)
    doc, _, agg_errors = do_aggregate(cfg, table, out, profiles, args.iwam)
    return _finish(out / "aggregate.json", cfg, doc, errors + agg_errors, out / "composite.csv")


def cmd_report(args) -> int:
    cfg, table = _load(args)
    out = Path(args.out)
    doc, fits, errors = do_fit(cfg, table, out)
    fdoc, profiles, ferr = do_fuzzy(cfg, table, out, fits)
    adoc, _, aerr = do_aggregate(cfg, table, out, profiles, args.iwam)
    doc.update(fdoc)
    doc.update(adoc)
    doc["data"] = {"path": str(args.data), "items": list(table.item_names), "n": table.n,
                   "complete_rows": int(table.complete_rows().shape[0])}
    return _finish(out / "report.json", cfg, doc, errors + ferr + aerr, out / "composite.csv")


def _finish(json_path: Path, cfg, doc: dict, errors: list, echo: Path | None = None) -> int:
    doc = {"config": _config_doc(cfg), **doc, "errors": errors}
    write_json(json_path, doc)
    if echo is not None and echo.exists():
        sys.stdout.write(echo.read_text(encoding="utf-8"))
    for e in errors:
        log.error(e)
    return 1 if errors else 0


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else build_config().seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = [f"item{k + 1}" for k in range(args.items)]
    written = []
    for i, (pi, xi) in enumerate(itertools.product(args.pi, args.xi)):
        if args.delta > 0:
            params = CubShelterParams(pi, xi, args.delta, args.c or args.m)
        else:
            params = CubParams(pi, xi)
        samples = simulate_items(params, args.m, args.n, args.items, [seed, i])
        path = out / f"sim_pi{pi:g}_xi{xi:g}.csv"
        write_ratings_csv(path, names, [s.ratings for s in samples])
        written.append(path)
    for p in written:
        print(p)
    return 0


def cmd_distance(args) -> int:
    b = read_ifs_csv(args.a)
    c = read_ifs_csv(args.b)
    d = hamming_distance(b, c)
    print(f"d_H = 1/(2n) * sum(|mu_B - mu_C| + |nu_B - nu_C| + |u_B - u_C|) = {d:.6f}  (n={len(b)})")
    if args.out:
        write_json(Path(args.out) / "distance.json", {"a": str(args.a), "b": str(args.b), "n": len(b), "d_hamming": d})
    return 0


# -- argument parsing --------------------------------------------------------

def _analysis_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", help="ratings CSV (header of item names, NA for missing)")
    p.add_argument("--config", help="JSON or YAML configuration file")
    p.add_argument("--system", action="append", help=f"fuzzy system(s): {', '.join(SYSTEMS)}")
    p.add_argument("--weights", help="uncertainty | membership | uniform | path to item,weight CSV")
    p.add_argument("--shelter", help="none | auto | shelter category c")
    p.add_argument("--alpha", type=float, help="LR test level for keeping the shelter (default 0.05)")
    p.add_argument("--seed", type=int, help="random seed (fallback: $CUBFUZZ_SEED)")
    p.add_argument("--out", default="cubfuzz_out", help="output directory")
    p.add_argument("--m", type=int, help="number of categories (default 7)")
    p.add_argument("--ip", type=int, help="indifference point")
    p.add_argument("--lb", type=int, help="lower crisp bound")
    p.add_argument("--ub", type=int, help="upper crisp bound")
    p.add_argument("--orientation", choices=["positive", "negative"])
    p.add_argument("--iwam", action="store_true", help="also write per-respondent IWAM CSVs")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubfuzz", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _analysis_parent()
    for name, fn, help_ in (
        ("fit", cmd_fit, "fit CUB models per item"),
        ("fuzzy", cmd_fuzzy, "per-category fuzzy profiles per item and system"),
        ("aggregate", cmd_aggregate, "weights, item aggregates and composite indicators"),
        ("report", cmd_report, "full pipeline: fit, fuzzy and aggregate"),
    ):
        sp = sub.add_parser(name, parents=[parent], help=help_)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("simulate", help="write seeded CUB samples, one CSV per (pi, xi) cell")
    sp.add_argument("--pi", type=float, nargs="+", required=True)
    sp.add_argument("--xi", type=float, nargs="+", required=True)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--c", type=int, help="shelter category (default m)")
    sp.add_argument("--m", type=int, default=7)
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--items", type=int, default=1)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", default="cubfuzz_sim")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("distance", help="normalized Hamming distance between two IFS CSVs")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_distance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.error(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
