"""Command-line interface.

Subcommands::

    simulate      write a seeded synthetic dataset (X.csv, y.csv,
                  beta_star.csv, graph.json) for a named preset
    fit-path      run the path solver from a JSON config; writes
                  path.jsonl and summary.json
    cv            cross-validated hyper-parameter and stopping-time
                  selection; writes cv_report.json
    decompose     split a recorded path point into lesion /
                  procedural-bias / null sets; writes decomposition.json
    compare-fista race one solver path against a warm-started FISTA
                  lambda grid; writes benchmark.json

Exit codes: 0 success, 1 configuration error, 2 numeric divergence.
Every output is seed-determined; only wall-clock fields in
benchmark.json vary between identical runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import fileio
from .baseline import default_lambda_grid, fista_path
from .evaluation import FoldPlan, cross_validate
from .experiments import support_recovery_race
from .glm import Dataset, Family
from .lattice import SplitOperator, build_lattice, edgeless_graph
from .projection import decompose
from .simulate import SimSpec, gen_design, gen_labels, preset_grid_signal, preset_table1_signal
from .solver import (
    DivergedError,
    FixedIters,
    Hyperparams,
    SupportSizeCap,
    ValidationAccuracyPlateau,
    entry_order,
    run_path,
)


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def _check_keys(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(section, key, where):
    if key not in section:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return section[key]


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _build_data(section):
    _check_keys(
        section,
        {"preset", "seed", "label_model", "x_csv", "y_csv", "n"},
        "data",
    )
    if "preset" in section:
        preset = section["preset"]
        seed = int(_require(section, "seed", "data"))
        try:
            if preset == "grid9":
                sig = preset_grid_signal()
                spec = SimSpec(
                    N=int(section.get("n", 400)),
                    p=81,
                    seed=seed,
                    label_model=section.get("label_model", "logit"),
                )
                beta_star = sig.beta_star
            elif preset == "table1":
                beta_star = preset_table1_signal()
                spec = SimSpec(
                    N=int(section.get("n", 100)),
                    p=80,
                    seed=seed,
                    label_model=section.get("label_model", "linear"),
                )
            else:
                raise ConfigError(f"unknown preset {preset!r}")
            X = gen_design(spec)
            y = gen_labels(X, beta_star, spec)
            return Dataset(X, y)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if "x_csv" in section or "y_csv" in section:
        x_csv = _require(section, "x_csv", "data")
        y_csv = _require(section, "y_csv", "data")
        try:
            X = fileio.load_matrix_csv(x_csv)
            y = fileio.load_matrix_csv(y_csv).ravel()
            return Dataset(X, y)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError("data section needs either a preset or x_csv/y_csv")


def _build_family(name):
    try:
        return Family(name)
    except ValueError:
        raise ConfigError(f"unknown family {name!r}") from None


def _build_op(section, rho):
    _check_keys(section, {"dims", "identity", "graph_json"}, "lattice")
    try:
        if "dims" in section:
            graph = build_lattice(tuple(section["dims"]))
        elif "identity" in section:
            graph = edgeless_graph(int(section["identity"]))
        elif "graph_json" in section:
            try:
                graph, stored_rho = fileio.load_graph_json(section["graph_json"])
            except OSError as exc:
                raise ConfigError(str(exc)) from exc
            if rho is None:
                rho = stored_rho
        else:
            raise ConfigError("lattice section needs dims, identity, or graph_json")
        return SplitOperator(graph, 0.0 if rho is None else float(rho))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_hyper(section):
    _check_keys(
        section,
        {"kappa", "nu", "rho", "alpha", "max_iters", "record_every", "nonneg"},
        "hyper",
    )
    alpha = section.get("alpha", "auto")
    if alpha == "auto":
        alpha = None
    try:
        return Hyperparams(
            kappa=float(_require(section, "kappa", "hyper")),
            nu=float(_require(section, "nu", "hyper")),
            alpha=None if alpha is None else float(alpha),
            max_iters=int(section.get("max_iters", 100_000)),
            record_every=int(section.get("record_every", 500)),
            nonneg=bool(section.get("nonneg", False)),
            rho=float(section["rho"]) if "rho" in section else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_stop(section, data):
    if section is None:
        return FixedIters()
    _check_keys(section, {"rule", "cap", "patience", "val_fraction", "val_seed"}, "stop")
    rule = _require(section, "rule", "stop")
    if rule == "fixed":
        return FixedIters()
    if rule == "support_cap":
        return SupportSizeCap(int(_require(section, "cap", "stop")))
    if rule == "val_plateau":
        frac = float(section.get("val_fraction", 0.25))
        if not 0.0 < frac < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")
        rng = np.random.default_rng(int(section.get("val_seed", 0)))
        n_val = max(1, int(round(frac * data.N)))
        val_idx = rng.choice(data.N, size=n_val, replace=False)
        mask = np.zeros(data.N, dtype=bool)
        mask[val_idx] = True
        stop = ValidationAccuracyPlateau(
            X_val=data.X[mask],
            y_val=data.y[mask],
            patience=int(section.get("patience", 5)),
        )
        return stop, Dataset(data.X[~mask], data.y[~mask])
    raise ConfigError(f"unknown stop rule {rule!r}")


def _parse_rule(text):
    parts = str(text).split(":")
    kind = parts[0]
    if kind == "threshold" and len(parts) == 2:
        return ("threshold", float(parts[1]))
    if kind in ("top_k", "top_k_neg") and len(parts) == 2:
        return (kind, int(parts[1]))
    raise ConfigError(
        f"bad decomposition rule {text!r}; expected threshold:T, top_k:K, or top_k_neg:K"
    )


def _threads(args):
    if args.threads is not None:
        return max(1, int(args.threads))
    return max(1, int(os.environ.get("SPLITLBI_THREADS", "1")))


# subcommands ---------------------------------------------------------------


def _cmd_simulate(args):
    seed = int(args.seed)
    out = args.out
    if args.preset == "grid9":
        sig = preset_grid_signal()
        spec = SimSpec(N=400, p=81, seed=seed, label_model=args.label_model or "logit")
        beta_star = sig.beta_star
        graph = build_lattice(sig.dims)
    elif args.preset == "table1":
        beta_star = preset_table1_signal()
        spec = SimSpec(N=100, p=80, seed=seed, label_model=args.label_model or "linear")
        graph = edgeless_graph(80)
    else:  # argparse choices guard this
        raise ConfigError(f"unknown preset {args.preset!r}")
    X = gen_design(spec)
    y = gen_labels(X, beta_star, spec)
    fileio.save_matrix_csv(X, os.path.join(out, "X.csv"))
    fileio.save_matrix_csv(y.reshape(-1, 1), os.path.join(out, "y.csv"))
    fileio.save_matrix_csv(beta_star.reshape(-1, 1), os.path.join(out, "beta_star.csv"))
    fileio.save_graph_json(graph, os.path.join(out, "graph.json"))
    return 0


def _check_family_labels(data, family):
    if family is Family.LOGISTIC and not np.all(np.abs(data.y) == 1.0):
        raise ConfigError("logistic family requires labels in {-1, +1}")


def _fit_common(cfg):
    _check_keys(
        cfg,
        {"data", "family", "lattice", "hyper", "stop", "out_dir", "decompose_rule"},
        "config",
    )
    data = _build_data(_require(cfg, "data", "config"))
    family = _build_family(_require(cfg, "family", "config"))
    _check_family_labels(data, family)
    hyper = _build_hyper(_require(cfg, "hyper", "config"))
    op = _build_op(_require(cfg, "lattice", "config"), hyper.rho)
    built = _build_stop(cfg.get("stop"), data)
    if isinstance(built, tuple):
        stop, data = built
    else:
        stop = built
    out_dir = _require(cfg, "out_dir", "config")
    return data, family, op, hyper, stop, out_dir


def _cmd_fit_path(args):
    cfg = _load_config(args.config)
    data, family, op, hyper, stop, out_dir = _fit_common(cfg)
    rule = _parse_rule(cfg.get("decompose_rule", "top_k:10"))

    path = run_path(data, family, op, hyper, stop)
    fileio.export_path_jsonl(path, os.path.join(out_dir, "path.jsonl"))
    last = path.points[-1]
    dec = decompose(last.beta_pre, last.beta_les, rule)
    summary = {
        "alpha": path.alpha,
        "stop_reason": path.stop_reason,
        "n_points": len(path.points),
        "final_t": int(last.t),
        "entry_order": [[int(j), int(t)] for j, t in entry_order(path)],
        "final_decomposition": {
            "lesion": [int(i) for i in dec.lesion],
            "procedural_bias": [int(i) for i in dec.procedural_bias],
            "null": [int(i) for i in dec.null_set],
            "rule": list(dec.rule),
        },
    }
    fileio.save_json(summary, os.path.join(out_dir, "summary.json"))
    return 0


def _cmd_cv(args):
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"data", "family", "lattice", "hyper", "stop", "out_dir", "cv"},
        "config",
    )
    data = _build_data(_require(cfg, "data", "config"))
    family = _build_family(_require(cfg, "family", "config"))
    _check_family_labels(data, family)
    base_hyper = _build_hyper(_require(cfg, "hyper", "config"))
    op = _build_op(_require(cfg, "lattice", "config"), base_hyper.rho)
    stop = _build_stop(cfg.get("stop"), data)
    if isinstance(stop, tuple):
        raise ConfigError("val_plateau stop is not available under cv")
    cv_cfg = _require(cfg, "cv", "config")
    _check_keys(cv_cfg, {"k", "seed", "grid"}, "cv")
    try:
        plan = FoldPlan.stratified(
            data.y, int(_require(cv_cfg, "k", "cv")), int(_require(cv_cfg, "seed", "cv"))
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    grid = []
    for override in cv_cfg.get("grid", [{}]):
        _check_keys(override, {"nu", "rho", "kappa"}, "cv.grid entry")
        h = base_hyper
        if "nu" in override:
            h = Hyperparams(**{**h.__dict__, "nu": float(override["nu"])})
        if "kappa" in override:
            h = Hyperparams(**{**h.__dict__, "kappa": float(override["kappa"])})
        if "rho" in override:
            h = Hyperparams(**{**h.__dict__, "rho": float(override["rho"])})
        grid.append(h)

    result = cross_validate(
        data, family, op, grid, plan, stop=stop, threads=_threads(args)
    )
    report = {
        "best_hyper": {
            "kappa": result.best_hyper.kappa,
            "nu": result.best_hyper.nu,
            "rho": result.best_hyper.rho if result.best_hyper.rho is not None else op.rho,
        },
        "best_t": int(result.best_t),
        "fold_metrics": [
            {
                "acc": m.acc,
                "sen": m.sen if m.sen_defined else None,
                "spe": m.spe if m.spe_defined else None,
            }
            for m in result.fold_metrics
        ],
        "fold_supports": [[int(i) for i in s] for s in result.fold_supports],
        "mdc": result.mdc_les,
    }
    fileio.save_json(report, os.path.join(_require(cfg, "out_dir", "config"), "cv_report.json"))
    return 0


def _cmd_decompose(args):
    rule = _parse_rule(args.rule)
    try:
        records = fileio.load_path_jsonl(args.path)
    except OSError as exc:
        raise ConfigError(f"cannot read path file: {exc}") from exc
    target = next((r for r in records if r["t"] == int(args.t)), None)
    if target is None:
        raise ConfigError(f"no recorded point with t={args.t} in {args.path}")
    beta_pre = np.asarray(target["beta_pre"], dtype=float)
    beta_les = fileio.sparse_map_to_vector(target["beta_les"], len(beta_pre))
    dec = decompose(beta_pre, beta_les, rule)
    payload = {
        "t": int(target["t"]),
        "rule": list(dec.rule),
        "lesion": [int(i) for i in dec.lesion],
        "procedural_bias": [int(i) for i in dec.procedural_bias],
        "null": [int(i) for i in dec.null_set],
    }
    fileio.save_json(payload, args.out)
    return 0


def _cmd_compare_fista(args):
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"data", "family", "lattice", "hyper", "stop", "out_dir", "fista", "race_seed"},
        "config",
    )
    fista_cfg = cfg.get("fista", {})
    _check_keys(fista_cfg, {"n_lambda", "max_iters"}, "fista")

    if "race_seed" in cfg:
        # canned support-recovery race on the flat logit benchmark
        t0 = time.perf_counter()
        race = support_recovery_race(
            int(cfg["race_seed"]),
            n_lambda=int(fista_cfg.get("n_lambda", 20)),
            fista_max_iters=int(fista_cfg.get("max_iters", 20_000)),
        )
        elapsed = time.perf_counter() - t0
        payload = {
            "true_support": [int(i) for i in race.true_support],
            "gsplit": {"iters_to_support": race.gsplit_iters},
            "fista": {
                "cumulative_iters_to_support": race.fista_cumulative_iters,
                "per_lambda": race.fista_per_lambda,
                "max_kkt_residual": race.fista_max_kkt,
            },
            "gsplit_wins": race.gsplit_wins,
            "elapsed_seconds": elapsed,
        }
        fileio.save_json(payload, os.path.join(_require(cfg, "out_dir", "config"), "benchmark.json"))
        return 0

    data, family, op, hyper, stop, out_dir = _fit_common(
        {k: v for k, v in cfg.items() if k != "fista"}
    )
    if family is not Family.LOGISTIC:
        raise ConfigError("compare-fista requires the logistic family")
    t0 = time.perf_counter()
    path = run_path(data, family, op, hyper, stop)
    gsplit_elapsed = time.perf_counter() - t0
    t0 = time.perf_counter()
    grid = default_lambda_grid(data, n=int(fista_cfg.get("n_lambda", 20)))
    results = fista_path(data, grid, max_iters=int(fista_cfg.get("max_iters", 20_000)))
    fista_elapsed = time.perf_counter() - t0
    last = path.points[-1]
    payload = {
        "gsplit": {
            "iterations": int(last.t),
            "support": [int(i) for i in np.flatnonzero(last.beta_les != 0.0)],
            "elapsed_seconds": gsplit_elapsed,
        },
        "fista": {
            "iterations": int(sum(r.iters for r in results)),
            "support": [int(i) for i in np.flatnonzero(results[-1].beta != 0.0)],
            "elapsed_seconds": fista_elapsed,
        },
    }
    fileio.save_json(payload, os.path.join(out_dir, "benchmark.json"))
    return 0


def build_parser():
    parser = _Parser(prog="splitlbi", description=__doc__.split("\n\n")[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="fold-level parallelism (default: SPLITLBI_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a seeded synthetic dataset")
    p.add_argument("--preset", required=True, choices=["grid9", "table1"])
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--label-model", choices=["logit", "linear"], default=None)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("fit-path", help="run the path solver from a config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_fit_path)

    p = sub.add_parser("cv", help="cross-validated selection from a config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_cv)

    p = sub.add_parser("decompose", help="decompose a recorded path point")
    p.add_argument("--path", required=True)
    p.add_argument("--t", required=True, type=int)
    p.add_argument("--rule", required=True)
    p.add_argument("--out", default="decomposition.json")
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("compare-fista", help="race the path solver against FISTA")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_compare_fista)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors (already remapped to 1)
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DivergedError as exc:
        print(f"numeric divergence: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
