"""Experiment configuration, orchestration, persistence and the ``ow`` CLI.

A config is a JSON object::

    {"mode": "stabilize",
     "graph": {"family": "lattice_box", "params": {"d": 2}, "L": 6},
     "density": {"law": "poisson", "mu": 2},
     "seed": 7, "runs": 10,
     "params": {"strategy": "lowest_id"},
     "out": "run.json"}

Run ``r`` of a config uses the instruction array keyed by ``(seed, r)`` and the
site uniforms seeded by ``(seed, r)``, so every run is reproducible on its own
and outputs are ordered by run index.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ghost_engine import SCHEDULERS, collect_section4_counters, run_batch, sample_batch, verify_lemma_brw
from .graph import GraphError, from_config
from .green import choice_L0, green_table, pair_bound, properties_green_scan
from .instructions import InstructionArray
from .particle_config import DensitySpec, ParticleConfig, sample_initial
from .stabilizer import (DEFAULT_STEP_CAP, Strategy, driven_stabilize, stabilize, verify_abelian,
                         verify_monotonicity)

MODES = ("stabilize", "driven", "ghost", "verify_abelian", "verify_monotone", "green",
         "green_scan", "brw", "section4", "fixation_sweep")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class ConfigError(ValueError):
    """Schema violation in an experiment config."""


@dataclass
class ExperimentConfig:
    mode: str
    graph: dict | None = None
    density: dict | None = None
    seed: int = 0
    runs: int = 1
    params: dict = field(default_factory=dict)
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.runs, int) or self.runs < 0:
            raise ConfigError("runs must be a non-negative integer")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object")
        needs_graph = self.mode not in ("green_scan", "fixation_sweep")
        if needs_graph and not isinstance(self.graph, dict):
            raise ConfigError(f"mode {self.mode} needs a 'graph' object")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "mode" not in d:
            raise ConfigError("config needs a 'mode' field")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def build_graph(self):
        try:
            return from_config(self.graph)
        except (GraphError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad graph spec: {exc}") from exc

    def nu(self) -> DensitySpec:
        if self.density is None:
            raise ConfigError(f"mode {self.mode} needs a 'density' object")
        try:
            return DensitySpec.from_dict(self.density)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad density spec: {exc}") from exc


@dataclass
class RunOutcome:
    """What a mode produced: pass/fail, a report and the tabular/JSON payload."""

    passed: bool
    report: dict
    table: list | None = None
    columns: list | None = None
    payload: dict | None = None
    artifacts: list = field(default_factory=list)


def _param(cfg: ExperimentConfig, name, default=None, required=False):
    if name in cfg.params:
        return cfg.params[name]
    if required:
        raise ConfigError(f"mode {cfg.mode} needs params.{name}")
    return default


def _sigma(cfg, g, run):
    explicit = _param(cfg, "sigma")
    if explicit is not None:
        try:
            c = ParticleConfig(np.asarray(explicit["oil"], np.int64), np.asarray(explicit["water"], np.int64))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad params.sigma: {exc}") from exc
        if len(c) != g.vertex_count:
            raise ConfigError("params.sigma length does not match the graph")
        return c
    return sample_initial(g, cfg.nu(), cfg.seed, run)


def _strategy(text) -> Strategy:
    try:
        return Strategy.parse(str(text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# modes ------------------------------------------------------------------------

def _mode_stabilize(cfg):
    g = cfg.build_graph()
    strat = _strategy(_param(cfg, "strategy", "lowest_id"))
    cap = _param(cfg, "step_cap")
    runs = []
    for r in range(cfg.runs):
        res = stabilize(g, _sigma(cfg, g, r), InstructionArray(cfg.seed, r), strat, cap)
        runs.append({"run_id": r, **res.to_dict()})
    trunc = sum(d["truncated"] for d in runs)
    return RunOutcome(True, {"runs": cfg.runs, "truncated": trunc}, payload={"runs": runs})


def _mode_driven(cfg):
    g = cfg.build_graph()
    strat = _strategy(_param(cfg, "strategy", "lowest_id"))
    phi = int(_param(cfg, "phi", required=True))
    cap = _param(cfg, "step_cap")
    runs = []
    counts = np.zeros(3, np.int64)
    bad = 0
    for r in range(cfg.runs):
        res = driven_stabilize(g, _sigma(cfg, g, r), InstructionArray(cfg.seed, r), strat, phi, cap)
        d = res.to_dict()
        H = int(res.holes_filled_total[g.origin])
        J = res.up_crossings()
        bad += H != J
        d.update(run_id=r, H_origin=H, J=J)
        runs.append(d)
        s = np.diff(res.r_walk)
        counts += [(s == 1).sum(), (s == -1).sum(), (s == 0).sum()]
    tot = max(int(counts.sum()), 1)
    report = {"runs": cfg.runs, "identity_failures": bad,
              "p_up": counts[0] / tot, "p_down": counts[1] / tot, "p_stay": counts[2] / tot}
    return RunOutcome(bad == 0, report, payload={"runs": runs, "summary": report})


def _mode_ghost(cfg):
    g = cfg.build_graph()
    y = int(_param(cfg, "target", required=True))
    if not 0 <= y < g.vertex_count:
        raise ConfigError("target is not a vertex of the graph")
    sched = _param(cfg, "scheduler", "ghosts_first")
    if sched not in SCHEDULERS:
        raise ConfigError(f"unknown scheduler {sched!r}")
    rows = []
    ok_all = True
    if cfg.runs:
        if _param(cfg, "sigma") is not None:
            sig = _sigma(cfg, g, 0)
        else:
            sig = sample_batch(g, cfg.nu(), cfg.seed, range(cfg.runs))
        mt, _, H, T, ok = run_batch(g, sig, cfg.seed, cfg.runs, sched, step_cap=_param(cfg, "step_cap"))
        ok_all = bool(ok.all())
        for r in range(cfg.runs):
            rows.append([r, int(mt[r, y]), int(H[r].sum()), int(T[r])])
    return RunOutcome(ok_all, {"runs": cfg.runs, "bookkeeping_ok": ok_all}, rows,
                      ["run_id", "m_tilde_y", "ghosts_created_total", "T"])


def _mode_verify_abelian(cfg):
    g = cfg.build_graph()
    strategies = [_strategy(s) for s in _param(cfg, "strategies",
                                               ["lowest_id", "highest_pairs", f"random:{cfg.seed}"])]
    fails, inconclusive, rows = 0, 0, []
    for r in range(cfg.runs):
        c0 = _sigma(cfg, g, r)
        rep = verify_abelian(g, c0, _run_seed(cfg.seed, r), strategies, _param(cfg, "step_cap"))
        fails += not rep.passed and not rep.inconclusive
        inconclusive += rep.inconclusive
        rows.append([r, int(rep.passed), int(rep.inconclusive)])
    report = {"instances": cfg.runs, "failures": fails, "inconclusive": inconclusive,
              "strategies": [str(s) for s in strategies]}
    return RunOutcome(fails == 0 and inconclusive == 0, report, rows, ["run_id", "passed", "inconclusive"])


def _run_seed(seed, r):
    """Distinct instruction seed per verification instance."""
    return int(InstructionArray(seed, r).base)


def _mode_verify_monotone(cfg):
    g = cfg.build_graph()
    big_spec = _param(cfg, "graph_big", required=True)
    try:
        g_big = from_config(big_spec)
    except (GraphError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad params.graph_big: {exc}") from exc
    nu = cfg.nu()
    nu_big = DensitySpec.from_dict(_param(cfg, "density_big", cfg.density))
    strat = _strategy(_param(cfg, "strategy", "lowest_id"))
    fails, inconclusive, rows = 0, 0, []
    for r in range(cfg.runs):
        c0 = sample_initial(g, nu, cfg.seed, r)
        c1 = sample_initial(g_big, nu_big, cfg.seed, r)
        try:
            rep = verify_monotonicity(g, c0, g_big, c1, _run_seed(cfg.seed, r), strat,
                                      _param(cfg, "step_cap"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        fails += not rep.passed and not rep.inconclusive
        inconclusive += rep.inconclusive
        rows.append([r, int(rep.passed), int(rep.inconclusive)])
    report = {"instances": cfg.runs, "failures": fails, "inconclusive": inconclusive}
    return RunOutcome(fails == 0 and inconclusive == 0, report, rows, ["run_id", "passed", "inconclusive"])


def _mode_green(cfg):
    g = cfg.build_graph()
    K = _param(cfg, "K")
    table = green_table(g, K, _param(cfg, "method", "direct_solve"))
    other = green_table(g, K, "hitting_prob" if table.method == "direct_solve" else "direct_solve")
    diff = float(np.abs(table.G - other.G).max()) if table.G.size else 0.0
    report = {"size": int(len(table.K)), "method": table.method, "cross_method_max_diff": diff}
    return RunOutcome(diff <= 1e-10, report, payload={"csv": table.to_csv()})


def _mode_green_scan(cfg):
    fam = _param(cfg, "family", (cfg.graph or {}).get("family"))
    if fam is None:
        raise ConfigError("green_scan needs params.family")
    D = int(_param(cfg, "D", 1))
    params = dict(_param(cfg, "graph_params", (cfg.graph or {}).get("params", {})))
    Lmax = int(_param(cfg, "Lmax", required=True))
    try:
        probe = from_config({"family": fam, "params": params, "L": max(D + 1, 2)})
    except (GraphError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad graph spec: {exc}") from exc
    L0 = choice_L0(D, probe.degree)
    Lmin = int(_param(cfg, "Lmin", L0))
    rep = properties_green_scan(fam, D, range(Lmin, Lmax + 1), params)
    mu = float(_param(cfg, "mu", 1.0))
    rows = []
    for row in rep.rows:
        L = row["L"]
        pb = pair_bound(from_config({"family": fam, "params": params, "L": L}), L, D, mu)
        rows.append([L, row["total"], row["inner"], row["ratio"], row["margin"], int(row["holds"]), pb])
    holds_all = all(r[5] for r in rows if r[0] >= L0)
    sign_ok = all(r[6] < 0 for r in rows if r[0] > L0)
    report = {"family": fam, "D": D, "L0": L0, "smallest_L": rep.smallest_L,
              "holds_for_all_L_ge_L0": holds_all, "pair_bound_negative_beyond_L0": sign_ok}
    return RunOutcome(holds_all and sign_ok, report, rows,
                      ["L", "total", "inner", "ratio", "margin", "holds", "pair_bound"])


def _mode_brw(cfg):
    g = cfg.build_graph()
    ys = _param(cfg, "targets", required=True)
    sched = _param(cfg, "scheduler", "ghosts_first")
    sig = _sigma(cfg, g, 0)
    if cfg.runs == 0:
        return RunOutcome(True, {"runs": 0}, [], ["y", "n_runs", "mean", "se", "expected", "z", "rel_error"])
    rep = verify_lemma_brw(g, sig, ys, cfg.runs, cfg.seed, sched)
    rows = [[r.y, r.n_runs, r.mean, r.se, r.expected, r.z, r.rel_error] for r in rep.rows]
    passed = rep.all_ok and all(abs(r.z) <= 3 for r in rep.rows)
    return RunOutcome(passed, {"runs": cfg.runs, "bookkeeping_ok": rep.all_ok}, rows,
                      ["y", "n_runs", "mean", "se", "expected", "z", "rel_error"])


def _mode_section4(cfg):
    g = cfg.build_graph()
    cols = ["x", "m_tilde_mean", "m_tilde_se", "bound", "w_mean", "w_predicted", "diff_se", "z", "H_mean"]
    if cfg.runs == 0:
        return RunOutcome(True, {"runs": 0}, [], cols)
    rep = collect_section4_counters(g, cfg.nu(), None, cfg.runs, cfg.seed,
                                    _param(cfg, "scheduler", "ghosts_first"))
    rows = [[d[c] for c in cols] for d in rep.rows()]
    passed = rep.all_ok and bool(rep.identity_holds.all())
    report = {"runs": cfg.runs, "bookkeeping_ok": rep.all_ok,
              "identity_holds": bool(rep.identity_holds.all()), "bound_holds": bool(rep.bound_holds.all())}
    return RunOutcome(passed, report, rows, cols)


# fixation sweep ---------------------------------------------------------------

SWEEP_COLUMNS = ["mu", "L", "runs", "mean_m_origin", "mean_T", "truncation_rate",
                 "mean_ghosts_created", "fraction_exited"]


@dataclass
class SweepReport:
    rows: list
    truncations: int
    monotone_in_mu: bool

    def to_dict(self) -> dict:
        return {"rows": [dict(zip(SWEEP_COLUMNS, r)) for r in self.rows],
                "truncations": self.truncations, "monotone_in_mu": self.monotone_in_mu}


def fixation_sweep(mu_grid, L_grid, n_runs: int, seed: int = 0, family: str = "lattice_box",
                   params: dict | None = None, strategy="lowest_id",
                   step_cap: int | None = DEFAULT_STEP_CAP) -> SweepReport:
    """Stabilize ``n_runs`` coupled configurations for every ``(mu, L)``.

    For a given run index all densities read the same site uniforms and the
    same instructions, so configurations and odometers are pointwise ordered
    in ``mu``.  ``mean_ghosts_created`` counts waters landing on holes of K,
    which is the number of ghosts the ghost-pair dynamics creates.
    """
    mu_grid, L_grid = list(mu_grid), list(L_grid)
    if not mu_grid or not L_grid:
        raise ValueError("mu and L grids must be nonempty")
    rows = []
    truncations = 0
    monotone = True
    strat = strategy if isinstance(strategy, Strategy) else Strategy.parse(strategy)
    for L in L_grid:
        g = from_config({"family": family, "params": dict(params or {}), "L": L})
        if not g.sink.any() and step_cap is None:
            raise ValueError("a graph without sink needs an explicit step cap")
        K = g.active
        prev_m = None
        for mu in sorted(mu_grid):
            nu = DensitySpec.from_mu(mu)
            m_o = np.zeros(n_runs)
            Ts = np.zeros(n_runs)
            trunc = 0
            ghosts = np.zeros(n_runs)
            exited = np.zeros(n_runs)
            for r in range(n_runs):
                c0 = sample_initial(g, nu, seed, r)
                res = stabilize(g, c0, InstructionArray(seed, r), strat, step_cap)
                m_o[r] = res.odometer.fires[g.origin]
                Ts[r] = res.T
                trunc += res.truncated
                ghosts[r] = res.holes_filled_at[K].sum()
                total = c0.oil.sum() + c0.water.sum()
                out = res.final_config.oil[~K].sum() + res.final_config.water[~K].sum()
                exited[r] = out / total if total else 0.0
            if prev_m is not None and (m_o < prev_m).any():
                monotone = False
            prev_m = m_o
            truncations += trunc
            N = max(n_runs, 1)
            rows.append([float(mu), int(L), n_runs, float(m_o.sum() / N), float(Ts.sum() / N), trunc / N,
                         float(ghosts.sum() / N), float(exited.sum() / N)])
    rows.sort(key=lambda r: (r[1], r[0]))
    return SweepReport(rows, truncations, monotone)


def _mode_fixation_sweep(cfg):
    mu_grid = _param(cfg, "mu_grid", required=True)
    L_grid = _param(cfg, "L_grid", required=True)
    graph = cfg.graph or {"family": "lattice_box", "params": {"d": 2}}
    try:
        rep = fixation_sweep(mu_grid, L_grid, cfg.runs, cfg.seed, graph.get("family", "lattice_box"),
                             graph.get("params", {}), _param(cfg, "strategy", "lowest_id"),
                             _param(cfg, "step_cap", DEFAULT_STEP_CAP))
    except (GraphError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    report = {"truncations": rep.truncations, "monotone_in_mu": rep.monotone_in_mu,
              "cells": len(rep.rows)}
    return RunOutcome(rep.truncations == 0 and rep.monotone_in_mu, report, rep.rows, SWEEP_COLUMNS)


_DISPATCH = {
    "stabilize": _mode_stabilize, "driven": _mode_driven, "ghost": _mode_ghost,
    "verify_abelian": _mode_verify_abelian, "verify_monotone": _mode_verify_monotone,
    "green": _mode_green, "green_scan": _mode_green_scan, "brw": _mode_brw,
    "section4": _mode_section4, "fixation_sweep": _mode_fixation_sweep,
}


# persistence ------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(int(v)) if isinstance(v, np.integer) else str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _versions() -> dict:
    import numba
    import scipy
    return {"oilwater": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def run(config: ExperimentConfig) -> RunOutcome:
    """Execute the configured mode and write its artifacts.

    With ``config.out`` set, the main artifact goes to that path (CSV for
    tabular modes, JSON otherwise) and a manifest to ``<out>.manifest.json``.
    """
    t0 = time.perf_counter()
    outcome = _DISPATCH[config.mode](config)
    wall = time.perf_counter() - t0
    if config.out:
        out = Path(config.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if outcome.payload is not None and "csv" in outcome.payload:
            out.write_text(outcome.payload["csv"])
        elif outcome.table is not None and out.suffix.lower() != ".json":
            out.write_text(to_csv(outcome.columns, outcome.table))
        else:
            body = dict(outcome.payload or {})
            body["report"] = outcome.report
            if outcome.table is not None:
                body["rows"] = [dict(zip(outcome.columns, r)) for r in outcome.table]
            out.write_text(_dump(body))
        manifest = Path(str(out) + ".manifest.json")
        manifest.write_text(_dump({
            "config": config.to_dict(), "config_sha256": config.digest(), "mode": config.mode,
            "seed": config.seed, "run_ids": [0, config.runs], "threads": config.threads,
            "versions": _versions(), "passed": outcome.passed, "report": outcome.report,
            "wall_time_s": wall}))
        outcome.artifacts = [str(out), str(manifest)]
    return outcome


# CLI --------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ow", description="Oil and water stabilization experiments.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="experiment config JSON")
        sp.add_argument("--seed", type=int, help="master seed (u64)")
        sp.add_argument("--runs", type=int, help="number of runs / instances")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--threads", type=int, help="worker threads (env OW_THREADS)")
        return sp

    common(sub.add_parser("stabilize")).add_argument("--strategy")
    d = common(sub.add_parser("driven"))
    d.add_argument("--strategy")
    d.add_argument("--phi", type=int)
    gh = common(sub.add_parser("ghost"))
    gh.add_argument("--target", type=int)
    gh.add_argument("--scheduler", choices=SCHEDULERS)
    v = common(sub.add_parser("verify"))
    v.add_argument("what", choices=("abelian", "monotone"))
    common(sub.add_parser("green")).add_argument("--method", choices=("direct_solve", "hitting_prob"))
    s = common(sub.add_parser("green-scan"), config_required=False)
    s.add_argument("--family")
    s.add_argument("--D", type=int)
    s.add_argument("--Lmin", type=int)
    s.add_argument("--Lmax", type=int)
    b = common(sub.add_parser("brw"))
    b.add_argument("--targets", type=lambda t: [int(x) for x in t.split(",")])
    common(sub.add_parser("section4"))
    common(sub.add_parser("fixation-sweep"))
    return p


def _config_from_args(args) -> ExperimentConfig:
    mode = {"verify": f"verify_{getattr(args, 'what', '')}", "green-scan": "green_scan",
            "fixation-sweep": "fixation_sweep"}.get(args.cmd, args.cmd)
    if args.config:
        d = json.loads(Path(args.config).read_text()) if Path(args.config).exists() else None
        if d is None:
            raise ConfigError(f"config file {args.config} not found")
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    else:
        d = {}
    d["mode"] = mode
    d.setdefault("params", {})
    for k in ("seed", "runs", "out"):
        if getattr(args, k) is not None:
            d[k] = getattr(args, k)
    for k in ("strategy", "phi", "target", "scheduler", "method", "family", "D", "Lmin", "Lmax", "targets"):
        if getattr(args, k, None) is not None:
            d["params"][k] = getattr(args, k)
    threads = args.threads if args.threads is not None else os.environ.get("OW_THREADS")
    try:
        d["threads"] = int(threads) if threads is not None else 1
    except ValueError as exc:
        raise ConfigError("OW_THREADS must be an integer") from exc
    if d["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return ExperimentConfig.from_dict(d)


def _error(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config_from_args(args)
    except json.JSONDecodeError as exc:
        return _error("config", exc, EXIT_USAGE)
    except (ConfigError, TypeError) as exc:
        return _error("config", exc, EXIT_USAGE)
    try:
        outcome = run(cfg)
    except ConfigError as exc:
        return _error("config", exc, EXIT_USAGE)
    except OSError as exc:
        return _error("io", exc, EXIT_RUNTIME)
    except Exception as exc:  # noqa: BLE001 - reported as machine-readable JSON
        return _error("runtime", exc, EXIT_RUNTIME)
    sys.stdout.write(_dump({"mode": cfg.mode, "passed": outcome.passed, "report": outcome.report,
                            "artifacts": outcome.artifacts}))
    return EXIT_PASS if outcome.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
