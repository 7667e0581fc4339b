"""Batch experiments over instance grids, with deterministic CSV output.

Each instance is one job: the graph is regenerated from its derived seed
inside the worker and every requested solver runs on it in a fixed order,
so an exact optimum is at hand when the heuristics are scored. Rows are
buffered and written in canonical order, which makes the CSV body
independent of the worker count.
"""

import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import product

from . import __version__
from .bnb import BnbConfig, bnb_solve
from .graph import Graph, LatticeSpec, brute_force_census, generate_ud_lattice, rewire
from .mcmc import SaConfig, SaSchedule, estimate_pmis, pt_run
from .metrics import (CensoredTts, FitError, HardnessRecord, fit_loglinear_top,
                      fit_pmis_powerlaw, hardness, tts99_or_censored, tts_hardness_scaling)
from .rng import derive_seed
from .sla import SlaBudgetError, sla_solve

COLUMNS = ["instance_id", "solver", "L", "rho_ppt", "r2", "epsilon_ppt", "n", "seed",
           "mis_size", "d_mis", "d_mis_m1", "hardness", "tts_s", "tto_s", "p_mis", "shots",
           "status", "variants_peak"]
TIMING_COLUMNS = ("tts_s", "tto_s")
SOLVER_ORDER = ("sla", "brute", "bnb", "sa", "pt")
KINDS = ("scaling", "radius", "rewire", "hardness", "filling")

EXIT_OK, EXIT_INVALID, EXIT_ALL_FAILED = 0, 2, 3


class InvalidConfigError(ValueError):
    pass


# per-kind grids used when the caller gives none
DEFAULTS = {
    "scaling": dict(L_list=[7, 9, 11], rho_ppt_list=[800], r2_list=[2], epsilon_ppt_list=[0],
                    solvers=["sla", "bnb", "sa"]),
    "radius": dict(L_list=[13], rho_ppt_list=[800], r2_list=[1, 2, 4, 5, 8, 9, 10, 13, 16],
                   epsilon_ppt_list=[0], solvers=["bnb"]),
    "rewire": dict(L_list=[13], rho_ppt_list=[800], r2_list=[2],
                   epsilon_ppt_list=[0, 250, 500, 750, 1000], solvers=["bnb"]),
    "hardness": dict(L_list=[13], rho_ppt_list=[800], r2_list=[2], epsilon_ppt_list=[0],
                     solvers=["sla", "sa"]),
    "filling": dict(L_list=[13], rho_ppt_list=[700, 750, 800, 850, 900], r2_list=[2],
                    epsilon_ppt_list=[0], solvers=["sla", "sa"]),
}


@dataclass
class ExperimentConfig:
    kind: str
    L_list: list = None
    rho_ppt_list: list = None
    r2_list: list = None
    epsilon_ppt_list: list = None
    seeds_per_point: int = 10
    solvers: list = None
    sa: SaConfig = field(default_factory=lambda: SaConfig(num_restarts=1))
    bnb: BnbConfig = field(default_factory=BnbConfig)
    shots: int = 100
    census: bool = None  # exact counts via sla/brute; default on for hardness and filling
    pt_ladder: tuple = (2.0, 1.0, 0.5, 0.25, 0.1)
    pt_sweeps: int = 32
    sla_max_variants: int = 5_000_000
    master_seed: int = 0
    workers: int = 1
    out: str = None
    strip_timing: bool = False
    job_budget: int = 200_000

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigError(f"unknown experiment kind {self.kind!r}")
        for k, v in DEFAULTS[self.kind].items():
            if getattr(self, k) is None:
                setattr(self, k, list(v))
        if self.census is None:
            self.census = self.kind in ("hardness", "filling")
        if not self.solvers:
            raise InvalidConfigError("at least one solver is required")
        bad = set(self.solvers) - set(SOLVER_ORDER)
        if bad:
            raise InvalidConfigError(f"unknown solvers {sorted(bad)}")
        self.solvers = [s for s in SOLVER_ORDER if s in self.solvers]
        if self.seeds_per_point < 1 or self.shots < 1 or self.workers < 1:
            raise InvalidConfigError("seeds_per_point, shots and workers must be >= 1")
        for name in ("L_list", "rho_ppt_list", "r2_list", "epsilon_ppt_list"):
            if not getattr(self, name):
                raise InvalidConfigError(f"{name} is empty")
        if any(not 0 <= e <= 1000 for e in self.epsilon_ppt_list):
            raise InvalidConfigError("epsilon_ppt must be within [0, 1000]")
        try:
            for L, rho, r2 in product(self.L_list, self.rho_ppt_list, self.r2_list):
                LatticeSpec(L, rho, r2)
        except ValueError as e:
            raise InvalidConfigError(str(e)) from e
        if self.n_jobs() * len(self.solvers) > self.job_budget:
            raise InvalidConfigError(
                f"{self.n_jobs()} instances x {len(self.solvers)} solvers exceeds job budget {self.job_budget}")

    def points(self):
        """Parameter points in canonical order: (base index, L, rho, r2, eps)."""
        base = list(product(self.L_list, self.rho_ppt_list, self.r2_list))
        return [(b, L, rho, r2, eps) for b, (L, rho, r2) in enumerate(base)
                for eps in self.epsilon_ppt_list]

    def n_jobs(self):
        return (len(self.L_list) * len(self.rho_ppt_list) * len(self.r2_list)
                * len(self.epsilon_ppt_list) * self.seeds_per_point)

    def to_dict(self):
        d = asdict(self)
        d["pt_ladder"] = list(self.pt_ladder)
        d["sa"]["bias"] = list(self.sa.bias)
        return d


@dataclass(frozen=True)
class Job:
    index: int
    instance_id: str
    L: int
    rho_ppt: int
    r2: int
    epsilon_ppt: int
    seed: int
    rewire_seed: int


def make_jobs(cfg):
    """Enumerate instances. Rewired points share their base lattice per seed."""
    jobs = []
    for b, L, rho, r2, eps in cfg.points():
        for s in range(cfg.seeds_per_point):
            seed = derive_seed(cfg.master_seed, cfg.kind, b, s)
            iid = f"{cfg.kind}-L{L}-rho{rho}-r{r2}-e{eps}-s{s}"
            jobs.append(Job(len(jobs), iid, L, rho, r2, eps, seed, derive_seed(seed, "rewire", eps)))
    return jobs


def build_instance(job):
    g = generate_ud_lattice(LatticeSpec(job.L, job.rho_ppt, job.r2, job.seed))
    if job.epsilon_ppt:
        g = rewire(g, job.epsilon_ppt / 1000, job.rewire_seed)
    return g


def _blank_row(job, solver, n=""):
    row = dict.fromkeys(COLUMNS, "")
    row.update(instance_id=job.instance_id, solver=solver, L=job.L, rho_ppt=job.rho_ppt,
               r2=job.r2, epsilon_ppt=job.epsilon_ppt, n=n, seed=job.seed)
    return row


def _fmt(x):
    return "" if x is None else repr(float(x))


def run_job(cfg, job):
    """All solver rows for one instance. Never raises."""
    try:
        g = build_instance(job)
    except Exception as e:  # placement or rewiring failure
        return [dict(_blank_row(job, s), status=f"error:{type(e).__name__}") for s in cfg.solvers]
    rows = {}
    census = None
    optimum = None
    for solver in cfg.solvers:
        row = _blank_row(job, solver, g.n)
        try:
            if solver == "sla":
                r = sla_solve(g, "size", witness=False, max_variants=cfg.sla_max_variants)
                optimum = r.mis_size
                row.update(mis_size=r.mis_size, tts_s=_fmt(r.wall_time), status="optimal",
                           variants_peak=r.variants_peak)
                if cfg.census:
                    census = sla_solve(g, "census", max_variants=cfg.sla_max_variants).census
            elif solver == "brute":
                t0 = time.perf_counter()
                c = brute_force_census(g)
                census = census or c
                optimum = c.mis_size
                row.update(mis_size=c.mis_size, tts_s=_fmt(time.perf_counter() - t0), status="optimal")
            elif solver == "bnb":
                r = bnb_solve(g, cfg.bnb)
                if r.status == "optimal":
                    optimum = r.mis_size
                row.update(mis_size=r.mis_size, tts_s=_fmt(r.tts), tto_s=_fmt(r.tto), status=r.status)
            elif solver == "sa":
                if optimum is None:
                    optimum = sla_solve(g, "size", witness=False).mis_size
                sa_cfg = replace(cfg.sa, seed=derive_seed(job.seed, "sa"))
                est = estimate_pmis(g, sa_cfg, cfg.shots, optimum, job.instance_id)
                best = max(r["best_size"] for r in est.shot_rows)
                t = tts99_or_censored(est.tau, est.successes, est.shots)
                if isinstance(t, CensoredTts):
                    row.update(tts_s=_fmt(t.lower_bound), status="censored")
                else:
                    row.update(tts_s=_fmt(t), status="ok")
                row.update(mis_size=best, p_mis=repr(est.p_point), shots=est.shots)
            elif solver == "pt":
                r = pt_run(g, cfg.pt_ladder, cfg.pt_sweeps, 1, derive_seed(job.seed, "pt"))
                row.update(mis_size=r.best_size, tts_s=_fmt(r.wall_time), status="ok")
        except SlaBudgetError as e:
            row.update(status="budget", variants_peak=e.variants_peak)
        except Exception as e:
            row.update(status=f"error:{type(e).__name__}")
        rows[solver] = row
    if census is not None:
        h = hardness(census.mis_size, census.d_mis, census.d_mis_m1)
        for row in rows.values():
            row.update(d_mis=census.d_mis, d_mis_m1=census.d_mis_m1, hardness=repr(h))
    return [rows[s] for s in cfg.solvers]


def _run_job_args(args):
    return run_job(*args)


def execute(cfg):
    """Run all jobs and return rows in canonical order."""
    jobs = make_jobs(cfg)
    if cfg.workers == 1:
        results = [run_job(cfg, j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_job_args, [(cfg, j) for j in jobs], chunksize=1))
    rows = [row for res in results for row in res]
    if cfg.strip_timing:
        for row in rows:
            for c in TIMING_COLUMNS:
                row[c] = ""
    return jobs, rows


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def manifest(cfg, jobs, rows, clock, started, finished):
    return {
        "tool": "udmis",
        "version": __version__,
        "clock": clock,
        "started_unix": started,
        "finished_unix": finished,
        "config": cfg.to_dict(),
        "n_rows": len(rows),
        "instances": [
            {"instance_id": j.instance_id, "L": j.L, "rho_ppt": j.rho_ppt, "r2": j.r2,
             "seed": j.seed, "epsilon_ppt": j.epsilon_ppt,
             "rewire_seed": j.rewire_seed if j.epsilon_ppt else None,
             "generator": "ud_lattice(fixed occupancy, connected)"}
            for j in jobs
        ],
    }


def run_experiment(cfg, stream=None):
    """Run an experiment, write the CSV (and its manifest) and return an exit code."""
    started = time.time()
    jobs, rows = execute(cfg)
    text = rows_to_csv(rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
        with open(cfg.out + ".manifest.json", "w") as fh:
            json.dump(manifest(cfg, jobs, rows, cfg.bnb.clock, started, time.time()), fh, indent=2)
    else:
        (stream or sys.stdout).write(text)
    if rows and all(r["status"].startswith("error") for r in rows):
        return EXIT_ALL_FAILED
    return EXIT_OK


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _need(rows, cols):
    if not rows:
        raise FitError("no rows in results")
    missing = [c for c in cols if c not in rows[0]]
    if missing:
        raise FitError(f"missing columns: {', '.join(missing)}")


def fit_command(path, kind, percentile=0.02, min_hardness=10.0, solver=None):
    """Fit results from a CSV; returns the FitResult as a JSON-ready dict."""
    rows = read_rows(path)
    if kind == "loglinear":
        _need(rows, ["n", "tts_s", "solver"])
        pts = [(int(r["n"]), float(r["tts_s"])) for r in rows
               if (solver is None or r["solver"] == solver) and r["tts_s"]]
        res = fit_loglinear_top(pts, percentile)
    elif kind == "powerlaw":
        _need(rows, ["hardness", "p_mis"])
        pts = [(float(r["hardness"]), float(r["p_mis"])) for r in rows
               if r["hardness"] and r["p_mis"] and (solver is None or r["solver"] == solver)]
        res = fit_pmis_powerlaw(pts)
    elif kind == "tts-hardness":
        _need(rows, ["hardness", "tts_s", "solver"])
        sel = solver or "sa"
        pts = [(float(r["hardness"]), float(r["tts_s"])) for r in rows
               if r["solver"] == sel and r["hardness"] and r["tts_s"]]
        res = tts_hardness_scaling(pts, min_hardness)
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    return res.to_dict()


def census_command(path, max_variants=None, instance_id=None):
    """Exact census of one instance file as a hardness record dict."""
    g = Graph.load(path)
    r = sla_solve(g, "census", max_variants=max_variants,
                  order=None if g.coords is not None else list(range(g.n)))
    rec = HardnessRecord.from_census(instance_id or str(path), g.n, r.census)
    meta = g.meta or {}
    out = {"instance_id": rec.instance_id, "n": rec.n, "L": meta.get("L"),
           "rho_ppt": meta.get("rho_ppt"), "r2": meta.get("r2"), "seed": meta.get("seed"),
           "mis_size": rec.mis_size, "d_mis": str(rec.d_mis), "d_mis_m1": str(rec.d_mis_m1),
           "hardness": rec.hardness, "variants_peak": r.variants_peak}
    return out
