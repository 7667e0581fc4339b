"""Command-line entry point: ``udmis <subcommand> ...``."""

import argparse
import csv
import json
import sys

from .bench import (EXIT_INVALID, EXIT_OK, KINDS, ExperimentConfig, InvalidConfigError,
                    census_command, fit_command, run_experiment)
from .bnb import BnbConfig, bnb_solve, export_ilp
from .graph import (Graph, LatticeSpec, brute_force_census, generate_er_gnm,
                    generate_ud_lattice, rewire)
from .mcmc import SaConfig, SaSchedule, estimate_pmis, pt_run, sa_run
from .metrics import FitError
from .sla import SlaBudgetError, sla_solve


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _bias(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("bias takes three weights: add,swap,remove")
    return tuple(parts)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sa_config(args, seed):
    sched = SaSchedule(args.t_start, args.t_end, args.depth)
    return SaConfig(sched, args.restarts, args.bias, seed)


def _add_sa_flags(p):
    p.add_argument("--depth", type=int, default=32, help="sweeps per run (one sweep = N proposals)")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--t-start", type=float, default=1.0)
    p.add_argument("--t-end", type=float, default=0.05)
    p.add_argument("--bias", type=_bias, default=(4.0, 4.0, 1.0), help="add,swap,remove weights")
    p.add_argument("--shots", type=int, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="udmis", description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--clock", choices=["wall", "process"], default="wall")
    ap.add_argument("--out", default=None, help="output file (default: stdout)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--rho-ppt", type=int, default=800)
    p.add_argument("--r2", type=int, default=2)
    p.add_argument("--occupancy", choices=["fixed", "bernoulli"], default="fixed")
    p.add_argument("--allow-disconnected", action="store_true")
    p.add_argument("--er", nargs=2, type=int, metavar=("N", "M"), help="G(n, m) instead of a lattice")

    p = sub.add_parser("rewire", help="rewire a fraction of edges")
    p.add_argument("instance")
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("instance")
    p.add_argument("--solver", choices=["sla", "bnb", "sa", "pt", "brute"], default="sla")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--max-variants", type=int, default=None)
    p.add_argument("--ladder", type=lambda s: [float(x) for x in s.split(",")],
                   default=[2.0, 1.0, 0.5, 0.25, 0.1])
    p.add_argument("--sweeps", type=int, default=32)
    _add_sa_flags(p)

    p = sub.add_parser("census", help="exact |MIS|, D_MIS, D_MIS-1 and hardness")
    p.add_argument("instance")
    p.add_argument("--max-variants", type=int, default=None)

    p = sub.add_parser("export-ilp", help="write the MIS integer program in LP format")
    p.add_argument("instance")

    p = sub.add_parser("bench", help="run an experiment grid")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--L", type=_int_list, default=None)
    p.add_argument("--rho-ppt", type=_int_list, default=None)
    p.add_argument("--r2", type=_int_list, default=None)
    p.add_argument("--epsilon-ppt", type=_int_list, default=None)
    p.add_argument("--seeds", type=int, default=10, help="instances per parameter point")
    p.add_argument("--solvers", type=lambda s: s.split(","), default=None)
    p.add_argument("--time-limit", type=float, default=None, help="branch and bound limit per instance")
    p.add_argument("--census", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--strip-timing", action="store_true")
    p.add_argument("--job-budget", type=int, default=200_000)
    _add_sa_flags(p)

    p = sub.add_parser("fit", help="fit a results CSV")
    p.add_argument("results")
    p.add_argument("--kind", choices=["loglinear", "powerlaw", "tts-hardness"], required=True)
    p.add_argument("--percentile", type=float, default=0.02)
    p.add_argument("--min-hardness", type=float, default=10.0)
    p.add_argument("--solver", default=None)
    return ap


def _cmd_gen(args):
    if args.er:
        g = generate_er_gnm(args.er[0], args.er[1], args.seed)
    else:
        if args.L is None:
            raise InvalidConfigError("--L is required for lattice instances")
        spec = LatticeSpec(args.L, args.rho_ppt, args.r2, args.seed, args.occupancy,
                           not args.allow_disconnected)
        g = generate_ud_lattice(spec)
    _emit(g.to_json() + "\n", args.out)


def _cmd_solve(args):
    g = Graph.load(args.instance)
    if args.solver == "sla":
        order = None if g.coords is not None else list(range(g.n))
        out = sla_solve(g, "size", order, max_variants=args.max_variants).to_dict()
    elif args.solver == "brute":
        c = brute_force_census(g)
        out = {"mis_size": c.mis_size, "d_mis": str(c.d_mis), "d_mis_m1": str(c.d_mis_m1)}
    elif args.solver == "bnb":
        cfg = BnbConfig(time_limit=args.time_limit, target=args.target, clock=args.clock)
        out = bnb_solve(g, cfg).to_dict()
    elif args.solver == "pt":
        r = pt_run(g, args.ladder, args.sweeps, 1, args.seed, args.bias)
        out = {"best_size": r.best_size, "best_set": sorted(r.best_set),
               "per_chain_best": r.per_restart_best, "proposals": r.proposals}
    else:
        cfg = _sa_config(args, args.seed)
        if args.shots:
            optimum = args.target
            if optimum is None:
                optimum = bnb_solve(g).mis_size
            est = estimate_pmis(g, cfg, args.shots, optimum, args.instance)
            cols = ["instance_id", "shot", "best_size", "success", "proposals", "wall_time_s"]
            if args.out:
                fh = open(args.out, "w", newline="")
            else:
                fh = sys.stdout
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            w.writerows(est.shot_rows)
            if fh is not sys.stdout:
                fh.close()
            return
        r = sa_run(g, cfg, args.target)
        out = {"best_size": r.best_size, "best_set": sorted(r.best_set),
               "per_restart_best": r.per_restart_best, "proposals": r.proposals,
               "success": r.success}
    _emit(json.dumps(out) + "\n", args.out)


def _cmd_bench(args):
    sa = _sa_config(args, 0)
    cfg = ExperimentConfig(
        kind=args.kind, L_list=args.L, rho_ppt_list=args.rho_ppt, r2_list=args.r2,
        epsilon_ppt_list=args.epsilon_ppt, seeds_per_point=args.seeds, solvers=args.solvers,
        sa=sa, bnb=BnbConfig(time_limit=args.time_limit, clock=args.clock),
        shots=args.shots or 100, census=args.census, master_seed=args.seed,
        workers=args.workers, out=args.out, strip_timing=args.strip_timing,
        job_budget=args.job_budget)
    return run_experiment(cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen":
            _cmd_gen(args)
        elif args.cmd == "rewire":
            g = rewire(Graph.load(args.instance), args.epsilon, args.seed)
            _emit(g.to_json() + "\n", args.out)
        elif args.cmd == "solve":
            _cmd_solve(args)
        elif args.cmd == "census":
            row = census_command(args.instance, args.max_variants)
            _emit(json.dumps(row) + "\n", args.out)
        elif args.cmd == "export-ilp":
            _emit(export_ilp(Graph.load(args.instance)), args.out)
        elif args.cmd == "bench":
            return _cmd_bench(args)
        elif args.cmd == "fit":
            res = fit_command(args.results, args.kind, args.percentile, args.min_hardness, args.solver)
            _emit(json.dumps(res) + "\n", args.out)
    except SlaBudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (InvalidConfigError, FitError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
