"""Maximum independent sets on unit-disk lattice graphs: exact and heuristic solvers."""

__version__ = "0.1.0"

from .graph import (Census, Graph, LatticeSpec, brute_force_census, edge_count_bounds,  # noqa: E402
                    generate_er_gnm, generate_ud_lattice, rewire, validate_independent_set)
from .sla import fib_bound, sla_solve  # noqa: E402
from .bnb import BnbConfig, bnb_solve, clique_cover_bound, export_ilp, reduce  # noqa: E402
from .mcmc import SaConfig, SaSchedule, estimate_pmis, pt_run, sa_run  # noqa: E402
from .metrics import hardness, r99, tts99  # noqa: E402
