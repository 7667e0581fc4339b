import csv
import json

import pytest

from udmis.bench import (COLUMNS, EXIT_ALL_FAILED, ExperimentConfig, InvalidConfigError,
                         build_instance, census_command, fit_command, make_jobs, run_experiment)
from udmis.graph import Graph
from udmis.mcmc import SaConfig, SaSchedule
from udmis.metrics import FitError


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def small_scaling(tmp_path, **kw):
    args = dict(kind="scaling", L_list=[5, 6], seeds_per_point=4, shots=20,
                sa=SaConfig(SaSchedule(depth=8)), out=str(tmp_path / "s.csv"))
    args.update(kw)
    return ExperimentConfig(**args)


def test_config_defaults_and_validation():
    cfg = ExperimentConfig(kind="radius")
    assert cfg.r2_list == [1, 2, 4, 5, 8, 9, 10, 13, 16] and cfg.solvers == ["bnb"]
    assert ExperimentConfig(kind="hardness").census
    assert ExperimentConfig(kind="scaling", solvers=["sa", "sla"]).solvers == ["sla", "sa"]
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(kind="nope")
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(kind="scaling", solvers=[])
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(kind="scaling", solvers=["cplex"])
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(kind="scaling", L_list=[0])
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(kind="scaling", seeds_per_point=1000, job_budget=100)


def test_instance_seeds_unique_and_rewire_paired():
    cfg = ExperimentConfig(kind="rewire", seeds_per_point=5)
    jobs = make_jobs(cfg)
    assert len(jobs) == 25 and len({j.instance_id for j in jobs}) == 25
    by_seed = {}
    for j in jobs:
        by_seed.setdefault(j.instance_id.rsplit("-", 1)[1], set()).add(j.seed)
    # every epsilon point rewires the same base lattice
    assert all(len(s) == 1 for s in by_seed.values())
    base = [j for j in jobs if j.epsilon_ppt == 0][0]
    full = [j for j in jobs if j.epsilon_ppt == 1000 and j.seed == base.seed][0]
    assert build_instance(base).n == build_instance(full).n
    assert build_instance(base).num_edges == build_instance(full).num_edges


def test_scaling_rows_and_manifest(tmp_path):
    cfg = small_scaling(tmp_path)
    assert run_experiment(cfg) == 0
    rows = read(cfg.out)
    assert list(rows[0].keys()) == COLUMNS
    assert len(rows) == 2 * 4 * 3
    assert [r["solver"] for r in rows[:3]] == ["sla", "bnb", "sa"]
    for k in range(0, len(rows), 3):
        sla, bnb, sa = rows[k:k + 3]
        assert sla["mis_size"] == bnb["mis_size"]
        assert int(sa["mis_size"]) <= int(sla["mis_size"])
        assert sla["d_mis"] == "" and sa["p_mis"] != "" and sla["p_mis"] == ""
    man = json.load(open(cfg.out + ".manifest.json"))
    assert len(man["instances"]) == 8 and man["clock"] == "wall"
    # the manifest is enough to rebuild an instance
    inst = man["instances"][3]
    from udmis.graph import LatticeSpec, generate_ud_lattice
    g = generate_ud_lattice(LatticeSpec(inst["L"], inst["rho_ppt"], inst["r2"], inst["seed"]))
    assert g.n == int(rows[9]["n"])


def test_hardness_rows_carry_census(tmp_path):
    cfg = ExperimentConfig(kind="hardness", L_list=[6], seeds_per_point=3, shots=10,
                           out=str(tmp_path / "h.csv"))
    run_experiment(cfg)
    rows = read(cfg.out)
    assert all(r["hardness"] and r["d_mis"] for r in rows)
    assert {r["solver"] for r in rows} == {"sla", "sa"}


def test_strip_timing_and_worker_independence(tmp_path):
    a = small_scaling(tmp_path, out=str(tmp_path / "a.csv"), strip_timing=True, workers=1)
    b = small_scaling(tmp_path, out=str(tmp_path / "b.csv"), strip_timing=True, workers=3)
    run_experiment(a)
    run_experiment(b)
    assert open(a.out).read() == open(b.out).read()
    assert all(r["tts_s"] == "" for r in read(a.out))


def test_failed_jobs_are_rows(tmp_path):
    # r2 = 1 at very low filling never connects: every job fails
    cfg = ExperimentConfig(kind="scaling", L_list=[40], rho_ppt_list=[3], r2_list=[1],
                           seeds_per_point=1, solvers=["bnb"], out=str(tmp_path / "f.csv"))
    assert run_experiment(cfg) == EXIT_ALL_FAILED
    assert read(cfg.out)[0]["status"] == "error:ConnectivityError"


def test_fit_command(tmp_path):
    p = tmp_path / "line.csv"
    with open(p, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for n in range(10, 60, 10):
            row = dict.fromkeys(COLUMNS, "")
            row.update(solver="bnb", n=n, tts_s=10 ** (0.05 * n - 2), hardness=n, p_mis=1.0)
            w.writerow(row)
    out = fit_command(p, "loglinear", percentile=1.0)
    assert out["r_squared"] == pytest.approx(1.0) and out["slope"] == pytest.approx(0.05)
    assert len(out["points"]) == 5
    with pytest.raises(FitError, match="excluded"):
        fit_command(p, "powerlaw")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(FitError, match="missing"):
        fit_command(bad, "loglinear")


def test_census_command(tmp_path, p3, k4):
    for g, h in ((p3, 1.5), (k4, 0.25)):
        path = tmp_path / "g.json"
        g.save(path)
        row = census_command(path)
        assert row["hardness"] == h
    from udmis.graph import LatticeSpec, generate_ud_lattice
    from udmis.sla import SlaBudgetError
    generate_ud_lattice(LatticeSpec(14, 1000, 9, 0)).save(tmp_path / "big.json")
    with pytest.raises(SlaBudgetError, match="variants_peak"):
        census_command(tmp_path / "big.json", max_variants=1000)
