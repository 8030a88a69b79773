"""Acceptance gate: one test per release criterion, at its stated tolerance.

Each test prints a single PASS/FAIL line (run with -s to see them live).
The heavy simulation batches fan out over two worker processes; every
run is seed-determined, so repeated invocations give identical numbers.
"""

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

import splitlbi as slbi
from splitlbi import (
    Dataset,
    Family,
    Hyperparams,
    SplitOperator,
    Support,
    build_lattice,
    connected_components,
    edgeless_graph,
    project_lesion,
    run_path,
    shrink,
)
from splitlbi.cli import main as cli_main
from splitlbi.evaluation import classify_metrics, mdc
from splitlbi.experiments import (
    make_grid_instance,
    run_grid_study,
    support_recovery_race,
    table1_best_auc,
)
from splitlbi.glm import LinearPredictor, augmented_grads, augmented_loss

from oracles import brute_prox_coordinate, central_diff, qp_project_oracle, union_find_components

N_WORKERS = 2


def report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def _pmap(fn, jobs):
    with ProcessPoolExecutor(max_workers=N_WORKERS) as pool:
        return list(pool.map(fn, *zip(*jobs)))


# -- criterion 1: flat-signal support AUC ----------------------------------

def test_criterion_1_table1_auc():
    start = time.perf_counter()
    seeds = list(range(100))
    auc_small = _pmap(table1_best_auc, [(s, 0.02) for s in seeds])
    auc_large = _pmap(table1_best_auc, [(s, 10.0) for s in seeds])
    elapsed = time.perf_counter() - start

    mean_small, mean_large = float(np.mean(auc_small)), float(np.mean(auc_large))
    in_window = abs(mean_large - 0.9829) <= 0.02
    trend = mean_small <= mean_large + 0.01
    fast = elapsed < 300.0
    report(
        "1",
        in_window and trend and fast,
        f"AUC(nu=10)={mean_large:.4f} (target 0.9829+-0.02), "
        f"AUC(nu=0.02)={mean_small:.4f} <= AUC(nu=10)+0.01: {trend}, "
        f"runtime {elapsed:.0f}s < 300s",
    )


# -- criteria 2 and 3: the image-grid study --------------------------------

@pytest.fixture(scope="module")
def grid_runs():
    return _pmap(run_grid_study, [(s,) for s in range(20)])


def test_criterion_2_grid_recovery(grid_runs):
    mean_hits = float(np.mean([r.center_hits for r in grid_runs]))
    mean_fp = float(np.mean([r.false_positives for r in grid_runs]))
    corners = sum(r.corners_recovered for r in grid_runs)
    ok = mean_hits >= 24.0 and mean_fp <= 3.0 and corners >= 16
    report(
        "2",
        ok,
        f"center hits {mean_hits:.2f}/25 (>=24), false positives {mean_fp:.2f} (<=3), "
        f"corners exact in {corners}/20 seeds (>=16)",
    )


def test_criterion_3a_null_start():
    train, _, _, sig = make_grid_instance(0)
    op = SplitOperator(build_lattice(sig.dims), 1.0)
    hyper = Hyperparams(kappa=80.0, nu=2.0, max_iters=1000, record_every=500, nonneg=True)
    path = run_path(train, Family.LOGISTIC, op, hyper)
    first = path.points[0]
    ok = first.t == 0 and first.support_size == 0 and not np.any(first.beta_les)
    report("3a", ok, "first recorded point is the null model (empty support, beta_les = 0)")


def _max_dist(seed, nu):
    train, _, _, sig = make_grid_instance(seed)
    op = SplitOperator(build_lattice(sig.dims), 1.0)
    hyper = Hyperparams(
        kappa=80.0, nu=nu, max_iters=150_000, record_every=5_000, nonneg=True
    )
    path = run_path(train, Family.LOGISTIC, op, hyper)
    return max(pt.diagnostics["dist_pre_les"] for pt in path.points)


def test_criterion_3b_distance_grows_with_nu():
    jobs = [(s, nu) for s in range(3) for nu in (0.02, 100.0)]
    dists = dict(zip(jobs, _pmap(_max_dist, jobs)))
    pairs = [(dists[(s, 0.02)], dists[(s, 100.0)]) for s in range(3)]
    ok = all(small < large for small, large in pairs)
    detail = ", ".join(f"seed{s}: {a:.4f} vs {b:.4f}" for s, (a, b) in enumerate(pairs))
    report("3b", ok, f"max ||beta_pre - beta_les|| nu=0.02 vs nu=100: {detail}")


def test_criterion_3c_dense_estimator_predicts_better(grid_runs):
    total_points = sum(r.n_points for r in grid_runs)
    favorable = sum(r.frac_points_pre_ge_les * r.n_points for r in grid_runs)
    frac = favorable / total_points
    report(
        "3c",
        frac >= 0.70,
        f"beta_pre validation accuracy >= beta_les at {frac:.1%} of recorded points (>=70%)",
    )


def test_grid_supplementary_properties(grid_runs):
    # unpenalized intercept settles near its true value of zero, the
    # estimator distance decays from its mid-path peak as the two
    # converge, and the support appears at a finite time then grows
    # monotonically over its first ten recorded points
    mean_b0 = float(np.mean([abs(r.beta0_at_best) for r in grid_runs]))
    tails = sum(r.final_dist_pre_les < r.max_dist_pre_les for r in grid_runs)
    onsets = all(r.support_onset_t is not None for r in grid_runs)
    sizes = grid_runs[0].support_sizes_from_onset
    early_monotone = all(a <= b for a, b in zip(sizes, sizes[1:]))
    ok = mean_b0 < 0.2 and tails == len(grid_runs) and onsets and early_monotone
    report(
        "3-supplement",
        ok,
        f"mean |beta0| {mean_b0:.3f} < 0.2; distance tail below its path max in "
        f"{tails}/20 runs; support onset finite in all runs and nondecreasing "
        f"over its first recorded points (seed 0: {sizes})",
    )


# -- criterion 4: oracle equivalences ---------------------------------------

def test_criterion_4a_shrink_prox_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        kappa = float(rng.uniform(0.5, 60.0))
        nonneg = bool(rng.random() < 0.5)
        p = 500
        v = rng.uniform(-4.0, 4.0, size=2 * p)
        hyper = Hyperparams(kappa=kappa, nu=1.0, nonneg=nonneg)
        gamma = shrink(v, hyper, p)
        for i in range(2 * p):
            want = brute_prox_coordinate(v[i], kappa, nonneg and i < p)
            worst = max(worst, abs(gamma[i] - want))
    report("4a", worst < 1e-8, f"shrink vs brute prox on 10000 coordinates, max err {worst:.2e}")


def test_criterion_4b_projection_qp_oracle():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(3, 13))
        if rng.random() < 0.4:
            graph = build_lattice((p,))
        else:
            rows = int(rng.integers(2, 4))
            cols = max(2, p // rows)
            graph = build_lattice((rows, cols))
        beta = 2.0 * rng.standard_normal(graph.p)
        s_v = np.flatnonzero(rng.random(graph.p) < 0.55)
        s_g = np.flatnonzero(rng.random(max(graph.m, 1))[: graph.m] < 0.45)
        sup = Support(s_v=s_v, s_g=s_g)
        nonneg = bool(rng.random() < 0.5)
        got = project_lesion(beta, sup, graph, nonneg)
        want = qp_project_oracle(beta, s_v, s_g, graph.edges, nonneg)
        worst = max(worst, float(np.max(np.abs(got - want))))
    report("4b", worst < 1e-8, f"projection vs active-set QP oracle on 200 instances, max err {worst:.2e}")


def test_criterion_4c_components_union_find():
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(100):
        p = int(rng.integers(1, 200))
        m = int(rng.integers(0, 3 * p))
        edges = [(int(a), int(b)) for a, b in rng.integers(0, p, size=(m, 2)) if a != b]
        if connected_components(p, edges) != union_find_components(p, edges):
            ok = False
            break
    report("4c", ok, "connected components equal union-find oracle on 100 random graphs")


# -- criterion 5: gradient correctness --------------------------------------

def test_criterion_5_gradients_vs_finite_differences():
    rng = np.random.default_rng(31)
    worst = 0.0
    for trial in range(100):
        family = Family.LOGISTIC if trial % 2 == 0 else Family.SQUARED
        dims = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        graph = build_lattice(dims)
        op = SplitOperator(graph, rho=float(rng.uniform(0.2, 2.0)))
        n = int(rng.integers(6, 15))
        X = rng.standard_normal((n, graph.p))
        y = rng.choice([-1.0, 1.0], n) if family is Family.LOGISTIC else rng.standard_normal(n)
        data = Dataset(X, y)
        beta = rng.standard_normal(graph.p)
        gamma = rng.standard_normal(op.n_rows)
        b0 = float(rng.standard_normal())
        nu = float(rng.uniform(0.2, 3.0))

        g0, g_beta, g_gamma = augmented_grads(
            LinearPredictor(b0, beta), gamma, op, nu, data, family
        )
        analytic = np.concatenate([[g0], g_beta, g_gamma])

        def f(z):
            return augmented_loss(
                LinearPredictor(z[0], z[1 : 1 + graph.p]), z[1 + graph.p :],
                op, nu, data, family,
            )

        numeric = central_diff(f, np.concatenate([[b0], beta, gamma]), h=1e-5)
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-10)
        worst = max(worst, float(rel))
    report("5", worst < 1e-5, f"augmented gradients vs central differences, worst rel err {worst:.2e}")


# -- criterion 6: single path beats the lambda grid --------------------------

def test_criterion_6_fista_race():
    races = _pmap(support_recovery_race, [(s,) for s in range(20)])
    wins = sum(r.gsplit_wins for r in races)
    max_kkt = max(r.fista_max_kkt for r in races)
    ok = wins >= 15 and max_kkt < 1e-4
    report(
        "6",
        ok,
        f"path solver wins {wins}/20 races (>=15); FISTA max KKT residual {max_kkt:.2e} < 1e-4",
    )


# -- criterion 7: metric identities ------------------------------------------

def test_criterion_7_metric_identities():
    rng = np.random.default_rng(8)
    ok = True
    for _ in range(50):
        n = int(rng.integers(4, 60))
        y = rng.choice([-1.0, 1.0], n)
        if len(np.unique(y)) < 2:
            continue
        mu = rng.standard_normal(n)
        m = classify_metrics(y, mu)
        yhat = np.where(mu >= 0, 1.0, -1.0)
        acc = np.mean(yhat == y)
        sen = np.mean(yhat[y == -1] == -1)
        spe = np.mean(yhat[y == 1] == 1)
        ok &= abs(m.acc - acc) < 1e-12 and abs(m.sen - sen) < 1e-12 and abs(m.spe - spe) < 1e-12

    for _ in range(50):
        K = int(rng.integers(2, 8))
        supports = [set(rng.choice(30, size=rng.integers(0, 12), replace=False).tolist()) for _ in range(K)]
        if all(len(s) == 0 for s in supports):
            continue
        direct = K * len(set.intersection(*supports)) / sum(len(s) for s in supports)
        ok &= abs(mdc(supports) - direct) < 1e-12

    s = {3, 1, 4}
    ok &= mdc([s, s]) == 1.0
    report("7", ok, "classify_metrics and mdc match direct-formula oracles to 1e-12; mdc({S,S}) = 1")


# -- criterion 8: byte-identical CLI outputs ---------------------------------

def _hash_outputs(root):
    digests = {}
    for sub in ("sim", "fit", "cv", "race"):
        for f in sorted((root / sub).rglob("*")):
            if not f.is_file():
                continue
            data = f.read_bytes()
            if f.name == "benchmark.json":
                # wall-clock fields are the one sanctioned nondeterminism
                payload = json.loads(data)
                for section in payload.values():
                    if isinstance(section, dict):
                        section.pop("elapsed_seconds", None)
                payload.pop("elapsed_seconds", None)
                data = json.dumps(payload, sort_keys=True).encode()
            digests[f"{sub}/{f.name}"] = hashlib.sha256(data).hexdigest()
    return digests


def test_criterion_8_cli_determinism(tmp_path):
    def run_all(root):
        sim = root / "sim"
        assert cli_main(["simulate", "--preset", "table1", "--seed", "11",
                         "--label-model", "logit", "--out", str(sim)]) == 0
        fit_cfg = root / "fit.json"
        fit_cfg.write_text(json.dumps({
            "data": {"preset": "table1", "seed": 11, "label_model": "logit"},
            "family": "logistic",
            "lattice": {"identity": 80},
            "hyper": {"kappa": 3.0, "nu": 2.0, "alpha": 0.05,
                      "max_iters": 400, "record_every": 100},
            "out_dir": str(root / "fit"),
        }))
        assert cli_main(["fit-path", "--config", str(fit_cfg)]) == 0
        cv_cfg = root / "cv.json"
        cv_cfg.write_text(json.dumps({
            "data": {"preset": "table1", "seed": 11, "label_model": "logit"},
            "family": "logistic",
            "lattice": {"identity": 80},
            "hyper": {"kappa": 3.0, "nu": 2.0, "alpha": 0.05,
                      "max_iters": 300, "record_every": 100},
            "cv": {"k": 3, "seed": 2, "grid": [{"nu": 0.5}, {"nu": 2.0}]},
            "out_dir": str(root / "cv"),
        }))
        assert cli_main(["cv", "--config", str(cv_cfg)]) == 0
        assert cli_main(["decompose", "--path", str(root / "fit" / "path.jsonl"),
                         "--t", "400", "--rule", "top_k:50",
                         "--out", str(root / "fit" / "decomposition.json")]) == 0
        race_cfg = root / "race.json"
        race_cfg.write_text(json.dumps({
            "race_seed": 4,
            "fista": {"n_lambda": 8, "max_iters": 50_000},
            "out_dir": str(root / "race"),
        }))
        assert cli_main(["compare-fista", "--config", str(race_cfg)]) == 0
        return _hash_outputs(root)

    first = run_all(tmp_path / "one")
    second = run_all(tmp_path / "two")
    same = first == second
    report(
        "8",
        same and len(first) >= 9,
        f"{len(first)} output files byte-identical across repeated runs "
        "(wall-clock fields excluded from benchmark.json hashes)",
    )
