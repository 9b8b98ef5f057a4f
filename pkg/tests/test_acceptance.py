"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Every test prints a single ``PASS``/``FAIL`` line, which is also repeated in
the pytest terminal summary.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from realm_tta import checks, cli, experiment, spl
from realm_tta import robust_loss as rl
from realm_tta.config import RunConfig
from realm_tta.data import blob_means

SEEDS = (7, 11, 13, 17, 19)
T_GRID = np.round(np.arange(0, 101) * 0.1, 10)
ALPHA_GRID = (0.15, 0.5, 1.0, 1.5, 1.9)


def report(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


@lru_cache(maxsize=None)
def run_cfg(seed, strategy, **kw):
    """Summary of a full default run; cached so criteria share identical runs."""
    return experiment.run(RunConfig(seed=seed, strategy=strategy, **kw))[1]


def mean_accuracy(strategy, **kw):
    return 100 * float(np.mean([run_cfg(s, strategy, **kw).final_accuracy for s in SEEDS]))


def bayes_ceiling():
    """Accuracy of the nearest-class-mean rule, which is Bayes-optimal for these blobs."""
    accs = []
    for seed in SEEDS:
        cfg = RunConfig(seed=seed)
        x, y = experiment.build_data(cfg)["target"]
        means = blob_means(cfg.n_classes, cfg.d_in, cfg.blob_separation)
        accs.append(np.mean(np.argmin(((x[:, None] - means) ** 2).sum(-1), axis=1) == y))
    return 100 * float(np.mean(accs))


def test_c1_spl_equivalence():
    t0 = time.perf_counter()
    rep = spl.equivalence_check(T_GRID, ALPHA_GRID, tolerance=1e-4, resolution=1e-4)
    dt = time.perf_counter() - t0
    ok = rep.passed and rep.max_value_dev <= 1e-4 and rep.max_w_dev <= 2e-4 and dt < 10
    assert report(1, ok, f"value dev {rep.max_value_dev:.2e} <= 1e-4, argmin dev "
                         f"{rep.max_w_dev:.2e} <= 2e-4, {dt:.2f}s < 10s")


def test_c2_regularizer_identities():
    t0 = time.perf_counter()
    w = np.linspace(0.01, 1.0, 1000)
    t = np.linspace(0.0, 100.0, 1001)
    g1, conv, conc, prime0, inv = 0.0, True, True, True, 0.0
    for a in ALPHA_GRID:
        g1 = max(g1, abs(rl.g_reg(1.0, a)))
        h = 1e-3
        wi = w[(w - h > 0)]
        conv &= bool(np.all(rl.g_reg(wi + h, a) - 2 * rl.g_reg(wi, a) + rl.g_reg(wi - h, a) > 0))
        conc &= bool(np.all(rl.rho_second(w, a) < 0))
        prime0 &= rl.rho_prime(0.0, a) == 1.0
        inv = max(inv, float(np.max(np.abs(rl.rho_prime_inv(rl.rho_prime(t, a), a) - t))))
    dt = time.perf_counter() - t0
    ok = g1 <= 1e-12 and conv and conc and prime0 and inv <= 1e-9 and dt < 1
    assert report(2, ok, f"|g(1)| {g1:.1e}, g''>0 {conv}, rho''<0 {conc}, rho'(0)=1 {prime0}, "
                         f"round trip {inv:.1e} <= 1e-9, {dt:.3f}s < 1s")


def test_c3_gradients():
    t0 = time.perf_counter()
    rg = checks.check_rho_grad(rel=1e-5)
    mg = checks.check_model_grad(n_pairs=100, rel=1e-4)
    dt = time.perf_counter() - t0
    ok = rg.passed and mg.passed and dt < 30
    assert report(3, ok, f"rho_grad worst rel {rg.max_dev:.1e} (tol 1e-5), model grad worst rel "
                         f"{mg.max_dev:.1e} (tol 1e-4, 100 pairs), {dt:.2f}s < 30s")


def test_c4_entropy_collapse():
    t0 = time.perf_counter()
    good = []
    for seed in SEEDS:
        tent = run_cfg(seed, "Tent", lr_theta=0.5).collapsed
        realm = run_cfg(seed, "REALM", lr_theta=0.5).collapsed
        good.append(tent and not realm)
    dt = time.perf_counter() - t0
    ok = sum(good) >= 4 and good[0] and dt < 60
    assert report(4, ok, f"Tent collapses and REALM does not on {sum(good)}/5 seeds "
                         f"(seed 7: {good[0]}), {dt:.1f}s < 60s")


def test_c5_update_frequency():
    t0 = time.perf_counter()
    rows = []
    for seed in SEEDS[:3]:
        e, r = run_cfg(seed, "EATA"), run_cfg(seed, "REALM")
        rows.append((seed, r.updates, e.updates, e.steps))
    dt = time.perf_counter() - t0
    ok = all(r >= e and e < n for _, r, e, n in rows) and dt < 60
    detail = ", ".join(f"seed {s}: REALM {r} >= EATA {e} < {n}" for s, r, e, n in rows)
    assert report(5, ok, f"{detail}, {dt:.1f}s < 60s")


@pytest.fixture(scope="module")
def accuracies():
    t0 = time.perf_counter()
    accs = {s: mean_accuracy(s) for s in ("NoAdapt", "EATA", "REALM")}
    return accs, time.perf_counter() - t0


def test_c6a_realm_vs_eata(accuracies):
    accs, dt = accuracies
    ok = accs["REALM"] >= accs["EATA"] - 0.5 and dt < 120
    assert report("6a", ok, f"REALM {accs['REALM']:.2f} >= EATA {accs['EATA']:.2f} - 0.5 pt "
                            f"(5-seed mean), {dt:.1f}s < 120s")


def test_c6b_realm_vs_noadapt(accuracies):
    accs, dt = accuracies
    ok = accs["REALM"] >= accs["NoAdapt"] + 2.0 and dt < 120
    ceiling = bayes_ceiling()
    assert report("6b", ok, f"REALM {accs['REALM']:.2f} >= NoAdapt {accs['NoAdapt']:.2f} + 2 pt "
                            f"(5-seed mean); Bayes-optimal ceiling on this shift {ceiling:.2f}")


def test_c7_squared_parity():
    plain, sq = mean_accuracy("REALM"), mean_accuracy("REALM", use_squared=True)
    ok = abs(plain - sq) <= 1.0
    assert report(7, ok, f"|REALM {plain:.2f} - REALM-squared {sq:.2f}| <= 1 pt")


def test_c8_scale_factor_ablation():
    on, off = mean_accuracy("REALM", use_scale_factor=True), mean_accuracy("REALM")
    ok = off <= on + 1.0
    assert report(8, ok, f"without scale factor {off:.2f} <= with {on:.2f} + 1 pt")


def test_c9_determinism(tmp_path):
    model = tmp_path / "pre/model.json"
    assert cli.main(["pretrain", "--out_dir", str(model.parent)]) == 0
    same = []
    for strategy in ("NoAdapt", "Tent", "EATA", "REALM"):
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{strategy}-{rep}"
            assert cli.main(["adapt", "--model", str(model), "--strategy", strategy,
                             "--out_dir", str(out)]) == 0
            outs.append((out / "steps.csv").read_bytes())
        same.append(outs[0] == outs[1])
    assert report(9, all(same), f"byte-identical step CSVs for {sum(same)}/4 strategies")
