"""End-to-end acceptance checks, one test per criterion.

Every test records a one-line verdict (printed again in the terminal
summary) before asserting, so a failing criterion still reports its
measured values.
"""
from functools import lru_cache

import numpy as np
import pytest

from conftest import record_criterion
from trotter_chaos.errors import avg_sim_infidelity, delta_pointwise, delta_time_avg, floquet_magnus_first
from trotter_chaos.evolution import evolve_pair, steps_for_window, trotter_evolve
from trotter_chaos.linalg import expm_hermitian, unitarity_defect
from trotter_chaos.models import TWO_PI, a2a_ising, dicke, heisenberg, kicked_top
from trotter_chaos.operators import random_state
from trotter_chaos.rmt import analyse_model, chi_squared_rmt, level_spacings, rmt_density, sector_spectra
from trotter_chaos.runner import SweepConfig, TauGrid, format_csv, parse_csv, run_sweep
from trotter_chaos.signatures import (expectation, participation_ratio, perturbation_fidelity,
                                      simulation_fidelity, subsystem_entropy, time_average)

DEFAULT_TAUS = np.round(np.linspace(0.01, 1.0, 100), 10)
# "much larger than one" for the regular kicked top
REGULAR_X2_THRESHOLD = 5.0


def verdict(number, checks):
    """``checks`` maps a label to (measured value, passed)."""
    ok = all(p for _, p in checks.values())
    detail = "; ".join(f"{k}={v:.4g}{'' if p else ' (fails)'}" for k, (v, p) in checks.items())
    record_criterion(number, ok, detail)
    assert ok, detail


@lru_cache(maxsize=None)
def top(variant, **params):
    return kicked_top(variant, **params)


def coe_top(lam):
    return top("COE", lam=lam)


def test_criterion_01_commuting_summands_are_exact():
    models = {
        "ising": a2a_ising(4, omega_x=0.0, g_x=0.0),
        "heisenberg": heisenberg(4, g=0.0),
        "dicke": dicke(1, 10, g=0.0),
    }
    worst = {"infidelity": 0.0, "delta_avg": 0.0, "delta_pointwise": 0.0}
    for name, m in models.items():
        psi0 = random_state("haar_pure", [m.dim], seed=1)
        for tau in DEFAULT_TAUS[::9]:
            r = 40
            rec = evolve_pair(m, tau, r, psi0)
            t = r * tau
            dig = expectation(rec.states_dig, m.observable, tau, rec.times)
            ide = expectation(rec.states_ide, m.observable, tau, rec.times)
            worst["infidelity"] = max(worst["infidelity"], np.max(1 - simulation_fidelity(rec).values))
            worst["delta_avg"] = max(worst["delta_avg"], delta_time_avg(dig, ide, t))
            worst["delta_pointwise"] = max(worst["delta_pointwise"], delta_pointwise(dig, ide, t))
    verdict(1, {k: (v, v < 1e-9) for k, v in worst.items()})


def test_criterion_02_two_qubit_heisenberg_has_no_trotter_error():
    m = heisenberg(2)
    worst = 0.0
    for tau in DEFAULT_TAUS:
        rec = evolve_pair(m, tau, steps_for_window(tau, 50))
        worst = max(worst, avg_sim_infidelity(rec, rec.times[-1]))
    verdict(2, {"max avg infidelity": (worst, worst < 1e-9)})


def test_criterion_03_first_order_convergence():
    m = a2a_ising(4)
    infid = {}
    for tau in (0.02, 0.01, 0.005):
        rec = evolve_pair(m, tau, int(round(2 / tau)))
        infid[tau] = 1 - simulation_fidelity(rec).values[-1]
    r1, r2 = infid[0.02] / infid[0.01], infid[0.01] / infid[0.005]
    verdict(3, {"ratio 0.02/0.01": (r1, 3 <= r1 <= 5), "ratio 0.01/0.005": (r2, 3 <= r2 <= 5)})


def test_criterion_04_floquet_magnus_defect_is_third_order():
    m = a2a_ising(2)

    def defect(tau):
        return np.linalg.norm(m.step_unitary(tau) - expm_hermitian(floquet_magnus_first(m, tau), TWO_PI * tau), 2)

    r1, r2 = defect(0.01) / defect(0.005), defect(0.005) / defect(0.0025)
    verdict(4, {"d(0.01)/d(0.005)": (r1, 6 <= r1 <= 10), "d(0.005)/d(0.0025)": (r2, 6 <= r2 <= 10)})


def test_criterion_05_ising_eigenvector_statistics():
    m = a2a_ising(64)
    x = {tau: analyse_model(m, tau).x2["COE"] for tau in (0.02, 0.5, 0.7)}
    verdict(5, {"X2(0.02)": (x[0.02], x[0.02] > 1e6), "X2(0.5)": (x[0.5], x[0.5] < 1),
                "X2(0.7)": (x[0.7], x[0.7] > 1e3)})


@pytest.mark.slow
def test_criterion_06_threshold_is_stable_with_size():
    grid = DEFAULT_TAUS
    checks = {}
    for j in (4, 8, 16, 32, 64):
        m = a2a_ising(j)
        first = next((tau for tau in grid if analyse_model(m, tau).x2["COE"] < 1), np.inf)
        checks[f"j={j} first tau"] = (first, 0.3 <= first <= 0.5)
    for j in (1, 2, 3):
        m = a2a_ising(j)
        low = min(analyse_model(m, tau).x2["COE"] for tau in grid)
        checks[f"j={j} min X2"] = (low, low > 1)
    verdict(6, checks)


def test_criterion_07_heisenberg_statistics():
    m = heisenberg(8)
    window = [analyse_model(m, tau).x2["CUE"] for tau in np.arange(0.1, 0.401, 0.05)]
    low, early, island = min(window), analyse_model(m, 0.001).x2["CUE"], analyse_model(m, 0.5).x2["CUE"]
    verdict(7, {"min X2 in [0.1, 0.4]": (low, low < 1), "X2(0.001)": (early, early > 1e2),
                "X2(0.5)": (island, island > 1e2)})


@pytest.mark.slow
def test_criterion_08_dicke_truncation():
    small = dicke(6, 13)
    chaotic, regular = analyse_model(small, 0.12).x2["COE"], analyse_model(small, 0.01).x2["COE"]
    large = analyse_model(dicke(6, 200), 0.12).x2["COE"]
    verdict(8, {"dim_c=13 X2(0.12)": (chaotic, chaotic < 1), "dim_c=13 X2(0.01)": (regular, regular > 1e2),
                "dim_c=200 X2(0.12)": (large, large > 1)})


def test_criterion_09_participation_ratio_saturation():
    m = a2a_ising(64)
    avg = {}
    for tau in (0.02, 0.5):
        r = steps_for_window(tau, 200)
        rec = trotter_evolve(m, tau, r)
        pr = participation_ratio(rec.states_dig, m.reference_basis, m.pr_dimension, tau, rec.times)
        avg[tau] = time_average(pr, r * tau)
    verdict(9, {"<PR>(0.5)": (avg[0.5], 0.4 <= avg[0.5] <= 0.55), "<PR>(0.02)": (avg[0.02], avg[0.02] < 0.2)})


def _log_linear_r2(values):
    y = np.log(values)
    x = np.arange(len(y))
    resid = y - np.polyval(np.polyfit(x, y, 1), x)
    return 1 - resid.var() / y.var()


@pytest.mark.slow
def test_criterion_10_kicked_top_suite():
    ens = ("COE", "CUE", "CSE")
    chaotic, regular = coe_top(10.0), coe_top(0.01)
    x_chaotic = analyse_model(chaotic, 1).x2["COE"]
    x_regular = analyse_model(regular, 1).x2["COE"]
    r2 = _log_linear_r2(perturbation_fidelity(chaotic, 1, 20).values)
    f_min = perturbation_fidelity(regular, 1, 200).values.min()
    checks = {"COE lam=10 X2": (x_chaotic, x_chaotic < 1), "COE lam=10 fidelity R2": (r2, r2 > 0.9),
              "COE lam=0.01 X2": (x_regular, x_regular > REGULAR_X2_THRESHOLD),
              "COE lam=0.01 min fidelity": (f_min, f_min > 0.5)}
    for variant in ("CUE", "CSE"):
        report = analyse_model(top(variant), 1, ensembles=ens)
        checks[f"{variant} X2_{variant}"] = (report.x2[variant], report.x2[variant] < 1)
        for other in ens:
            if other != variant:
                checks[f"{variant} X2_{other}"] = (report.x2[other], report.x2[other] > 10)
    verdict(10, checks)


def test_criterion_11_level_spacings():
    phases = np.random.Generator(np.random.PCG64(0)).uniform(-np.pi, np.pi, 10**4)
    s = level_spacings([phases])
    width = 0.25
    counts, edges = np.histogram(s, bins=20, range=(0, 5))
    target = (np.exp(-edges[:-1]) - np.exp(-edges[1:])) / width
    sup = np.max(np.abs(counts / (s.size * width) - target))
    k = coe_top(10.0)
    ks = level_spacings(sector_spectra(k.floquet, k.symmetry))
    small_kt, small_poisson = np.mean(ks < 0.1), np.mean(s < 0.1)
    verdict(11, {"Poisson sup-norm": (sup, sup < 0.05), "top mean spacing": (ks.mean(), abs(ks.mean() - 1) <= 0.02),
                 "top P(s<0.1)": (small_kt, small_kt < 0.03), "uniform P(s<0.1)": (small_poisson, small_poisson > 0.08)})


def test_criterion_12_property_suite(tmp_path):
    rng = np.random.Generator(np.random.PCG64(99))
    checks = {}
    m = a2a_ising(6)
    u = m.step_unitary(0.37)
    checks["unitarity defect"] = (unitarity_defect(u), unitarity_defect(u) < 1e-9)
    rec = evolve_pair(m, 0.37, 200)
    drift = np.max(np.abs(np.linalg.norm(rec.states_dig, axis=1) - 1))
    checks["norm drift"] = (drift, drift < 1e-8)
    pr = participation_ratio(rec.states_dig).values
    checks["PR outside bounds"] = (np.sum((pr < 1 / m.dim - 1e-12) | (pr > 1 + 1e-12)), True)
    checks["PR outside bounds"] = (checks["PR outside bounds"][0], checks["PR outside bounds"][0] == 0)
    h = heisenberg(4)
    ent = subsystem_entropy(trotter_evolve(h, 0.3, 100).states_dig, h.factor_dims, [0]).values
    checks["entropy range"] = (np.ptp(ent), bool(np.all((ent >= -1e-9) & (ent <= 1 + 1e-9))))
    dig = expectation(rec.states_dig, m.observable, 0.37, rec.times)
    ide = expectation(rec.states_ide, m.observable, 0.37, rec.times)
    gap = delta_pointwise(dig, ide, 50) - delta_time_avg(dig, ide, 50)
    checks["dO - DO"] = (gap, gap >= 0)
    z = np.linalg.qr(rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30)))[0]
    from trotter_chaos.rmt import eigenvector_components
    eta = eigenvector_components(z).eta.reshape(30, 30)
    checks["sum eta - 1"] = (np.max(np.abs(eta.sum(axis=0) - 1)), np.max(np.abs(eta.sum(axis=0) - 1)) < 1e-10)
    from scipy import integrate
    norms = [integrate.quad(lambda x: rmt_density(e, 20, x), 0, 1, limit=200)[0] for e in ("COE", "CUE", "CSE")]
    checks["density normalisation"] = (max(abs(n - 1) for n in norms), max(abs(n - 1) for n in norms) < 1e-6)
    cfg = SweepConfig(model="a2a_ising", sizes=[2, 3], taus=TauGrid(values=[0.2, 0.5]),
                      signatures=["observable", "chi2_rmt"], windows=[3.0], out_dir=str(tmp_path)).validate()
    first, second = run_sweep(cfg), run_sweep(cfg)
    same = format_csv(first.rows) == format_csv(second.rows) and second.computed == 0
    checks["sweep rerun recomputed jobs"] = (second.computed, same)
    text = format_csv(first.rows)
    checks["CSV round trip"] = (len(text), format_csv(parse_csv(text)) == text)
    verdict(12, checks)
