"""Exit criteria, each at its stated tolerance.

Oracles here are independent of the simulator: closed forms, scipy
quadrature and a separate vectorised distance sampler.
"""

import math
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from metsim import battery as bat
from metsim import link
from metsim.coverage import MobilityParams, Sampler
from metsim.schemes import SchemeKind
from metsim.simulator import SimConfig, draw_run, monte_carlo, procedure_energies

L = link.LinkParams()
B = bat.ChargeProfileParams()
CPC, PAC, DAC, ARBC = SchemeKind.CPC, SchemeKind.PAC, SchemeKind.DAC, SchemeKind.ARBC
SEED = 20190528
RUNS = 10_000


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def sampler_config(sampler, runs=RUNS):
    return SimConfig(runs=runs, seed=SEED, mobility=MobilityParams(sampler=sampler))


@pytest.fixture(scope="module")
def mc():
    out = {}
    for sampler in Sampler:
        t0 = time.perf_counter()
        records, stats = monte_carlo(sampler_config(sampler))
        out[sampler] = (records, stats, time.perf_counter() - t0)
    return out


def cpc_oracle():
    # mean remaining time under a uniform start is t_end / 2
    return 0.5 * B.t_end * link.source_power(L, bat.peak_power(B), 10.0)


def pac_oracle():
    def integrand(t):
        if t < B.t_cc:
            p = B.a_v * math.exp(B.b_v * t) + B.c_v * math.exp(B.d_v * t)
        else:
            p = B.v_cv * min(B.i_cc, B.a_i * math.exp(B.b_i * t) + B.c_i * math.exp(B.d_i * t))
        return t * link.source_power(L, p, 10.0)

    value, _ = quad(integrand, 0.0, B.t_end, points=[B.t_cc, 1.2001], limit=400, epsabs=1e-10)
    return value / B.t_end


def mean_gain_oracle(sampler, draws=1_000_000):
    rng = np.random.default_rng(424242)
    if sampler is Sampler.UNIFORM_DISTANCE:
        d = 10.0 * (1.0 - rng.random(draws))
    else:
        u, v = 1.0 - rng.random(draws), rng.random(draws)
        h = 3.0 * np.cbrt(u)
        rho = h * math.sqrt(91.0) / 3.0 * np.sqrt(v)
        d = np.hypot(h, rho)
    g = np.exp(-2.0 * np.pi * L.r**2 / (L.lam * (L.l + d))) - np.log(L.f)
    return float(g.mean())


def energies(records, kind):
    return np.array([r.energy for r in records if r.scheme is kind])


@pytest.mark.criterion("1 link-curve spot checks")
def test_c1_link_curve(criterion):
    a = link.source_power(L, 3.0, 2.0)
    b = link.source_power(L, 3.0, 6.0)
    c = link.source_power(L, 5.0, 6.0)
    d = link.source_power(L, 1.0, 6.0)
    criterion.note(f"{a:.2f}, {b:.2f}, {c:.2f}, {d:.2f} W")
    assert abs(a - 80.0) <= 0.10 * 80.0
    assert abs(b - 150.0) <= 0.10 * 150.0
    assert 200.0 <= c <= 210.0
    assert 100.0 < d < 115.0


@pytest.mark.criterion("2 affinity in output power")
def test_c2_affinity(criterion):
    p = np.arange(0.0, 6.0 + 1e-12, 0.5)
    worst = 0.0
    for d in (1.0, 3.0, 5.0):
        ps = link.source_power(L, p, d)
        worst = max(worst, float(np.max(np.abs(np.diff(ps, 2))) / np.max(ps)))
    slope1 = link.source_power(L, 1.0, 1.0) - link.source_power(L, 0.0, 1.0)
    slope5 = link.source_power(L, 1.0, 5.0) - link.source_power(L, 0.0, 5.0)
    criterion.note(f"max rel second difference {worst:.1e}; slopes {slope1:.3f} < {slope5:.3f}")
    assert worst <= 1e-9
    assert slope5 > slope1


@pytest.mark.criterion("3 battery profile")
def test_c3_battery(criterion):
    before = np.nextafter(B.t_cc, 0.0)
    di = abs(bat.current_at(B, before) - float(bat._fit_current(B, B.t_cc)))
    dv = abs(bat.voltage_at(B, before) - bat.voltage_at(B, B.t_cc))
    peak = bat.peak_power(B)
    worst = 0.0
    for t in np.linspace(0.0, B.t_end, 100):
        x = np.linspace(0.0, t, 100_001)
        y = np.where(x < B.t_cc, B.i_cc, np.minimum(B.i_cc, B.a_i * np.exp(B.b_i * x) + B.c_i * np.exp(B.d_i * x)))
        oracle = _trapezoid(y, x)
        worst = max(worst, abs(bat.cumulative_charge(B, t) - oracle))
    criterion.note(f"jumps {di:.1e} A / {dv:.1e} V, peak {peak} W, charge err {worst:.1e} Ah")
    assert di <= 0.01 and dv <= 0.05
    assert peak == B.i_cc * B.v_cv == 4.2
    assert worst <= 1e-6


@pytest.mark.criterion("4 CPC mean energy")
def test_c4_cpc(criterion, mc):
    records, stats, elapsed = mc[Sampler.UNIFORM_DISTANCE]
    oracle = cpc_oracle()
    mean = stats.per_scheme[CPC].mean_energy
    criterion.note(f"MC {mean:.1f} Wh vs analytic {oracle:.1f} Wh, {elapsed:.1f} s")
    assert abs(mean - oracle) <= 0.02 * oracle
    assert abs(oracle - 530.0) <= 0.05 * 530.0
    assert elapsed < 60.0


@pytest.mark.criterion("5 PAC mean energy")
def test_c5_pac(criterion, mc):
    _, stats, _ = mc[Sampler.UNIFORM_DISTANCE]
    oracle = pac_oracle()
    mean = stats.per_scheme[PAC].mean_energy
    criterion.note(f"MC {mean:.1f} Wh vs quadrature {oracle:.1f} Wh")
    assert abs(mean - oracle) <= 0.02 * oracle


@pytest.mark.criterion("6 DAC/ARBC means and savings")
def test_c6_dac_arbc(criterion, mc):
    notes = []
    for sampler in Sampler:
        records, stats, _ = mc[sampler]
        ratio = mean_gain_oracle(sampler) / link.link_gain(L, 10.0)
        for kind, base in ((DAC, cpc_oracle()), (ARBC, pac_oracle())):
            e = energies(records, kind)
            se = e.std(ddof=1) / math.sqrt(len(e))
            expected = ratio * base
            assert abs(e.mean() - expected) <= 3.0 * se, (sampler, kind, e.mean(), expected, se)
        saving = stats.savings[CPC]
        notes.append(
            f"{sampler.value}: dac {stats.per_scheme[DAC].mean_energy:.1f}, "
            f"arbc {stats.per_scheme[ARBC].mean_energy:.1f} Wh, saving vs cpc {saving:.1f}%"
        )
        assert saving >= 55.0
    criterion.note("; ".join(notes))


@pytest.mark.criterion("7 per-run dominance")
def test_c7_dominance(criterion, mc):
    violations = 0
    total = 0
    for sampler in Sampler:
        records, _, _ = mc[sampler]
        e = {k: energies(records, k) for k in SchemeKind}
        bad = ~(
            (e[ARBC] <= e[DAC]) & (e[DAC] <= e[CPC]) & (e[ARBC] <= e[PAC]) & (e[PAC] <= e[CPC])
        )
        violations += int(bad.sum())
        total += len(e[CPC])
    criterion.note(f"{violations} violations over {total} runs")
    assert violations == 0


@pytest.mark.criterion("8 stability across run counts")
def test_c8_stability(criterion, mc):
    _, big, _ = mc[Sampler.UNIFORM_DISTANCE]
    _, small = monte_carlo(sampler_config(Sampler.UNIFORM_DISTANCE, runs=1000))
    diffs = {
        k.value: abs(small.per_scheme[k].mean_energy - big.per_scheme[k].mean_energy)
        / big.per_scheme[k].mean_energy
        for k in SchemeKind
    }
    criterion.note(", ".join(f"{k} {100 * v:.2f}%" for k, v in diffs.items()))
    assert all(v < 0.03 for v in diffs.values())


@pytest.mark.criterion("9 round trip and dt convergence")
def test_c9_round_trip_and_convergence(criterion):
    p, d = np.meshgrid(np.linspace(0.0, 10.0, 100), np.linspace(0.0, 10.0, 100))
    back = link.output_power(L, link.source_power(L, p, d), d)
    rel = np.abs(back - p) / np.maximum(np.abs(p), 1e-300)
    rel = np.where(p == 0.0, np.abs(back), rel)
    cfg = SimConfig(seed=SEED)
    worst_dt = 0.0
    for k in range(200):
        start, traj = draw_run(cfg, k)
        coarse = procedure_energies(cfg, start, traj, dt=cfg.dt)
        fine = procedure_energies(cfg, start, traj, dt=cfg.dt / 2)
        for kind in SchemeKind:
            if fine[kind] > 0.0:
                worst_dt = max(worst_dt, abs(coarse[kind] - fine[kind]) / fine[kind])
    criterion.note(f"round trip {rel.max():.1e}, dt halving {100 * worst_dt:.1e}%")
    assert rel.max() <= 1e-9
    assert worst_dt < 5e-4


@pytest.mark.criterion("10 determinism")
def test_c10_determinism(criterion, tmp_path):
    outputs = []
    for i, workers in enumerate(("1", "1", "4")):
        out = tmp_path / f"o{i}"
        subprocess.run(
            [sys.executable, "-m", "metsim", "simulate", "--runs", "1000", "--seed", "7",
             "--out-dir", str(out), "--workers", workers],
            check=True,
            capture_output=True,
        )
        outputs.append(((out / "runs.csv").read_bytes(), (out / "aggregate.csv").read_bytes()))
    criterion.note("serial x2 and 4 workers")
    assert outputs[0] == outputs[1] == outputs[2]
