"""Exit criteria. Each test records one PASS/FAIL line (see the terminal
summary section "acceptance criteria")."""
import math
import shutil
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from spinreg.analysis import check_dfs_general, check_ofs_general, find_dfs_ofs
from spinreg.analytic import (
    fidelity_analytic,
    gamma_analytic,
    gamma_minus_analytic,
    gamma_plus_analytic,
)
from spinreg.core import (
    Geometry,
    RegisterLabel,
    all_labels,
    log_decoherence,
    log_fidelity,
    pair_delta,
)
from spinreg.gaussian_oracle import (
    ModeGrid,
    ModeSpec,
    mode_log_decoherence,
    mode_log_fidelity,
    mode_summands,
    riemann_sum_check,
)
from spinreg.kernels import BathSpec, FrequencyWindow, SpectralDensity, assemble, kernel_table
from spinreg.scenario import load_scenario
from spinreg.specfun import polygamma
from spinreg.sweeps import run_scenario

from _oracles import polygamma_series

pytestmark = pytest.mark.acceptance

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
CLI_TOLERANCE = 1e-6
P = RegisterLabel.parse


def _columns(table):
    data = np.array(table.rows, dtype=float)
    return {name: data[:, j] for j, name in enumerate(table.header)}


_TABLES = {}


def sweep(name):
    if name not in _TABLES:
        sc = load_scenario(SCENARIOS / f"{name}.ini")
        _TABLES[name] = _columns(run_scenario(sc, threads=4, tolerance=CLI_TOLERANCE))
    return _TABLES[name]


def _local_extrema(x, y, lo, hi, kind):
    i = np.arange(1, len(y) - 1)
    if kind == "max":
        hit = (y[i] > y[i - 1]) & (y[i] >= y[i + 1])
    else:
        hit = (y[i] < y[i - 1]) & (y[i] <= y[i + 1])
    xs = x[i][hit]
    return xs[(xs >= lo) & (xs <= hi)]


def _sign_changes(y):
    d = np.sign(np.diff(y))
    d = d[d != 0]
    return int(np.count_nonzero(d[1:] != d[:-1]))


SINGLE, SINGLET, GHZ = "++/+-", "+-/-+", "++/--"


def test_analytic_matches_quadrature(record):
    start = time.perf_counter()
    times = np.arange(0.0, 20.0 + 1e-9, 0.5)
    taus = [0.0, 1.0, 5.0]
    worst_abs, worst_rel, failures, points = 0.0, 0.0, 0, 0
    for s in (2, 3, 5):
        for T in (0.01, 1 / 3):
            q, _ = kernel_table(SpectralDensity(s), T, FrequencyWindow.full(),
                                ["gamma", "gamma_plus", "gamma_minus", "fid"], taus, times)
            for i, tau in enumerate(taus):
                ana = {
                    "gamma": gamma_analytic(s, tau, times, 1 / T),
                    "gamma_plus": gamma_plus_analytic(s, tau, times),
                    "gamma_minus": gamma_minus_analytic(s, tau, times),
                    "fid": fidelity_analytic(s, tau, times, 1 / T),
                }
                for k, a in ana.items():
                    diff = np.abs(a - q[k][i])
                    allowed = np.maximum(1e-6 * np.abs(q[k][i]), 1e-9)
                    failures += int(np.count_nonzero(diff > allowed))
                    points += diff.size
                    worst_abs = max(worst_abs, float(diff.max()))
                    big = np.abs(q[k][i]) > 1e-3
                    if big.any():
                        worst_rel = max(worst_rel, float(np.max(diff[big] / np.abs(q[k][i][big]))))
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed <= 120
    record("analytic <-> quadrature grid", ok,
           f"{failures} of {points} points over tolerance, max abs diff {worst_abs:.1e}, "
           f"max rel diff (|value| > 1e-3) {worst_rel:.1e}, {elapsed:.1f} s")
    assert ok


def test_gaussian_mode_oracle(record):
    rng = np.random.default_rng(20240501)
    labels = all_labels(2)
    worst = 0.0
    for _ in range(50):
        omega = rng.uniform(0.1, 10)
        g = rng.uniform(0.01, 1)
        T = float(rng.choice([0.0, 1 / 3, 3.0]))
        t = rng.uniform(0, 10)
        tau = rng.uniform(0, 10)
        mode = ModeSpec.from_geometry(omega, g, Geometry.from_positions([0.0, tau]))
        i, j = rng.choice(4, size=2, replace=False)
        a, b = labels[i], labels[j]
        d = pair_delta(a, b).delta
        terms = mode_summands(mode, T, t)
        for direct, ref in (
            (-mode_log_decoherence(mode, a, b, T, t).real, d @ terms["gamma"] @ d),
            (-mode_log_fidelity(mode, a, b, T, t), d @ terms["fid"] @ d),
        ):
            worst = max(worst, abs(direct - ref) / abs(ref))
    ok = worst <= 1e-10
    record("Gaussian mode oracle (50 configurations)", ok, f"worst relative deviation {worst:.2e}")
    assert ok


def test_continuum_limit(record):
    bath = BathSpec.uncut(3, 1 / 3)
    grid = ModeGrid(30.0, 10_000)
    r1 = riemann_sum_check(bath, grid, 1.0, 2.0)
    r2 = riemann_sum_check(bath, grid.refined(2), 1.0, 2.0)
    ok = r1.max_gap <= 1e-4 and r2.max_gap < r1.max_gap
    record("continuum limit of the mode sum", ok,
           f"max gap {r1.max_gap:.2e} at 1e4 modes, {r2.max_gap:.2e} at 2e4 modes")
    assert ok


def test_transit_time_impulse_shape(record):
    c = sweep("uncut_s5_tau5")
    t = c["t"]
    checks = {}
    for qty in ("re_neg_log_gamma", "neg_log_B[full]"):
        singlet, ghz, single = c[f"{SINGLET}:{qty}"], c[f"{GHZ}:{qty}"], c[f"{SINGLE}:{qty}"]
        mx = _local_extrema(t, singlet, 4, 6, "max")
        mn = _local_extrema(t, ghz, 4, 6, "min")
        checks[qty] = (len(mx) > 0, len(mn) > 0, singlet[-1] > single[-1] and ghz[-1] > single[-1],
                       mx[:1], mn[:1], singlet[-1], ghz[-1], single[-1])
    ok = all(all(v[:3]) for v in checks.values())
    detail = "; ".join(
        f"{q}: singlet max at {v[3]}, GHZ min at {v[4]}, t=20 values {v[5]:.3f}/{v[6]:.3f} vs single {v[7]:.3f}"
        for q, v in checks.items())
    record("transit-time impulse shape (s=5, tau=5)", ok, detail)
    assert ok


def test_pair_curves_nonmonotonic(record):
    counts = {}
    for name in ("uncut_s2_tau5", "uncut_s3_tau5"):
        c = sweep(name)
        counts[name] = (_sign_changes(c[f"{SINGLET}:re_neg_log_gamma"]),
                        _sign_changes(c[f"{GHZ}:re_neg_log_gamma"]))
    ok = all(a >= 1 and b >= 1 for a, b in counts.values())
    record("non-monotonic pair curves (s=2,3, tau=5)", ok,
           ", ".join(f"{k}: singlet {a} / GHZ {b} derivative sign changes" for k, (a, b) in counts.items()))
    assert ok


def test_cut_window_sweep(record):
    c1, c5 = sweep("cut_s5_tau1"), sweep("cut_s5_tau5")
    qty = "neg_log_B[obs]"
    gap1 = float(np.max(np.abs(c1[f"{SINGLET}:{qty}"] - c1[f"{GHZ}:{qty}"])))
    gap5 = float(np.max(np.abs(c5[f"{SINGLET}:{qty}"] - c5[f"{GHZ}:{qty}"])))
    differ = gap1 > 10 * CLI_TOLERANCE
    shrink = gap1 / gap5
    below = all(
        bool(np.all(c5[f"{SINGLE}:{q}"] < c5[f"{p}:{q}"]))
        for q in ("re_neg_log_gamma", qty) for p in (SINGLET, GHZ))
    ok = differ and shrink >= 5 and below
    record("cut-window sweep (s=5, delta=2, t=100)", ok,
           f"tau=1 gap {gap1:.4g} (>10x tol: {differ}); tau=5 gap {gap5:.4g}, shrink {shrink:.2f}x "
           f"(need >=5x: {shrink >= 5}); single below both pairs at every alpha: {below}")
    assert ok


def test_collective_dfs_ofs(record):
    bath = BathSpec.uncut(5, 1 / 3)
    geo = Geometry.collective(2)
    singlet = pair_delta(P("+-"), P("-+"))
    ghz = pair_delta(P("++"), P("--"))
    dev, rel = 0.0, 0.0
    for t in np.arange(0.0, 20.0 + 1e-9, 0.25):
        m = assemble(bath, geo, t)
        dev = max(dev, abs(1 - np.exp(-log_decoherence(singlet, m))),
                  abs(1 - math.exp(-log_fidelity(singlet, m, "full"))))
        g11 = m.gamma[0, 0]
        if g11 > 0:
            rel = max(rel, abs(log_decoherence(ghz, m).real - 4 * g11) / (4 * g11))
    ok = dev <= 1e-10 and rel <= 1e-10
    record("collective DFS/OFS (tau=0)", ok,
           f"singlet max |1-gamma|,|1-B| {dev:.1e}; GHZ vs 4*Gamma11 rel {rel:.1e}")
    assert ok


def test_subspace_enumeration(record):
    bath = BathSpec.uncut(3, 1 / 3)
    problems = []
    for L in range(2, 9):
        classes = find_dfs_ofs(L, "weak")
        sizes = sorted(len(c) for c in classes)
        if sizes != sorted(math.comb(L, k) for k in range(L + 1)):
            problems.append(f"L={L} sizes {sizes}")
        if sorted(lab for c in classes for lab in c) != all_labels(L):
            problems.append(f"L={L} not a partition")
        geo = Geometry.collective(L)
        mats = [assemble(bath, geo, t) for t in (0.5, 3.0, 12.0)]
        for cls in classes:
            if len(cls) < 2:
                continue
            if check_dfs_general(bath, geo, cls, [], tol=1e-10, matrices=mats) != "strong":
                problems.append(f"L={L} class M={cls[0].magnetization} not a DFS")
            if not check_ofs_general(bath, geo, cls, [], tol=1e-10, matrices=mats):
                problems.append(f"L={L} class M={cls[0].magnetization} not an OFS")
    ok = not problems
    record("subspace enumeration (L=2..8)", ok, "all classes verified" if ok else "; ".join(problems))
    assert ok


def _random_bath(rng):
    s = rng.uniform(1, 5)
    T = 0.0 if rng.random() < 0.2 else rng.uniform(0.01, 3)
    if rng.random() < 0.5:
        return BathSpec.uncut(s, T)
    return BathSpec.cut(s, T, rng.uniform(0, 5), rng.uniform(0.5, 3))


def test_matrix_structure(record):
    rng = np.random.default_rng(7)
    worst_psd, worst_add, antisym, diag = math.inf, 0.0, 0.0, 0.0
    for _ in range(200):
        bath = _random_bath(rng)
        L = int(rng.integers(2, 5))
        geo = Geometry.from_positions(np.sort(rng.uniform(0, 8, L)))
        t = rng.uniform(0, 20)
        m = assemble(bath, geo, t)
        for mat in [m.gamma, *m.fid.values()]:
            ev = np.linalg.eigvalsh(mat).min()
            worst_psd = min(worst_psd, ev / max(np.trace(mat), 1e-300))
            diag = max(diag, float(np.ptp(np.diag(mat))))
        antisym = max(antisym, float(np.max(np.abs(m.gamma_minus + m.gamma_minus.T))))
        lo, hi = bath.unobserved.split(rng.uniform(0.1, 10))
        parts = [assemble(BathSpec(bath.sd, bath.temperature, w, {}), geo, t) for w in (lo, hi)]
        for k in ("gamma", "gamma_plus", "gamma_minus"):
            total = getattr(parts[0], k) + getattr(parts[1], k)
            worst_add = max(worst_add, float(np.max(np.abs(total - getattr(m, k)))))
    ok = worst_psd >= -1e-10 and antisym == 0 and diag == 0 and worst_add <= 1e-9
    record("matrix structure (200 samples)", ok,
           f"min eig/trace {worst_psd:.1e}, antisymmetry defect {antisym:.1e}, "
           f"diagonal spread {diag:.1e}, window additivity {worst_add:.1e}")
    assert ok


def test_special_functions(record):
    id1 = abs(complex(polygamma(1, 1)) - math.pi**2 / 6) / (math.pi**2 / 6)
    id3 = abs(complex(polygamma(3, 1)) - math.pi**4 / 15) / (math.pi**4 / 15)
    rng = np.random.default_rng(99)
    worst = 0.0
    for k in range(100):
        z = complex(rng.uniform(0.5, 10), rng.uniform(-15, 15))
        m = (0, 1, 3)[k % 3]
        ref = polygamma_series(m, z)
        worst = max(worst, abs(complex(polygamma(m, z)) - ref) / abs(ref))
    ok = id1 <= 1e-12 and id3 <= 1e-12 and worst <= 1e-10
    record("special functions", ok,
           f"psi1(1) rel {id1:.1e}, psi3(1) rel {id3:.1e}, series worst rel {worst:.1e} (100 points)")
    assert ok


def test_cli_determinism(record, tmp_path):
    shutil.copy(SCENARIOS / "uncut_s5_tau5.ini", tmp_path / "sweep.ini")
    exe = [sys.executable, "-c", "import sys; from spinreg.cli import main; sys.exit(main())"]
    outputs = []
    for threads in ("1", "4"):
        r = subprocess.run([*exe, str(tmp_path / "sweep.ini"), "--threads", threads], capture_output=True)
        assert r.returncode == 0, r.stderr.decode()
        outputs.append((tmp_path / "out" / "uncut_s5_tau5.csv").read_bytes())
        (tmp_path / "out" / "uncut_s5_tau5.csv").unlink()
    ok = outputs[0] == outputs[1]
    record("CLI determinism (s=5, tau=5 time sweep)", ok,
           f"{len(outputs[0])} bytes, identical across runs: {ok}")
    assert ok
