"""Acceptance criteria, one test per criterion.

Each test prints a PASS/FAIL line (collected into the pytest summary) and then
asserts at the stated tolerance.  ``python tests/test_acceptance.py`` runs the
same checks without pytest.
"""

import math
import sys
import tempfile
import time
from functools import lru_cache
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from trilind.analytic import squeeze_trajectory, vacuum_fluctuation_signal  # noqa: E402
from trilind.config import load_preset, validate_config  # noqa: E402
from trilind.experiments import build_problem, run_sweep, run_wigner  # noqa: E402
from trilind.fock import (  # noqa: E402
    HilbertSpace,
    ReducedDensity,
    basis_state,
    mode_annihilator,
    number_operator,
)
from trilind.lindblad import CollapseSet, EvolutionSpec, build_liouvillian, evolve, steady_state  # noqa: E402
from trilind.model import (  # noqa: E402
    EffectiveParams,
    SystemParams,
    build_beamsplitter_hamiltonian,
    build_full_hamiltonian,
    build_squeeze_hamiltonian,
    rabi_splitting,
    symmetry_generator,
    total_excitation_operator,
)
from trilind.observables import g2_tau, g2_zero, moments, number_distribution, steady_distribution, wigner  # noqa: E402

G = 40.0
RESONANCE = dict(delta_a=(1 + math.sqrt(3)) / 2 * G, delta_b=(1 + math.sqrt(3)) / 2 * G, delta=G)

# Converged blue-minus-red differences of the full model at w_b/g = 20, gt/pi = 0.5
# (stable to 1e-10 from n_max = 5 through 8). Regression-locked at 1%.
VACUUM_SIGNAL_CAVITY = 0.805173
VACUUM_SIGNAL_PHONON = 0.955991

# Trajectories checked for trace drift and positivity by criterion 9.
TRAJECTORIES = {}


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def squeeze_liouvillian(space, *, kappa_b=1.0, omega=0.2, **detunings):
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=omega, **detunings), space)
    return build_liouvillian(h, CollapseSet.default(space, 1.0, 10.0, kappa_b))


@lru_cache(maxsize=None)
def resonance_state(kappa_b=1.0, n_max=5):
    l = squeeze_liouvillian(HilbertSpace(n_max, n_max), kappa_b=kappa_b, **RESONANCE)
    return l, steady_state(l)


# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def criterion_1():
    space = HilbertSpace(5, 5)
    h = build_squeeze_hamiltonian(EffectiveParams(g=G, omega_pump=0.0), space)
    l = build_liouvillian(h, CollapseSet.default(space, 0.0, 0.0, 0.0))
    times = np.linspace(0.0, 2 * math.pi / G, 201)
    started = time.perf_counter()
    errors = []
    for n in (0, 1, 2):
        traj = evolve(
            basis_state(space, n, n, "e").density(),
            l,
            EvolutionSpec(times, rel_tol=1e-10, abs_tol=1e-12),
            e_ops={"n_a": number_operator(space, "cavity")},
        )
        TRAJECTORIES[f"closed squeeze n={n}"] = traj
        ref = np.array([squeeze_trajectory(n, G, t)[1].n_a for t in times])
        errors.append(float(np.max(np.abs(traj.expect["n_a"].real - ref))))
    elapsed = time.perf_counter() - started
    ok = max(errors) < 1e-6 and elapsed < 10.0
    return ok, f"max|n_a - oracle| = {max(errors):.2e} (n=0,1,2), runtime {elapsed:.2f} s"


@lru_cache(maxsize=None)
def criterion_2():
    space = HilbertSpace(6, 6)
    wb = 20 * G
    t_end = 0.5 * math.pi / G
    occ = {}
    for side, dc in (("blue", -wb), ("red", wb)):
        h = build_full_hamiltonian(SystemParams(g=G, omega_b=wb, delta_c=dc), space)
        l = build_liouvillian(h, CollapseSet.default(space, 1.0, 10.0, 1.0))
        traj = evolve(basis_state(space, 0, 0, "e").density(), l, EvolutionSpec(np.linspace(0, t_end, 11), rel_tol=1e-10, abs_tol=1e-12))
        TRAJECTORIES[f"full model {side} sideband"] = traj
        occ[side] = moments(traj.states[-1])
    cav = vacuum_fluctuation_signal(occ["blue"].n_a, occ["red"].n_a)
    pho = vacuum_fluctuation_signal(occ["blue"].n_b, occ["red"].n_b)
    in_band = 0.8 <= cav <= 1.05 and 0.8 <= pho <= 1.05
    locked = abs(cav / VACUUM_SIGNAL_CAVITY - 1) <= 0.01 and abs(pho / VACUUM_SIGNAL_PHONON - 1) <= 0.01
    return in_band and locked, f"cavity {cav:.6f}, phonon {pho:.6f} (band [0.8, 1.05], lock +-1% of {VACUUM_SIGNAL_CAVITY}, {VACUUM_SIGNAL_PHONON})"


@lru_cache(maxsize=None)
def criterion_3():
    cfg = validate_config(load_preset("fig3"))
    started = time.perf_counter()
    space, l = build_problem(cfg, cfg.resolve())
    assert cfg.n_a_max == cfg.n_b_max == 6
    times = cfg.time_grid(cfg.resolve())
    traj = evolve(basis_state(space, 0, 0, "e").density(), l, EvolutionSpec(times))
    TRAJECTORIES["squeeze dynamics with pump"] = traj
    elapsed = time.perf_counter() - started
    i = int(np.argmin(np.abs(np.linspace(0, cfg.t_max, cfg.n_points) - 0.5)))
    rho = traj.states[i]
    m = moments(rho)
    gaa, gbb = g2_zero(rho, "cavity"), g2_zero(rho, "phonon")
    ok = (
        abs(m.n_a - 0.79) <= 0.05
        and abs(m.n_b - 0.94) <= 0.05
        and 2.5e-5 / 3 <= gaa <= 2.5e-5 * 3
        and 2.3e-5 / 3 <= gbb <= 2.3e-5 * 3
        and elapsed < 60.0
    )
    return ok, f"n_a {m.n_a:.4f}, n_b {m.n_b:.4f}, g2_aa {gaa:.3e}, g2_bb {gbb:.3e}, runtime {elapsed:.2f} s"


@lru_cache(maxsize=None)
def criterion_4():
    _, rho = resonance_state()
    gaa, gbb = g2_zero(rho, "cavity"), g2_zero(rho, "phonon")
    multi = {}
    for mode in ("cavity", "phonon"):
        pt = steady_distribution(number_distribution(rho, mode)).p
        multi[mode] = (float(pt[3:].sum()), float(pt[2:].sum()))
    ok = 1e-4 <= gaa <= 1e-2 and 1e-3 <= gbb <= 1e-1 and multi["cavity"][0] < 1e-4 and multi["phonon"][0] < 1.4e-3
    return ok, (
        f"g2_aa {gaa:.3e}, g2_bb {gbb:.3e}, p~(q>2) cavity {multi['cavity'][0]:.2e} phonon {multi['phonon'][0]:.2e}"
        f" (q>=2: {multi['cavity'][1]:.2e}, {multi['phonon'][1]:.2e})"
    )


@lru_cache(maxsize=None)
def criterion_5():
    space = HilbertSpace(5, 5)
    scan = np.linspace(-2 * G, 2 * G, 41)
    step = scan[1] - scan[0]
    n_a = []
    for da in scan:
        rho = steady_state(squeeze_liouvillian(space, delta_a=da, delta_b=da, delta=G))
        n_a.append(moments(rho).n_a)
    n_a = np.array(n_a)
    peaks = [i for i in range(1, scan.size - 1) if n_a[i] > n_a[i - 1] and n_a[i] >= n_a[i + 1]]
    top = sorted(sorted(peaks, key=lambda i: n_a[i])[-2:])
    found = [float(scan[i]) for i in top]
    targets = sorted(rabi_splitting(G, G))
    ok = len(found) == 2 and all(abs(f - t) <= step + 1e-9 for f, t in zip(found, targets))
    return ok, f"maxima at delta_a/g = {[round(f / G, 3) for f in found]}, expected {[round(t / G, 3) for t in targets]}, step {step / G:.2f} g"


@lru_cache(maxsize=None)
def criterion_6():
    space = HilbertSpace(4, 4)
    worst = 0.0
    for det in (RESONANCE, dict(delta_a=0.0, delta_b=0.0, delta=0.0), dict(delta_a=-25.0, delta_b=10.0, delta=30.0)):
        l = squeeze_liouvillian(space, **det)
        rho = steady_state(l)
        for mode in ("cavity", "phonon"):
            worst = max(worst, abs(g2_tau(l, rho, mode, [0.0, 1e-3])[0] - g2_zero(rho, mode)))
    return worst < 1e-8, f"max |g2_tau(0) - g2_zero| = {worst:.2e} over 3 points x 2 modes"


@lru_cache(maxsize=None)
def criterion_7():
    l, rho = resonance_state()
    taus = np.linspace(0.0, 5.0, 2001)
    curve = g2_tau(l, rho, "cavity", taus)
    above = np.nonzero(curve >= 0.5)[0]
    if above.size == 0:
        return False, "g2_aa(tau) never reaches 0.5 within tau <= 5"
    k = int(above[0])
    # linear interpolation of the crossing
    t_half = taus[k - 1] + (0.5 - curve[k - 1]) * (taus[k] - taus[k - 1]) / (curve[k] - curve[k - 1])
    return t_half > 1 / 10.0, f"g2_aa(tau) reaches 0.5 at tau = {t_half:.3f} / gamma (1/kappa_a = 0.1)"


@lru_cache(maxsize=None)
def criterion_8():
    vac = np.zeros((6, 6))
    vac[0, 0] = 1.0
    one = np.zeros((6, 6))
    one[1, 1] = 1.0
    w_vac = wigner(ReducedDensity("cavity", vac), 3.0, 101).values[50, 50]
    w_one = wigner(ReducedDensity("cavity", one), 3.0, 101).values[50, 50]
    with tempfile.TemporaryDirectory() as tmp:
        report_ = run_wigner(validate_config(load_preset("fig3cd")), tmp)
        mins = {}
        for mode in ("cavity", "phonon"):
            data = np.loadtxt(Path(tmp) / f"wigner_{mode}.csv", delimiter=",", skiprows=1)
            mins[mode] = float(data[:, 2].min())
    ok = (
        abs(w_vac - 2 / math.pi) < 1e-6
        and abs(w_one + 2 / math.pi) < 1e-6
        and mins["cavity"] < 0
        and mins["phonon"] < 0
        and report_.exit_code == 0
    )
    return ok, f"W_vac(0) - 2/pi = {w_vac - 2 / math.pi:.1e}, W_1(0) + 2/pi = {w_one + 2 / math.pi:.1e}, snapshot minima {mins['cavity']:.3f}, {mins['phonon']:.3f}"


@lru_cache(maxsize=None)
def criterion_9():
    for fn in (criterion_1, criterion_2, criterion_3):
        fn()
    drift = max(t.max_trace_drift for t in TRAJECTORIES.values())
    lowest = min(t.min_eigenvalue for t in TRAJECTORIES.values())
    space = HilbertSpace(5, 5)
    p = EffectiveParams(delta_a=13.0, delta_b=-7.0, delta=3.0, g=G, omega_pump=0.0)
    hb, hs = build_beamsplitter_hamiltonian(p, space), build_squeeze_hamiltonian(p, space)
    comm = max(
        np.abs(symmetry_generator(space, "beamsplitter").commutator(hb).matrix).max(),
        np.abs(symmetry_generator(space, "squeeze").commutator(hs).matrix).max(),
        np.abs(total_excitation_operator(space).commutator(hs).matrix).max(),
    )
    ladder = 0.0
    for mode, top in (("cavity", space.n_a_max), ("phonon", space.n_b_max)):
        a = mode_annihilator(space, mode)
        levels = [space.label(i)[0 if mode == "cavity" else 1] for i in range(space.dim)]
        expected = np.diag([1.0 if n < top else -float(top) for n in levels])
        ladder = max(ladder, float(np.abs(a.commutator(a.dag()).matrix - expected).max()))
    ok = drift < 1e-8 and lowest > -1e-8 and comm < 1e-10 and ladder < 1e-14
    return ok, (
        f"{len(TRAJECTORIES)} trajectories: drift {drift:.1e}, min eig {lowest:.1e}; "
        f"max commutator {comm:.1e}; ladder pattern error {ladder:.1e}"
    )


@lru_cache(maxsize=None)
def criterion_10():
    kappas = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]
    g2 = [g2_zero(resonance_state(k)[1], "cavity") for k in kappas]
    decreasing = all(b < a for a, b in zip(g2, g2[1:]))
    low_ratio = g2[0] < 1e-3
    trend = "increasing" if all(b > a for a, b in zip(g2, g2[1:])) else "non-monotone"
    return decreasing and low_ratio, (
        f"g2_aa(0) at kappa_b = {kappas}: {[f'{x:.2e}' for x in g2]} ({trend}); "
        f"monotone decrease {'holds' if decreasing else 'violated'}; g2_aa(0) at kappa_b/kappa_a = 0.01 is {g2[0]:.2e} (< 1e-3: {low_ratio})"
    )


@lru_cache(maxsize=None)
def criterion_11():
    cfg = validate_config(load_preset("fig4ab"))
    assert cfg.n_a_max == cfg.n_b_max == 5 and len(cfg.points()) == 41 * 41
    with tempfile.TemporaryDirectory() as tmp:
        started = time.perf_counter()
        full = run_sweep(cfg, Path(tmp) / "full", jobs=4)
        elapsed = time.perf_counter() - started
        small = validate_config(load_preset("fig4ab").replace("points = 41", "points = 5"))
        a = run_sweep(small, Path(tmp) / "j1", jobs=1)
        b = run_sweep(small, Path(tmp) / "j2", jobs=2)
        same = (Path(tmp) / "j1" / "sweep.csv").read_bytes() == (Path(tmp) / "j2" / "sweep.csv").read_bytes()
        rows = (Path(tmp) / "full" / "sweep.csv").read_text().count("\n") - 1
    ok = elapsed < 600 and same and full.exit_code == 0 and a.exit_code == b.exit_code == 0 and rows == 1681
    return ok, f"41x41 sweep in {elapsed:.1f} s ({rows} rows, exit {full.exit_code}); jobs=1 vs jobs=2 byte-identical: {same}"


CRITERIA = [
    (1, "closed squeeze evolution vs analytic oracle", criterion_1),
    (2, "blue-minus-red vacuum fluctuation signal", criterion_2),
    (3, "blockade dynamics at gt/pi = 0.5", criterion_3),
    (4, "steady-state blockade at the splitting resonance", criterion_4),
    (5, "vacuum Rabi splitting localization", criterion_5),
    (6, "regression theorem at zero delay", criterion_6),
    (7, "long-delay antibunching", criterion_7),
    (8, "Wigner function values and negativity", criterion_8),
    (9, "structural invariants", criterion_9),
    (10, "phonon-decay dependence", criterion_10),
    (11, "41x41 sweep performance and determinism", criterion_11),
]


def _check(number):
    _, title, fn = CRITERIA[number - 1]
    ok, detail = fn()
    assert report(number, title, ok, detail), detail


def test_criterion_01_oracle_equivalence():
    _check(1)


def test_criterion_02_vacuum_fluctuation():
    _check(2)


def test_criterion_03_blockade_dynamics():
    _check(3)


def test_criterion_04_steady_resonance():
    _check(4)


def test_criterion_05_splitting_localization():
    _check(5)


def test_criterion_06_regression_consistency():
    _check(6)


def test_criterion_07_long_delay():
    _check(7)


def test_criterion_08_wigner():
    _check(8)


def test_criterion_09_structural_invariants():
    _check(9)


def test_criterion_10_phonon_decay():
    _check(10)


def test_criterion_11_sweep_performance():
    _check(11)


if __name__ == "__main__":
    failures = 0
    for number, title, fn in CRITERIA:
        ok, detail = fn()
        failures += not report(number, title, ok, detail)
    sys.exit(1 if failures else 0)
