"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (visible even without
``-s``) before asserting, so ``pytest tests/test_acceptance.py`` doubles as
a readable checklist.
"""
import time

import numpy as np
import pytest

from randcircuit import circuit as circ
from randcircuit import qcore, stats
from randcircuit.haar import child_rng, sample_haar_state
from randcircuit.noise import Depolarizing, NoNoise, motion_reversal_curve


@pytest.fixture
def verdict(capsys):
    start = time.perf_counter()

    def report(label, ok, detail):
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail} ({elapsed:.1f}s)")
        assert ok, f"{label}: {detail}"

    return report


def test_c1_exact_cue_mean(verdict):
    r = stats.run_q_ensemble(stats.HaarSource(4), 2000, seed=42)
    bound = 3 * r.q_std / np.sqrt(2000)
    gap = abs(r.q_mean - 14 / 17)
    verdict("C1 exact CUE mean", gap <= bound,
            f"|{r.q_mean:.5f} - 14/17| = {gap:.2e} <= {bound:.2e}")


def test_c2_circuit_convergence(verdict):
    rows = stats.q_gap_scan(6, [1, 2, 5, 10, 20, 40], 1000, seed=42)
    gaps = [row.abs_gap_to_cue for row in rows]
    inversions = sum(b > a for a, b in zip(gaps, gaps[1:]))
    last = rows[-1]
    ok = last.abs_gap_to_cue <= 3 * last.sem and inversions <= 1
    verdict("C2 circuit convergence to CUE", ok,
            f"gaps={[round(g, 5) for g in gaps]}, gap(40)={last.abs_gap_to_cue:.2e} "
            f"vs 3*SE={3 * last.sem:.2e}, inversions={inversions}")


def test_c3_exponential_shape(verdict):
    m = list(range(1, 11))
    rows = stats.q_gap_scan(4, m, 2000, seed=42)
    fit = stats.fit_convergence_rate(m, [row.abs_gap_to_cue for row in rows])
    verdict("C3 exponential convergence shape", fit.r_squared >= 0.9,
            f"R^2={fit.r_squared:.4f}, rate={-fit.slope:.3f}/layer")


def test_c4_matrix_element_law(verdict):
    uniform = lambda y: np.clip(y, 0.0, 1.0)
    d2 = stats.ks_statistic(stats.matrix_element_samples(stats.HaarSource(1), 25_000, 42), uniform)
    y16 = stats.matrix_element_samples(stats.HaarSource(4), 40, 42)[:10_000]
    d16 = stats.ks_statistic(y16, stats.element_cdf(16))
    y_circ = stats.matrix_element_samples(stats.CircuitSource(4, 50), 40, 42)[:10_000]
    dc = stats.ks_statistic(y_circ, stats.element_cdf(16))
    ok = d2 < 0.01 and d16 < 0.02 and dc < 0.03
    verdict("C4 matrix-element law", ok,
            f"KS haar D=2 {d2:.4f}<0.01, haar D=16 {d16:.4f}<0.02, circuit m=50 {dc:.4f}<0.03")


def test_c5_concentration(verdict):
    scan = stats.concentration_scan([4, 6, 8], 2000, seed=42)
    s4, s6, s8 = scan.q_std
    verdict("C5 concentration of measure", s8 < s6 < s4,
            f"std n_q=4 {s4:.4f} > n_q=6 {s6:.4f} > n_q=8 {s8:.5f}")


def test_c6_motion_reversal_exact(verdict):
    curve = motion_reversal_curve(stats.CircuitSource(8, 20), NoNoise(), n_max=10, seed=42)
    err = float(np.max(np.abs(curve.fidelity - 1)))
    verdict("C6 motion-reversal exactness", err <= 1e-8, f"max |F-1| over n=1..10 = {err:.1e}")


def test_c7_depolarizing_closed_form(verdict):
    curve = motion_reversal_curve(stats.CircuitSource(2, 20), Depolarizing(0.1), n_max=5,
                                  seed=42, mode="density")
    n = np.arange(1, 6)
    expected = 0.9 ** (2 * n) + (1 - 0.9 ** (2 * n)) / 4
    err = float(np.max(np.abs(curve.fidelity - expected)))
    verdict("C7 depolarizing closed form", err <= 1e-10, f"max deviation {err:.1e}")


def test_c8_unitarity_and_inverse(verdict):
    rng = child_rng(42, 0)
    worst_u, worst_f = 0.0, 1.0
    for _ in range(100):
        n_q = int(rng.integers(2, 7))
        m = int(rng.integers(0, 51))
        c = circ.sample_circuit(n_q, m, rng)
        worst_u = max(worst_u, qcore.unitarity_error(circ.circuit_to_matrix(c)))
        psi = sample_haar_state(2 ** n_q, rng)
        back = circ.apply_inverse_circuit(circ.apply_circuit(psi, c), c)
        worst_f = min(worst_f, qcore.fidelity_pure(psi, back))
    ok = worst_u <= 1e-10 and worst_f >= 1 - 1e-9
    verdict("C8 unitarity/inverse invariants", ok,
            f"worst ||U^H U - I|| {worst_u:.1e}, worst round-trip 1-F {1 - worst_f:.1e}")


def test_c9_q_ground_truth(verdict):
    zero = stats.meyer_wallach_q(qcore.basis_state(5))
    ghz = stats.meyer_wallach_q(qcore.ghz_state(5))
    bell0 = stats.meyer_wallach_q(np.kron(np.array([1, 0, 0, 1]) / np.sqrt(2), [1, 0]))
    errs = (abs(zero), abs(ghz - 1), abs(bell0 - 2 / 3))
    verdict("C9 Q ground truth", max(errs) <= 1e-12,
            f"Q(|0..0>)={zero:.3g}, Q(GHZ)-1={ghz - 1:.1e}, Q(Bell x |0>)-2/3={bell0 - 2 / 3:.1e}")
