"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (also shown in the pytest terminal
summary).  Run standalone with ``python tests/test_acceptance.py``.
"""
import itertools
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from oracles import column_realized, fermi_realized, oh_kron, row_realized  # noqa: E402

from opspace_lab.cli import main  # noqa: E402
from opspace_lab.maps import (block_norm, from_blocks, identity_map, modulus_ss,  # noqa: E402
                              polynomial_map, product_map_cc_check, scalar_multiple,
                              schur_block_product, to_blocks)
from opspace_lab.rigidity import (collapse_experiment, lower_bound_experiment,  # noqa: E402
                                  restricted_invertibility, witness_pair)
from opspace_lab.spaces import Kind, SpaceSpec, dual_space, kappa, kappa_matrix  # noqa: E402


def record(num, ok, detail):
    line = f"[criterion {num}] {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_kappa_row_column():
    start = time.perf_counter()
    worst = 0.0
    for n in range(1, 17):
        r = kappa(SpaceSpec(Kind.ROW, n), n)
        c = kappa(SpaceSpec(Kind.COLUMN, n), n)
        worst = max(worst, abs(r.lower - 1), abs(r.upper - 1),
                    abs(c.lower - math.sqrt(n)), abs(c.upper - math.sqrt(n)))
    elapsed = time.perf_counter() - start
    # independent realization as operators
    for n in (1, 5, 16):
        coeffs = kappa_matrix(SpaceSpec(Kind.ROW, n), n).coeffs
        worst = max(worst, abs(row_realized(coeffs) - 1), abs(column_realized(coeffs) - math.sqrt(n)))
    record(1, worst <= 1e-9 and elapsed < 1,
           f"kappa(R)=1, kappa(C)=sqrt(n), n<=16: max error {worst:.2e}, {elapsed:.3f}s")


def test_criterion_02_oh_quarter_power():
    start = time.perf_counter()
    worst = 0.0
    for n in range(1, 13):
        cert = kappa(SpaceSpec(Kind.OH, n), n)
        target = n ** 0.25
        worst = max(worst, abs(cert.lower - target), abs(cert.upper - target))
        worst = max(worst, abs(oh_kron(kappa_matrix(SpaceSpec(Kind.OH, n), n).coeffs) - target))
    elapsed = time.perf_counter() - start
    record(2, worst <= 1e-6 and elapsed < 30,
           f"kappa(OH)=n^(1/4), n<=12: max error {worst:.2e}, {elapsed:.3f}s")


def test_criterion_03_interpolated_kappa():
    worst = 0.0
    for theta in [i / 10 for i in range(1, 10)]:
        for n in range(2, 13):
            cert = kappa(SpaceSpec(Kind.RC_INTERP, n, theta), n)
            target = n ** (theta / 2)
            worst = max(worst, abs(cert.lower - target), abs(cert.upper - target))
    record(3, worst <= 1e-6,
           f"kappa((R,C)_theta)=n^(theta/2), theta in 0.1..0.9, n in 2..12: max gap {worst:.2e}")


def test_criterion_04_pairing_bound():
    pairs = [SpaceSpec(k, 1) for k in Kind if k not in (Kind.FERMIONIC, Kind.RC_INTERP)]
    pairs += [SpaceSpec(Kind.RC_INTERP, 1, th) for th in (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)]
    worst = math.inf
    for base in pairs:
        for n in range(1, 17):
            sp = SpaceSpec(base.kind, n, base.theta)
            a, b = kappa(sp, n), kappa(dual_space(sp), n)
            worst = min(worst, a.lower * b.lower - math.sqrt(n))
    record(4, worst >= -1e-6,
           f"kappa(X)kappa(X*)>=sqrt(n), {len(pairs)} spaces, n<=16: min slack {worst:.2e}")


def test_criterion_05_schur_product_suite():
    rng = np.random.default_rng(505)
    violations, worst, trials = 0, 0.0, 0
    # block Schur products, checked against an independent einsum product
    for _ in range(250):
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        x, z = (to_blocks(m / np.linalg.norm(m, 2), d) for m in
                (rng.standard_normal((n * d, n * d)) + 1j * rng.standard_normal((n * d, n * d))
                 for _ in range(2)))
        prod = schur_block_product(x, z)
        assert np.allclose(prod, np.einsum("ijab,ijbc->ijac", x, z))
        ratio = np.linalg.norm(from_blocks(prod), 2) / (block_norm(x) * block_norm(z))
        worst = max(worst, ratio)
        violations += ratio > 1 + 1e-9
        trials += 1
    # m-linear product maps, m = 2 and 3
    plan = [(2, 1, 42), (2, 2, 42), (2, 3, 42), (3, 1, 42), (3, 2, 42), (3, 3, 40)]
    for m, d, samples in plan:
        rep = product_map_cc_check(m, d, samples, seed=10 * m + d, n_max=6)
        worst = max(worst, rep["max_ratio"])
        violations += rep["violations"]
        trials += rep["samples"]
    record(5, violations == 0 and trials == 500,
           f"{trials} Schur/product trials: {violations} violations, max ratio {worst:.12f}")


def test_criterion_06_square_small_scale_lipschitz():
    start = time.perf_counter()
    worst = 0.0
    for d in range(1, 5):
        curve = modulus_ss(polynomial_map([0, 0, 1], d), n_max=8, samples=2000, seed=d)
        worst = max(worst, float(np.max(curve.values / curve.t_grid)))
    elapsed = time.perf_counter() - start
    record(6, worst <= 2 + 1e-6 and elapsed < 300,
           f"x^2 sampled slope, d<=4, n<=8, 2000 samples: max {worst:.9f} <= 2, {elapsed:.1f}s")


def test_criterion_07_collapse_mechanism():
    sq = collapse_experiment(polynomial_map([0, 0, 1]), 0, 0.5, 8)
    err = max(abs(lv.ratio - 0.5 * 2 ** (lv.k / 2)) for lv in sq.levels)
    lin = collapse_experiment(scalar_multiple(3), 0, 0.5, 8)
    err_lin = max(abs(lv.ratio - 3) for lv in lin.levels)
    ok = err <= 1e-9 and sq.verdict == "diverges" and err_lin <= 1e-9 and lin.verdict == "collapses"
    record(7, ok, f"x^2: ratio error {err:.1e}, verdict {sq.verdict}; "
                  f"3x: ratio error {err_lin:.1e}, verdict {lin.verdict}")


def _brute_force(t, size):
    return max(np.linalg.svd(t[:, list(s)], compute_uv=False)[-1]
               for s in itertools.combinations(range(t.shape[1]), size))


def _normalized(rng, rows, cols):
    t = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return t / np.linalg.norm(t, axis=0)


def test_criterion_08_restricted_invertibility():
    rng = np.random.default_rng(808)
    size_ok, cert_err, worst_quality = True, 0.0, math.inf
    start = time.perf_counter()
    instances = [_normalized(rng, 8, 8) for _ in range(50)]
    instances += [_normalized(rng, n, n) for n in range(1, 9) for _ in range(10)]
    for t in instances:
        sel = restricted_invertibility(t, 0.5)
        size_ok &= len(sel.sigma) >= sel.target_size
        indep = np.linalg.svd(t[:, list(sel.sigma)], compute_uv=False)[-1]
        cert_err = max(cert_err, abs(indep - sel.sigma_min_bound))
        worst_quality = min(worst_quality, indep / _brute_force(t, len(sel.sigma)))
    elapsed = time.perf_counter() - start
    ok = size_ok and cert_err <= 1e-9 and worst_quality >= 0.5 and elapsed < 120
    record(8, ok, f"{len(instances)} instances: size targets met={size_ok}, certificate error "
                  f"{cert_err:.1e}, worst quality vs exhaustive {worst_quality:.3f}, {elapsed:.1f}s")


def test_criterion_09_fermionic_band():
    band = (0.4, 1.0)
    ratios, inside = [], True
    for n in range(1, 8):
        cert = kappa(SpaceSpec(Kind.FERMIONIC, n), n)
        inside &= 1 - 1e-9 <= cert.lower and cert.upper <= math.sqrt(n) + 1e-9
        oracle = fermi_realized(kappa_matrix(SpaceSpec(Kind.FERMIONIC, n), n).coeffs)
        inside &= cert.contains(oracle, 1e-9)
        ratios.append(cert.upper / math.sqrt(n))
    nonincreasing = all(b <= a + 1e-9 for a, b in zip(ratios, ratios[1:]))
    in_band = all(band[0] <= r <= band[1] + 1e-9 for r in ratios)
    record(9, inside and nonincreasing and in_band,
           f"kappa(Phi) in [1, sqrt n] for n<=7; ratio kappa/sqrt(n) in "
           f"[{min(ratios):.6f}, {max(ratios):.6f}] within band {band}, nonincreasing={nonincreasing}")


def test_criterion_10_witness_directionality():
    worst = 0.0
    ns = range(1, 13)
    for theta, gamma in ((0.0, 1.0), (0.2, 0.7), (0.1, 0.5), (0.5, 0.9)):
        X = SpaceSpec(Kind.RC_INTERP, 24, theta)
        Y = SpaceSpec(Kind.RC_INTERP, 24, gamma)
        reps = lower_bound_experiment(identity_map(X, Y), list(ns), M=1, L=1)
        base = reps[0].image_gap.upper
        for rep in reps:
            growth = rep.image_gap.upper / base
            worst = max(worst, abs(growth / rep.n ** ((gamma - theta) / 2) - 1))
    # the R -> C endpoint, realized as operators
    for n in (3, 12):
        c, d = witness_pair(SpaceSpec(Kind.ROW, 24), n)
        gap = column_realized(c.coeffs - d.coeffs)
        worst = max(worst, abs(gap / (math.sqrt(2) * math.sqrt(n)) - 1))
    record(10, worst <= 0.05,
           f"image gap growth vs n^((gamma-theta)/2), n<=12: max relative deviation {worst:.2e}")


def test_criterion_11_documented_discrepancy(capsys):
    code = main(["kappa-table", "--space", "r-cap-c,r-plus-c", "--n", "1..6", "--format", "json"])
    rows = json.loads(capsys.readouterr().out)["rows"]
    ok = code == 0 and len(rows) == 12
    for r in rows:
        n = r["n"]
        expect = math.sqrt(n) if r["space"] == "r-cap-c" else 1.0
        ok &= abs(r["upper"] - expect) <= 1e-6 and abs(r["lower"] - expect) <= 1e-6
        ok &= r["discrepancy_flag"] == 1
        ok &= "n^(theta/2)" in r["note"] and "definitional computation" in r["note"]
    record(11, ok, "R cap C -> sqrt(n), R + C -> 1, each row flagged and citing both values")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
