"""Acceptance criteria 1-13, one test each.

Every test appends a ``[PASS]`` or ``[FAIL]`` line for its criterion to
``conftest.ACCEPTANCE_LINES``; the lines are echoed in the terminal summary.
"""
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import conftest
from huplab.escape import escape_profile
from huplab.gaussmap import MapParams
from huplab.hyperbola_ft import (HyperbolaMeasure, LatticeCross, ft_eval, ft_on_cross,
                                 klein_gordon_residual)
from huplab.measures import omega_density, partial_fraction_sum
from huplab.operators import identity_suite, pf_apply
from huplab.separation import (poisson_consistency, singular_pair, solve_separation,
                               verify_separation_or_annihilation)
from huplab.ulam import spectral_top, ulam_assemble
from oracles import leading_eigenvalue_chebyshev

LN2 = math.log(2.0)
SQRT_PI = math.sqrt(math.pi)

# Leading Ulam eigenvalue at (p, beta) = (1, 0.5), n_bins = 1024, J = 200, as
# measured when the criterion was locked; the collocation oracle gives 0.42054435.
RHO_LOCKED = 0.4205409353549901
RHO_LOCK_TOL = 1e-6


def record(n, ok, detail):
    conftest.ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {n}: {detail}")
    assert ok, detail


def test_c01_partial_fraction_identity():
    worst_abs_excess, worst_rel = -np.inf, 0.0
    for p in (1, 2, 3):
        t = np.linspace(-0.99 * p, 0.99 * p, 101)
        s = partial_fraction_sum(t, p, 100_000)
        exact = 1.0 / (p * p - t * t)
        worst_abs_excess = max(worst_abs_excess, float(np.max(np.abs(s.value - exact) - s.tail_bound)))
        worst_rel = max(worst_rel, float(np.max(np.abs(s.completed / exact - 1))))
    anchor = partial_fraction_sum(0.0, 1, 100_000)
    anchor_ok = abs(anchor.value - 1) <= anchor.tail_bound and abs(anchor.completed - 1) < 1e-12
    record(1, worst_abs_excess <= 0 and worst_rel < 1e-8 and anchor_ok,
           f"partial fractions: |err|-tail max {worst_abs_excess:.2e} <= 0, "
           f"rel {worst_rel:.2e} < 1e-8, anchor sum 1/(4j^2-1) = {anchor.completed!r}")


def test_c02_omega_fixed_point():
    worst = 0.0
    for p in (1, 2):
        xs = np.linspace(-0.99 * p, 0.99 * p, 101)
        r = pf_apply(lambda t, p=p: omega_density(t, p), xs, MapParams(p, float(p)), 100_000)
        worst = max(worst, float(np.max(np.abs(r.corrected.real / omega_density(xs, p) - 1))))
    record(2, worst < 1e-6, f"omega fixed point: sup relative defect {worst:.2e} < 1e-6")


def test_c03_pf_closed_form():
    r = pf_apply(lambda t: np.ones_like(t), 0.0, MapParams(1, 1.0), 100_000, f_sup=1.0)
    err = abs(r.value - math.pi ** 2 / 12)
    record(3, err <= 1e-8 + r.tail_bound,
           f"P[1](0) = {r.value.real:.12f}, |err| {err:.2e} <= 1e-8 + tail {r.tail_bound:.2e}")


def test_c04_two_bin_ulam():
    M = ulam_assemble(2, MapParams(1, 1.0))
    tail = M.tail_mass_bound
    e_err = float(np.max(np.abs(M.dense() - [[LN2, 1 - LN2], [1 - LN2, LN2]])))
    c_err = float(np.max(np.abs(M.column_sums() - 1)))
    ev = np.sort(spectral_top(M, 2).eigenvalues.real)[::-1]
    v_err = float(np.max(np.abs(ev - [1.0, 2 * LN2 - 1])))
    ok = e_err <= 1e-10 + tail and c_err <= tail + 1e-15 and v_err < 1e-8
    record(4, ok, f"2-bin Ulam: entry err {e_err:.1e}, column-sum err {c_err:.1e} "
                  f"(tail {tail:.1e}), eigenvalue err {v_err:.1e}")


def _outer_mass(v, frac=0.05):
    k = max(1, int(round(frac / 2 * v.size)))
    return float(v[:k].sum() + v[-k:].sum())


def test_c05_unimodular_evidence():
    rep = spectral_top(ulam_assemble(1024, MapParams(1, 0.5), J=200), 3)
    rho = rep.spectral_radius
    oracle = float(leading_eigenvalue_chebyshev(1, 0.5).real)
    locked = abs(rho - RHO_LOCKED) < RHO_LOCK_TOL and abs(rho - oracle) < 1e-4
    lead, mass = [], []
    for n in (128, 512, 2048):
        r = spectral_top(ulam_assemble(n, MapParams(1, 1.0)), 2)
        lead.append(abs(r.eigenvalues[0]))
        mass.append(_outer_mass(r.leading_vector))
    ok = (rho < 0.999 and locked and all(abs(x - 1) < 5e-3 for x in lead)
          and mass[0] < mass[1] < mass[2])
    record(5, ok, f"spectral radius {rho:.8f} < 0.999 (oracle {oracle:.8f}); at beta=p leading "
                  f"{max(abs(x - 1) for x in lead):.1e} from 1, outer 5% mass "
                  + " < ".join(f"{m:.3f}" for m in mass))


def test_c06_escape_decay():
    params = MapParams(1, 0.5)
    ex = escape_profile(20, params)
    mc = escape_profile(20, params, "monte-carlo", n_samples=1_000_000, seed=0)
    upper = ex.measure + ex.error_bound
    mono = bool(np.all(np.diff(ex.measure) <= 0)) and bool(np.all(np.diff(mc.measure) <= 0))
    gap = float(np.max(np.abs(ex.measure - mc.measure) - 3 * mc.error_bound - ex.error_bound))
    ok = ex.measure[0] == 1.0 and mono and upper[-1] < 0.05 and gap <= 0
    record(6, ok, f"escape: |E(1)| = {float(ex.measure[0])!r}, nonincreasing={mono}, "
                  f"|E(20)| <= {upper[-1]:.2e} < 0.05, MC vs exact excess over 3 sigma {gap:.1e}")


def test_c07_operator_identities():
    worst_id, worst_fac = 0.0, 0.0
    for p, beta, seed in ((1, 0.5, 0), (2, 1.3, 1)):
        s = identity_suite(MapParams(p, beta), 100, 10_000, seed)
        worst_id, worst_fac = max(worst_id, s.identity), max(worst_fac, s.factorization)
    record(7, worst_id < 1e-12 and worst_fac < 1e-12,
           f"operator identities: TS - C^2 residual {worst_id:.1e}, "
           f"factorization residual {worst_fac:.1e}, both < 1e-12")


def test_c08_separation():
    sol = solve_separation(1, 2.0)
    rep = verify_separation_or_annihilation(sol, 1, 2.0, N=50)
    roots_ok = sol.z1 == 1 + 1j and sol.z2 == -1 + 1j
    spurious = [(p, p * k / 10) for p in range(1, 11) for k in range(1, 11)
                if solve_separation(p, p * k / 10).exists]
    record(8, roots_ok and rep.max_residual < 1e-12 and not spurious,
           f"separation: z1={sol.z1}, z2={sol.z2}, residual {rep.max_residual:.1e} < 1e-12, "
           f"{len(spurious)} solutions on the beta<=p grid")


def test_c09_singular_pair():
    sp = singular_pair(2, 1.0, 1, 1)
    s2 = math.sqrt(2.0)
    pos_ok = sp.u0 == pytest.approx(2 + s2, rel=1e-15) and sp.v0 == pytest.approx(-2 + s2, rel=1e-15)
    res = ft_on_cross(sp.measure(), LatticeCross(2, 1, 1.0, 100))
    record(9, pos_ok and res.max_modulus < 1e-12,
           f"singular pair ({sp.u0:.15f}, {sp.v0:.15f}), max |FT| on cross {res.max_modulus:.1e}")


def test_c10_fourier_quadrature():
    mu = HyperbolaMeasure.density(lambda t: np.exp(-t * t), window=4.0)
    err = max(abs(ft_eval(mu, x, 0.0).value - SQRT_PI * math.exp(-(math.pi * x) ** 2 / 4))
              for x in (0.0, 0.5, 1.0, 2.0))
    sym = max(abs(ft_eval(mu, a, b).value - np.conj(ft_eval(mu, -a, -b).value))
              for a, b in ((0.5, 0.0), (1.3, 0.7), (-0.4, 2.1), (0.0, 1.5)))
    zero = abs(ft_eval(mu, 0.0, 0.0).value - SQRT_PI)
    record(10, err < 1e-8 and sym < 1e-12 and zero < 1e-8,
           f"Gaussian FT: axis err {err:.1e} < 1e-8, conjugate symmetry {sym:.1e} < 1e-12, "
           f"total mass err {zero:.1e}")


def test_c11_klein_gordon():
    xi, eta = [0.3, -1.0, 0.8], [0.4, 2.0, -0.6]
    ratios = {}
    for name, mu in (("atom", HyperbolaMeasure.atoms([1.0], [1.0])),
                     ("gaussian", HyperbolaMeasure.density(lambda t: np.exp(-t * t), window=4.0))):
        r1 = klein_gordon_residual(mu, xi, eta, 0.02).max_abs
        r2 = klein_gordon_residual(mu, xi, eta, 0.01).max_abs
        ratios[name] = r1 / r2
    record(11, all(3.5 <= r <= 4.5 for r in ratios.values()),
           "Klein-Gordon FD ratio " + ", ".join(f"{k} {v:.4f}" for k, v in ratios.items())
           + " in [3.5, 4.5]")


def test_c12_poisson_consistency():
    worst = 0.0
    for p, beta in ((1, 2.0), (2, 0.7)):
        rows = poisson_consistency(p, beta, range(-3, 4), [1j, 1 + 2j])
        assert {r["family"] for r in rows} == {"ep", "ebeta"} and len(rows) == 28
        worst = max(worst, max(r["abs_diff"] for r in rows))
    record(12, worst < 1e-6, f"Poisson extension vs closed form: max diff {worst:.1e} < 1e-6")


def _cli(args, tmp_path, name):
    out = tmp_path / name
    env = dict(os.environ, HUPLAB_THREADS="2")
    res = subprocess.run([sys.executable, "-m", "huplab", *args, "-o", str(out)],
                         capture_output=True, text=True, env=env, check=False)
    assert res.returncode == 0, res.stderr
    return out.read_bytes()


def _drop_stamp(data: bytes) -> bytes:
    return b"\n".join(ln for ln in data.split(b"\n") if b"timestamp" not in ln)


def test_c13_cli_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p": 1, "beta": 0.5, "n_steps": 8, "method": "monte-carlo",
                               "n_samples": 50_000, "seed": 17}))
    commands = {"escape": ["escape", "--config", str(cfg)],
                "cross-residual": ["cross-residual", "--p", "2", "--q", "1", "--beta", "1",
                                   "--N", "20", "--measure", '{"kind": "gaussian"}']}
    same = {}
    for name, args in commands.items():
        a = _cli(args, tmp_path, f"{name}.out")
        b = _cli(args, tmp_path, f"{name}.out")
        same[name] = _drop_stamp(a) == _drop_stamp(b) and a != b"" and b"seed" in a
    record(13, all(same.values()),
           "CLI reruns byte-identical modulo timestamp: "
           + ", ".join(f"{k}={v}" for k, v in same.items()))
