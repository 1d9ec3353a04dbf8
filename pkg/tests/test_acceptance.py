"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The dense solves share a cache (``conftest.classified``), so criteria 1-3 and
7 reuse the same spectra. Expect a few minutes of runtime in total.
"""

import numpy as np

from chiptrap.adiabatic import gauge_fields, gauge_transform
from chiptrap.eigen import eig_near, eigenvector, reduce, solve
from chiptrap.experiment import to_experimental
from chiptrap.heff import SolverConfig, assemble, channel_weights
from chiptrap.resonance import ln_gamma_slope, solve_point, splitting

from oracles import gauge_oracle

RHO_SQ = (0.2, 0.25, 0.31, 0.4)
GAMMA_REF = (1.0e-3, 4.8e-3, 16.0e-3, 41.8e-3)
SPLIT_REF = (0.15, 0.18, 0.21, 0.25)


def verdict(report, name, ok, details):
    report(f"{name} {'PASS' if ok else 'FAIL'}: {details}")
    assert ok, details


def ground(solved, rho_sq, m=0):
    return solved(rho_sq, m).ground()


def dense_split(solved, rho_sq):
    return splitting(ground(solved, rho_sq, 1), ground(solved, rho_sq, -1))


def test_ac1_table_decay_rates(solved, report):
    devs = [ground(solved, rs).Gamma / ref - 1 for rs, ref in zip(RHO_SQ, GAMMA_REF)]
    ok = all(abs(d) <= 0.10 for d in devs)
    verdict(report, "AC1", ok, "Gamma deviations " + ", ".join(f"{d:+.2%}" for d in devs) + " (tol 10%)")


def test_ac2_table_splittings(solved, report):
    devs = [dense_split(solved, rs) / ref - 1 for rs, ref in zip(RHO_SQ, SPLIT_REF)]
    ok = all(abs(d) <= 0.05 for d in devs)
    verdict(report, "AC2", ok, "splitting deviations " + ", ".join(f"{d:+.2%}" for d in devs) + " (tol 5%)")


def test_ac3_caption_point(solved, report):
    pt = to_experimental(ground(solved, 0.2), 0.2, 0.05, splitting=dense_split(solved, 0.2))
    checks = {
        "lifetime": (pt.lifetime, 0.070, 0.10),
        "G": (pt.G, 25.0, 0.05),
        "nu_T": (pt.nu_T, 14.5e3, 0.05),
        "splitting": (pt.splitting, 2.2e3, 0.10),
    }
    devs = {k: v / ref - 1 for k, (v, ref, _) in checks.items()}
    ok = all(abs(devs[k]) <= tol for k, (_, _, tol) in checks.items())
    details = f"lifetime {pt.lifetime * 1e3:.2f} ms, G {pt.G:.2f} T/m, nu_T {pt.nu_T:.0f} Hz, splitting {pt.splitting:.0f} Hz; "
    details += ", ".join(f"{k} {d:+.2%}" for k, d in devs.items())
    verdict(report, "AC3", ok, details)


def test_ac4_oscillator_limit(solved, report):
    energies = [lvl.E for lvl in solved(0.01).trap_levels()[:3]]
    ok = len(energies) == 3 and all(abs(e / ref - 1) <= 0.02 for e, ref in zip(energies, (1, 3, 5)))
    verdict(report, "AC4", ok, "lowest levels " + ", ".join(f"{e:.5f}" for e in energies) + " vs 1, 3, 5 (tol 2%)")


def test_ac5_golden_rule_slope(report):
    rho_sq = np.linspace(0.1, 0.3, 9)
    widths = [solve_point(SolverConfig.for_radius(rs), method="targeted").ground().Gamma for rs in rho_sq]
    slope = ln_gamma_slope(rho_sq, widths)
    ok = -2.4 <= slope <= -1.6
    verdict(report, "AC5", ok, f"slope of ln Gamma vs 1/rho^2 over [0.1, 0.3] = {slope:.4f} (window [-2.4, -1.6])")


def test_ac6_interior_width_maximum(solved, report):
    levels = solved(0.9).trap_levels()
    widths = [lvl.Gamma for lvl in levels]
    peak = int(np.argmax(widths))
    ok = len(widths) >= 3 and 0 < peak < len(widths) - 1
    shown = ", ".join(f"{w:.4f}" for w in widths[:6])
    verdict(report, "AC6", ok, f"{len(widths)} resonances, widths {shown}, ...; maximum at level {peak}")


def test_ac7_rotation_invariants(solved, report):
    stab = max(ground(solved, rs, m).stability for rs in RHO_SQ for m in (0, 1, -1))
    cls = solved(0.2)
    ray = cls.continua[0]
    angle_dev = abs(ray.fitted_angle / (-2 * cls.config.phi) - 1)
    imag = 0.0
    for rs in (0.2, 0.9):
        cfg = SolverConfig.for_radius(rs, phi=0.0)
        imag = max(imag, float(np.max(np.abs(solve(assemble(cfg)).eigenvalues.imag))))
    ok = stab <= 1e-4 and angle_dev <= 0.05 and imag <= 1e-10
    details = f"max |E(0.2) - E(0.3)| {stab:.1e} (tol 1e-4), psi0 ray angle {ray.fitted_angle:.5f} ({angle_dev:.2%} off -2phi, tol 5%), "
    details += f"phi=0 max |Im E| {imag:.1e} (tol 1e-10)"
    verdict(report, "AC7", ok, details)


def test_ac8_gauge_suite(report):
    rng = np.random.default_rng(8)
    sample = list(zip(rng.uniform(0.1, 1.0, 20), rng.uniform(0.1, 5.0, 20), rng.uniform(-np.pi, np.pi, 20)))
    err = 0.0
    for rho, r, theta in sample:
        a, ar, phi = gauge_oracle(rho, r, theta)
        fields = gauge_fields(rho, r, theta)
        err = max(err, np.max(np.abs(a - fields.A)), np.max(np.abs(ar)), np.max(np.abs(phi - fields.Phi)))
    gauges = [lambda r, t: 0.7 * t, lambda r, t: r**2, lambda r, t: np.sin(t) * np.exp(-r)]
    gerr = 0.0
    for f in gauges:
        for rho, r, theta in sample[:5]:
            a, ar, phi = gauge_oracle(rho, r, theta, phase=f)
            moved = gauge_transform(gauge_fields(rho, r, theta), f)
            gerr = max(gerr, np.max(np.abs(a - moved.A)), np.max(np.abs(ar - moved.A_radial)), np.max(np.abs(phi - moved.Phi)))
    ok = err <= 1e-6 and gerr <= 1e-6
    verdict(report, "AC8", ok, f"closed form vs oracle max error {err:.1e} on 20 points; three gauge functions max error {gerr:.1e} (tol 1e-6)")


def _table_outputs(**kw):
    out = []
    for rs in RHO_SQ:
        g = {m: solve_point(SolverConfig.for_radius(rs, m=m, **kw), method="targeted").ground() for m in (0, 1, -1)}
        out.append((g[0].Gamma, splitting(g[1], g[-1])))
    return np.array(out)


def test_ac9_regularization_and_grid(report):
    base = _table_outputs()
    h_dev = max(np.max(np.abs(_table_outputs(h_reg=h) / base - 1)) for h in (0.005, 0.02))
    dr_dev = float(np.max(np.abs(_table_outputs(delta_r=0.025) / base - 1)))
    ok = h_dev < 0.01 and dr_dev < 0.005
    verdict(report, "AC9", ok, f"h_reg in [0.005, 0.02] moves outputs by {h_dev:.1e} (tol 1%); halving dr by {dr_dev:.1e} (tol 0.5%)")


def test_ac10_oscillator_oracle(report):
    errs = []
    for m in (0, 1, -1):
        cfg = SolverConfig.for_radius(1e-4, m=m, couple=False)
        p = assemble(cfg)
        C = reduce(p)
        for n_r in (0, 1):
            exact = 2 * n_r + abs(m) + 1
            ev = eig_near(p, exact, k=4).eigenvalues
            E = min(ev, key=lambda e: abs(e - exact))
            x, _ = eigenvector(C, E, b=p.b)
            assert channel_weights(x, p)["+"] > 0.99
            errs.append(abs(E - exact))
    ok = max(errs) <= 1e-3
    verdict(report, "AC10", ok, f"six (n_r, m) levels, max |E - (2 n_r + |m| + 1)| = {max(errs):.1e} (tol 1e-3)")
