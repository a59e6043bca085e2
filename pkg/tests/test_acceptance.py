"""Acceptance suite: the ten exit criteria, each printing one line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
Every tolerance is pinned here; nothing is deferred to calibration.
"""

import json
import math

import numpy as np

from bhflow.bihermitian import (
    assemble,
    cohomology_check,
    limit_check,
    two_path_residual,
    verify_identities,
)
from bhflow.cli import main
from bhflow.curve import continuation_samples, locate_curve, translation_diagnostics
from bhflow.flow import flow, hamiltonian_field, pullback_holsymp, reference_form
from bhflow.forms import top_density
from bhflow.sampling import random_points
from bhflow.surfaces import ChartPoint, curvature_form, potential

SEED = 20260810


def _criterion(num, name, ok, detail):
    line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _points(section, metric, n, min_sigma=0.1, seed=SEED):
    rng = np.random.default_rng(seed)
    return random_points(section, metric, n, rng, min_sigma=min_sigma)


def test_criterion_01_flow_correctness(e1, e2):
    worst_f, worst_omega, worst_group = 0.0, 0.0, 0.0
    for model, s, h in (e1, e2):
        pts = _points(s, h, 100)
        for t in (0.05, 0.1, 0.2):
            for p in pts:
                st = flow(s, h, p, t)
                worst_f = max(
                    worst_f,
                    abs(potential(s, h, st.point) - potential(s, h, st.start)),
                )
                pb = pullback_holsymp(s, h, st, cutoff=1e-6)
                omega0 = reference_form(s, st.start).real_part()
                worst_omega = max(worst_omega, (pb.real_part() - omega0).norm())
                half = flow(s, h, p, t / 2, with_jacobian=False, with_rho=False)
                again = flow(s, h, half.point, t / 2, with_jacobian=False, with_rho=False)
                full = flow(s, h, p, t, with_jacobian=False, with_rho=False)
                moved = model.transition(again.point, full.point.chart)
                worst_group = max(
                    worst_group,
                    float(np.max(np.abs(moved.as_array() - full.point.as_array()))),
                )
    ok = worst_f <= 1e-8 and worst_omega <= 1e-8 and worst_group <= 1e-8
    _criterion(
        1, "flow-correctness", ok,
        f"f-drift {worst_f:.2e}, omega-preservation {worst_omega:.2e}, group-law {worst_group:.2e}; tol 1e-8",
    )


def test_criterion_02_global_smoothness(e2):
    _, s, h = e2
    c = locate_curve(s, ChartPoint(0, (-1.01 + 0j, 0.3 + 0j)))
    y_on = hamiltonian_field(s, h, c.point)
    poly = np.array([s.grad(c.point)[1], -s.grad(c.point)[0]])
    poly_err = float(np.max(np.abs(y_on - poly)))
    ray_ok = True
    prev = None
    ds = np.array(c.ds)
    normal = ds.conj() / np.linalg.norm(ds)
    for eps in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        z = np.array(c.point.z) + eps * normal
        y = hamiltonian_field(s, h, ChartPoint(0, (complex(z[0]), complex(z[1]))))
        diff = float(np.max(np.abs(y - y_on)))
        ray_ok = ray_ok and diff <= 25.0 * eps and (prev is None or diff < prev)
        prev = diff
    # rho stays bounded on a trajectory passing within 1e-4 of the curve
    z = np.array(c.point.z) + 1e-4 * normal
    p_near = ChartPoint(0, (complex(z[0]), complex(z[1])))
    st = flow(s, h, p_near, 0.1)
    fmax = max(curvature_form(h, st.start).norm(), curvature_form(h, st.point).norm())
    rho_ok = st.rho.norm() <= 10.0 * 0.1 * fmax
    ok = poly_err <= 1e-10 and ray_ok and rho_ok
    _criterion(
        2, "global-smoothness-across-curve", ok,
        f"polynomial-limit error {poly_err:.2e} (tol 1e-10), O(eps) ray decay {ray_ok}, "
        f"near-curve ||rho|| {st.rho.norm():.3f} <= {10.0 * 0.1 * fmax:.3f}",
    )


def test_criterion_03_bihermitian_property(e1, e2):
    detail = []
    ok = True
    for model, s, h in (e1, e2):
        pts = _points(s, h, 40)
        found_t = None
        for t in (0.2, 0.1, 0.05):
            worst = 0.0
            all_pos = True
            for p in pts:
                d = assemble(s, h, p, t)
                if not d.valid:
                    all_pos = False
                    break
                g = d.g.gram
                mi = d.i_minus.real_matrix()
                worst = max(worst, float(np.max(np.abs(mi.T @ g @ mi - g))))
            if all_pos and worst <= 1e-7:
                found_t = (t, worst)
                break
        ok = ok and found_t is not None
        if found_t:
            detail.append(f"{model.kind}: t={found_t[0]}, hermitian defect {found_t[1]:.2e}")
        else:
            detail.append(f"{model.kind}: no positive t found")
    _criterion(3, "bihermitian-metric", ok, "; ".join(detail) + "; tol 1e-7")


def test_criterion_04_identity_suite(e1, e2):
    tols = {
        "twist_minus": 1e-7,
        "twist_plus": 1e-7,
        "quaternion_norm": 1e-9,
        "inverse_section_ratio": 1e-7,
        "smooth_difference": 1e-7,
        "smooth_square": 1e-7,
        "decomposable": 1e-9,
        "orthogonal": 1e-7,
        "equal_volumes": 1e-7,
    }
    worst = {k: 0.0 for k in tols}
    ratios = []
    for model, s, h in (e1, e2):
        pts = _points(s, h, 100)
        for t in (0.05, 0.1):
            for p in pts:
                pv = verify_identities(assemble(s, h, p, t), s, h)
                for k in tols:
                    worst[k] = max(worst[k], pv.residuals[k])
                ratios.append(pv.ratio)
    ratios = np.array(ratios)
    mean = complex(np.mean(ratios))
    constancy = float(np.std(ratios)) / abs(mean)
    ok = all(worst[k] <= tols[k] for k in tols) and constancy <= 1e-6
    _criterion(
        4, "identity-suite", ok,
        f"worst twists {max(worst['twist_minus'], worst['twist_plus']):.2e} (1e-7), "
        f"quaternion {worst['quaternion_norm']:.2e} (1e-9), "
        f"decomposable {worst['decomposable']:.2e} (1e-9), "
        f"ratio constancy {constancy:.2e} (1e-6), measured constant {mean.real:.10f}",
    )


def test_criterion_05_two_path_agreement(e1, e2):
    worst = 0.0
    for model, s, h in (e1, e2):
        pts = _points(s, h, 30, min_sigma=1e-2)
        for p in pts:
            worst = max(worst, two_path_residual(s, h, p, 0.1)["p11_residual"])
    ok = worst <= 1e-6
    _criterion(5, "two-path-agreement", ok, f"worst p11 residual {worst:.2e}; tol 1e-6")


def test_criterion_06_commutative_limit(e1, e2):
    lo, hi = 1.6, 2.4
    ok = True
    worst_lo, worst_hi = math.inf, 0.0
    for model, s, h in (e1, e2):
        pts = _points(s, h, 10, min_sigma=0.2)
        for p in pts:
            res = limit_check(s, h, p, [0.2, 0.1, 0.05, 0.025])
            for r in res.rho_ratios + res.g_ratios:
                worst_lo, worst_hi = min(worst_lo, r), max(worst_hi, r)
                ok = ok and lo <= r <= hi
    _criterion(
        6, "commutative-limit", ok,
        f"halving ratios in [{worst_lo:.2f}, {worst_hi:.2f}], window [1.6, 2.4]",
    )


def test_criterion_07_cohomology_class(e1, e2):
    t = 0.1
    _, s1, h1 = e1
    r1 = cohomology_check(s1, h1, t, quadrature_n=8)
    err1 = abs(r1.rho_integral - 4 * math.pi * t) / (4 * math.pi * t)
    _, s2, h2 = e2
    r2 = cohomology_check(s2, h2, t, quadrature_n=8)
    err2 = abs(r2.rho_integral - 6 * math.pi * t) / (6 * math.pi * t)
    ok = err1 <= 1e-3 and err2 <= 1e-3
    _criterion(
        7, "cohomology-class", ok,
        f"sphere {r1.rho_integral:.6f} vs {4 * math.pi * t:.6f} ({err1:.2e}), "
        f"line {r2.rho_integral:.6f} vs {6 * math.pi * t:.6f} ({err2:.2e}); tol 1e-3",
    )


def test_criterion_08_curve_translation(e2):
    _, s, h = e2
    c0 = locate_curve(s, ChartPoint(0, (-1.01 + 0j, 0.0 + 0j)))
    samples = continuation_samples(s, c0, 20, 0.05)
    rep = translation_diagnostics(s, h, samples, 0.1)
    tang = max(rep.tangency)
    eta_dev = max(abs(e + 1.0) for e in rep.eta_y)
    ok = (
        tang <= 1e-10
        and eta_dev <= 1e-8
        and rep.spread <= 1e-6
        and rep.max_deviation <= 1e-6
        and rep.max_curve_drift <= 1e-8
    )
    _criterion(
        8, "curve-translation", ok,
        f"tangency {tang:.2e} (1e-10), eta(Y)+1 {eta_dev:.2e} (1e-8), "
        f"spread {rep.spread:.2e} (1e-6), curve drift {rep.max_curve_drift:.2e} (1e-8)",
    )


def test_criterion_09_degeneracy_guards(e1, e2):
    p_min = 1.0
    rho_sq_min = math.inf
    for model, s, h in (e1, e2):
        pts = _points(s, h, 40)
        for p in pts:
            d = assemble(s, h, p, 0.1)
            p_min = min(p_min, d.p)
            rho_sq_min = min(rho_sq_min, top_density(d.rho, d.rho))
    # monotone approach to the curve on the plane model
    _, s, h = e2
    c = locate_curve(s, ChartPoint(0, (-1.01 + 0j, 0.3 + 0j)))
    ds = np.array(c.ds)
    normal = ds.conj() / np.linalg.norm(ds)
    monotone = True
    prev = None
    for eps in (0.3, 0.1, 0.03, 0.01, 0.003):
        z = np.array(c.point.z) + eps * normal
        d = assemble(s, h, ChartPoint(0, (complex(z[0]), complex(z[1]))), 0.1)
        if prev is not None and d.p <= prev:
            monotone = False
        prev = d.p
    ok = p_min > -1.0 + 1e-6 and rho_sq_min > 0.0 and monotone and prev > 0.9999
    _criterion(
        9, "degeneracy-guards", ok,
        f"min p {p_min:.6f} (> -1), min rho^2 density {rho_sq_min:.2e} (> 0), "
        f"p monotone to 1 on ray: {monotone}",
    )


def test_criterion_10_cli_contract(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps({"surface": "CP1xCP1", "t": 0.1, "samples": 4, "seed": 5}))
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    code_ok = main(["verify", "--config", str(cfg_path), "--out", a])
    main(["verify", "--config", str(cfg_path), "--out", b])
    da, db = (json.loads(open(x).read()) for x in (a, b))
    ts_a, ts_b = da.pop("timestamp"), db.pop("timestamp")
    deterministic = json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)
    schema_ok = da["schema"] == "bhflow-report/1"
    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text(json.dumps({"surface": "CP2", "section": [[1.0, 0.0]] * 8}))
    code_bad = main(["verify", "--config", str(bad_cfg)])
    fail_cfg = tmp_path / "fail.json"
    fail_cfg.write_text(
        json.dumps(
            {"surface": "CP1xCP1", "samples": 3, "seed": 5, "tolerances": {"twist_minus": 1e-20}}
        )
    )
    code_fail = main(["verify", "--config", str(fail_cfg), "--out", str(tmp_path / "c.json")])
    grid = str(tmp_path / "grid.csv")
    code_grid = main(["export", "--config", str(cfg_path), "--grid", "2", "--out", grid])
    grid_schema_ok = open(grid).readline().strip() == "# schema: bhflow-grid/1"
    ok = (
        code_ok == 0
        and deterministic
        and schema_ok
        and code_bad == 2
        and code_fail == 1
        and code_grid == 0
        and grid_schema_ok
    )
    _criterion(
        10, "cli-contract", ok,
        f"exit codes (0,1,2) = ({code_ok},{code_fail},{code_bad}), "
        f"deterministic {deterministic}, schemas {schema_ok and grid_schema_ok}",
    )
