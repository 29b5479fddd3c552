"""Acceptance checks: every release-gating numerical claim in one place.

Each criterion function returns an AcceptanceResult; ``run_all`` executes
them in order. The same functions back ``gadgetforge verify-all`` and
tests/test_acceptance.py.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import gadgets, lattice, sw, xychain
from .gadgets import XYZCoupling
from .pauli import PauliOperator, two_body
from .spectra import eig_dense, low_eigs

TOL_EFFECTIVE = 5e-2  # operator-norm tolerance for criterion 6
COMPOSED_TOL = 0.1  # two-round composed tolerance for criterion 10


@dataclass
class AcceptanceResult:
    name: str
    passed: bool
    details: str
    seconds: float


def _result(name, passed, details, t0):
    return AcceptanceResult(name, bool(passed), details, time.time() - t0)


def criterion_1_xy_exactness():
    """Chain energies and gaps against the closed forms."""
    t0 = time.time()
    errs = []
    for N in (6, 10):
        spec = xychain.ChainSpec(N)
        res = eig_dense(xychain.chain_operator(spec))
        e_err = abs(res.eigenvalues[0] - xychain.ground_energy(spec))
        g_err = abs(
            (res.eigenvalues[1] - res.eigenvalues[0]) - xychain.spectral_gap(spec)
        )
        errs.append((N, e_err, g_err, 1e-9))
    spec = xychain.ChainSpec(14)
    res = low_eigs(xychain.chain_operator(spec), k=2, tol=1e-9, seed=5)
    errs.append(
        (
            14,
            abs(res.eigenvalues[0] - xychain.ground_energy(spec)),
            abs(
                (res.eigenvalues[1] - res.eigenvalues[0]) - xychain.spectral_gap(spec)
            ),
            1e-7,
        )
    )
    passed = all(e < tol and g < tol for _, e, g, tol in errs)
    elapsed = time.time() - t0
    detail = "; ".join(f"N={N}: dE={e:.2e} dGap={g:.2e} (tol {tol:g})" for N, e, g, tol in errs)
    return _result(
        "1 xy-chain exactness", passed and elapsed < 120, f"{detail}; {elapsed:.1f}s",
        t0,
    )


def criterion_2_correlation_determinants():
    """det R_{n,N} against exact diagonalization, n = 1..N/2."""
    t0 = time.time()
    worst = 0.0
    for N in (6, 10):
        spec = xychain.ChainSpec(N)
        res = eig_dense(xychain.chain_operator(spec), want_vectors=True)
        gs = res.eigenvectors[0]
        for n in range(1, N // 2 + 1):
            ed = float(np.real(np.vdot(gs, two_body(N, 0, n, "XX").apply(gs))))
            det = xychain.correlation(n, N)
            worst = max(worst, abs(ed - det))
    elapsed = time.time() - t0
    return _result(
        "2 correlation determinants vs ED",
        worst < 1e-8 and elapsed < 60,
        f"max |ED - det| = {worst:.2e}; {elapsed:.1f}s",
        t0,
    )


def criterion_3_fisher_hartwig():
    """|det R_n| sqrt(n) against the Fisher-Hartwig constant."""
    t0 = time.time()
    devs = {}
    for n in (100, 1000):
        val = abs(xychain.correlation(n, None)) * math.sqrt(n)
        devs[n] = abs(val - xychain.FISHER_HARTWIG_E) / xychain.FISHER_HARTWIG_E
    passed = devs[1000] < 0.05 and devs[1000] < devs[100]
    return _result(
        "3 Fisher-Hartwig asymptote",
        passed and (time.time() - t0) < 60,
        f"rel dev n=100: {devs[100]:.2e}, n=1000: {devs[1000]:.2e}",
        t0,
    )


def criterion_4_lemma52_trend():
    """Finite/infinite determinant ratio approaching one as N ~ n^2."""
    t0 = time.time()
    devs = []
    for n in (8, 16, 32, 64):
        rec = xychain.convergence_check(n, n * n)
        devs.append(abs(rec.ratio - 1.0))
    monotone = all(b <= a + 1e-12 for a, b in zip(devs, devs[1:]))
    return _result(
        "4 finite-size determinant trend",
        devs[-1] < 0.05 and monotone,
        f"|ratio-1| = {['%.4f' % d for d in devs]}",
        t0,
    )


def criterion_5_gadget_scaling():
    """Fitted error exponents for the delta sweeps."""
    t0 = time.time()
    deltas = [1e2, 1e3, 1e4, 1e5]
    sweeps = []
    g = gadgets.basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], 1e5)
    sweeps.append(("basic(1,1,1)", sw.measure_simulation(g, deltas), -0.45))
    g = gadgets.tim_gadget({(0, 1): 1.0}, {0: 0.5, 1: 0.5}, 1e5)
    sweeps.append(("tim", sw.measure_simulation(g, deltas), -0.45))
    g = gadgets.third_order_chain_gadget(XYZCoupling(1, 1, 1), 1e5)
    sweeps.append(("chain3", sw.measure_simulation(g, deltas), -0.30))
    passed = all(rep.eps_exponent <= bound for _, rep, bound in sweeps)
    elapsed = time.time() - t0
    detail = "; ".join(
        f"{name}: eps_exp={rep.eps_exponent:.3f} (<= {bound})" for name, rep, bound in sweeps
    )
    return _result(
        "5 delta-sweep scaling exponents",
        passed and elapsed < 3 * 300,
        f"{detail}; {elapsed:.0f}s",
        t0,
    )


def _gadget_zoo(delta):
    from .pauli import single

    full = (
        two_body(2, 0, 1, "XX")
        + two_body(2, 0, 1, "YY")
        + single(2, 0, "Z")
        + single(2, 1, "Z")
    )
    return [
        gadgets.basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], delta),
        gadgets.antisym_gadget([(0, 1.0)], [(1, 1.0)], delta),
        gadgets.mediator_gadget("fork", XYZCoupling(1, 1, 0), [0, 1, 2], delta),
        gadgets.mediator_gadget("crossing", XYZCoupling(1, 1, 0), [0, 1, 2, 3], delta),
        gadgets.tim_gadget({(0, 1): 1.0}, {0: 0.5, 1: 0.25}, delta),
        gadgets.xxyy_gamma_gadget(2.0, {(0, 1): 1.0}, {(0, 1): 1.0}, delta),
        gadgets.one_local_cancel_gadget(full, delta),
    ]


def criterion_6_closed_form_effectives():
    """Numerical SW effective at delta = 1e5 against each prediction."""
    t0 = time.time()
    rows = []
    for g in _gadget_zoo(1e5):
        eff, _ = sw.sw_numerical_effective(g.assemble(1e5), g.encoding)
        diff = eff.traceless() - g.predicted_target.traceless()
        nrm = float(np.linalg.norm(sw.matrix_from_operator(diff), 2))
        rows.append((g.name, nrm))
    passed = all(nrm <= TOL_EFFECTIVE for _, nrm in rows)
    detail = "; ".join(f"{name}: {nrm:.2e}" for name, nrm in rows)
    return _result("6 closed-form effective operators", passed, detail, t0)


def criterion_7_triangular_family():
    """Two-round extraction of the path interactions plus the exact
    closed-form recovery of the XY interaction from them."""
    t0 = time.time()
    c = XYZCoupling(2, 1, 0)
    fam = gadgets.triangular_family(c)
    fit2, _, _ = gadgets.extract_h2_numeric(c)
    fit1, _, _ = gadgets.extract_h1_numeric(c)
    rel = []
    for fit, ref in ((fit1, fam.h1), (fit2, fam.h2)):
        for got, want in zip(fit.as_tuple(), ref.as_tuple()):
            if want != 0:
                rel.append(abs(got - want) / abs(want))
    lam, mu = 511.0 / 48.0, 2047.0 / 96.0
    rec = (
        -lam * fam.h1.alpha + mu * fam.h2.alpha,
        -lam * fam.h1.beta + mu * fam.h2.beta,
        -lam * fam.h1.gamma + mu * fam.h2.gamma,
    )
    exact = max(abs(rec[0] - 1), abs(rec[1] - 1), abs(rec[2]))
    passed = max(rel) < 0.05 and exact < 1e-12
    return _result(
        "7 triangular path interactions",
        passed,
        f"max rel extraction err {max(rel):.3%}; recovery residual {exact:.1e}",
        t0,
    )


def criterion_8_mu_ordering():
    """Interpolation-zero ordering over random admissible couplings."""
    t0 = time.time()
    rng = np.random.default_rng(20240811)
    bad = 0
    checked = 0
    while checked < 1000:
        a, b, g = rng.uniform(-1.0, 2.0, size=3)
        c = XYZCoupling(a, b, g)
        if not c.pairwise_sums_positive():
            continue
        if abs(a - b) < 1e-6 and abs(b - g) < 1e-6:
            continue
        try:
            fam = gadgets.triangular_family(c)
        except ValueError:
            continue
        checked += 1
        if g > a and g >= b and not (fam.mu_gamma > fam.mu_alpha):
            bad += 1
    eqbad = 0
    eqchecked = 0
    while eqchecked < 100:
        a, b = rng.uniform(-1.0, 2.0, size=2)
        c = XYZCoupling(a, b, a)  # gamma = alpha exactly
        if not c.pairwise_sums_positive() or abs(a - b) < 1e-6:
            continue
        fam = gadgets.triangular_family(c)
        eqchecked += 1
        if abs(fam.mu_gamma - fam.mu_alpha) > 1e-12:
            eqbad += 1
    return _result(
        "8 interpolation-zero ordering",
        bad == 0 and eqbad == 0,
        f"1000 couplings, {bad} ordering violations; "
        f"100 gamma=alpha couplings, {eqbad} equality violations",
        t0,
    )


def criterion_9_classifier_grid():
    """Stoquasticity witness iff not QMA-complete on the coarse grid."""
    t0 = time.time()
    vals = np.arange(-2.0, 2.0 + 1e-9, 0.25)
    bad = []
    for a in vals:
        for b in vals:
            for g in vals:
                c = XYZCoupling(a, b, g)
                label = gadgets.classify(c)
                wit = gadgets.stoquastic_witness(c)
                qma = label == gadgets.InteractionClass.QMA_COMPLETE
                sums_pos = c.pairwise_sums_positive()
                if qma != sums_pos or qma != (wit is None):
                    bad.append((a, b, g, label, wit))
    return _result(
        "9 classifier/stoquasticity grid",
        not bad,
        f"{len(vals)**3} grid points, {len(bad)} inconsistencies",
        t0,
    )


def criterion_10_compiler_end_to_end():
    """Junction chains and the signed-triangle compilation."""
    t0 = time.time()
    xy = XYZCoupling(1, 1, 0)
    details = []
    ok = True
    for k, d0 in ((1, 1e5), (2, 1e8), (3, 1e9)):
        sched = lattice.default_delta_schedule(d0, k)
        model = lattice.junction_chain(xy, k, sched)
        eff, _ = sw.sw_numerical_effective(model.hamiltonian, model.encoding)
        want = float((-1) ** k) * (two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY"))
        diff = float(
            np.linalg.norm(
                sw.matrix_from_operator(eff.traceless() - want), 2
            )
        )
        ok &= diff <= COMPOSED_TOL and model.all_weights_nonnegative
        details.append(f"chain k={k}: |eff-(-1)^k(XX+YY)|={diff:.3f}")

    g = lattice.InteractionGraph(
        vertices={
            0: lattice.GraphVertex(0, 0.0, 0.0),
            1: lattice.GraphVertex(1, 1.0, 0.0),
            2: lattice.GraphVertex(2, 0.5, 0.9),
        },
        edges=[
            lattice.GraphEdge(0, 1, +1),
            lattice.GraphEdge(1, 2, +1),
            lattice.GraphEdge(0, 2, -1),
        ],
    )
    lay = lattice.embed(g, "triangular", 0.34)
    model = lattice.realize(lay, xy, [1e8, 2e3])
    assert model.n_qubits <= 16
    vals = eig_dense(model.hamiltonian, cap=16).eigenvalues[:8]
    tv = np.linalg.eigvalsh(sw.matrix_from_operator(model.predicted_target))
    err = float(np.abs(vals - model.predicted_shift - tv).max())
    ok &= err <= COMPOSED_TOL and model.all_weights_nonnegative
    details.append(
        f"triangle: {model.n_qubits} qubits, low-spectrum err {err:.3f}, "
        f"positive={model.all_weights_nonnegative}"
    )
    return _result("10 compiler end-to-end", ok, "; ".join(details), t0)


def criterion_11_sign_assignment():
    """Random 6x6 grids: interior cancellation and edge sign constraints."""
    t0 = time.time()
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(1000):
        lam_row = rng.choice([-1.0, 1.0], size=(6, 5)) * rng.uniform(0.5, 2.0, (6, 5))
        lam_col = rng.choice([-1.0, 1.0], size=(5, 6)) * rng.uniform(0.5, 2.0, (5, 6))
        try:
            asg = gadgets.assign_signs(lam_row.tolist(), lam_col.tolist())
        except AssertionError:
            violations += 1
            continue
        for i in range(6):
            for j in range(5):
                u, v = (i, j), (i, j + 1)
                if asg.mu[(u, v)] * asg.mu[(v, u)] != (1 if lam_row[i][j] > 0 else -1):
                    violations += 1
        for i in range(5):
            for j in range(6):
                u, v = (i, j), (i + 1, j)
                if asg.mu[(u, v)] * asg.mu[(v, u)] != (1 if lam_col[i][j] > 0 else -1):
                    violations += 1
    return _result(
        "11 lattice sign assignment",
        violations == 0,
        f"1000 random 6x6 grids, {violations} violations",
        t0,
    )


ALL_CRITERIA = [
    criterion_1_xy_exactness,
    criterion_2_correlation_determinants,
    criterion_3_fisher_hartwig,
    criterion_4_lemma52_trend,
    criterion_5_gadget_scaling,
    criterion_6_closed_form_effectives,
    criterion_7_triangular_family,
    criterion_8_mu_ordering,
    criterion_9_classifier_grid,
    criterion_10_compiler_end_to_end,
    criterion_11_sign_assignment,
]


def run_all(progress=None):
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for fn in ALL_CRITERIA:
            res = fn()
            results.append(res)
            if progress:
                progress(res)
    return results
