"""Self-contained property suites wired into the command line.

Each suite returns (name, passed, detail) rows so the CLI can print a
pass/fail table and tests can assert on the same checks.  The tensor
suite carries its own brute-force quadrature oracle, deliberately built
on a different evaluation and integration path (recurrence evaluation
plus Gauss sampling) than the production tensors (monomial-basis
antidifferentiation).
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as npleg

from . import scenarios, solver
from .basis import build_tensors
from .models import classify_hyperbolicity, compute_bar_gamma, state_size

__all__ = ["SUITES", "run_suite", "oracle_tensors"]


def _phi_vals(j, z):
    c = np.zeros(j + 1)
    c[j] = 1.0
    return npleg.legval(1.0 - 2.0 * z, c)


def _dphi_vals(j, z):
    c = np.zeros(j + 1)
    c[j] = 1.0
    return -2.0 * npleg.legval(1.0 - 2.0 * z, npleg.legder(c))


def _psi_vals(j, z):
    # int_0^zeta phi_j = [P_{j-1} - P_{j+1}](1-2 zeta) / (2(2j+1)) for j >= 1
    if j == 0:
        return np.asarray(z, dtype=float).copy()
    x = 1.0 - 2.0 * np.asarray(z)
    cm = np.zeros(j)
    cm[j - 1] = 1.0
    cp = np.zeros(j + 2)
    cp[j + 1] = 1.0
    return (npleg.legval(x, cm) - npleg.legval(x, cp)) / (2.0 * (2 * j + 1))


def oracle_tensors(order: int, nodes: int = 64):
    """Brute-force Gauss quadrature of the defining tensor integrals."""
    x, w = npleg.leggauss(nodes)
    z = 0.5 * (x + 1.0)
    w = 0.5 * w
    phi = [_phi_vals(j, z) for j in range(order + 1)]
    dphi = [_dphi_vals(j, z) for j in range(order + 1)]
    psi = [_psi_vals(j, z) for j in range(order + 1)]
    a = np.zeros((order, order, order))
    b = np.zeros((order, order, order))
    c = np.zeros((order, order))
    for i in range(1, order + 1):
        for j in range(1, order + 1):
            c[i - 1, j - 1] = np.dot(w, dphi[i] * dphi[j])
            for k in range(1, order + 1):
                a[i - 1, j - 1, k - 1] = (2 * i + 1) * np.dot(w, phi[i] * phi[j] * phi[k])
                b[i - 1, j - 1, k - 1] = (2 * i + 1) * np.dot(w, dphi[i] * psi[j] * phi[k])
    return a, b, c


def verify_tensors():
    rows = []
    worst = 0.0
    for order in range(5):
        ten = build_tensors(order)
        a, b, c = oracle_tensors(order)
        diff = 0.0
        if order:
            diff = max(
                np.abs(ten.a - a).max(), np.abs(ten.b - b).max(), np.abs(ten.c - c).max()
            )
        worst = max(worst, diff)
        rows.append((f"tensors N={order} vs oracle", diff <= 1e-12, f"max diff {diff:.2e}"))
    ten1 = build_tensors(1)
    rows.append(("c[1,1] == 4 exactly", ten1.c[0, 0] == 4.0, f"value {ten1.c[0, 0]!r}"))
    ten4 = build_tensors(4)
    sym_a = np.abs(ten4.a - np.swapaxes(ten4.a, 1, 2)).max()
    sym_c = np.abs(ten4.c - ten4.c.T).max()
    rows.append(("a symmetric in (j,k)", sym_a == 0.0, f"max asym {sym_a:.2e}"))
    rows.append(("c symmetric", sym_c == 0.0, f"max asym {sym_c:.2e}"))
    return rows


def _random_state(rng, order, a1, b1):
    h = rng.uniform(0.5, 2.0)
    u, v = rng.uniform(-1.0, 1.0, 2)
    st = np.zeros(state_size(order, 2))
    st[0] = h
    st[1] = h * u
    st[2] = h * v
    st[3] = h * a1
    st[4] = h * b1
    if order > 1:
        st[5::2] = h * rng.uniform(-0.5, 0.5, order - 1)
        st[6::2] = h * rng.uniform(-0.5, 0.5, order - 1)
    return st


def verify_hyperbolicity(samples: int = 1000, seed: int = 20240):
    rng = np.random.default_rng(seed)
    rows = []
    for order in (1, 2):
        spec = scenarios.model_spec("standard", order)
        bad = 0
        for _ in range(samples // 2):
            a1 = rng.uniform(0.01, 1.0) * rng.choice((-1.0, 1.0))
            b1 = rng.uniform(-1.0, 1.0)
            st = _random_state(rng, order, a1, b1)
            if classify_hyperbolicity(st, spec) != "hyperbolic":
                bad += 1
        rows.append(
            (f"N={order}: |alpha1|>=0.01 hyperbolic", bad == 0, f"{bad} misclassified")
        )
        bad = 0
        for _ in range(samples // 2):
            b1 = rng.uniform(0.01, 1.0) * rng.choice((-1.0, 1.0))
            st = _random_state(rng, order, 0.0, b1)
            if classify_hyperbolicity(st, spec) != "weakly_hyperbolic":
                bad += 1
        rows.append(
            (f"N={order}: alpha1=0 weakly hyperbolic", bad == 0, f"{bad} misclassified")
        )
        bad = 0
        for _ in range(50):
            st = _random_state(rng, order, 0.0, 0.0)
            if classify_hyperbolicity(st, spec) != "hyperbolic":
                bad += 1
        rows.append(
            (f"N={order}: alpha1=beta1=0 hyperbolic", bad == 0, f"{bad} misclassified")
        )
    return rows


def _mass(field):
    cell = field.dx * (field.dy if field.dims == 2 else 1.0)
    return float(field.interior()[..., 0].sum() * cell)


def verify_conservation(nx: int = 400):
    rows = []
    # periodic dam break: total water volume must not drift
    scen = scenarios.dambreak_1d().with_bc(left="periodic", right="periodic")
    spec = scenarios.model_spec("modified", 1)
    field = scenarios.build_initial_field(scen, spec, nx=nx)
    tensors = spec.tensors()
    m0 = _mass(field)
    t = 0.0
    while t < 1.0:
        dt = solver.cfl_dt(field, spec, 0.7, cap=1.0 - t)
        field, _ = solver.step_explicit(field, spec, tensors, dt)
        t += dt
    drift = abs(_mass(field) - m0)
    rows.append(("periodic mass drift <= 1e-11 per unit time", drift <= 1e-11, f"drift {drift:.2e}"))

    # lake at rest: flat surface and zero velocity is a discrete steady state
    still = scenarios.ScenarioConfig(
        name="rest",
        dims=1,
        height=lambda x: 1.0,
        bc={"left": "outflow", "right": "outflow"},
        nx_default=nx,
    )
    for family, stepper in (("standard", solver.step_semi_implicit), ("modified", solver.step_explicit)):
        spec = scenarios.model_spec(family, 1)
        field = scenarios.build_initial_field(still, spec, nx=nx)
        field.interior()[:, 1:] = 0.0  # at rest regardless of profile
        ref = field.interior().copy()
        tensors = spec.tensors()
        for _ in range(1000):
            field, _ = stepper(field, spec, tensors, dt=0.01)
        dev = np.abs(field.interior() - ref).max()
        rows.append(
            (f"lake at rest ({family}, 1000 steps)", dev <= 1e-13, f"max dev {dev:.2e}")
        )
    return rows


def _uniform_field(spec, u0: float, nx: int = 4):
    scen = scenarios.ScenarioConfig(
        name="uniform",
        dims=1,
        height=lambda x: 1.0,
        bc={"left": "periodic", "right": "periodic"},
        nx_default=nx,
    )
    field = scenarios.build_initial_field(scen, spec, nx=nx)
    field.interior()[:, 1] = u0
    return field


def verify_relaxation():
    rows = []
    # stiff standard family: semi-implicit update contracts |hu| for any dt
    spec = scenarios.model_spec("standard", 0)
    tensors = spec.tensors()
    ok = True
    detail = ""
    for dt in (1e-6, 1e-3, 1.0, 1e3):
        field = _uniform_field(spec, u0=0.1)
        prev = 0.1
        for _ in range(20):
            field, _ = solver.step_semi_implicit(field, spec, tensors, dt)
            cur = float(np.abs(field.interior()[:, 1]).max())
            if cur > prev * (1 + 1e-12) or not np.isfinite(cur):
                ok = False
                detail = f"|hu| grew at dt={dt:g}"
                break
            prev = cur
    rows.append(("semi-implicit |hu| non-increasing for any dt", ok, detail or "contractive"))

    # modified family: forward Euler follows the exponential mean-velocity decay
    spec = scenarios.model_spec("modified", 0)
    tensors = spec.tensors()
    bar = compute_bar_gamma(spec, 1.0)
    u0 = 0.1
    t_end = 1.0
    dt = min(1e-3 / bar, t_end)
    field = _uniform_field(spec, u0=u0)
    t = 0.0
    while t < t_end - 1e-12:
        step = min(dt, t_end - t)
        field, _ = solver.step_explicit(field, spec, tensors, step)
        t += step
    got = float(field.interior()[0, 1])
    want = u0 * np.exp(-bar * t_end)
    rel = abs(got - want) / abs(want)
    rows.append(
        ("explicit modified decay matches exp to 1e-4", rel <= 1e-4, f"rel err {rel:.2e}")
    )
    return rows


def verify_convergence(resolutions=(100, 200, 400, 800), t_end: float = 3.0):
    """Dam-break self-convergence of the water height in L1.

    Two complementary views of the same grid sequence: differences
    between successive grids must shrink monotonically, and the errors
    against the finest grid must fit an observed order of at least 0.7.
    (Successive-difference Richardson rates lag the true order on coarse
    grids, so the order is fitted against the finest-grid reference.)
    """
    scen = scenarios.dambreak_1d()
    spec = scenarios.model_spec("modified", 0)
    heights = {}
    for nx in resolutions:
        snaps = solver.run(scen, spec, t_end=t_end, output_times=[t_end], nx=nx)
        heights[nx] = snaps[-1].field.interior()[:, 0].copy()

    succ = []
    for nx, nx2 in zip(resolutions[:-1], resolutions[1:]):
        fine = heights[nx2].reshape(-1, nx2 // nx).mean(axis=1)
        succ.append(float(np.abs(heights[nx] - fine).sum() / nx))
    monotone = all(e2 < e1 for e1, e2 in zip(succ[:-1], succ[1:]))

    finest = resolutions[-1]
    ref_errs = []
    for nx in resolutions[:-1]:
        ref = heights[finest].reshape(-1, finest // nx).mean(axis=1)
        ref_errs.append(float(np.abs(heights[nx] - ref).sum() / nx))
    order = float(np.polyfit(range(len(ref_errs)), -np.log2(ref_errs), 1)[0])

    detail = (
        "successive " + ", ".join(f"{e:.3e}" for e in succ)
        + "; vs finest " + ", ".join(f"{e:.3e}" for e in ref_errs)
        + f"; fitted order {order:.2f}"
    )
    return [
        ("L1(h) successive-grid differences decrease", monotone, detail),
        ("observed order >= 0.7", order >= 0.7, detail),
    ]


SUITES = {
    "tensors": verify_tensors,
    "hyperbolicity": verify_hyperbolicity,
    "conservation": verify_conservation,
    "relaxation": verify_relaxation,
    "convergence": verify_convergence,
}


def run_suite(name: str):
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
