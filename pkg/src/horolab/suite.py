"""The ``paper-verification`` suite: twelve criteria with numeric evidence.

Criteria are independent pure computations.  They run on a thread pool
and are collected in index order, so tables do not depend on the worker
count.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import asymptotic as asy
from . import growth, horocycles, hyperbolicity, jacobi
from .errors import ConfigError
from .manifolds import HomogeneousModel
from .models import make_constant_diag_profile, make_sinusoidal_profile, make_tanh_poly_profile
from .registry import cite
from .report import Table, write_csv
from .surfaces import hyperbolic_plane, pinched_surface

SUITES = ("paper-verification",)


@dataclass
class Check:
    name: str
    value: float
    target: str
    passed: bool


@dataclass
class CriterionResult:
    index: int
    title: str
    citation: str
    checks: list = field(default_factory=list)
    error: str | None = None
    wall_clock: float = 0.0

    @property
    def passed(self):
        return self.error is None and bool(self.checks) and all(c.passed for c in self.checks)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        msg = f"[{status}] criterion {self.index:2d}: {self.title} ({self.citation})"
        if self.error:
            msg += f" error: {self.error}"
        elif not self.passed:
            bad = [c.name for c in self.checks if not c.passed]
            msg += f" failing: {', '.join(bad)}"
        return msg


class _Checks(list):
    def close(self, name, value, expected, tol):
        err = abs(float(value) - expected)
        self.append(Check(name, float(value), f"{expected!r} +- {tol!r}", err <= tol))

    def below(self, name, value, bound):
        self.append(Check(name, float(value), f"< {bound!r}", float(value) < bound))

    def within(self, name, value, lo, hi):
        self.append(Check(name, float(value), f"in [{lo!r}, {hi!r}]", lo <= float(value) <= hi))

    def true(self, name, flag, value=None):
        v = float(flag) if value is None else float(value)
        self.append(Check(name, v, "true", bool(flag)))


# -- models ---------------------------------------------------------------------

def _h2():
    return HomogeneousModel(make_constant_diag_profile([-1.0]), "H2")


def _h3():
    return HomogeneousModel(make_constant_diag_profile([-1.0, -1.0]), "H3")


def _h4():
    return HomogeneousModel(make_constant_diag_profile([-1.0, -1.0, -1.0]), "H4")


def _quat():
    return HomogeneousModel(make_constant_diag_profile([-4.0, -1.0, -1.0]), "diag(-4,-1,-1)")


def _flat(n=2):
    return HomogeneousModel(make_constant_diag_profile([0.0] * (n - 1)), f"flat{n}")


def _kappa():
    return make_sinusoidal_profile(-2.0, -1.0)


@lru_cache(maxsize=None)
def _pinched_curve(n_samples=17, span=0.03):
    s = pinched_surface()
    return s, horocycles.build_stable_curve(s, ((0.5, 1.0), math.pi / 2), span, n_samples)


# -- criteria -------------------------------------------------------------------

def crit_space_forms(ctx):
    ck = _Checks()
    d = asy.asymptotic_forms(_h2().profile)
    ck.close("H2 U", d.U[0, 0], 1.0, 1e-6)
    ck.close("H2 S", d.S[0, 0], -1.0, 1e-6)
    ck.close("H2 detD", d.detD, 2.0, 1e-6)
    ck.close("H2 h", d.h, 1.0, 1e-6)
    d4 = asy.asymptotic_forms(_h4().profile)
    ck.close("H4 h", d4.h, 3.0, 1e-6)
    ck.close("H4 detD", d4.detD, 8.0, 1e-6)
    return ck


def crit_symmetric_model(ctx):
    ck = _Checks()
    model = ctx.get("rank_one", _quat())
    d = asy.asymptotic_forms(model.profile)
    ck.close("h", d.h, 4.0, 1e-6)
    ck.close("detD", d.detD, 16.0, 1e-6)
    ck.close("rho_min", d.rho_min, 2.0, 1e-6)
    curve = growth.volume_curve(model, None, np.arange(1.0, 21.0))
    est = growth.estimate_volume_entropy(curve, (10.0, 20.0))
    ck.close("h_vol [10,20]", est.h_vol, 4.0, 0.02)
    ch = growth.cheeger_limit(model, r_max=20.0)
    ck.close("g(20)", ch.g[-1], 4.0, 1e-2)
    return ck


def crit_identities(ctx):
    ck = _Checks()
    prof = _kappa()
    rep = jacobi.verify_central_identities(prof, 12.0, np.arange(1.0, 9.0))
    for k, v in rep.max_residuals.items():
        ck.below(k, v, 1e-6)
    for t, x in ((1.0, 4.0), (3.0, 6.0), (5.0, 3.0)):
        ck.below(f"Stransform t={t:g} x={x:g}", jacobi.check_transform_identity(prof, t, x), 1e-6)
    A = jacobi.a_tensor(prof, 12.0)
    C = jacobi.c_tensor(prof, 12.0)
    ts = np.linspace(0.0, 12.0, 49)
    W = jacobi.wronskian(A, C, ts)
    (Y, Yp), (Z, Zp) = A.at(ts), C.at(ts)
    scale = np.max(np.linalg.norm(Yp, 2, axis=(1, 2)) * np.linalg.norm(Z, 2, axis=(1, 2))
                   + np.linalg.norm(Y, 2, axis=(1, 2)) * np.linalg.norm(Zp, 2, axis=(1, 2)))
    ck.below("Wronskian(A,C) relative drift", np.max(np.abs(W - W[0])) / scale, 1e-8)
    ck.below("Wronskian(A,A) drift", A.lagrangian_drift(), 1e-8)
    return ck


def _bound_profiles():
    return [
        ("H2", make_constant_diag_profile([-1.0])),
        ("flat", make_constant_diag_profile([0.0])),
        ("diag(-4,-1,-1)", make_constant_diag_profile([-4.0, -1.0, -1.0])),
        ("kappa", _kappa()),
        ("tanh", make_tanh_poly_profile([[-2.5], [-1.5]])),
    ]


def crit_bounds(ctx):
    ck = _Checks()
    for name, prof in _bound_profiles():
        r = jacobi.riccati_bounds_check(prof, T=10.0, n=100)
        ck.true(f"envelope {name}", r.holds, r.worst_margin)
        b = jacobi.boundary_norm_bound_check(prof)
        ck.true(f"boundary norm {name}", b.holds, b.worst_margin)
    for name, prof in _bound_profiles():
        if name == "flat":
            continue
        rho = asy.rho_along(prof)
        dec = asy.check_decay_bounds(prof, rho)
        ck.true(f"decay {name} (a2={dec.a2:.4g})", bool(dec.decay_checked and dec.decay_ok),
                dec.decay_constant if dec.decay_constant is not None else math.nan)
        ck.true(f"growth {name}", dec.growth_ok, dec.growth_constant)
        ar = asy.check_ar_bound(prof)
        ck.true(f"a/r envelope {name}", bool(ar.within_envelope), ar.empirical_a)
    flat = asy.check_ar_bound(make_constant_diag_profile([0.0]))
    ck.below("flat difference - 1/r", np.max(np.abs(flat.difference - 1.0 / flat.r)), 1e-10)
    return ck


def crit_hopf(ctx):
    ck = _Checks()
    surf, curve = _pinched_curve()
    rep = horocycles.verify_hopf_formula(surf, curve, r=3.0, rule="rectangle")
    ck.below("relative residual", rep.relative, 1e-3)
    levels = rep.refinement
    for a, b in zip(levels, levels[1:]):
        ck.within(f"residual ratio {a['n_intervals']}->{b['n_intervals']} intervals",
                  b["residual"] / a["residual"], 0.35, 0.65)
    h2 = hyperbolic_plane()
    c2 = horocycles.build_stable_curve(h2, ((0.0, 1.0), math.pi / 2), 0.03, 9)
    ctl = horocycles.verify_hopf_formula(h2, c2, r=3.0, refine=False)
    ck.below("control |lhs|", abs(ctl.lhs), 1e-8)
    ck.below("control |rhs|", abs(ctl.rhs), 1e-8)
    return ck


def crit_lipschitz(ctx):
    ck = _Checks()
    surf, curve = _pinched_curve()
    rep = horocycles.second_fundamental_lipschitz(surf, curve, r=3.0, levels=3)
    ck.true("ratios finite", bool(np.all(np.isfinite(rep.ratios))), float(np.max(rep.ratios)))
    ck.below("variation", rep.variation, 0.2)
    ck.below("max ratio / C5", float(np.max(rep.ratios)) / rep.C5, 1.0)
    return ck


def crit_detD(ctx):
    ck = _Checks()
    for model in (_h2(), _h4(), _quat()):
        rep = asy.check_detD_flow_invariance(model.profile, 5.0)
        ck.below(f"deviation {model.name}", rep.deviation, 1e-8)
    kap = asy.check_detD_flow_invariance(_kappa(), 5.0)
    ck.true("kappa deviation reported (non-AH)", np.isfinite(kap.deviation), kap.deviation)
    ck.below("kappa route disagreement", kap.route_disagreement, 1e-6)
    hd = asy.check_HD_DH_identity(_kappa(), 5.0)
    ck.below("kappa D' - (HD+DH)", hd.residual, 1e-5)
    return ck


def crit_volume(ctx):
    ck = _Checks()
    r = np.arange(1.0, 11.0)
    c2 = growth.volume_curve(_h2(), None, r)
    ck.below("n=2 sphere rel. error", np.max(np.abs(c2.sphere_vol / (2 * np.pi * np.sinh(r)) - 1)), 1e-4)
    c3 = growth.volume_curve(_h3(), None, r)
    ck.below("n=3 sphere rel. error",
             np.max(np.abs(c3.sphere_vol / (4 * np.pi * np.sinh(r) ** 2) - 1)), 1e-4)
    for model in (_h2(), _quat()):
        lb = growth.lower_bound_ratio(model, r_list=(1.0, 2.0, 4.0, 8.0, 16.0))
        ck.below(f"two expressions {model.name}", float(np.max(lb.relative_gap)), 1e-5)
    big = growth.volume_curve(_h2(), None, np.arange(1.0, 21.0))
    pe = growth.check_purely_exponential(big, 1.0)
    ck.within("H2 purely exponential C", pe.C, 3.0, 3.3)
    return ck


def crit_hyperbolicity(ctx):
    ck = _Checks()
    a = hyperbolicity.anosov_exponent(_h2())
    ck.close("H2 alpha", a.alpha, 1.0, 0.01)
    f = hyperbolicity.anosov_exponent(_flat())
    ck.within("flat alpha", f.alpha, 0.0, 0.00999)
    div = hyperbolicity.divergence_bounds(_h2(), None, [1.0, 0.0], [0.0, 1.0])
    ck.true("H2 lower <= upper", div.bracket_ok)
    ck.close("H2 lower rate", div.alpha_low, 1.0, 0.02)
    ck.close("H2 upper rate", div.alpha_up, 1.0, 0.02)
    tri = hyperbolicity.thin_triangle_delta(hyperbolic_plane(), None, probes=ctx["probes"],
                                            n=ctx["triangles"], seed=ctx["seed"])
    ck.below("half-plane delta", tri.delta, 0.93)
    fd = hyperbolicity.divergence_bounds(_flat(), None, [1.0, 0.0], [0.0, 1.0])
    ck.true("flat non-hyperbolic", not fd.exponential and not f.anosov, fd.alpha_up)
    return ck


def _four_properties(model):
    d = asy.asymptotic_forms(model.profile)
    ano = hyperbolicity.anosov_exponent(model)
    v1 = [1.0] + [0.0] * (model.dim_manifold - 1)
    v2 = [0.0, 1.0] + [0.0] * (model.dim_manifold - 2)
    div = hyperbolicity.divergence_bounds(model, None, v1, v2)
    curve = growth.volume_curve(model, None, np.arange(1.0, 21.0))
    est = growth.estimate_volume_entropy(curve, (10.0, 20.0))
    pe_ok = d.h > d.eps_rank and abs(est.h_vol - d.h) <= 0.02
    if pe_ok:
        pe_ok = math.isfinite(growth.check_purely_exponential(curve, d.h).C)
    return {
        "rho_min > 0": (d.rho_min > d.eps_rank, d.rho_min),
        "alpha > 0": (ano.anosov, ano.alpha),
        "divergence exponential": (div.exponential and div.bracket_ok and div.alpha_low > 0, div.alpha_low),
        "purely exponential with h_vol = h": (pe_ok, est.h_vol - d.h),
    }


def crit_equivalence(ctx):
    ck = _Checks()
    for model in ctx.get("rank_one_models", (_h2(), _h4(), _quat())):
        for name, (ok, value) in _four_properties(model).items():
            ck.true(f"{model.name}: {name}", ok, value)
    flat = _four_properties(_flat(3))
    for name, (ok, value) in flat.items():
        ck.true(f"flat control fails: {name}", not ok, value)
    return ck


def crit_bounded_asymptote(ctx):
    ck = _Checks()
    m = _h2()
    ba = growth.bounded_asymptote_check(m, None, T=20.0, r_list=np.arange(1.0, 21.0))
    ck.close("A_emp", ba.A_emp, 1.0, 1e-6)
    ck.true("||U_v(t)|| >= 1/A", ba.unstable_ok, ba.U_min)
    ck.true("vol S_r e^{-hr} <= omega A^{2n-2} r^{n-1}", ba.volume_ok, float(np.max(ba.ratio / ba.bound)))
    ch = growth.cheeger_limit(m, r_max=15.0)
    ck.below("|g(15) - h|", ch.error, 1e-5)
    return ck


def crit_determinism(ctx):
    ck = _Checks()
    subset = (1, 3, 4, 7, 8)
    a = _evidence_bytes(run_criteria(subset, threads=1, ctx=ctx))
    b = _evidence_bytes(run_criteria(subset, threads=max(2, ctx["threads"]), ctx=ctx))
    ck.true("subset tables identical across worker counts", a == b,
            int(hashlib.sha256(a).hexdigest()[:8], 16))
    return ck


CRITERIA = {
    1: ("space-form exactness", crit_space_forms, ("space_form",)),
    2: ("rank-one symmetric model", crit_symmetric_model, ("symmetric_model", "cheeger")),
    3: ("identity suite", crit_identities, ("c1", "c2", "c3", "stransform", "wronskian")),
    4: ("bound suite", crit_bounds, ("riccati_envelope", "boundary_norm", "decay", "ar")),
    5: ("Hopf variation formula", crit_hopf, ("hopf",)),
    6: ("Lipschitz second fundamental form", crit_lipschitz, ("lipschitz",)),
    7: ("det D flow invariance", crit_detD, ("detD", "hddh")),
    8: ("volume suite", crit_volume, ("lower_bound", "purely_exponential")),
    9: ("hyperbolicity suite", crit_hyperbolicity, ("anosov", "expdiv", "thin")),
    10: ("equivalence of the four properties", crit_equivalence,
         ("equivalence", "lower_bound", "rank_detection")),
    11: ("bounded asymptote and Cheeger ratio", crit_bounded_asymptote,
         ("bounded_asymptote", "cheeger")),
    12: ("determinism", crit_determinism, ("determinism",)),
}


def _run_one(index, ctx):
    title, fn, keys = CRITERIA[index]
    res = CriterionResult(index, title, cite(*keys))
    t0 = time.perf_counter()
    try:
        res.checks = list(fn(ctx))
    except Exception as exc:  # reported per criterion, never swallowed silently
        res.error = f"{type(exc).__name__}: {exc}"
    res.wall_clock = time.perf_counter() - t0
    return res


def run_criteria(indices, threads=1, ctx=None):
    ctx = dict(ctx or {})
    indices = list(indices)
    if threads <= 1:
        return [_run_one(i, ctx) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda i: _run_one(i, ctx), indices))


def evidence_table(results):
    rows = []
    for r in results:
        if r.error:
            rows.append([r.index, "error", math.nan, r.error.replace(",", ";"), False])
        for c in r.checks:
            rows.append([r.index, c.name, c.value, c.target, c.passed])
    return Table(["criterion", "check", "value", "target", "passed"], rows)


def summary_table(results):
    return Table(["criterion", "title", "citation", "passed"],
                 [[r.index, r.title, r.citation, r.passed] for r in results])


def _evidence_bytes(results):
    import io
    import csv

    buf = io.StringIO()
    t = evidence_table(results)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for row in t.rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else str(v) for v in row])
    return buf.getvalue().encode()


@dataclass
class SuiteReport:
    suite: str
    threads: int
    results: list
    wall_clock: float
    injected_flat: bool

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def lines(self):
        return [r.line() for r in self.results]


def run_suite(suite_id="paper-verification", threads=None, seed=0, inject_flat=False,
              criteria=None, triangles=4, probes=5):
    """Run the suite; ``inject_flat`` swaps the rank-one model for a flat one.

    The injected model is a negative control: criteria that require rank
    one fail and name the statement they exercise.
    """
    if suite_id not in SUITES:
        raise ConfigError(f"unknown suite {suite_id!r}")
    threads = threads or int(os.environ.get("HOROLAB_THREADS", "1"))
    ctx = {"seed": seed, "threads": threads, "triangles": triangles, "probes": probes}
    if inject_flat:
        flat = HomogeneousModel(make_constant_diag_profile([0.0, 0.0, 0.0]), "injected flat")
        ctx["rank_one"] = flat
        ctx["rank_one_models"] = (flat,)
    t0 = time.perf_counter()
    results = run_criteria(criteria or sorted(CRITERIA), threads, ctx)
    return SuiteReport(suite_id, threads, results, time.perf_counter() - t0, inject_flat)


def write_suite(report, out_dir, fmt="csv"):
    """Write evidence and summary; CSV files contain no timings."""
    import json

    from .report import to_jsonable

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if fmt == "csv":
        for name, table in (("evidence", evidence_table(report.results)),
                            ("summary", summary_table(report.results))):
            p = os.path.join(out_dir, f"{report.suite}_{name}.csv")
            write_csv(p, table)
            paths.append(p)
    else:
        p = os.path.join(out_dir, f"{report.suite}.json")
        doc = {
            "suite": report.suite,
            "passed": report.passed,
            "threads": report.threads,
            "injected_flat": report.injected_flat,
            "wall_clock": report.wall_clock,
            "criteria": [dict(to_jsonable(r), passed=r.passed) for r in report.results],
        }
        with open(p, "w") as fh:
            json.dump(doc, fh, indent=2)
        paths.append(p)
    return paths
