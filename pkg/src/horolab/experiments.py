"""Declarative experiments: a config names a model, an op and its parameters."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import asymptotic as asy
from . import growth, horocycles, hyperbolicity, jacobi, surfaces
from .errors import ConfigError, HorolabError, PreconditionError
from .manifolds import SurfaceModel, model_from_spec
from .models import reverse_profile, shift_profile
from .registry import cite
from .report import Report, Table


@dataclass
class OpSpec:
    handler: object
    needs: str
    defaults: dict
    citation: tuple = ()


OPS: dict = {}


def op(name, needs="profile", citation=(), **defaults):
    def deco(fn):
        OPS[name] = OpSpec(fn, needs, defaults, citation)
        return fn

    return deco


@dataclass
class ExperimentConfig:
    model: dict
    experiment: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0

    @property
    def spec(self):
        return OPS[self.experiment]


def _check_tolerances(params):
    for k, v in params.items():
        if "tol" in k and not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"tolerance {k} must be a positive number")


def parse_config(source):
    """Validate a config mapping or JSON text into an :class:`ExperimentConfig`."""
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(source, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(source) - {"model", "experiment", "params", "out", "seed"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    exp = source.get("experiment")
    if exp not in OPS:
        raise ConfigError(f"unknown experiment id {exp!r}")
    model = source.get("model")
    if not isinstance(model, dict):
        raise ConfigError("config needs a model object")
    params = source.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    extra = set(params) - set(OPS[exp].defaults)
    if extra:
        raise ConfigError(f"unknown parameters for {exp}: {sorted(extra)}")
    merged = {**OPS[exp].defaults, **params}
    _check_tolerances(merged)
    seed = source.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    built = model_from_spec(model)
    needs = OPS[exp].needs
    if needs == "surface" and not isinstance(built, SurfaceModel):
        raise ConfigError(f"{exp} needs a surface model")
    if needs == "homogeneous" and not built.homogeneous:
        raise ConfigError(f"{exp} needs a homogeneous model")
    return ExperimentConfig(model, exp, merged, source.get("out"), seed)


def _profile(model, params):
    if model.homogeneous:
        return model.profile
    p = params.get("p") or model.default_point
    return model.profile_at(tuple(p), float(params.get("theta", 0.0)))


def run(config):
    """Execute ``config`` and return a :class:`Report`.

    Numerical failures are recorded in ``status``/``error`` with whatever
    results were gathered; configuration errors propagate.
    """
    if isinstance(config, (dict, str, bytes)):
        config = parse_config(config)
    spec = config.spec
    model = model_from_spec(config.model)
    report = Report(config.experiment, {"model": config.model, "params": config.params,
                                        "seed": config.seed})
    report.citation = cite(*spec.citation) if spec.citation else ""
    t0 = time.perf_counter()
    try:
        spec.handler(model, dict(config.params), report, config.seed)
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from exc
    except (HorolabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        report.status = "numerical_failure"
        report.error = f"{type(exc).__name__}: {exc}"
    report.wall_clock = time.perf_counter() - t0
    return report


def _mat(M):
    return np.atleast_2d(np.asarray(M, dtype=float))


# -- geometry_models ------------------------------------------------------------

@op("shift_profile", t0=math.pi / 2, grid=[0.0, 1.0, 2.0, 3.0], p=None, theta=0.0)
def _shift(model, P, rep, seed):
    prof = _profile(model, P)
    g = np.asarray(P["grid"], dtype=float)
    sh = shift_profile(prof, P["t0"])
    diff = np.max(np.abs(sh.evaluate(g) - prof.evaluate(g + P["t0"])))
    rep.results["values"] = sh.evaluate(g)
    rep.residual("pointwise", diff, 1e-12)


@op("reverse_profile", grid=[0.0, 1.0, 2.0, 3.0], p=None, theta=0.0)
def _reverse(model, P, rep, seed):
    prof = _profile(model, P)
    g = np.asarray(P["grid"], dtype=float)
    rv = reverse_profile(prof)
    rep.results["values"] = rv.evaluate(g)
    rep.residual("pointwise", np.max(np.abs(rv.evaluate(g) - prof.evaluate(-g))), 1e-12)
    rep.residual("involution", np.max(np.abs(reverse_profile(rv).evaluate(g) - prof.evaluate(g))), 1e-12)


@op("surface_geodesic", needs="surface", p=None, theta=math.pi / 2, T=5.0, tol=1e-11, n=21)
def _geodesic(model, P, rep, seed):
    p = tuple(P["p"] or model.default_point)
    path, prof = surfaces.surface_geodesic(model.surface, p, P["theta"], P["T"], P["tol"])
    ts = np.linspace(-P["T"], P["T"], P["n"])
    x, y = path.point(ts)
    K = prof.evaluate(ts)[:, 0, 0]
    rep.tables["path"] = Table.from_array(["t", "x", "y", "K"], np.column_stack([ts, x, y, K]))
    rep.verdicts["unit_speed"] = path.unit_speed
    rep.residual("geodesic_residual", path.geodesic_residual(), 1e-6)


@op("surface_distance", needs="surface", p=None, q=[0.0, 2.0], tol=1e-8)
def _distance(model, P, rep, seed):
    p = tuple(P["p"] or model.default_point)
    q = tuple(P["q"])
    d1 = surfaces.surface_distance(model.surface, p, q, P["tol"])
    d2 = surfaces.surface_distance(model.surface, q, p, P["tol"])
    rep.results.update(distance=d1, reverse_distance=d2)
    rep.residual("symmetry", d1 - d2, max(1e-8, 10 * P["tol"]))


@op("busemann_value", needs="surface", p=None, theta=math.pi / 2, q=[0.0, 2.0], T_horizon=20.0,
    tol=1e-4)
def _busemann(model, P, rep, seed):
    p = tuple(P["p"] or model.default_point)
    b = surfaces.busemann_value(model.surface, (p, P["theta"]), tuple(P["q"]), P["T_horizon"], P["tol"])
    rep.results["busemann"] = b
    rep.verdicts["converged"] = b.converged


# -- jacobi_core ----------------------------------------------------------------

@op("integrate_jacobi", Y0=None, Y0p=None, interval=[0.0, 5.0], tol=1e-11, n=11, p=None, theta=0.0)
def _integrate(model, P, rep, seed):
    prof = _profile(model, P)
    m = prof.dim_normal
    Y0 = _mat(P["Y0"]) if P["Y0"] is not None else np.zeros((m, m))
    Y0p = _mat(P["Y0p"]) if P["Y0p"] is not None else np.eye(m)
    path = jacobi.integrate_jacobi(prof, Y0, Y0p, tuple(P["interval"]), P["tol"],
                                   t0=P["interval"][0])
    ts = np.linspace(*P["interval"], P["n"])
    rep.results.update(t=ts, Y=path(ts), residual_max=path.residual_max,
                       lagrangian_drift=path.lagrangian_drift())
    scale = (1 + prof.curvature_bound) * max(1.0, float(np.max(np.abs(path.Y))))
    rep.residual("residual_max", path.residual_max, 1e-7 * scale)


@op("a_tensor", T=5.0, tol=1e-11, n=11, p=None, theta=0.0)
def _a(model, P, rep, seed):
    prof = _profile(model, P)
    A = jacobi.a_tensor(prof, P["T"], P["tol"])
    ts = np.linspace(0.0, P["T"], P["n"])
    rep.results.update(t=ts, A=A(ts), min_singular=A.min_singular(ts))
    rep.residual("residual_max", A.residual_max, 1e-7 * (1 + prof.curvature_bound) * float(np.max(np.abs(A.Y))))


@op("boundary_tensor_S", r=5.0, tol=1e-11, n=11, p=None, theta=0.0)
def _bS(model, P, rep, seed):
    prof = _profile(model, P)
    S = jacobi.boundary_tensor_S(prof, P["r"], P["tol"])
    ts = np.linspace(0.0, P["r"], P["n"])
    rep.results.update(t=ts, S=S(ts), derivative_at_0=jacobi.boundary_derivative_S(prof, P["r"]))
    rep.residual("S(r)", np.max(np.abs(S(np.array([P["r"]])))), 1e-9)


@op("boundary_tensor_U", r=5.0, tol=1e-11, n=11, p=None, theta=0.0)
def _bU(model, P, rep, seed):
    prof = _profile(model, P)
    U = jacobi.boundary_tensor_U(prof, P["r"], P["tol"])
    ts = np.linspace(-P["r"], 0.0, P["n"])
    rep.results.update(t=ts, U=U(ts), derivative_at_0=jacobi.boundary_derivative_U(prof, P["r"]))
    rep.residual("U(-r)", np.max(np.abs(U(np.array([-P["r"]])))), 1e-9)


@op("stable_limit", tol_limit=1e-10, p=None, theta=0.0, citation=("dini",))
def _stable(model, P, rep, seed):
    prof = _profile(model, P)
    S, d = jacobi.stable_limit(prof, tol_limit=P["tol_limit"])
    rep.results.update(S=S, diagnostics=d)
    rep.tables["convergence"] = Table.from_array(
        ["r", "trace"], np.column_stack([d.trace_r, [np.trace(v) for v in d.trace_values]]))
    rep.verdicts["converged"] = d.converged
    rep.verdicts["monotone"] = d.monotone


@op("riccati_flow", V0=None, interval=[0.0, 5.0], tol=1e-11, n=11, p=None, theta=0.0)
def _riccati(model, P, rep, seed):
    prof = _profile(model, P)
    V0 = _mat(P["V0"]) if P["V0"] is not None else jacobi.unstable_limit(prof)[0]
    path = jacobi.riccati_flow(prof, V0, tuple(P["interval"]), P["tol"])
    ts = np.linspace(*P["interval"], P["n"])
    rep.results.update(t=ts, V=path(ts))
    rep.residual("residual_max", path.residual_max, 1e-7 * (1 + prof.curvature_bound) ** 2)
    rep.residual("asymmetry", path.asymmetry, 1e-9)


@op("wronskian", T=5.0, n=11, p=None, theta=0.0, citation=("wronskian",))
def _wronskian(model, P, rep, seed):
    prof = _profile(model, P)
    A = jacobi.a_tensor(prof, P["T"])
    C = jacobi.c_tensor(prof, P["T"])
    ts = np.linspace(0.0, P["T"], P["n"])
    W = jacobi.wronskian(A, C, ts)
    rep.results["W"] = W
    rep.residual("drift", np.max(np.abs(W - W[0])), 1e-8)


@op("verify_central_identities", r=12.0, t_grid=[1, 2, 3, 4, 5, 6, 7, 8], T_tail=30.0, p=None,
    theta=0.0, citation=("c1", "c2", "c3"))
def _central(model, P, rep, seed):
    prof = _profile(model, P)
    res = jacobi.verify_central_identities(prof, P["r"], np.asarray(P["t_grid"], float), P["T_tail"])
    rep.tables["residuals"] = Table.from_array(["t", "c1", "c2", "c3"],
                                               np.column_stack([res.t, res.c1, res.c2, res.c3]))
    for k, v in res.max_residuals.items():
        rep.residual(k, v, 1e-6)


@op("check_transform_identity", t=2.0, x=3.0, p=None, theta=0.0, citation=("stransform",))
def _transform(model, P, rep, seed):
    prof = _profile(model, P)
    rep.residual("stransform", jacobi.check_transform_identity(prof, P["t"], P["x"]), 1e-6)


@op("riccati_bounds_check", T=10.0, n=100, p=None, theta=0.0,
    citation=("riccati_envelope", "boundary_norm"))
def _rbounds(model, P, rep, seed):
    prof = _profile(model, P)
    for chk in (jacobi.riccati_bounds_check(prof, P["T"], P["n"]),
                jacobi.boundary_norm_bound_check(prof)):
        rep.results[chk.name] = chk
        rep.verdicts[chk.name] = chk.holds


# -- asymptotic_analysis --------------------------------------------------------

@op("asymptotic_forms", tol=1e-10, eps_rank=None, p=None, theta=0.0)
def _forms(model, P, rep, seed):
    prof = _profile(model, P)
    data = asy.asymptotic_forms(prof, P["tol"], P["eps_rank"])
    rep.results.update(U=data.U, S=data.S, D=data.D, H=data.H, h=data.h, detD=data.detD,
                       rho_min=data.rho_min, rank=data.rank, rank_gap=data.rank_gap,
                       err_bound=data.err_bound, flags=data.flags)
    rep.verdicts["converged"] = data.converged


@op("check_asymptotic_harmonicity", direction_sample=16, tol=1e-6)
def _ah(model, P, rep, seed):
    res = asy.check_asymptotic_harmonicity(model, P["direction_sample"], P["tol"], seed)
    rep.results["report"] = res
    rep.results["asymptotically_harmonic"] = res.asymptotically_harmonic


@op("check_detD_flow_invariance", T=5.0, step=1.0, p=None, theta=0.0, citation=("detD",))
def _detD(model, P, rep, seed):
    prof = _profile(model, P)
    res = asy.check_detD_flow_invariance(prof, P["T"], P["step"])
    rep.results["report"] = res
    rep.tables["detD"] = Table.from_array(
        ["t", "detD_shifted", "detD_riccati", "trH", "int_trH"],
        np.column_stack([res.t, res.detD_shifted, res.detD_riccati, res.trH, res.int_trH]))
    rep.results["deviation"] = res.deviation
    rep.residual("route_disagreement", res.route_disagreement,
                 1e-6 * max(1.0, float(np.max(np.abs(res.detD_shifted)))))


@op("check_HD_DH_identity", T=5.0, p=None, theta=0.0, citation=("hddh",))
def _hddh(model, P, rep, seed):
    res = asy.check_HD_DH_identity(_profile(model, P), P["T"])
    rep.results["report"] = res
    rep.residual("HD+DH", res.residual, 1e-5)


@op("check_ar_bound", r_list=[2.0, 4.0, 8.0, 16.0], p=None, theta=0.0, citation=("ar",))
def _ar(model, P, rep, seed):
    res = asy.check_ar_bound(_profile(model, P), P["r_list"])
    rep.results["report"] = res
    rep.verdicts["positive"] = res.positive
    rep.verdicts["monotone"] = res.monotone
    if res.within_envelope is not None:
        rep.verdicts["within_envelope"] = res.within_envelope


@op("check_decay_bounds", rho=None, r=10.0, T=None, p=None, theta=0.0, citation=("decay",))
def _decay(model, P, rep, seed):
    prof = _profile(model, P)
    rho = P["rho"] if P["rho"] is not None else asy.asymptotic_forms(prof).rho_min
    res = asy.check_decay_bounds(prof, rho, P["r"], P["T"])
    rep.results["report"] = res
    rep.verdicts["growth"] = res.growth_ok
    if res.decay_checked:
        rep.verdicts["decay"] = res.decay_ok


@op("build_stable_curve", needs="surface", p=None, theta=math.pi / 2, arc_span=0.03, n_samples=9)
def _curve(model, P, rep, seed):
    p = tuple(P["p"] or model.default_point)
    c = horocycles.build_stable_curve(model.surface, (p, P["theta"]), P["arc_span"], P["n_samples"])
    xy = np.array(c.points)
    rep.tables["curve"] = Table.from_array(["s", "x", "y", "angle", "busemann"],
                                           np.column_stack([c.s, xy, c.angles, c.busemann]))
    rep.results.update(length=c.length, chord_length=c.chord_length)
    rep.residual("busemann_level", np.max(np.abs(c.busemann)), 1e-8)


def _curve_for(model, P):
    p = tuple(P["p"] or model.default_point)
    return horocycles.build_stable_curve(model.surface, (p, P["theta"]), P["arc_span"], P["n_samples"])


@op("verify_hopf_formula", needs="surface", p=None, theta=math.pi / 2, arc_span=0.03,
    n_samples=17, r=3.0, t_quad=8, rule="rectangle", citation=("hopf",))
def _hopf(model, P, rep, seed):
    c = _curve_for(model, P)
    res = horocycles.verify_hopf_formula(model.surface, c, P["r"], P["t_quad"], rule=P["rule"])
    rep.results["report"] = res
    if abs(res.lhs) < 1e-8:
        rep.residual("lhs", res.lhs, 1e-8)
        rep.residual("rhs", res.rhs, 1e-8)
    else:
        rep.residual("relative", res.relative, 1e-3)


@op("second_fundamental_lipschitz", needs="surface", p=None, theta=math.pi / 2, arc_span=0.03,
    n_samples=17, r=3.0, levels=3, citation=("lipschitz",))
def _lip(model, P, rep, seed):
    c = _curve_for(model, P)
    res = horocycles.second_fundamental_lipschitz(model.surface, c, P["r"], P["levels"])
    rep.results["report"] = res
    rep.verdicts["bounded"] = res.bounded


@op("stable_curve_contraction", needs="surface", p=None, theta=math.pi / 2, arc_span=0.03,
    n_samples=5, citation=("contraction",))
def _contraction(model, P, rep, seed):
    c = _curve_for(model, P)
    res = horocycles.stable_curve_contraction(model.surface, c)
    rep.results["report"] = res
    rep.verdicts["holds"] = res.holds


# -- growth_entropy -------------------------------------------------------------

def _curve_table(curve, h):
    return Table.from_array(["r", "sphere_vol", "ball_vol", "ratio_e_hr", "g_r", "quad_err"],
                            curve.table(h))


def _h_of(model, p=None):
    if model.homogeneous:
        return asy.asymptotic_forms(model.profile).h
    pp = model.default_point if p is None else tuple(p)
    return float(np.trace(jacobi.unstable_limit(model.profile_at(pp, 0.0))[0]))


@op("sphere_volume", p=None, r=[1.0, 2.0, 3.0], quad=64)
def _sphere(model, P, rep, seed):
    curve = growth.volume_curve(model, P["p"], np.atleast_1d(P["r"]), P["quad"])
    rep.tables["volume"] = _curve_table(curve, _h_of(model, P["p"]))
    rep.results.update(sphere_vol=curve.sphere_vol, quad_err=curve.quad_err)


@op("ball_volume", p=None, r=[1.0, 2.0, 3.0], quad=64)
def _ball(model, P, rep, seed):
    curve = growth.volume_curve(model, P["p"], np.atleast_1d(P["r"]), P["quad"])
    rep.tables["volume"] = _curve_table(curve, _h_of(model, P["p"]))
    rep.results.update(ball_vol=curve.ball_vol)


@op("estimate_volume_entropy", p=None, r_max=20.0, fit_window=[10.0, 20.0], quad=32)
def _entropy(model, P, rep, seed):
    r = np.arange(1.0, P["r_max"] + 0.5)
    curve = growth.volume_curve(model, P["p"], r, P["quad"])
    est = growth.estimate_volume_entropy(curve, tuple(P["fit_window"]))
    h = _h_of(model, P["p"])
    rep.tables["volume"] = _curve_table(curve, h)
    rep.results.update(h=h, h_vol=est.h_vol, estimate=est)
    rep.verdicts["h_le_hvol"] = est.h_vol >= h - 0.02


@op("check_purely_exponential", p=None, r_max=20.0, h=None, quad=32,
    citation=("purely_exponential",))
def _pe(model, P, rep, seed):
    r = np.arange(1.0, P["r_max"] + 0.5)
    curve = growth.volume_curve(model, P["p"], r, P["quad"])
    h = P["h"] if P["h"] is not None else _h_of(model, P["p"])
    res = growth.check_purely_exponential(curve, h)
    rep.tables["volume"] = _curve_table(curve, h)
    rep.results.update(h=h, C=res.C, report=res)


@op("lower_bound_ratio", p=None, r_list=[1.0, 2.0, 4.0, 8.0], quad=32, citation=("lower_bound",))
def _lbr(model, P, rep, seed):
    res = growth.lower_bound_ratio(model, P["p"], P["r_list"], P["quad"])
    rep.tables["ratio"] = Table.from_array(["r", "direct", "integrand", "relative_gap"],
                                           np.column_stack([res.r, res.direct, res.integrand,
                                                            res.relative_gap]))
    rep.results.update(h=res.h, C1=res.C1, harmonic=res.harmonic)
    if res.harmonic:
        rep.residual("relative_gap", float(np.max(res.relative_gap)), 1e-5)
        rep.verdicts["nondecreasing"] = res.nondecreasing


@op("horoball_slab_volume", p=None, theta=math.pi / 2, rho=2.0, r=3.0, vol0=None,
    citation=("slab",))
def _slab(model, P, rep, seed):
    v = None if model.homogeneous else (tuple(P["p"] or model.default_point), P["theta"])
    rep.results["volume"] = growth.horoball_slab_volume(model, v, P["rho"], P["r"], P["vol0"])


@op("cheeger_limit", p=None, r_max=15.0, quad=32, tol=1e-3, citation=("cheeger", "cheeger_lower"))
def _cheeger(model, P, rep, seed):
    res = growth.cheeger_limit(model, P["p"], P["r_max"], P["quad"], tol=P["tol"])
    rep.tables["g"] = Table.from_array(["r", "g_r"], np.column_stack([res.r, res.g]))
    rep.results.update(g_last=float(res.g[-1]), limit=res.limit, h=res.h, error=res.error)
    rep.verdicts["above_h"] = res.above


@op("bounded_asymptote_check", T=20.0, n_sample=8, quad=32, citation=("bounded_asymptote",))
def _bac(model, P, rep, seed):
    sample = model.sample_directions(1 if model.homogeneous else P["n_sample"], seed)
    res = growth.bounded_asymptote_check(model, sample, P["T"], quad=P["quad"])
    rep.tables["volume_bound"] = Table.from_array(["r", "ratio", "bound"],
                                                  np.column_stack([res.r, res.ratio, res.bound]))
    rep.results.update(A_emp=res.A_emp, U_min=res.U_min)
    rep.verdicts["unstable_lower_bound"] = res.unstable_ok
    rep.verdicts["volume_bound"] = res.volume_ok


@op("rank_detection_from_growth", p=None, r_list=[4.0, 8.0, 16.0], quad=16,
    citation=("rank_detection",))
def _rank(model, P, rep, seed):
    res = growth.rank_detection_from_growth(model, P["p"], P["r_list"], P["quad"])
    rep.results.update(min_det=res.min_det, rank_one=res.rank_one)


# -- hyperbolicity --------------------------------------------------------------

@op("anosov_exponent", T_fit=20.0, n_sample=8, citation=("anosov",))
def _anosov(model, P, rep, seed):
    sample = model.sample_directions(1 if model.homogeneous else P["n_sample"], seed)
    res = hyperbolicity.anosov_exponent(model, sample, P["T_fit"])
    rep.results.update(alpha=res.alpha, c=res.c, anosov=res.anosov)


@op("divergence_bounds", p=None, v1=None, v2=None, T=20.0, eigen_index=0, citation=("expdiv",))
def _div(model, P, rep, seed):
    if model.homogeneous:
        n = model.dim_manifold
        v1 = P["v1"] or [1.0] + [0.0] * (n - 1)
        v2 = P["v2"] or [0.0, 1.0] + [0.0] * (n - 2)
    else:
        v1 = P["v1"] if P["v1"] is not None else 0.0
        v2 = P["v2"] if P["v2"] is not None else math.pi / 2
    res = hyperbolicity.divergence_bounds(model, P["p"], v1, v2, P["T"], eigen_index=P["eigen_index"])
    rep.tables["divergence"] = Table.from_array(
        ["t", "lower", "upper", "log_lower_over_t", "log_upper_over_t"], res.table())
    rep.results.update(alpha_low=res.alpha_low, alpha_up=res.alpha_up, liminf=res.liminf,
                       c0_empirical=res.c0_empirical, exponential=res.exponential)
    rep.verdicts["bracket"] = res.bracket_ok
    rep.verdicts["rates_ordered"] = res.rates_ordered


@op("thin_triangle_delta", needs="surface", triangles=30, probes=20, radius=3.0, tol=1e-6)
def _thin(model, P, rep, seed):
    res = hyperbolicity.thin_triangle_delta(model.surface, None, P["tol"], P["probes"],
                                            P["triangles"], P["radius"], model.default_point, seed)
    rep.results.update(delta_emp=res.delta, per_triangle=res.per_triangle, skipped=res.n_skipped)
