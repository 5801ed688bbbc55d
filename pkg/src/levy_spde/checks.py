"""The acceptance suite: one registered check per criterion.

Every check takes a :class:`Context` and returns a :class:`report.Check`.
Monte Carlo sizes derive from ``config.trials`` (default ``10^5``), so
reducing it widens the standard errors and with them the tolerances.
Tolerances can be overridden per check id through ``config.tolerances``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import chaos, linear, operators, prm, streams
from .config import RunConfig
from .errors import DivergentIntegral, LevySPDEError, Unsupported
from .kernels import ColorationKernel
from .measure import LevyMeasure, symmetric_pm1
from .operators import GreenOperator, Interval
from .quadrature import simpson
from .report import Check, Report, git_describe


@dataclass
class Context:
    cfg: RunConfig
    pool: object = None
    cache: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.cfg.seed)

    @property
    def trials(self) -> int:
        return int(self.cfg.trials)

    def tol(self, check_id: str, default: float) -> float:
        return float(self.cfg.tolerances.get(check_id, default))


def fitted_bp(ctx: Context, nu: LevyMeasure, p: float) -> float:
    """``B_p`` from the config table, else the empirical sup over the Rosenthal family."""
    key = f"{p:g}"
    if key in ctx.cfg.bp_table:
        return float(ctx.cfg.bp_table[key])
    ck = ("bp", key, nu)
    if ck not in ctx.cache:
        n = max(1000, int(0.4 * ctx.trials))
        ctx.cache[ck] = prm.rosenthal_sup(nu, p, n, ctx.seed, ctx.pool)[0]
    return ctx.cache[ck]


# individual criteria


def noise_isometry(ctx: Context) -> Check:
    cid = "c01_noise_isometry"
    k = ctx.tol(cid, 3.0)
    nu = symmetric_pm1()
    m2 = nu.moment(2.0)
    bumps = prm.random_bumps(20, ctx.seed)
    hits, worst = 0, 0.0
    for j, b in enumerate(bumps):
        v = prm.simulate_l(b.phi, b.box, nu, ctx.trials, ctx.seed, f"isometry/{j}", ctx.pool)
        est = streams.moment_estimate(v, 2.0)
        exact = m2 * prm.box_integral(b.phi, b.box, power=2.0)
        z = abs(est.value - exact) / est.se
        worst = max(worst, z)
        hits += z <= k
    ok = hits >= 19
    return Check(cid, "pass" if ok else "fail", hits, 19, k,
                 {"bumps": 20, "trials": ctx.trials},
                 f"{hits}/20 bumps within {k:g} SE (largest deviation {worst:.2f} SE)")


def characteristic_function(ctx: Context) -> Check:
    cid = "c02_characteristic_function"
    nu = symmetric_pm1()
    n = 10 * ctx.trials
    tol = ctx.tol(cid, 4.0) / math.sqrt(n)
    box = prm.Box.interval(0.0, 1.0)
    phi = prm.indicator(0.0, 1.0)
    v = prm.simulate_l(phi, box, nu, n, ctx.seed, "charfn", ctx.pool)
    errs = []
    for theta in (0.5, 1.0, 2.0):
        emp = complex(streams.fmean(np.cos(theta * v)), streams.fmean(np.sin(theta * v)))
        exact = complex(np.exp(box.volume * nu.integral(lambda z: np.exp(1j * theta * z) - 1 - 1j * theta * z)))
        errs.append(abs(emp - exact))
    worst = max(errs)
    return Check(cid, "pass" if worst <= tol else "fail", worst, 0.0, tol,
                 {"theta": [0.5, 1.0, 2.0], "trials": n},
                 "errors " + ", ".join(f"{e:.2e}" for e in errs))


def rosenthal(ctx: Context) -> Check:
    cid = "c03_rosenthal"
    k = ctx.tol(cid, 3.0)
    nu = symmetric_pm1()
    p = 4.0
    n1 = max(1000, ctx.trials // 10)
    s1, _ = prm.rosenthal_sup(nu, p, n1, ctx.seed, ctx.pool)
    s4, _ = prm.rosenthal_sup(nu, p, 4 * n1, ctx.seed, ctx.pool)
    ctx.cache[("bp", "4", nu)] = s4
    stable = math.isfinite(s4) and max(s1, s4) / min(s1, s4) < 2.0
    m2, mp = nu.moment(2.0), nu.moment(p)
    classical = []
    for t in (0.5, 1.0, 2.0, 4.0):
        est = streams.norm_estimate(
            prm.simulate_l(prm.indicator(0.0, t), prm.Box.interval(0.0, t), nu, ctx.trials, ctx.seed, f"classic/{t:g}", ctx.pool), p
        )
        bound = s4 * (math.sqrt(m2 * t) + (mp * t) ** (1.0 / p))
        classical.append((t, est.value, est.se, bound, est.value <= bound + k * est.se))
    ok = stable and all(c[-1] for c in classical)
    detail = f"sup {s1:.4f} at {n1} trials, {s4:.4f} at {4 * n1}; classical " + ", ".join(
        f"t={t:g}: {v:.3f}<={b:.3f}" for t, v, _, b, _ in classical
    )
    return Check(cid, "pass" if ok else "fail", s4, s1, 2.0, {"p": p, "trials": [n1, 4 * n1]}, detail)


DALANG_ALPHAS = (0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 2.9, 3.5)


def dalang_sweep(ctx: Context) -> Check:
    cid = "c04_dalang_sweep"
    total, agree, bad = 0, 0, []
    for d in (1, 2, 3):
        for fam in ("heat", "riesz", "bessel"):
            for a in DALANG_ALPHAS:
                if fam == "riesz" and a >= d:
                    continue
                kern = ColorationKernel(fam, a, d)
                try:
                    kern.dalang_integral(force=True)
                    verdict = True
                except DivergentIntegral:
                    verdict = False
                total += 1
                if verdict == kern.dalang_check():
                    agree += 1
                else:
                    bad.append(f"{fam}(d={d},alpha={a:g})")
    ok = agree == total
    return Check(cid, "pass" if ok else "fail", agree, total, 0.0, {"cases": total},
                 f"{agree}/{total} agree" + ("" if ok else "; disagree: " + ", ".join(bad)))


def h_transform_oracle(ctx: Context) -> Check:
    cid = "c05_h_transform"
    tol = ctx.tol(cid, 1e-10)
    ts = np.linspace(0.05, 4.0, 40)
    xis = np.linspace(0.0, 4.0, 25)
    worst = {}
    for fam in ("heat", "wave"):
        op = GreenOperator(fam, 1)
        err = 0.0
        for t in ts:
            s = np.linspace(0.0, t, 10001)
            for xi in xis:
                y = operators.fourier_g(op, t - s, xi)
                err = max(err, abs(operators.h_transform(op, t, xi) - simpson(y, s)))
        worst[fam] = err
    e = max(worst.values())
    return Check(cid, "pass" if e <= tol else "fail", e, 0.0, tol, {"grid": [40, 25], "simpson_nodes": 10001},
                 ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()))


def _linear_second_moment(ctx: Context, cid: str, op: GreenOperator, kern: ColorationKernel) -> Check:
    k = ctx.tol(cid, 3.0)
    nu = symmetric_pm1()
    ts = [0.5, 1.0]
    R = linear.min_box(op, kern, ts, [0.0])
    fe = linear.simulate_linear(op, kern, nu, ts, [0.0], R, ctx.trials, ctx.seed, ctx.pool, key=cid)
    parts, ok, worst = [], True, 0.0
    for t in ts:
        est = fe.moment(t, 0.0, 2.0)
        exact = linear.exact_second_moment(op, kern, t, nu.moment(2.0))
        z = abs(est.value - exact) / est.se
        worst = max(worst, z)
        ok &= z <= k
        parts.append(f"t={t:g}: {est.value:.6f}+-{est.se:.1e} vs {exact:.6f}")
    return Check(cid, "pass" if ok else "fail", worst, 0.0, k,
                 {"op": op.family, "kernel": kern.family, "alpha": kern.alpha, "box": R, "trials": ctx.trials},
                 "; ".join(parts))


def linear_heat(ctx: Context) -> Check:
    return _linear_second_moment(ctx, "c06_linear_heat", GreenOperator("heat", 1), ColorationKernel("heat", 1.0, 1))


def linear_wave(ctx: Context) -> Check:
    return _linear_second_moment(ctx, "c07_linear_wave", GreenOperator("wave", 1), ColorationKernel("bessel", 2.0, 1))


def envelope_shape(ctx: Context) -> Check:
    cid = "c08_envelope_shape"
    tol = ctx.tol(cid, 0.02)
    nu = symmetric_pm1()
    kern = ColorationKernel("heat", 1.0, 1)
    B4 = fitted_bp(ctx, nu, 4.0)
    grid = np.geomspace(0.25, 4.0, 9)
    sim_ts = [0.5, 1.0, 2.0, 4.0]
    ok, parts, slopes = True, [], {}
    for fam, target in (("heat", 1.0), ("wave", 2.0)):
        op = GreenOperator(fam, 1)
        env = [linear.p_moment_envelope(op, kern, float(t), 4.0, B4, nu, horizon=4.0) for t in grid]
        slope = float(np.polyfit(np.log(grid), np.log(env), 1)[0])
        slopes[fam] = slope
        ok &= abs(slope - target) <= tol
        R = linear.min_box(op, kern, sim_ts, [0.0])
        fe = linear.simulate_linear(op, kern, nu, sim_ts, [0.0], R, ctx.trials, ctx.seed, ctx.pool, key=f"{cid}/{fam}")
        below = True
        for t in sim_ts:
            mc = fe.norm(t, 0.0, 4.0).value
            bound = linear.p_moment_envelope(op, kern, t, 4.0, B4, nu, horizon=4.0)
            below &= mc <= bound
        ok &= below
        parts.append(f"{fam}: slope {slope:.4f} (target {target:g}), MC below envelope: {below}")
    return Check(cid, "pass" if ok else "fail", slopes["heat"], 1.0, tol,
                 {"B4": B4, "slopes": slopes, "t_range": [0.25, 4.0]}, "; ".join(parts))


# rows of the heat/Riesz case list: (d, alpha, expected interval)
ADMISSIBILITY_ROWS = (
    (1, Fraction(1, 2), Interval(2, None)),
    (1, Fraction(9, 10), Interval(2, None)),
    (2, Fraction(1, 2), Interval(2, None)),
    (2, Fraction(3, 2), Interval(2, None)),
    (3, Fraction(2), Interval(2, None)),
    (3, Fraction(5, 2), Interval(2, None)),
    (3, Fraction(3, 2), Interval(2, Fraction(12))),
    (3, Fraction(5, 4), Interval(2, Fraction(8))),
    (3, Fraction(11, 10), Interval(2, Fraction(60, 9))),
    (4, Fraction(5, 2), Interval(2, Fraction(16, 3))),
    (4, Fraction(7, 2), Interval(2, Fraction(16))),
    (5, Fraction(7, 2), Interval(2, Fraction(4))),
)


def _same_interval(a: Interval, b: Interval) -> bool:
    return a.empty == b.empty and a.lo == b.lo and a.hi == b.hi


def admissibility_table(ctx: Context) -> Check:
    cid = "c09_admissibility"
    op_rows = 0
    bad = []
    for d, a, expected in ADMISSIBILITY_ROWS:
        got = operators.admissible_p_range(GreenOperator("heat", d), ColorationKernel("riesz", a, d))
        op_rows += 1
        if not _same_interval(got, expected):
            bad.append(f"d={d}, alpha={a}: got {got}, expected {expected}")
    ok = not bad
    return Check(cid, "pass" if ok else "fail", op_rows - len(bad), op_rows, 0.0, {"rows": op_rows},
                 "all rows match" if ok else "; ".join(bad))


def heat_sup_at_zero(ctx: Context) -> Check:
    cid = "c10_heat_sup_at_zero"
    tol = ctx.tol(cid, 1e-8)
    worst = -math.inf
    for d in (1, 2, 3):
        op, kern = GreenOperator("heat", d), ColorationKernel("heat", 1.0, d)
        for t in (0.5, 1.0, 2.0):
            base = chaos.k_sup(op, kern, t)
            for e in (0.5, 1.0, 2.0):
                eta = np.zeros(d)
                eta[0] = e
                worst = max(worst, chaos.k_shifted(op, kern, t, eta) - base)
    ok = worst <= tol
    return Check(cid, "pass" if ok else "fail", worst, 0.0, tol, {"dims": [1, 2, 3], "eta": [0.5, 1.0, 2.0]},
                 f"largest excess of a shifted value over eta=0: {worst:.3e}")


def first_chaos(ctx: Context) -> Check:
    cid = "c11_first_chaos"
    tol = ctx.tol(cid, 1e-8)
    worst, parts = 0.0, []
    for d in (1, 2, 3):
        for t in (0.5, 1.0):
            op, kern = GreenOperator("heat", d), ColorationKernel("heat", 1.0, d)
            lhs, rhs = chaos.first_chaos_identity(op, kern, t)
            rel = abs(lhs - rhs) / abs(lhs)
            worst = max(worst, rel)
            parts.append(f"d={d},t={t:g}: {rel:.1e}")
    return Check(cid, "pass" if worst <= tol else "fail", worst, 0.0, tol, {"combinations": 6}, ", ".join(parts))


def jn_bounds(ctx: Context) -> Check:
    cid = "c12_jn_bounds"
    k = ctx.tol(cid, 3.0)
    ok, parts = True, []
    for d in (1, 2):
        op, kern = GreenOperator("heat", d), ColorationKernel("heat", 1.0, d)
        for n in (1, 2, 3):
            est = chaos.jn_estimate(op, kern, 1.0, n, ctx.trials, ctx.seed, pool=ctx.pool)
            good = 0.0 <= est.jn_value <= est.jn_bound + k * est.jn_se
            ok &= good
            parts.append(f"d={d},n={n}: {est.jn_value:.4g}<={est.jn_bound:.4g}")
    worst_ratio = 0.0
    for d in (1, 2):
        op, kern = GreenOperator("wave", d), ColorationKernel("heat", 1.0, d)
        t = 1.0
        x = chaos.d_const(t) * kern.dalang_integral() * t
        for n in range(1, 8):
            r = chaos.jn_bound(op, kern, t, n + 1) / chaos.jn_bound(op, kern, t, n)
            worst_ratio = max(worst_ratio, abs(r / (x / (n + 1)) - 1.0))
    ok &= worst_ratio <= 8 * np.finfo(float).eps
    parts.append(f"wave ratio identity error {worst_ratio:.1e}")
    return Check(cid, "pass" if ok else "fail", worst_ratio, 0.0, k, {"orders": [1, 2, 3], "samples": ctx.trials},
                 "; ".join(parts))


def series_wave(ctx: Context) -> Check:
    cid = "c13_series_certificate"
    tol = ctx.tol(cid, 1e-8)
    op, kern = GreenOperator("wave", 2), ColorationKernel("heat", 1.0, 2)
    cert = chaos.series_certificate(op, kern, 1.0, 1.0, tol)
    cum = cert.cumulative
    monotone = bool(np.all(np.diff(cum) >= 0))
    ok = cert.status == "certified" and cert.tail_bound < tol and monotone
    return Check(cid, "pass" if ok else "fail", cert.tail_bound, 0.0, tol,
                 {"N": cert.N, "partial_sum": cert.partial_sum},
                 f"N={cert.N}, partial sum {cert.partial_sum:.10f}, tail {cert.tail_bound:.2e}, monotone {monotone}")


def gaussian_equivalence(ctx: Context) -> Check:
    cid = "c14_gaussian_equivalence"
    k = ctx.tol(cid, 3.0)
    nu = LevyMeasure.from_atoms([(-1.0, 0.3), (2.0, 0.7)])
    op, kern = GreenOperator("heat", 1), ColorationKernel("heat", 1.0, 1)
    r1 = chaos.gaussian_equivalence(op, kern, 1.0, 1, nu)
    r2 = chaos.gaussian_equivalence(op, kern, 1.0, 2, nu, ctx.trials, ctx.seed, ctx.pool)
    ok = r1.ratio == 1.0 and abs(r2.ratio - 1.0) <= k * r2.ratio_se
    return Check(cid, "pass" if ok else "fail", r2.ratio, 1.0, k * r2.ratio_se,
                 {"n1_ratio": r1.ratio, "samples": ctx.trials},
                 f"n=1 ratio {r1.ratio!r}; n=2 ratio {r2.ratio:.5f} +- {r2.ratio_se:.1e}")


def determinism(ctx: Context) -> Check:
    cid = "c15_determinism"
    texts = {}
    for w in (1, 8):
        cfg = replace(ctx.cfg, workers=w)
        texts[w] = run_checks(cfg, [c for c in CRITERIA if c[0] != cid]).to_csv()
    again = run_checks(replace(ctx.cfg, workers=1), [c for c in CRITERIA if c[0] != cid]).to_csv()
    same = texts[1] == texts[8] == again
    return Check(cid, "pass" if same else "fail", float(same), 1.0, 0.0, {"workers": [1, 8], "runs": 3},
                 "byte-identical CSV" if same else "CSV output differs between runs")


CRITERIA: list[tuple[str, str, Callable[[Context], Check]]] = [
    ("c01_noise_isometry", "noise isometry over random bumps", noise_isometry),
    ("c02_characteristic_function", "characteristic function of L(1_[0,1])", characteristic_function),
    ("c03_rosenthal", "Rosenthal ratio stability and classical bound", rosenthal),
    ("c04_dalang_sweep", "cutoff verdict agrees with the Dalang criterion", dalang_sweep),
    ("c05_h_transform", "closed-form H_t against Simpson quadrature", h_transform_oracle),
    ("c06_linear_heat", "linear heat second moment", linear_heat),
    ("c07_linear_wave", "linear wave second moment", linear_wave),
    ("c08_envelope_shape", "moment envelope exponents and MC domination", envelope_shape),
    ("c09_admissibility", "admissible moment orders, heat with Riesz coloration", admissibility_table),
    ("c10_heat_sup_at_zero", "heat spectral sup attained at eta = 0", heat_sup_at_zero),
    ("c11_first_chaos", "first chaos term identity", first_chaos),
    ("c12_jn_bounds", "J_n estimates below their bounds", jn_bounds),
    ("c13_series_certificate", "wave series certificate", series_wave),
    ("c14_gaussian_equivalence", "Poisson and Gaussian chaos norms agree", gaussian_equivalence),
    ("c15_determinism", "worker-count independent output", determinism),
]

CHECK_IDS = tuple(c[0] for c in CRITERIA)


def run_one(fn: Callable[[Context], Check], cid: str, ctx: Context) -> Check:
    """Run a check, turning module errors into ``unsupported`` or ``fail`` records."""
    try:
        return fn(ctx)
    except Unsupported as exc:
        return Check(cid, "unsupported", detail=str(exc))
    except LevySPDEError as exc:
        return Check(cid, "fail", detail=f"{type(exc).__name__}: {exc}")


def run_checks(cfg: RunConfig, selected=None, progress: Callable[[Check, float], None] | None = None) -> Report:
    """Run ``selected`` criteria (default all) with a worker pool of ``cfg.workers`` threads."""
    selected = CRITERIA if selected is None else selected
    report = Report()
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        ctx = Context(cfg, pool)
        for cid, _, fn in selected:
            t0 = time.perf_counter()
            check = report.add(run_one(fn, cid, ctx))
            if progress is not None:
                progress(check, time.perf_counter() - t0)
    finally:
        if pool is not None:
            pool.shutdown()
    return report


def select(ids) -> list:
    """Registry entries for the given ids (prefixes such as ``c05`` are accepted)."""
    out = []
    for want in ids:
        hits = [c for c in CRITERIA if c[0] == want or c[0].split("_")[0] == want]
        if not hits:
            raise KeyError(f"unknown check {want!r}")
        out.extend(hits)
    return out


def provenance(cfg: RunConfig) -> dict:
    from .config import config_hash

    return {"git": git_describe(), "config_hash": config_hash(cfg), "seed": cfg.seed}
