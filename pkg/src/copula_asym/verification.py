"""Registry of the acceptance checks, shared by ``pytest`` and ``copula-asym verify``.

Each check returns ``(passed, detail)``.  :func:`run_criterion` also times
it and fails it when it overruns its runtime budget.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import asymmetry as asy
from . import copulas as cop
from . import generators as gen
from . import shockmodels as shk
from .numerics import INTEGRAL_TOL, Tolerance, rng_stream, sup_on_square

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    limit_s: float
    fn: Callable[[], tuple[bool, str]]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed_s: float
    limit_s: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"criterion {self.number:2d} {status}  {self.name}  "
                f"[{self.elapsed_s:.2f}s / {self.limit_s:.0f}s]  {self.detail}")


def _close(a, b, tol):
    return abs(a - b) <= tol


def _near(p, q, tol):
    return max(abs(p[0] - q[0]), abs(p[1] - q[1])) <= tol


# -- 1..4: named measures ---------------------------------------------------

def c01_muinf_c23():
    r = asy.mu_p(cop.Cmu(2.0 / 3.0), math.inf)
    w_ok = _near(r.witness, (4 / 9, 2 / 3), 1e-3) or _near(r.witness, (2 / 3, 4 / 9), 1e-3)
    ok = _close(r.value, 4 / 27, 1e-6) and w_ok
    return ok, f"value={r.value:.10f} target={4 / 27:.10f} witness=({r.witness[0]:.6f},{r.witness[1]:.6f})"


def c02_muinf_E():
    r = asy.mu_p(cop.Elammu(SQRT2 / 2, 1.0), math.inf)
    a = (1 - SQRT2 / 2, SQRT2 / 2)
    w_ok = _near(r.witness, a, 1e-3) or _near(r.witness, a[::-1], 1e-3)
    target = 3 - 2 * SQRT2
    ok = _close(r.value, target, 1e-6) and w_ok
    return ok, f"value={r.value:.10f} target={target:.10f} witness=({r.witness[0]:.6f},{r.witness[1]:.6f})"


def c03_mup_c23():
    c = cop.Cmu(2.0 / 3.0)
    m1, m2 = asy.mu_p(c, 1).value, asy.mu_p(c, 2).value
    t1, t2 = 10 / 243, 2 / 81 * math.sqrt(74 / 15)
    k1, k2 = asy.mu_p_c23_closed(1), asy.mu_p_c23_closed(2)
    ok = all(_close(a, b, 1e-6) for a, b in ((m1, t1), (m2, t2), (k1, t1), (k2, t2)))
    return ok, f"mu1={m1:.10f} ({t1:.10f}) mu2={m2:.10f} ({t2:.10f})"


def c04_mup_E():
    c = cop.Elammu(SQRT2 / 2, 1.0)
    m1, m2 = asy.mu_p(c, 1).value, asy.mu_p(c, 2).value
    t1, t2 = 29 / 24 * SQRT2 - 5 / 3, math.sqrt(71 / 45 * SQRT2 - 401 / 180)
    k1, k2 = asy.mu_p_E_closed(1), asy.mu_p_E_closed(2)
    ok = all(_close(a, b, 1e-6) for a, b in ((m1, t1), (m2, t2), (k1, t1), (k2, t2)))
    return ok, f"mu1={m1:.10f} ({t1:.10f}) mu2={m2:.10f} ({t2:.10f})"


# -- 5..7: bounds -----------------------------------------------------------

def c05_marshall_bound():
    b1, b2 = asy.marshall_mu_p_bound(1), asy.marshall_mu_p_bound(2)
    ok = _close(b1, 1 / 18, 1e-10) and _close(b2, 1 / (6 * math.sqrt(6)), 1e-10)
    parts = [f"B(1)={b1:.12f} B(2)={b2:.12f}"]
    for p in (1, 2, 5):
        b = asy.marshall_mu_p_bound(p)
        m = asy.mu_p(cop.Cmu(2.0 / 3.0), p).value
        ok = ok and b >= m
        parts.append(f"p={p}: {b:.6f}>={m:.6f}")
    return ok, " ".join(parts)


def c06_maxmin_bounds():
    closed = asy.maxmin_mu12_bounds()
    quad = (asy.maxmin_mu_p_bound(1), asy.maxmin_mu_p_bound(2))
    ok = all(_close(a, b, 1e-6) for a, b in zip(closed, quad))
    return ok, f"closed=({closed[0]:.10f},{closed[1]:.10f}) quad=({quad[0]:.10f},{quad[1]:.10f})"


def c07_rmm_bounds():
    closed = asy.rmm_mu12_bounds()
    quad = (asy.rmm_mu_p_bound(1), asy.rmm_mu_p_bound(2))
    ok = all(_close(a, b, 1e-6) for a, b in zip(closed, quad))
    return ok, f"closed=({closed[0]:.10f},{closed[1]:.10f}) quad=({quad[0]:.10f},{quad[1]:.10f})"


# -- 8, 9: maximal asymmetry functions --------------------------------------

DSTAR_SUPS = {
    asy.FamilyTag.AllCopulas: 1.0 / 3.0,
    asy.FamilyTag.PQD: 3.0 - 2.0 * SQRT2,
    asy.FamilyTag.NQD: SQRT5 - 2.0,
    asy.FamilyTag.Marshall: 4.0 / 27.0,
    asy.FamilyTag.Maxmin: 4.0 / 27.0,
    asy.FamilyTag.RMM: 3.0 - 2.0 * SQRT2,
}

# Finer than the default spatial resolution: the sup must be within 1e-7 in
# value, and a near-ridge cell of side h can lose up to ~h in value.
DSTAR_SUP_TOL = Tolerance(1e-9, 0.0, 64)


def c08_dstar_sups():
    ok, parts = True, []
    for fam, target in DSTAR_SUPS.items():
        r = sup_on_square(asy.dstar_field(fam), DSTAR_SUP_TOL)
        good = _close(r.value, target, 1e-7)
        ok &= good
        parts.append(f"{fam.value}={r.value:.10f}{'' if good else '!'}")
    return ok, " ".join(parts)


def witness_grid() -> np.ndarray:
    return np.arange(1, 102) / 102.0


def witness_residual(fam) -> float:
    t = witness_grid()
    worst = 0.0
    for x in t:
        for y in t:
            if x == y:
                continue
            c = asy.attainment_witness(fam, x, y)
            d = abs(c(x, y) - c(y, x))
            worst = max(worst, abs(d - asy.dstar(fam, x, y)))
    return worst


def c09_witnesses():
    ok, parts = True, []
    for fam in asy.FamilyTag:
        r = witness_residual(fam)
        ok &= r <= 1e-12
        parts.append(f"{fam.value}={r:.1e}")
    return ok, " ".join(parts)


# -- 10: randomized generator families --------------------------------------

def random_family_member(family: str, seed: int) -> cop.Copula:
    if family == "marshall":
        f = gen.random_generator("MarshallFG", 2 * seed)
        g = gen.random_generator("MarshallFG", 2 * seed + 1)
        return cop.Marshall(f, g)
    f = gen.random_generator("ScriptF", 2 * seed)
    g = gen.random_generator("ScriptF", 2 * seed + 1)
    return cop.Maxmin(f, g) if family == "maxmin" else cop.RMM(f, g)


_BOUND = {"marshall": asy.bound_F, "maxmin": asy.bound_Ghat, "rmm": asy.bound_H}
_QUADRANT = {"marshall": {"PQD", "Both"}, "maxmin": {"PQD", "Both"}, "rmm": {"NQD", "Both"}}


def dominance_excess(c: cop.Copula, family: str, seed: int, n_points: int = 10_000) -> float:
    """``max(|C - C^t| - bound)`` over random points; ``<= 1e-12`` means dominated."""
    pts = rng_stream(seed).random((n_points, 2))
    a, b = np.minimum(pts[:, 0], pts[:, 1]), np.maximum(pts[:, 0], pts[:, 1])
    d = np.abs(c(a, b) - c(b, a))
    return float(np.max(d - _BOUND[family](a, b)))


def c10_property_suite(n_instances: int = 100):
    ok, parts = True, []
    for family in ("marshall", "maxmin", "rmm"):
        bad = []
        worst = -math.inf
        for k in range(n_instances):
            seed = 1000 * (1 + ("marshall", "maxmin", "rmm").index(family)) + k
            c = random_family_member(family, seed)
            ax = cop.check_axioms(c, 128)
            q = cop.classify_quadrant(c, 128).classification
            ex = dominance_excess(c, family, seed)
            worst = max(worst, ex)
            if not (ax.passed and q in _QUADRANT[family] and ex <= 1e-12):
                bad.append(seed)
        ok &= not bad
        parts.append(f"{family}: {n_instances - len(bad)}/{n_instances} ok, max excess {worst:.1e}")
    return ok, "; ".join(parts)


# -- 11: measure axioms -----------------------------------------------------

def measure_instances() -> list[cop.Copula]:
    return [
        cop.Cmu(2.0 / 3.0), cop.Dmu(0.4), cop.Elammu(SQRT2 / 2, 1.0), cop.Elammu(0.5, 0.5),
        cop.Pab(0.3, 0.8), cop.Qab(0.4, 0.5), cop.Wlambda(0.3), cop.Nlambda(0.2),
        random_family_member("marshall", 7), random_family_member("maxmin", 11),
    ]


def c11_measure_axioms():
    ok, worst = True, 0.0
    for c in measure_instances():
        for p in (1.0, 2.0, math.inf):
            base = asy.mu_p(c, p)
            for other in (c.transpose(), c.survival()):
                r = asy.mu_p(other, p)
                gap = abs(r.value - base.value)
                worst = max(worst, gap)
                ok &= gap <= base.err + r.err
    pi_ok = True
    for p in (1.0, 2.0, math.inf):
        r = asy.mu_p(cop.Product(), p)
        pi_ok &= r.value <= max(r.err, INTEGRAL_TOL.abs_tol)
    return ok and pi_ok, f"max |mu(C)-mu(C')|={worst:.1e}, mu_p(Pi) ok={pi_ok}"


# -- 12: shock models -------------------------------------------------------

def c12_shock_models(n: int = 100_000):
    ok, parts = True, []
    limit = 2.2 / math.sqrt(n)
    for k, (kind, params) in enumerate(shk.default_settings()):
        spec = shk.build_spec(kind, **params)
        rep = shk.verify_spec(spec)
        _, bound = shk.empirical_sup_distance(spec, n, 42 + k)
        good = rep.passed and bound <= limit
        ok &= good
        label = ",".join(f"{v:.3g}" for v in params.values())
        parts.append(f"{kind}({label})={bound:.4f}{'' if good else '!'}")
    return ok, f"limit {limit:.4f}: " + " ".join(parts)


# -- 13: structural identities ----------------------------------------------

def c13_identities():
    t = np.linspace(0.0, 1.0, 201)
    X, Y = np.meshgrid(t, t, indexing="ij")
    worst = {}
    worst["D=survival(C^t)"] = max(
        float(np.max(np.abs(cop.Dmu(m)(X, Y) - cop.Survival(cop.Transpose(cop.Cmu(m)))(X, Y))))
        for m in (0.2, 0.5, 2 / 3, 0.9))
    dual = 0.0
    for k in range(20):
        c = random_family_member("maxmin", 500 + k)
        dual = max(dual, float(np.max(np.abs(c(X, Y) - c.eval_phi_psi(X, Y)))))
    worst["maxmin dual forms"] = dual
    a, b = np.minimum(X, Y), np.maximum(X, Y)
    ghat = asy.bound_Ghat(a, b)
    worst["Ghat=max(F,F')"] = float(np.max(np.abs(ghat - np.maximum(asy.bound_F(a, b),
                                                                     asy.bound_F(1 - b, 1 - a)))))
    worst["Ghat=G(x,1-y)"] = float(np.max(np.abs(ghat - asy.bound_G(a, 1 - b))))
    mm = asy.dstar("Maxmin", X, Y)
    worst["Maxmin reflection"] = float(np.max(np.abs(mm - asy.dstar("Maxmin", 1 - Y, 1 - X))))
    ok = all(v <= 1e-12 for v in worst.values())
    p, q = (4 / 9, 2 / 3), (1 - 2 / 3, 1 - 4 / 9)
    gap = abs(asy.dstar("Marshall", *p) - asy.dstar("Marshall", *q))
    ok &= gap > 1e-3
    detail = " ".join(f"{k}={v:.1e}" for k, v in worst.items())
    return ok, f"{detail} Marshall(4/9,2/3) vs (1/3,5/9) gap={gap:.4f}"


CRITERIA = (
    Criterion(1, "mu_inf(C_2/3) = 4/27", 5, c01_muinf_c23),
    Criterion(2, "mu_inf(E_sqrt2/2,1) = 3-2sqrt2", 5, c02_muinf_E),
    Criterion(3, "mu_1, mu_2 of C_2/3", 10, c03_mup_c23),
    Criterion(4, "mu_1, mu_2 of E_sqrt2/2,1", 10, c04_mup_E),
    Criterion(5, "Marshall mu_p bound", 10, c05_marshall_bound),
    Criterion(6, "maxmin mu_1, mu_2 bounds", 20, c06_maxmin_bounds),
    Criterion(7, "RMM mu_1, mu_2 bounds", 20, c07_rmm_bounds),
    Criterion(8, "sup of dstar per family", 30, c08_dstar_sups),
    Criterion(9, "witness attains dstar", 60, c09_witnesses),
    Criterion(10, "randomized generator families", 120, c10_property_suite),
    Criterion(11, "measure axioms", 60, c11_measure_axioms),
    Criterion(12, "shock-model Monte Carlo", 120, c12_shock_models),
    Criterion(13, "symmetry and structure identities", 30, c13_identities),
)

SUITES = {
    "asymmetry": (1, 2, 3, 4, 5, 6, 7, 8, 9),
    "axioms": (10, 11, 13),
    "shock": (12,),
}
SUITES["all"] = tuple(sorted(set().union(*SUITES.values())))


def criterion(number: int) -> Criterion:
    for c in CRITERIA:
        if c.number == number:
            return c
    raise KeyError(number)


def run_criterion(c: Criterion) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = c.fn()
    except Exception as exc:  # a crash is a failure, reported with its message
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    if elapsed > c.limit_s:
        ok, detail = False, f"{detail} (over time budget)"
    return CriterionResult(c.number, c.name, bool(ok), detail, elapsed, c.limit_s)


def thread_count() -> int:
    """Worker cap from ``COPULA_ASYM_THREADS`` (default 1)."""
    raw = os.environ.get("COPULA_ASYM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ValueError(f"COPULA_ASYM_THREADS must be a positive integer, got {raw!r}")
    return n


def run_suite(suite: str = "all", threads: int | None = None) -> list[CriterionResult]:
    """Run a suite; results come back in criterion order whatever the thread count."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    items = [criterion(k) for k in SUITES[suite]]
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [run_criterion(c) for c in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_criterion, items))
