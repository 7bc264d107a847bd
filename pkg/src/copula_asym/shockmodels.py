"""Shock models that realize the extremal copulas.

Three independent shocks ``X, Y, Z`` are combined into a pair ``(U, V)``:

* ``max_max``:   ``U = max(X, Z)``, ``V = max(Y, Z)``  (Marshall copulas)
* ``max_min``:   ``U = max(X, Z)``, ``V = min(Y, Z)``  (maxmin copulas)
* ``reflected``: ``U = max(X, Z)``, ``V = -min(Y, Z)`` (reflected maxmin)

The shocks are piecewise uniform with unit-length blocks anchored at the
integers.  The block order and masses are what make the copula of ``(U, V)``
equal to the extremal family member, so everything here can be checked
exactly on piecewise-linear CDFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import copulas as cop
from .numerics import rng_stream

COUPLINGS = ("max_max", "max_min", "reflected")
KINDS = ("MarshallCmu", "MaxminCmu", "MaxminDmu", "RmmElammu")
CHECK_TOL = 1e-12

_KIND_ALIASES = {
    "marshallcmu": "MarshallCmu", "marshall-cmu": "MarshallCmu", "marshall_cmu": "MarshallCmu",
    "maxmincmu": "MaxminCmu", "maxmin-cmu": "MaxminCmu", "maxmin_cmu": "MaxminCmu",
    "maxmindmu": "MaxminDmu", "maxmin-dmu": "MaxminDmu", "maxmin_dmu": "MaxminDmu",
    "rmmelammu": "RmmElammu", "rmm-elammu": "RmmElammu", "rmm_elammu": "RmmElammu",
}


def canonical_model(kind: str) -> str:
    try:
        return _KIND_ALIASES[kind.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown shock model {kind!r}; expected one of {KINDS}") from None


@dataclass(frozen=True)
class PiecewiseUniformDist:
    """Mixture of uniform distributions on disjoint, sorted intervals."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(lo), float(hi), float(w)) for lo, hi, w in self.segments if w > 0.0)
        if not segs:
            raise ValueError("a distribution needs at least one positive-weight segment")
        for lo, hi, w in segs:
            if not (lo < hi and 0.0 < w <= 1.0 + CHECK_TOL):
                raise ValueError(f"bad segment {(lo, hi, w)}")
        for (_, h0, _), (l1, _, _) in zip(segs, segs[1:]):
            if l1 < h0:
                raise ValueError("segments must be sorted and disjoint")
        total = math.fsum(w for _, _, w in segs)
        if abs(total - 1.0) > CHECK_TOL:
            raise ValueError(f"segment weights sum to {total}, not 1")
        object.__setattr__(self, "segments", segs)

    @property
    def lo(self) -> np.ndarray:
        return np.array([s[0] for s in self.segments])

    @property
    def hi(self) -> np.ndarray:
        return np.array([s[1] for s in self.segments])

    @property
    def weights(self) -> np.ndarray:
        return np.array([s[2] for s in self.segments])

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self.lo, self.hi]))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        frac = np.clip((t[..., None] - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        out = frac @ self.weights
        return float(out) if out.ndim == 0 else out

    def ppf(self, u):
        """Inverse CDF on ``[0, 1)``; gaps between segments are skipped."""
        u = np.asarray(u, dtype=float)
        w = self.weights
        cum = np.concatenate([[0.0], np.cumsum(w)])
        k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, w.size - 1)
        frac = np.clip((u - cum[k]) / w[k], 0.0, 1.0)
        return self.lo[k] + frac * (self.hi[k] - self.lo[k])

    def integral_of_cdf(self, a: float, b: float) -> float:
        """``int_a^b F(t) dt``; exact, since ``F`` is piecewise linear."""
        pts = self.breakpoints
        t = np.unique(np.concatenate([[a, b], pts[(pts > a) & (pts < b)]]))
        f = self.cdf(t)
        return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(t)))

    def to_dict(self) -> dict:
        return {"segments": [list(s) for s in self.segments]}


def prob_le(a: PiecewiseUniformDist, b: PiecewiseUniformDist) -> float:
    """``P[A <= B]`` for independent ``A, B``: ``sum_k w_k / |I_k| * int_{I_k} F_A``."""
    return math.fsum(w / (hi - lo) * a.integral_of_cdf(lo, hi) for lo, hi, w in b.segments)


def _seg(lo, hi, w):
    return (lo, hi, w)


@dataclass(frozen=True)
class ShockModelSpec:
    kind: str
    params: dict
    dist_X: PiecewiseUniformDist
    dist_Y: PiecewiseUniformDist
    dist_Z: PiecewiseUniformDist
    coupling: str
    target: cop.Copula = field(compare=False)

    # -- marginals and joint law ------------------------------------------

    def cdf_U(self, u):
        return self.dist_X.cdf(u) * self.dist_Z.cdf(u)

    def cdf_V(self, v):
        fy, fz = self.dist_Y.cdf, self.dist_Z.cdf
        if self.coupling == "max_max":
            return fy(v) * fz(v)
        if self.coupling == "max_min":
            return 1.0 - (1.0 - fy(v)) * (1.0 - fz(v))
        return (1.0 - fy(-np.asarray(v, dtype=float))) * (1.0 - fz(-np.asarray(v, dtype=float)))

    def joint_cdf(self, u, v):
        """``P[U <= u, V <= v]`` from the independent shocks."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        fx, fy, fz = self.dist_X.cdf, self.dist_Y.cdf, self.dist_Z.cdf
        if self.coupling == "max_max":
            return fx(u) * fy(v) * fz(np.minimum(u, v))
        if self.coupling == "max_min":
            # P[X<=u, Z<=u] - P[X<=u, v<Z<=u, Y>v]
            return fx(u) * (fz(u) - (1.0 - fy(v)) * np.maximum(fz(u) - fz(v), 0.0))
        # P[X<=u, Z<=u, Y>=-v, Z>=-v]
        return fx(u) * (1.0 - fy(-v)) * np.maximum(fz(u) - fz(-v), 0.0)

    def support_range(self) -> tuple[float, float]:
        lo = min(d.lo[0] for d in (self.dist_X, self.dist_Y, self.dist_Z))
        hi = max(d.hi[-1] for d in (self.dist_X, self.dist_Y, self.dist_Z))
        return float(lo), float(hi)

    def breakpoints(self) -> np.ndarray:
        pts = np.concatenate([d.breakpoints for d in (self.dist_X, self.dist_Y, self.dist_Z)])
        return np.unique(pts)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params),
                "dist_X": self.dist_X.to_dict(), "dist_Y": self.dist_Y.to_dict(),
                "dist_Z": self.dist_Z.to_dict(), "coupling": self.coupling,
                "target": self.target.to_dict()}


def build_spec(kind: str, mu: float | None = None, lam: float | None = None) -> ShockModelSpec:
    """Piecewise-uniform shocks whose coupled pair has the named target copula.

    MarshallCmu(mu)
        ``Y`` on [0,1], ``Z`` on [1,2], ``X`` with mass ``mu`` on [0,1] and
        ``1 - mu`` on [2,3].  Coupling ``max_max``.
    MaxminCmu(mu)
        ``X`` and ``Z`` as above, ``Y`` on [3,4].  Coupling ``max_min``.
    MaxminDmu(mu)
        ``X`` on [0,1], ``Z`` on [1,2], ``Y`` with mass ``1 - mu`` on [0,1]
        and ``mu`` on [2,3].  Coupling ``max_min``.
    RmmElammu(lam, mu)
        ``Y`` with mass ``1 - mu`` on [-1,0] and ``mu`` on [3,4]; ``Z`` with
        mass ``lam`` on [0,1] and ``1 - lam`` on [2,3]; ``X`` on [1,2].
        Coupling ``reflected``.
    """
    kind = canonical_model(kind)
    P = PiecewiseUniformDist
    if kind == "RmmElammu":
        if lam is None or mu is None:
            raise ValueError("RmmElammu needs lam and mu")
        target = cop.Elammu(lam, mu)
        lam, mu = target.lam, target.mu
        return ShockModelSpec(
            kind, {"lam": lam, "mu": mu},
            dist_X=P((_seg(1, 2, 1.0),)),
            dist_Y=P((_seg(-1, 0, 1.0 - mu), _seg(3, 4, mu))),
            dist_Z=P((_seg(0, 1, lam), _seg(2, 3, 1.0 - lam))),
            coupling="reflected", target=target)
    if mu is None:
        raise ValueError(f"{kind} needs mu")
    if lam is not None:
        raise ValueError(f"{kind} takes no lam")
    if kind == "MarshallCmu":
        target = cop.Cmu(mu)
        return ShockModelSpec(
            kind, {"mu": target.mu},
            dist_X=P((_seg(0, 1, target.mu), _seg(2, 3, 1.0 - target.mu))),
            dist_Y=P((_seg(0, 1, 1.0),)),
            dist_Z=P((_seg(1, 2, 1.0),)),
            coupling="max_max", target=target)
    if kind == "MaxminCmu":
        target = cop.Cmu(mu)
        return ShockModelSpec(
            kind, {"mu": target.mu},
            dist_X=P((_seg(0, 1, target.mu), _seg(2, 3, 1.0 - target.mu))),
            dist_Y=P((_seg(3, 4, 1.0),)),
            dist_Z=P((_seg(1, 2, 1.0),)),
            coupling="max_min", target=target)
    target = cop.Dmu(mu)
    return ShockModelSpec(
        kind, {"mu": target.mu},
        dist_X=P((_seg(0, 1, 1.0),)),
        dist_Y=P((_seg(0, 1, 1.0 - target.mu), _seg(2, 3, target.mu))),
        dist_Z=P((_seg(1, 2, 1.0),)),
        coupling="max_min", target=target)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class SpecReport:
    kind: str
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "residual": c.residual}
                           for c in self.checks]}


def _max_abs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _evaluation_points(spec: ShockModelSpec) -> np.ndarray:
    lo, hi = spec.support_range()
    bp = spec.breakpoints()
    mids = 0.5 * (bp[1:] + bp[:-1])
    grid = np.linspace(lo - 0.5, hi + 0.5, 401)
    pts = np.unique(np.concatenate([bp, mids, grid]))
    return np.concatenate([pts, -pts]) if spec.coupling == "reflected" else pts


def _displayed_forms(spec: ShockModelSpec, t: np.ndarray):
    """``F_U`` and ``F_V`` written block by block, independent of the coupling code."""
    fx, fy, fz = spec.dist_X.cdf, spec.dist_Y.cdf, spec.dist_Z.cdf
    Z = spec.dist_Z
    if spec.kind in ("MarshallCmu", "MaxminCmu"):
        mu, z2 = spec.params["mu"], Z.hi[-1]
        fu = np.where(t <= z2, mu * fz(t), fx(t))
        fv = fz(t)
        return fu, fv
    if spec.kind == "MaxminDmu":
        mu = spec.params["mu"]
        z1, z2 = Z.lo[0], Z.hi[-1]
        fu = fz(t)
        fv = np.where(t < z1, fy(t), np.where(t <= z2, 1.0 - mu + mu * fz(t), 1.0))
        return fu, fv
    lam, mu = spec.params["lam"], spec.params["mu"]
    z1, z3, z4 = Z.lo[0], Z.lo[-1], Z.hi[-1]
    if lam == 1.0:
        z3 = math.inf  # no late block of Z
    fu = np.where(t <= z3, lam * fx(t), fz(t))
    # Distribution of W = min(Y, Z); V = -W.
    fw = np.where(t < z1, fy(t), np.where(t <= z4, 1.0 - mu + mu * fz(t), 1.0))
    return fu, fw


def verify_spec(spec: ShockModelSpec) -> SpecReport:
    """Exact checks of a shock layout against its target copula.

    * block-ordering probabilities such as ``P[X <= Z] = mu``;
    * the product relations between the marginals of ``U, V`` and the shocks;
    * the blockwise displayed forms of ``F_U`` and ``F_V``;
    * CDF axioms for ``F_U, F_V``;
    * ``P[U <= u, V <= v] = C(F_U(u), F_V(v))`` on a grid.

    All CDFs are piecewise linear or quadratic between the breakpoints, so
    evaluating at breakpoints, midpoints and a fine grid is conclusive.
    """
    X, Y, Z = spec.dist_X, spec.dist_Y, spec.dist_Z
    checks = []

    def add(name, residual):
        checks.append(Check(name, bool(residual <= 1e-12), float(residual)))

    p = spec.params
    if spec.kind == "MarshallCmu":
        add("P[Y<=Z]=1", abs(prob_le(Y, Z) - 1.0))
        add("P[X<=Z]=mu", abs(prob_le(X, Z) - p["mu"]))
    elif spec.kind == "MaxminCmu":
        add("P[X<=Z]=mu", abs(prob_le(X, Z) - p["mu"]))
        add("P[Z<=Y]=1", abs(prob_le(Z, Y) - 1.0))
    elif spec.kind == "MaxminDmu":
        add("P[X<=Z]=1", abs(prob_le(X, Z) - 1.0))
        add("P[Y<=Z]=1-mu", abs(prob_le(Y, Z) - (1.0 - p["mu"])))
    else:
        add("P[Z<=X]=lam", abs(prob_le(Z, X) - p["lam"]))
        add("P[Y<=Z]=1-mu", abs(prob_le(Y, Z) - (1.0 - p["mu"])))

    t = _evaluation_points(spec)
    fu, fv = spec.cdf_U(t), spec.cdf_V(t)
    fx, fy, fz = X.cdf(t), Y.cdf(t), Z.cdf(t)
    add("F_U=F_X*F_Z", _max_abs(fu - fx * fz))
    if spec.coupling == "max_max":
        add("F_V=F_Y*F_Z", _max_abs(fv - fy * fz))
    elif spec.coupling == "max_min":
        add("1-F_V=(1-F_Y)(1-F_Z)", _max_abs((1.0 - fv) - (1.0 - fy) * (1.0 - fz)))
    else:
        add("F_V(-y)=(1-F_Y(y))(1-F_Z(y))", _max_abs(spec.cdf_V(-t) - (1.0 - fy) * (1.0 - fz)))

    du, dv = _displayed_forms(spec, t)
    add("F_U displayed form", _max_abs(fu - du))
    if spec.coupling == "reflected":
        add("F_W displayed form", _max_abs((1.0 - spec.cdf_V(-t)) - dv))
    else:
        add("F_V displayed form", _max_abs(fv - dv))

    order = np.argsort(t)
    for name, f in (("F_U", fu), ("F_V", fv)):
        fs = f[order]
        lo, hi = spec.support_range()
        span = max(abs(lo), abs(hi)) + 1.0
        ends = np.array([-span, span])
        fe = spec.cdf_U(ends) if name == "F_U" else spec.cdf_V(ends)
        bp = spec.breakpoints()
        bp = np.concatenate([bp, -bp])
        fb = spec.cdf_U(bp) if name == "F_U" else spec.cdf_V(bp)
        fb_right = spec.cdf_U(bp + 1e-13) if name == "F_U" else spec.cdf_V(bp + 1e-13)
        add(f"{name} nondecreasing", max(0.0, -float(np.min(np.diff(fs)))))
        add(f"{name} limits 0 and 1", max(abs(fe[0]), abs(fe[1] - 1.0)))
        add(f"{name} right-continuous", max(0.0, _max_abs(fb_right - fb) - 1e-12))

    grid = np.unique(np.concatenate([spec.breakpoints(), np.linspace(*spec.support_range(), 81)]))
    ug = grid
    vg = -grid if spec.coupling == "reflected" else grid
    U, V = np.meshgrid(ug, vg, indexing="ij")
    lhs = spec.joint_cdf(U, V)
    rhs = spec.target(spec.cdf_U(U), spec.cdf_V(V))
    add("H(u,v)=C(F_U(u),F_V(v))", _max_abs(lhs - rhs))
    return SpecReport(spec.kind, tuple(checks))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShockSample:
    u: np.ndarray
    v: np.ndarray
    cu: np.ndarray
    cv: np.ndarray

    @property
    def shock_points(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])

    @property
    def copula_points(self) -> np.ndarray:
        return np.column_stack([self.cu, self.cv])


def sample(spec: ShockModelSpec, n: int, seed: int) -> ShockSample:
    """Draw ``n`` pairs ``(U, V)`` and their probability-integral transforms.

    Each draw consumes three uniforms from ``rng_stream(seed)`` in the order
    ``X, Y, Z``.  Copula-scale coordinates apply the exact marginals, which
    are continuous, so ``(cu, cv)`` is distributed as the target copula.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    w = rng_stream(seed).random((n, 3))
    x = spec.dist_X.ppf(w[:, 0])
    y = spec.dist_Y.ppf(w[:, 1])
    z = spec.dist_Z.ppf(w[:, 2])
    u = np.maximum(x, z)
    if spec.coupling == "max_max":
        v = np.maximum(y, z)
    elif spec.coupling == "max_min":
        v = np.minimum(y, z)
    else:
        v = -np.minimum(y, z)
    return ShockSample(u, v, np.asarray(spec.cdf_U(u)), np.asarray(spec.cdf_V(v)))


def empirical_sup_distance(spec: ShockModelSpec, n: int, seed: int, m: int = 1000) -> tuple[float, float]:
    """Sup-distance between the rank copula of a sample and the target.

    Returns ``(lattice, bound)``.  ``lattice`` is the maximum over the
    ``(m+1)^2`` points ``(i/m, j/m)`` and so a lower estimate.  ``bound`` is
    an upper bound on the sup over the whole square, obtained from
    monotonicity of both functions inside each lattice cell.
    """
    s = sample(spec, n, seed)
    emp = cop.Empirical(s.shock_points)
    t = np.arange(m + 1) / m
    gx, gy = np.meshgrid(t, t, indexing="ij")
    ce = emp.on_lattice(m)
    ct = spec.target(gx, gy)
    lattice = float(np.max(np.abs(ce - ct)))
    bound = max(float(np.max(ce[1:, 1:] - ct[:-1, :-1])), float(np.max(ct[1:, 1:] - ce[:-1, :-1])))
    return lattice, max(bound, lattice)


def default_settings() -> list[tuple[str, dict]]:
    """Three parameter settings per shock model."""
    s = math.sqrt(2.0) / 2.0
    out = []
    for kind in ("MarshallCmu", "MaxminCmu", "MaxminDmu"):
        out += [(kind, {"mu": m}) for m in (1.0 / 3.0, 0.5, 2.0 / 3.0)]
    out += [("RmmElammu", {"lam": s, "mu": 1.0}),
            ("RmmElammu", {"lam": 0.5, "mu": 0.5}),
            ("RmmElammu", {"lam": 0.7, "mu": 0.3})]
    return out
