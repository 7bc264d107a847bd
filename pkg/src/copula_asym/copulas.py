"""Bivariate copula families, wrappers and grid checks.

Every copula is an immutable object that evaluates elementwise on broadcast
``numpy`` arrays.  Closed-form families validate their parameters when
constructed.  Evaluation performs no domain checks, because the quadrature and
sup-search loops call it millions of times; use :func:`eval_copula` for a
checked scalar evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.stats import rankdata

from . import generators as gen
from .generators import Generator, GeneratorClass, GeneratorClassError, validate_class

SLACK = 1e-12
SQRT5 = math.sqrt(5.0)
NLAMBDA_MAX = (3.0 - SQRT5) / 2.0


def _arrays(x, y):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return x, y


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _check_range(name, value, lo, hi, lo_open=False, hi_open=False):
    v = float(value)
    ok_lo = v > lo if lo_open else v >= lo
    ok_hi = v < hi if hi_open else v <= hi
    if not (math.isfinite(v) and ok_lo and ok_hi):
        left = "(" if lo_open else "["
        right = ")" if hi_open else "]"
        raise ValueError(f"{name}={value!r} outside {left}{lo}, {hi}{right}")
    return v


class Copula:
    """Base class: subclasses implement ``_eval`` on broadcast float arrays."""

    kind: str = "copula"

    def _eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, y):
        x, y = _arrays(x, y)
        return _out(self._eval(x, y))

    @property
    def params(self) -> dict:
        return {}

    def transpose(self) -> "Copula":
        return Transpose(self)

    def survival(self) -> "Copula":
        return Survival(self)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({inner})"


# ---------------------------------------------------------------------------
# Frechet bounds and independence
# ---------------------------------------------------------------------------

class FrechetM(Copula):
    kind = "m"

    def _eval(self, x, y):
        return np.minimum(x, y)


class FrechetW(Copula):
    kind = "w"

    def _eval(self, x, y):
        return np.maximum(x + y - 1.0, 0.0)


class Product(Copula):
    kind = "pi"

    def _eval(self, x, y):
        return x * y


# ---------------------------------------------------------------------------
# Generator-built families
# ---------------------------------------------------------------------------

def _require(g: Generator, cls: GeneratorClass, label: str):
    rep = validate_class(g, cls)
    if not rep.passed:
        raise GeneratorClassError(rep)


class _GeneratorCopula(Copula):
    f_class: GeneratorClass

    def __init__(self, f: Generator, g: Generator, validate: bool = True):
        if validate:
            _require(f, self.f_class, "f")
            _require(g, self.f_class, "g")
        self.f = f
        self.g = g

    def to_dict(self):
        return {"kind": self.kind, "params": {}, "f": self.f.to_dict(), "g": self.g.to_dict()}

    def __repr__(self):
        return f"{type(self).__name__}(f={self.f!r}, g={self.g!r})"


class Marshall(_GeneratorCopula):
    """``min{y f(x), x g(y)}``."""

    kind = "marshall"
    f_class = GeneratorClass.MarshallFG

    def _eval(self, x, y):
        return np.minimum(y * self.f(x), x * self.g(y))


class Maxmin(_GeneratorCopula):
    """``min{x, x y + f(x) g(1 - y)}`` with ``f, g`` in class F."""

    kind = "maxmin"
    f_class = GeneratorClass.ScriptF

    def _eval(self, x, y):
        return np.minimum(x, x * y + self.f(x) * self.g(1.0 - y))

    @classmethod
    def from_phi_psi(cls, phi: Generator, psi: Generator) -> "Maxmin":
        f, g = gen.phi_psi_to_fg(phi, psi)
        return cls(f, g)

    def phi_psi(self) -> tuple[Generator, Generator]:
        return gen.fg_to_phi_psi(self.f, self.g)

    def eval_phi_psi(self, x, y):
        """The same copula through ``min{x, phi(x) y - phi(x) psi(y) + x psi(y)}``."""
        phi, psi = self.phi_psi()
        x, y = _arrays(x, y)
        px, qy = phi(x), psi(y)
        return _out(np.minimum(x, px * y - px * qy + x * qy))


class RMM(_GeneratorCopula):
    """Reflected maxmin: ``max{0, x y - f(x) g(y)}``."""

    kind = "rmm"
    f_class = GeneratorClass.ScriptF

    def _eval(self, x, y):
        return np.maximum(0.0, x * y - self.f(x) * self.g(y))


# ---------------------------------------------------------------------------
# Closed-form extremal families
# ---------------------------------------------------------------------------

class Cmu(Copula):
    kind = "cmu"

    def __init__(self, mu: float):
        self.mu = _check_range("mu", mu, 0.0, 1.0, True, True)

    @property
    def params(self):
        return {"mu": self.mu}

    def _eval(self, x, y):
        mu = self.mu
        return np.where(x <= mu * y, x, np.where(x <= mu, mu * y, x * y))

    def as_marshall(self) -> Marshall:
        return Marshall(gen.marshall_f_mu(self.mu), gen.jump_at_zero())

    def as_maxmin(self) -> Maxmin:
        return Maxmin(gen.script_f_mu(self.mu), gen.script_f_one_minus_x())


class Dmu(Copula):
    kind = "dmu"

    def __init__(self, mu: float):
        self.mu = _check_range("mu", mu, 0.0, 1.0, True, True)

    @property
    def params(self):
        return {"mu": self.mu}

    def _eval(self, x, y):
        mu = self.mu
        return np.where(y >= 1.0 - mu + mu * x, x,
                        np.where(y >= 1.0 - mu, y - (1.0 - mu) * (1.0 - x), x * y))

    def as_maxmin(self) -> Maxmin:
        return Maxmin(gen.script_f_one_minus_x(), gen.script_f_mu(self.mu))


class Elammu(Copula):
    kind = "elammu"

    def __init__(self, lam: float, mu: float):
        self.lam = _check_range("lam", lam, 0.0, 1.0, lo_open=True)
        self.mu = _check_range("mu", mu, 0.0, 1.0)

    @property
    def params(self):
        return {"lam": self.lam, "mu": self.mu}

    def _eval(self, x, y):
        lam, mu = self.lam, self.mu
        low = mu * (1.0 - lam)
        zero = y <= np.minimum(mu * (1.0 - x), low)
        ramp = (x <= lam) & (y >= low) & (y <= mu)
        prod = y >= mu
        return np.where(zero, 0.0,
                        np.where(ramp, x / lam * (y - low),
                                 np.where(prod, x * y, mu * x + y - mu)))

    def as_rmm(self) -> RMM:
        return RMM(gen.script_f_lambda(self.lam), gen.script_f_mu(self.mu))


class Wlambda(Copula):
    """``max{M(x, y - lam), W(x, y)}``: mass on two line segments."""

    kind = "wlambda"

    def __init__(self, lam: float):
        self.lam = _check_range("lam", lam, 0.0, 1.0)

    @property
    def params(self):
        return {"lam": self.lam}

    def _eval(self, x, y):
        return np.maximum(np.minimum(x, y - self.lam), np.maximum(x + y - 1.0, 0.0))


class Nlambda(Copula):
    """``max{W(x, y), min{y - lam, x y}}``."""

    kind = "nlambda"

    def __init__(self, lam: float):
        self.lam = _check_range("lam", lam, 0.0, NLAMBDA_MAX)

    @property
    def params(self):
        return {"lam": self.lam}

    def _eval(self, x, y):
        return np.maximum(np.maximum(x + y - 1.0, 0.0), np.minimum(y - self.lam, x * y))


class Pab(Copula):
    """PQD family with a linear ridge of slope one above the diagonal.

    Parametrized by ``a <= b`` with ``2a/(a+1) <= b``; write ``d = b - a``.
    """

    kind = "pab"

    def __init__(self, a: float, b: float):
        self.a = _check_range("a", a, 0.0, 1.0)
        self.b = _check_range("b", b, 0.0, 1.0)
        if self.b < 2.0 * self.a / (self.a + 1.0) - SLACK:
            raise ValueError("Pab needs b >= 2a/(a+1)")

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    def _eval(self, x, y):
        d = self.b - self.a
        left = x <= 1.0 - d
        return np.where(left & (y >= x + d), x,
                        np.where(left & (y >= d), x * y + (1.0 - d - x) * (y - d), x * y))


class Checkerboard(Copula):
    """Copula with a density that is constant on the cells of a rectangular grid.

    Parameters
    ----------
    x_breaks, y_breaks : increasing sequences from 0 to 1
    masses : 2-D array, ``masses[i, j]`` is the mass of cell
        ``[x_i, x_{i+1}] x [y_j, y_{j+1}]``.  Rows must sum to the x-widths and
        columns to the y-widths.
    """

    kind = "checkerboard"

    def __init__(self, x_breaks: Sequence[float], y_breaks: Sequence[float], masses):
        xb = np.asarray(x_breaks, dtype=float)
        yb = np.asarray(y_breaks, dtype=float)
        m = np.asarray(masses, dtype=float)
        if xb[0] != 0.0 or xb[-1] != 1.0 or yb[0] != 0.0 or yb[-1] != 1.0:
            raise ValueError("breaks must start at 0 and end at 1")
        if np.any(np.diff(xb) < 0) or np.any(np.diff(yb) < 0):
            raise ValueError("breaks must be nondecreasing")
        if m.shape != (xb.size - 1, yb.size - 1):
            raise ValueError("masses shape must match the break grid")
        if np.any(m < -SLACK):
            raise ValueError("masses must be nonnegative")
        if (np.max(np.abs(m.sum(axis=1) - np.diff(xb))) > 1e-12
                or np.max(np.abs(m.sum(axis=0) - np.diff(yb))) > 1e-12):
            raise ValueError("cell masses do not give uniform margins")
        self.x_breaks, self.y_breaks, self.masses = xb, yb, np.maximum(m, 0.0)

    @property
    def params(self):
        return {"x_breaks": self.x_breaks.tolist(), "y_breaks": self.y_breaks.tolist(),
                "masses": self.masses.tolist()}

    @staticmethod
    def _fraction(t, breaks):
        lo, w = breaks[:-1], np.diff(breaks)
        safe = np.where(w > 0, w, 1.0)
        frac = np.clip((t[..., None] - lo) / safe, 0.0, 1.0)
        return np.where(w > 0, frac, (t[..., None] >= lo).astype(float))

    def _eval(self, x, y):
        fx = self._fraction(x, self.x_breaks)
        fy = self._fraction(y, self.y_breaks)
        return np.einsum("...i,ij,...j->...", fx, self.masses, fy)


class Qab(Checkerboard):
    """Absolutely continuous PQD copula, uniform density on a 3x3 grid.

    With breaks ``{0, a, b, 1}`` on both axes the cell masses are
    ``2a - b`` (bottom-left), ``b - a`` on the three cells
    ``(1, 2), (2, 3), (3, 1)`` and ``1 + a - 2b`` in the top-right cell.
    ``Q(a, b) = a`` and ``Q(b, a) = 2a - b``.
    """

    kind = "qab"

    def __init__(self, a: float, b: float):
        a = _check_range("a", a, 0.0, 1.0, True, True)
        b = _check_range("b", b, a, 2.0 * a / (a + 1.0))
        self.a, self.b = a, b
        d = b - a
        m = np.array([[2 * a - b, d, 0.0],
                      [0.0, 0.0, d],
                      [d, 0.0, 1.0 + a - 2 * b]])
        super().__init__([0.0, a, b, 1.0], [0.0, a, b, 1.0], m)

    @property
    def params(self):
        return {"a": self.a, "b": self.b}


def pqd_checkerboard(a: float, b: float) -> Checkerboard:
    """PQD checkerboard with ``C(a, b) - C(b, a) = a (1 - b)``.

    Needs ``a < b`` and ``b (1 + a) >= 2a``.
    """
    if not (0.0 < a < b < 1.0) or b * (1.0 + a) < 2.0 * a - SLACK:
        raise ValueError("pqd_checkerboard needs 0 < a < b < 1 and b >= 2a/(1+a)")
    s = a * b
    r = a * (1.0 - b)
    m = np.array([[s, r, 0.0],
                  [0.0, b - 2 * a + s, r],
                  [r, 0.0, (1.0 - a) * (1.0 - b)]])
    return Checkerboard([0.0, a, b, 1.0], [0.0, a, b, 1.0], m)


# ---------------------------------------------------------------------------
# Wrappers
# ---------------------------------------------------------------------------

class Transpose(Copula):
    kind = "transpose"

    def __init__(self, inner: Copula):
        self.inner = inner

    def _eval(self, x, y):
        return self.inner._eval(y, x)

    def to_dict(self):
        return {"kind": self.kind, "params": {"inner": self.inner.to_dict()}}

    def __repr__(self):
        return f"Transpose({self.inner!r})"


class Survival(Copula):
    kind = "survival"

    def __init__(self, inner: Copula):
        self.inner = inner

    def _eval(self, x, y):
        return x + y - 1.0 + self.inner._eval(1.0 - x, 1.0 - y)

    def to_dict(self):
        return {"kind": self.kind, "params": {"inner": self.inner.to_dict()}}

    def __repr__(self):
        return f"Survival({self.inner!r})"


class Empirical(Copula):
    """Rank-based empirical copula of a bivariate sample.

    ``C_n(x, y) = #{i : R_i <= n x, S_i <= n y} / n`` where ``R, S`` are the
    ranks (ties get the maximal rank).
    """

    kind = "empirical"
    _CHUNK = 1 << 22

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("empirical copula needs at least one (u, v) pair")
        self.points = pts
        self.n = pts.shape[0]
        self.r = rankdata(pts[:, 0], method="max").astype(np.int64)
        self.s = rankdata(pts[:, 1], method="max").astype(np.int64)

    @property
    def params(self):
        return {"points": self.points.tolist()}

    def _thresholds(self, t):
        # Largest integer k with k <= n t, tolerant to representation error
        # of lattice points such as i/n.
        return np.floor(self.n * t + 1e-9).astype(np.int64)

    def _eval(self, x, y):
        kx = self._thresholds(x).ravel()
        ky = self._thresholds(y).ravel()
        out = np.empty(kx.size)
        step = max(1, self._CHUNK // self.n)
        for i in range(0, kx.size, step):
            a = kx[i:i + step, None]
            b = ky[i:i + step, None]
            out[i:i + step] = np.count_nonzero((self.r <= a) & (self.s <= b), axis=1)
        return (out / self.n).reshape(x.shape)

    def on_lattice(self, m: int) -> np.ndarray:
        """Values at ``(i/m, j/m)`` for ``i, j = 0..m`` as an ``(m+1, m+1)`` array.

        Exact integer bookkeeping: point ``k`` is counted at lattice index
        ``ceil(R_k m / n)``.
        """
        ix = (self.r * m + self.n - 1) // self.n
        iy = (self.s * m + self.n - 1) // self.n
        h = np.zeros((m + 1, m + 1))
        np.add.at(h, (ix, iy), 1.0)
        return np.cumsum(np.cumsum(h, axis=0), axis=1) / self.n


def empirical_copula(points) -> Empirical:
    return Empirical(points)


def sup_distance_on_lattice(emp: Empirical, c: Copula, m: int = 1000) -> float:
    """``max |C_n - C|`` over the ``(m+1)^2`` lattice ``(i/m, j/m)``."""
    t = np.arange(m + 1) / m
    gx, gy = np.meshgrid(t, t, indexing="ij")
    return float(np.max(np.abs(emp.on_lattice(m) - c(gx, gy))))


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    boundary_ok: bool
    two_increasing_ok: bool
    worst_rectangle: tuple
    grid_n: int
    boundary_residual: float = 0.0

    @property
    def passed(self) -> bool:
        return self.boundary_ok and self.two_increasing_ok

    def to_dict(self) -> dict:
        return {"boundary_ok": self.boundary_ok, "two_increasing_ok": self.two_increasing_ok,
                "worst_rectangle": list(self.worst_rectangle), "grid_n": self.grid_n,
                "boundary_residual": self.boundary_residual}


def _field(c, x, y):
    return np.asarray(c(x, y), dtype=float) * np.ones_like(x)


def check_axioms(c, n: int) -> AxiomReport:
    """Boundary conditions and 2-increasingness on an ``n x n`` lattice.

    ``c`` may be any vectorized callable, not only a :class:`Copula`.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    t = np.linspace(0.0, 1.0, n)
    zeros, ones = np.zeros(n), np.ones(n)
    resid = max(np.max(np.abs(_field(c, t, zeros))),
                np.max(np.abs(_field(c, zeros, t))),
                np.max(np.abs(_field(c, t, ones) - t)),
                np.max(np.abs(_field(c, ones, t) - t)))
    gx, gy = np.meshgrid(t, t, indexing="ij")
    z = _field(c, gx, gy)
    vol = z[1:, 1:] - z[:-1, 1:] - z[1:, :-1] + z[:-1, :-1]
    i, j = np.unravel_index(int(np.argmin(vol)), vol.shape)
    worst = (float(t[i]), float(t[i + 1]), float(t[j]), float(t[j + 1]), float(vol[i, j]))
    return AxiomReport(bool(resid <= SLACK), bool(worst[4] >= -SLACK), worst, n, float(resid))


@dataclass(frozen=True)
class QuadrantClass:
    classification: str
    worst_violation: tuple

    def to_dict(self) -> dict:
        (x, y), r = self.worst_violation
        return {"classification": self.classification, "worst_violation": [[x, y], r]}


def classify_quadrant(c, n: int) -> QuadrantClass:
    """PQD / NQD / Both / Neither from the sign of ``C - xy`` on a lattice.

    ``worst_violation`` holds the point where ``C - xy`` comes closest to
    breaking the reported class (or the most negative point for Neither).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    t = np.linspace(0.0, 1.0, n)
    gx, gy = np.meshgrid(t, t, indexing="ij")
    d = _field(c, gx, gy) - gx * gy
    lo, hi = int(np.argmin(d)), int(np.argmax(d))
    dmin, dmax = float(d.flat[lo]), float(d.flat[hi])

    def at(k):
        return (float(gx.flat[k]), float(gy.flat[k]))

    if dmin >= -SLACK and dmax <= SLACK:
        k = lo if -dmin > dmax else hi
        return QuadrantClass("Both", (at(k), float(d.flat[k])))
    if dmin >= -SLACK:
        return QuadrantClass("PQD", (at(lo), dmin))
    if dmax <= SLACK:
        return QuadrantClass("NQD", (at(hi), dmax))
    return QuadrantClass("Neither", (at(lo), dmin))


def eval_copula(c: Copula, x: float, y: float) -> float:
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError("(x, y) must lie in the unit square")
    return float(c(x, y))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_ALIASES = {
    "m": "m", "frechetm": "m", "w": "w", "frechetw": "w", "pi": "pi", "product": "pi",
    "marshall": "marshall", "maxmin": "maxmin", "rmm": "rmm", "cmu": "cmu", "dmu": "dmu",
    "elammu": "elammu", "wlambda": "wlambda", "nlambda": "nlambda", "pab": "pab",
    "qab": "qab", "checkerboard": "checkerboard", "transpose": "transpose",
    "survival": "survival", "empirical": "empirical",
}

_SIMPLE = {"m": FrechetM, "w": FrechetW, "pi": Product}
_PARAMETRIC = {
    "cmu": (Cmu, ("mu",)),
    "dmu": (Dmu, ("mu",)),
    "elammu": (Elammu, ("lam", "mu")),
    "wlambda": (Wlambda, ("lam",)),
    "nlambda": (Nlambda, ("lam",)),
    "pab": (Pab, ("a", "b")),
    "qab": (Qab, ("a", "b")),
}
_GENERATED = {"marshall": Marshall, "maxmin": Maxmin, "rmm": RMM}


def canonical_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown copula kind {kind!r}") from None


def from_dict(doc: dict[str, Any]) -> Copula:
    kind = canonical_kind(doc.get("kind", ""))
    params = doc.get("params", {}) or {}
    if kind in _SIMPLE:
        return _SIMPLE[kind]()
    if kind in _PARAMETRIC:
        cls, names = _PARAMETRIC[kind]
        missing = [n for n in names if n not in params]
        if missing:
            raise ValueError(f"{kind} needs params {missing}")
        return cls(*(float(params[n]) for n in names))
    if kind in _GENERATED:
        if "f" not in doc or "g" not in doc:
            raise ValueError(f"{kind} needs generator documents 'f' and 'g'")
        return _GENERATED[kind](Generator.from_dict(doc["f"]), Generator.from_dict(doc["g"]))
    if kind == "checkerboard":
        return Checkerboard(params["x_breaks"], params["y_breaks"], params["masses"])
    if kind in ("transpose", "survival"):
        inner = from_dict(params["inner"])
        return Transpose(inner) if kind == "transpose" else Survival(inner)
    return Empirical(params["points"])


def parse_inline(text: str) -> Copula:
    """Parse ``kind`` or ``kind:p1,p2``; wrappers nest as ``transpose:cmu:0.5``."""
    head, _, rest = text.strip().partition(":")
    kind = canonical_kind(head)
    if kind in ("transpose", "survival"):
        if not rest:
            raise ValueError(f"{kind} needs an inner copula")
        inner = parse_inline(rest)
        return Transpose(inner) if kind == "transpose" else Survival(inner)
    if kind in _SIMPLE:
        if rest:
            raise ValueError(f"{kind} takes no parameters")
        return _SIMPLE[kind]()
    if kind in _PARAMETRIC:
        cls, names = _PARAMETRIC[kind]
        values = [float(v) for v in rest.split(",")] if rest else []
        if len(values) != len(names):
            raise ValueError(f"{kind} takes {len(names)} parameter(s): {','.join(names)}")
        return cls(*values)
    raise ValueError(f"{kind} cannot be given inline; use a JSON document")
