"""Piecewise-linear generator functions and their class conditions.

A :class:`Generator` is a piecewise-linear function on ``[0, 1]`` described by
knots ``0 = x_0 < x_1 < ... < x_n = 1``.  The knot ordinates at ``x_0`` and
``x_n`` are the one-sided limits; the actual values ``g(0)`` and ``g(1)`` may
differ from them, which gives the jump-at-an-endpoint functions used by
Marshall and maxmin copulas (for example ``g(0) = 0`` and ``g = 1`` on
``(0, 1]``, or a maxmin ``psi`` that only reaches 1 at ``t = 1``).

Because every piece is linear, checking a condition at the knots and knot
midpoints decides it exactly.  For instance ``f(x)/x`` restricted to a piece
``a + b x`` is ``a/x + b``, which is monotone, so comparing its values at the
two knots and the midpoint settles monotonicity on the whole piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .numerics import rng_stream

Endpoint = Union[float, str]

LIMIT = "limit"
CHECK_SLACK = 1e-12


class GeneratorClass(str, Enum):
    MarshallFG = "MarshallFG"
    ScriptF = "ScriptF"
    MaxminPhi = "MaxminPhi"
    MaxminPsi = "MaxminPsi"


class GeneratorClassError(ValueError):
    """A generator failed the class conditions required by an operation."""

    def __init__(self, report: "GeneratorClassReport"):
        first = report.violations[0] if report.violations else None
        super().__init__(f"generator is not in class {report.class_tested.value}: {first}")
        self.report = report


def _endpoint(value) -> Endpoint:
    if value is None or value == LIMIT:
        return LIMIT
    v = float(value)
    if not math.isfinite(v):
        raise ValueError("endpoint values must be finite")
    return v


@dataclass(frozen=True)
class Generator:
    """Piecewise-linear function on ``[0, 1]`` with optional endpoint jumps.

    Parameters
    ----------
    knots : sequence of (x, y)
        Strictly increasing abscissae ending at ``x = 1``.  If the first knot
        is not at ``x = 0`` the function is taken as continuous at 0 and
        ``value_at_zero`` must be a number.
    value_at_zero, value_at_one : float or "limit"
        Values at the endpoints.  ``"limit"`` means the one-sided limit.
    """

    knots: tuple
    value_at_zero: Endpoint = LIMIT
    value_at_one: Endpoint = LIMIT
    _xs: np.ndarray = field(init=False, repr=False, compare=False)
    _ys: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v0 = _endpoint(self.value_at_zero)
        v1 = _endpoint(self.value_at_one)
        pts = [(float(x), float(y)) for x, y in self.knots]
        if not pts:
            raise ValueError("a generator needs at least one knot")
        if pts[0][0] > 0.0:
            if v0 == LIMIT:
                raise ValueError("without a knot at x = 0, value_at_zero must be numeric")
            pts.insert(0, (0.0, v0))
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("knots must be finite")
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("knot abscissae must start at 0 and end at 1")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("knot abscissae must be strictly increasing")
        object.__setattr__(self, "knots", tuple(pts))
        object.__setattr__(self, "value_at_zero", v0)
        object.__setattr__(self, "value_at_one", v1)
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ys", ys)

    # -- evaluation -----------------------------------------------------

    @property
    def xs(self) -> np.ndarray:
        return self._xs

    @property
    def ys(self) -> np.ndarray:
        return self._ys

    @property
    def at_zero(self) -> float:
        """``g(0)`` with ``"limit"`` resolved."""
        return float(self._ys[0]) if self.value_at_zero == LIMIT else float(self.value_at_zero)

    @property
    def at_one(self) -> float:
        return float(self._ys[-1]) if self.value_at_one == LIMIT else float(self.value_at_one)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self._xs, self._ys)
        out = np.where(x == 0.0, self.at_zero, out)
        out = np.where(x == 1.0, self.at_one, out)
        return out if out.ndim else float(out)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        doc = {"value_at_zero": self.value_at_zero,
               "knots": [[x, y] for x, y in self.knots]}
        if self.value_at_one != LIMIT:
            doc["value_at_one"] = self.value_at_one
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Generator":
        if "knots" not in doc:
            raise ValueError("generator document needs 'knots'")
        return cls(tuple(tuple(k) for k in doc["knots"]),
                   doc.get("value_at_zero", LIMIT),
                   doc.get("value_at_one", LIMIT))


def eval_generator(g: Generator, x):
    """Evaluate ``g`` at ``x`` in ``[0, 1]``."""
    xa = np.asarray(x, dtype=float)
    if np.any(~((xa >= 0.0) & (xa <= 1.0))):
        raise ValueError("generator argument outside [0, 1]")
    return g(x)


def eval_fstar(g: Generator, x: float) -> float:
    """``g(x)/x`` for ``x > 0``; at 0 the right limit, possibly ``inf``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("argument outside [0, 1]")
    if x > 0.0:
        return float(g(x)) / x
    if g.ys[0] > 0.0:
        return math.inf
    if g.ys[0] < 0.0:
        return -math.inf
    return float((g.ys[1] - g.ys[0]) / (g.xs[1] - g.xs[0]))


# ---------------------------------------------------------------------------
# Class validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorClassReport:
    class_tested: GeneratorClass
    passed: bool
    violations: tuple = ()

    def __post_init__(self):
        if self.passed != (len(self.violations) == 0):
            raise ValueError("passed must be equivalent to an empty violation list")


def _sample_points(g: Generator):
    """Knots and knot midpoints on (0, 1), with one-sided values at 0 and 1."""
    xs, ys = g.xs, g.ys
    mx = 0.5 * (xs[:-1] + xs[1:])
    my = 0.5 * (ys[:-1] + ys[1:])
    px = np.empty(2 * xs.size - 1)
    py = np.empty_like(px)
    px[0::2], py[0::2] = xs, ys
    px[1::2], py[1::2] = mx, my
    return px, py


def _check(g: Generator, cls: GeneratorClass) -> list:
    v = []
    tol = CHECK_SLACK
    px, py = _sample_points(g)
    v0, v1 = g.at_zero, g.at_one
    # The function as a sequence: g(0), g(0+), samples..., g(1-), g(1).
    seq_x = np.concatenate([[0.0], px, [1.0]])
    seq_y = np.concatenate([[v0], py, [v1]])

    def add(x, name, r):
        v.append((float(x), name, float(r)))

    if cls in (GeneratorClass.MarshallFG, GeneratorClass.MaxminPhi):
        if abs(v0) > tol:
            add(0.0, "value_at_zero", v0)
        if abs(v1 - 1.0) > tol:
            add(1.0, "value_at_one", v1 - 1.0)
        for x, y in zip(seq_x, seq_y):
            if y < -tol or y > 1.0 + tol:
                add(x, "range", y if y < 0 else y - 1.0)
        d = np.diff(seq_y)
        for i in np.nonzero(d < -tol)[0]:
            add(seq_x[i + 1], "nondecreasing", d[i])
    elif cls is GeneratorClass.ScriptF:
        if abs(v0) > tol:
            add(0.0, "value_at_zero", v0)
        if abs(v1) > tol:
            add(1.0, "value_at_one", v1)
        for x, y in zip(seq_x, seq_y):
            if y < -tol:
                add(x, "nonnegative", y)
        d = np.diff(seq_y + seq_x)
        for i in np.nonzero(d < -tol)[0]:
            add(seq_x[i + 1], "f_plus_identity_nondecreasing", d[i])
    else:
        raise ValueError(f"unsupported class {cls!r}")

    # Ratio g(x)/x on (0, 1]: drop x = 0 and use the left limit at 1 as well
    # as g(1) itself.
    rx = np.concatenate([px[1:], [1.0]])
    ry = np.concatenate([py[1:], [v1]])
    ratio = ry / rx
    # With a positive right limit at 0 the ratio starts at +inf, which is fine.
    d = np.diff(ratio)
    for i in np.nonzero(d > tol * (1.0 + np.abs(ratio[:-1])))[0]:
        add(rx[i + 1], "ratio_nonincreasing", d[i])
    return v


def validate_class(g: Generator, cls) -> GeneratorClassReport:
    """Check the conditions of a generator class exactly.

    Classes
    -------
    MarshallFG, MaxminPhi
        Values in ``[0, 1]``, ``g(0) = 0``, ``g(1) = 1``, nondecreasing,
        ``g(x)/x`` nonincreasing on ``(0, 1]``.
    ScriptF
        ``g(0) = g(1) = 0``, ``g >= 0``, ``g(x) + x`` nondecreasing and
        ``g(x)/x`` nonincreasing on ``(0, 1]``.
    MaxminPsi
        ``psi`` is admissible iff ``x -> 1 - x - psi(1 - x)`` is in ScriptF;
        violations are reported at the corresponding ``psi`` abscissae.
    """
    cls = GeneratorClass(cls)
    if cls is GeneratorClass.MaxminPsi:
        viol = [(1.0 - x, name, r) for x, name, r in _check(_psi_to_g(g), GeneratorClass.ScriptF)]
    else:
        viol = _check(g, cls)
    return GeneratorClassReport(cls, not viol, tuple(viol))


def _require(g: Generator, cls: GeneratorClass):
    rep = validate_class(g, cls)
    if not rep.passed:
        raise GeneratorClassError(rep)


# ---------------------------------------------------------------------------
# phi/psi <-> f/g
# ---------------------------------------------------------------------------

def _psi_to_g(psi: Generator) -> Generator:
    # g(x) = 1 - x - psi(1 - x); knot t of psi lands at x = 1 - t.
    t, s = psi.xs[::-1], psi.ys[::-1]
    gx = 1.0 - t
    gx[0], gx[-1] = 0.0, 1.0
    gy = t - s
    v0 = LIMIT if psi.value_at_one == LIMIT else 1.0 - psi.at_one
    v1 = LIMIT if psi.value_at_zero == LIMIT else -psi.at_zero
    return Generator(tuple(zip(gx, gy)), v0, v1)


def _g_to_psi(g: Generator) -> Generator:
    # psi(t) = t - g(1 - t).
    x, y = g.xs[::-1], g.ys[::-1]
    t = 1.0 - x
    t[0], t[-1] = 0.0, 1.0
    s = t - y
    v0 = LIMIT if g.value_at_one == LIMIT else -g.at_one
    v1 = LIMIT if g.value_at_zero == LIMIT else 1.0 - g.at_zero
    return Generator(tuple(zip(t, s)), v0, v1)


def _shift(g: Generator, sign: float) -> Generator:
    ys = g.ys + sign * g.xs
    v0 = g.value_at_zero if g.value_at_zero == LIMIT else g.at_zero
    v1 = g.value_at_one if g.value_at_one == LIMIT else g.at_one + sign
    return Generator(tuple(zip(g.xs, ys)), v0, v1)


def phi_psi_to_fg(phi: Generator, psi: Generator) -> tuple[Generator, Generator]:
    """Maxmin generators ``(phi, psi)`` to the pair ``(f, g)`` in class F.

    ``f(x) = phi(x) - x`` and ``g(x) = 1 - x - psi(1 - x)``.
    """
    _require(phi, GeneratorClass.MaxminPhi)
    _require(psi, GeneratorClass.MaxminPsi)
    return _shift(phi, -1.0), _psi_to_g(psi)


def fg_to_phi_psi(f: Generator, g: Generator) -> tuple[Generator, Generator]:
    """Inverse of :func:`phi_psi_to_fg`: ``phi(t) = t + f(t)``, ``psi(t) = t - g(1 - t)``."""
    _require(f, GeneratorClass.ScriptF)
    _require(g, GeneratorClass.ScriptF)
    return _shift(f, 1.0), _g_to_psi(g)


# ---------------------------------------------------------------------------
# Named generators and random instances
# ---------------------------------------------------------------------------

def identity() -> Generator:
    return Generator(((0.0, 0.0), (1.0, 1.0)))


def zero() -> Generator:
    return Generator(((0.0, 0.0), (1.0, 0.0)))


def jump_at_zero() -> Generator:
    """0 at the origin and 1 on ``(0, 1]``."""
    return Generator(((0.0, 1.0), (1.0, 1.0)), 0.0)


def marshall_f_mu(mu: float) -> Generator:
    """``mu`` on ``(0, mu]``, ``x`` afterwards, 0 at the origin."""
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must be in (0, 1)")
    return Generator(((0.0, mu), (mu, mu), (1.0, 1.0)), 0.0)


def script_f_one_minus_x() -> Generator:
    """``1 - x`` on ``(0, 1]`` with ``f(0) = 0``."""
    return Generator(((0.0, 1.0), (1.0, 0.0)), 0.0)


def script_f_mu(mu: float) -> Generator:
    """``max(0, mu - x)`` on ``(0, 1]``, 0 at the origin."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must be in [0, 1]")
    if mu == 0.0:
        return zero()
    if mu == 1.0:
        return script_f_one_minus_x()
    return Generator(((0.0, mu), (mu, 0.0), (1.0, 0.0)), 0.0)


def script_f_lambda(lam: float) -> Generator:
    """Tent through ``(lam, 1 - lam)``: ``(1 - lam) x / lam`` then ``1 - x``."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must be in (0, 1]")
    if lam == 1.0:
        return zero()
    return Generator(((0.0, 0.0), (lam, 1.0 - lam), (1.0, 0.0)))


def _random_abscissae(rng: np.random.Generator) -> np.ndarray:
    n = int(rng.integers(1, 7))
    inner = np.unique(np.round(rng.uniform(0.02, 0.98, size=n), 6))
    return np.concatenate([[0.0], inner, [1.0]])


def _pick(rng, lo, hi):
    """Uniform on [lo, hi], landing on an endpoint 30% of the time."""
    r = rng.uniform()
    if r < 0.15:
        return lo
    if r < 0.30:
        return hi
    return lo + (hi - lo) * rng.uniform()


def random_generator(cls, seed: int) -> Generator:
    """A random piecewise-linear member of the class, built right to left."""
    cls = GeneratorClass(cls)
    rng = rng_stream(seed)
    xs = _random_abscissae(rng)
    n = xs.size - 1
    ys = np.empty(n + 1)
    if cls in (GeneratorClass.MarshallFG, GeneratorClass.MaxminPhi):
        ys[n] = 1.0
        for i in range(n - 1, 0, -1):
            ys[i] = _pick(rng, ys[i + 1] * xs[i] / xs[i + 1], ys[i + 1])
        ys[0] = _pick(rng, 0.0, ys[1])
        return Generator(tuple(zip(xs, ys)), 0.0)
    f = _random_script_f(rng, xs)
    if cls is GeneratorClass.ScriptF:
        return f
    return _g_to_psi(f)


def _random_script_f(rng, xs) -> Generator:
    n = xs.size - 1
    ys = np.empty(n + 1)
    ys[n] = 0.0
    for i in range(n - 1, 0, -1):
        ys[i] = _pick(rng, ys[i + 1] * xs[i] / xs[i + 1], ys[i + 1] + xs[i + 1] - xs[i])
    ys[0] = _pick(rng, 0.0, min(1.0, ys[1] + xs[1]))
    return Generator(tuple(zip(xs, ys)), 0.0)
