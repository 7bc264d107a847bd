"""Maximal asymmetry functions, pointwise bounds and the measures mu_p.

For a family of copulas, ``dstar(family, x, y)`` is the largest possible
value of ``|C(x, y) - C(y, x)|`` over the family.  The bound functions
``bound_F``, ``bound_G``, ``bound_Ghat`` and ``bound_H`` dominate that
difference for Marshall, maxmin and reflected maxmin copulas respectively.
They are written on the half ``x <= y`` (``x + z <= 1`` for ``G``), and the
``dstar`` functions extend them symmetrically.

``mu_p`` measures non-exchangeability as the ``L_p`` distance between a
copula and its transpose, and ``attainment_witness`` returns a family member
that reaches ``dstar`` at a given point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import copulas as cop
from .numerics import (INTEGRAL_TOL, SUP_TOL, Tolerance, complete_beta, incomplete_beta,
                       integrate2d, sup_on_square)

SQRT2 = math.sqrt(2.0)
SQRT5 = math.sqrt(5.0)
DOMAIN_SLACK = 1e-12


class FamilyTag(str, Enum):
    AllCopulas = "AllCopulas"
    PQD = "PQD"
    NQD = "NQD"
    Marshall = "Marshall"
    Maxmin = "Maxmin"
    RMM = "RMM"


_FAMILY_ALIASES = {
    "allcopulas": FamilyTag.AllCopulas, "all": FamilyTag.AllCopulas, "c": FamilyTag.AllCopulas,
    "pqd": FamilyTag.PQD, "nqd": FamilyTag.NQD, "marshall": FamilyTag.Marshall,
    "maxmin": FamilyTag.Maxmin, "rmm": FamilyTag.RMM,
}


def family_tag(name) -> FamilyTag:
    if isinstance(name, FamilyTag):
        return name
    try:
        return _FAMILY_ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown family {name!r}") from None


def _div(a, b):
    """``a / b`` with 0 wherever ``b == 0`` (the pieces vanish there)."""
    b = np.asarray(b, dtype=float)
    safe = np.where(b != 0.0, b, 1.0)
    return np.where(b != 0.0, np.asarray(a, dtype=float) / safe, 0.0)


def _arrays(x, y):
    return np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def _need_ordered(x, y):
    if np.any(x > y + DOMAIN_SLACK):
        raise ValueError("this bound is defined for y >= x; symmetrize the arguments")


# ---------------------------------------------------------------------------
# Bound functions
# ---------------------------------------------------------------------------

def _F(x, y):
    return np.where(x <= y * y, x * (1.0 - y), _div(x * (y - x), y))


def _G(x, z):
    # On x + z = 1 both ratio pieces apply and G vanishes; the slack keeps
    # that true when 1 - x - z rounds to a tiny negative number.
    w = np.maximum(1.0 - x - z, 0.0)
    e = 1e-14
    first = (1.0 - np.sqrt(x) <= z + e) & (z <= np.minimum(x, 1.0 - x) + e)
    second = (1.0 - np.sqrt(z) <= x + e) & (x <= np.minimum(z, 1.0 - z) + e)
    return np.where(first, _div(x * w, 1.0 - z), np.where(second, _div(z * w, 1.0 - x), x * z))


def _Ghat(x, y):
    first = (np.maximum(1.0 - y, y * y) <= x) & (x <= y)
    second = (x <= y) & (y <= np.minimum(2.0 * x - x * x, 1.0 - x))
    return np.where(first, _div(x * (y - x), y),
                    np.where(second, _div((1.0 - y) * (y - x), 1.0 - x), x * (1.0 - y)))


def _H(x, y):
    q = y * (1.0 - y)
    return np.where((q <= x) & (x <= 1.0 - y), _div(x * (y - x), y),
                    np.where(x >= 1.0 - y, _div((y - x) * (1.0 - y), y), x * y))


def bound_F(x, y):
    """Marshall bound on ``|C(x, y) - C(y, x)|`` for ``x <= y``.

    ``x (1 - y)`` below the parabola ``x = y^2`` and ``x (y - x) / y`` above
    it.  The maximum is ``4/27`` at ``(4/9, 2/3)``.
    """
    x, y = _arrays(x, y)
    _need_ordered(x, y)
    return _out(_F(x, y))


def bound_G(x, z):
    """Maxmin bound in the coordinates ``(x, z)`` with ``z = 1 - y``, for ``x + z <= 1``."""
    x, z = _arrays(x, z)
    if np.any(x + z > 1.0 + DOMAIN_SLACK) or np.any((x < 0) | (z < 0)):
        raise ValueError("bound_G is defined on x, z >= 0 with x + z <= 1")
    return _out(_G(np.clip(x, 0, 1), np.clip(z, 0, 1)))


def bound_Ghat(x, y):
    """Maxmin bound in the original coordinates, ``x <= y``; equals ``G(x, 1 - y)``."""
    x, y = _arrays(x, y)
    _need_ordered(x, y)
    return _out(_Ghat(x, y))


def bound_H(x, y):
    """Reflected maxmin bound for ``x <= y``; maximum ``3 - 2 sqrt 2``."""
    x, y = _arrays(x, y)
    _need_ordered(x, y)
    return _out(_H(x, y))


# ---------------------------------------------------------------------------
# Maximal asymmetry functions
# ---------------------------------------------------------------------------

def _dstar_all(x, y):
    return np.minimum.reduce([x, y, 1.0 - x, 1.0 - y, np.abs(x - y)])


def _dstar_pqd(x, y):
    return np.minimum.reduce([x * (1.0 - y), (1.0 - x) * y, np.abs(x - y)])


def _dstar_nqd(x, y):
    return np.minimum.reduce([x * y, (1.0 - x) * (1.0 - y), np.abs(x - y)])


def _dstar_marshall(x, y):
    return np.select(
        [x <= y * y, (y * y <= x) & (x <= y), y <= x * x],
        [x * (1.0 - y), _div(x, y) * (y - x), y * (1.0 - x)],
        _div(y, x) * (x - y))


def _dstar_maxmin(x, y):
    # Pieces in order, first match wins; the display is continuous so the
    # boundary convention does not matter.
    conds = [
        (np.maximum(1.0 - y, y * y) <= x) & (x <= y),
        (x <= y) & (y <= np.minimum(2.0 * x - x * x, 1.0 - x)),
        y >= np.minimum(np.sqrt(x), 2.0 * x - x * x),
        x >= np.minimum(np.sqrt(y), 2.0 * y - y * y),
        (np.maximum(1.0 - x, x * x) <= y) & (y <= x),
    ]
    vals = [
        _div(x, y) * (y - x),
        _div(1.0 - y, 1.0 - x) * (y - x),
        x * (1.0 - y),
        y * (1.0 - x),
        _div(y, x) * (x - y),
    ]
    return np.select(conds, vals, _div(1.0 - x, 1.0 - y) * (x - y))


def _dstar_rmm(x, y):
    conds = [
        (y * (1.0 - y) <= x) & (x <= np.minimum(y, 1.0 - y)),
        (1.0 - y <= x) & (x <= y),
        (x <= y * (1.0 - y)) | (y <= x * (1.0 - x)),
        (x * (1.0 - x) <= y) & (y <= np.minimum(x, 1.0 - x)),
    ]
    vals = [
        _div(x, y) * (y - x),
        _div(1.0 - y, y) * (y - x),
        x * y,
        _div(y, x) * (x - y),
    ]
    return np.select(conds, vals, _div(1.0 - x, x) * (x - y))


_DSTAR = {
    FamilyTag.AllCopulas: _dstar_all,
    FamilyTag.PQD: _dstar_pqd,
    FamilyTag.NQD: _dstar_nqd,
    FamilyTag.Marshall: _dstar_marshall,
    FamilyTag.Maxmin: _dstar_maxmin,
    FamilyTag.RMM: _dstar_rmm,
}


def dstar(family, x, y):
    """Maximal asymmetry function of a family at ``(x, y)`` (vectorized)."""
    fn = _DSTAR[family_tag(family)]
    x, y = _arrays(x, y)
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
        raise ValueError("(x, y) must lie in the unit square")
    return _out(fn(x, y))


def dstar_field(family):
    """Unchecked vectorized ``(x, y) -> dstar`` for quadrature and sup search."""
    return _DSTAR[family_tag(family)]


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasureResult:
    p: float
    value: float
    err: float
    witness: Optional[tuple] = None

    def to_dict(self) -> dict:
        doc = {"p": "inf" if math.isinf(self.p) else self.p,
               "value": self.value, "err": self.err}
        if self.witness is not None:
            doc["witness"] = [self.witness[0], self.witness[1]]
        return doc


def asymmetry_field(c):
    """``(x, y) -> |C(x, y) - C(y, x)|`` for quadrature and sup search."""
    return lambda x, y: np.abs(c(x, y) - c(y, x))


def mu_p(c, p, tol: Optional[Tolerance] = None) -> MeasureResult:
    """``L_p`` distance between ``c`` and its transpose.

    Finite ``p`` integrates ``|C - C^t|^p`` over ``{x <= y}`` and doubles it.
    The error reported is the induced bound on the ``1/p``-th root.
    ``p = inf`` runs :func:`~copula_asym.numerics.sup_on_square`; its error
    is the Lipschitz bound ``2 * cell_size``.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError("p must be >= 1 or inf")
    field = asymmetry_field(c)
    if math.isinf(p):
        res = sup_on_square(field, tol or SUP_TOL)
        return MeasureResult(p, res.value, 2.0 * res.cell_size, res.argmax)
    tol = tol or INTEGRAL_TOL
    half = integrate2d(field, "triangle", p, tol)
    total = max(2.0 * half, 0.0)
    bound = 2.0 * max(tol.abs_tol, tol.rel_tol * abs(half))
    value = total ** (1.0 / p)
    err = (total + bound) ** (1.0 / p) - value
    return MeasureResult(p, value, err)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def marshall_mu_p_bound(p: float) -> float:
    """Upper bound on ``mu_p`` over Marshall copulas, in terms of the complete beta."""
    if not p >= 1.0:
        raise ValueError("p must be >= 1")
    b = complete_beta(p + 1.0, 2.0 * p + 3.0)
    return (2.0 * (2.0 * p + 3.0) * b / (p * p + 3.0 * p + 2.0)) ** (1.0 / p)


def mu_p_c23_closed(p: float) -> float:
    """``mu_p(C_{2/3})`` in closed form."""
    if not p >= 1.0:
        raise ValueError("p must be >= 1")
    first = 8.0 / (3.0 * (p + 1.0)) * incomplete_beta(1.0 / 3.0, p + 2.0, p + 1.0)
    second = 2.0 ** (p + 3.0) * (4.0 * p + 5.0) / (3.0 ** (2.0 * p + 3.0) * (p + 1.0) ** 2 * (p + 2.0))
    return 2.0 / 3.0 * (first + second) ** (1.0 / p)


def mu_p_E_closed(p: float) -> float:
    """``mu_p(E_{sqrt2/2, 1})`` in closed form."""
    if not p >= 1.0:
        raise ValueError("p must be >= 1")
    first = 2.0 * incomplete_beta(SQRT2 - 1.0, p + 2.0, p + 1.0) / (SQRT2 ** p * (p + 1.0))
    second = (2.0 * (3.0 - 2.0 * SQRT2) ** (p + 1.0) * ((SQRT2 + 1.0) * p + 2.0 * SQRT2 + 1.0)
              / ((p + 1.0) ** 2 * (p + 2.0)))
    return (first + second) ** (1.0 / p)


def maxmin_mu12_bounds() -> tuple[float, float]:
    mu1 = 2.0 * math.log(2.0) - 2.0 / 3.0 * math.log(SQRT5 + 3.0) + (97.0 - 47.0 * SQRT5) / 36.0
    mu2 = math.sqrt(2082.0 - 3038.0 / 3.0 * SQRT5 + 864.0 * math.log(SQRT5 - 1.0)) / 12.0
    return mu1, mu2


def rmm_mu12_bounds() -> tuple[float, float]:
    mu1 = math.log(2.0) / 3.0 - 31.0 / 180.0
    mu2 = math.sqrt(84.0 * math.log(2.0) - 2437.0 / 42.0) / 6.0
    return mu1, mu2


def marshall_mu_p_bound_quadrature(p: float, tol: Tolerance = INTEGRAL_TOL) -> float:
    return (2.0 * integrate2d(_F, "triangle", p, tol)) ** (1.0 / p)


def maxmin_mu_p_bound(p: float, tol: Tolerance = INTEGRAL_TOL) -> float:
    """``(2 * int_{x+z<=1} G^p)^(1/p)``; no closed form for general ``p``."""
    return (2.0 * integrate2d(_G, "simplex", p, tol)) ** (1.0 / p)


def rmm_mu_p_bound(p: float, tol: Tolerance = INTEGRAL_TOL) -> float:
    """``(2 * int_{x<=y} H^p)^(1/p)``."""
    return (2.0 * integrate2d(_H, "triangle", p, tol)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# Attainment witnesses
# ---------------------------------------------------------------------------

def nqd_witness_lambda(x: float, y: float) -> float:
    """Parameter of ``N_lam`` that attains the NQD bound at ``(x, y)``."""
    m = abs(x + y - 1.0)
    return (3.0 - m - math.sqrt(m * m - 2.0 * m + 5.0)) / 2.0


def marshall_witness_mu(x: float, y: float) -> float:
    """``mu`` with ``C_mu`` attaining the Marshall bound at ``(x, y)``, ``x < y``."""
    return x / y if x > y * y else y


def _pqd_witness(a: float, b: float) -> cop.Copula:
    if b <= 2.0 * a / (a + 1.0):
        return cop.Qab(a, b)
    if b >= 2.0 * a or 2.0 * b >= 1.0 + a:
        return cop.Pab(a, b)
    # Only there does Pab fall short of the bound; a checkerboard reaches it.
    return cop.pqd_checkerboard(a, b)


def attainment_witness(family, x: float, y: float) -> cop.Copula:
    """A member of ``family`` with ``|C(x, y) - C(y, x)| = dstar(family, x, y)``."""
    family = family_tag(family)
    x, y = float(x), float(y)
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0) or x == y:
        raise ValueError("witness needs an interior point off the diagonal")
    a, b = min(x, y), max(x, y)
    if family is FamilyTag.AllCopulas:
        return cop.Wlambda(b - a)
    if family is FamilyTag.NQD:
        return cop.Nlambda(min(max(nqd_witness_lambda(a, b), 0.0), cop.NLAMBDA_MAX))
    if family is FamilyTag.PQD:
        return _pqd_witness(a, b)
    if family is FamilyTag.Marshall:
        return cop.Cmu(marshall_witness_mu(a, b))
    if family is FamilyTag.Maxmin:
        if a + b >= 1.0:
            return cop.Cmu(marshall_witness_mu(a, b))
        return cop.Dmu(marshall_witness_mu(1.0 - b, 1.0 - a))
    if a + b >= 1.0:
        return cop.Elammu(b, 1.0)
    return cop.Elammu(b, a / (1.0 - b))
