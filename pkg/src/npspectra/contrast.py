"""Contrast / spectral-parameter dictionary and self-adjointness verdicts.

A transmission problem with coefficient 1 outside and ``mu`` inside reduces
to the spectral parameter ``lam = (mu + 1) / (2 (mu - 1))`` for the
Neumann-Poincaré operator. The verdict engine reports which contrasts are
known to give a self-adjoint transmission operator for a given geometry
class. Inside a critical interval nothing is claimed either way.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ._fmt import dumps
from .spectral import Space, ess_radius_polygon


class ContrastError(ValueError):
    pass


class Verdict(enum.Enum):
    SELF_ADJOINT = "SelfAdjoint"
    INSIDE_CRITICAL_INTERVAL = "InsideCriticalInterval"
    EXCLUDED_VALUE = "ExcludedValue"
    UNKNOWN = "Unknown"


def mu_to_lambda(mu):
    mu = float(mu)
    if mu == 1.0:
        raise ContrastError("contrast mu = 1 has no spectral parameter (trivial case)")
    return (mu + 1.0) / (2.0 * (mu - 1.0))


def lambda_to_mu(lam):
    lam = float(lam)
    if lam == 0.5:
        raise ContrastError("spectral parameter 1/2 corresponds to an infinite contrast")
    return (2.0 * lam + 1.0) / (2.0 * lam - 1.0)


def critical_interval(r):
    """Contrasts ``mu`` with ``|lam(mu)| <= r``, for an essential radius ``0 <= r < 1/2``."""
    r = float(r)
    if not (0.0 <= r < 0.5):
        raise ContrastError(f"radius must lie in [0, 1/2), got {r}")
    return (-(1 + 2 * r) / (1 - 2 * r), -(1 - 2 * r) / (1 + 2 * r))


def _check_corner(omega):
    omega = float(omega)
    if not (0.0 < omega < math.pi):
        raise ContrastError(f"sharpest corner must lie in (0, π), got {omega}")
    return omega


def a_bound(omega):
    """tan²(ω/4): endpoint of the s = 3/2 interval."""
    return math.tan(_check_corner(omega) / 4) ** 2


def b_bound(omega):
    """(π - |π-ω|) / (π + |π-ω|): endpoint of the s = 1 interval."""
    d = abs(math.pi - _check_corner(omega))
    return (math.pi - d) / (math.pi + d)


def polygon_intervals(omega):
    """Critical intervals of a curvilinear polygon with sharpest corner ``omega``.

    Returns ``{"s32": (-1/a, -a), "s1": (-1/b, -b)}``.
    """
    a, b = a_bound(omega), b_bound(omega)
    return {"s32": (-1.0 / a, -a), "s1": (-1.0 / b, -b)}


# ---------------------------------------------------------------------------
# geometry classes


@dataclass(frozen=True)
class SignDefinite:
    name = "SignDefinite"


@dataclass(frozen=True)
class SmoothVMO:
    """Boundaries whose normal has vanishing mean oscillation (e.g. C¹)."""

    name = "SmoothVMO"


@dataclass(frozen=True)
class Polygon:
    omega: float
    name = "Polygon"

    def __post_init__(self):
        _check_corner(self.omega)


@dataclass(frozen=True)
class Cone:
    """Surface of revolution with one conical point of opening ``alpha``."""

    alpha: float
    name = "Cone"

    def __post_init__(self):
        if not (0.0 < float(self.alpha) < math.pi):
            raise ContrastError(f"cone angle must lie in (0, π), got {self.alpha}")


@dataclass(frozen=True)
class ContrastVerdict:
    mu: float
    s: float
    geometry_class: object
    verdict: Verdict
    interval: tuple | None
    theorem: str
    note: str = ""

    def to_dict(self):
        cls = self.geometry_class
        d = {
            "mu": self.mu,
            "s": self.s,
            "class": cls.name,
            "verdict": self.verdict.value,
            "interval": list(self.interval) if self.interval is not None else None,
            "theorem": self.theorem,
        }
        if isinstance(cls, Polygon):
            d["omega"] = cls.omega
        elif isinstance(cls, Cone):
            d["alpha"] = cls.alpha
        if self.note:
            d["note"] = self.note
        return d

    def to_json(self):
        return dumps(self.to_dict())


# citation tags carried in verdict payloads
THM_SIGN_DEFINITE = "sign-definite"
THM_NO_CORNERS = "vmo-normal"
THM_POLYGON = "curvilinear-polygon"
THM_CONE = "conical-point"
TRIVIAL = "trivial-contrast"


def _check_s(s):
    s = float(s)
    if s not in (1.0, 1.5):
        raise ContrastError(f"regularity index s must be 1 or 3/2, got {s}")
    return s


def verdict(geometry_class, mu, s):
    """Self-adjointness verdict for contrast ``mu`` at regularity ``s``.

    Intervals are closed: a contrast on an endpoint is reported as inside.
    ``mu = 0`` is always an excluded value (the coefficient degenerates);
    ``mu = 1`` is the trivial case except in the sign-definite class, which
    covers every positive contrast.
    """
    mu = float(mu)
    s = _check_s(s)
    cls = geometry_class

    def out(v, theorem, interval=None, note=""):
        return ContrastVerdict(mu, s, cls, v, interval, theorem, note)

    if mu == 0.0:
        return out(Verdict.EXCLUDED_VALUE, TRIVIAL, note="mu = 0: coefficient degenerates")

    if isinstance(cls, SignDefinite):
        if mu > 0:
            return out(Verdict.SELF_ADJOINT, THM_SIGN_DEFINITE,
                       note="A(3/2) = A(1) for positive contrast")
        return out(Verdict.UNKNOWN, THM_SIGN_DEFINITE, note="sign-definite class needs mu > 0")

    if mu == 1.0:
        return out(Verdict.EXCLUDED_VALUE, TRIVIAL,
                   note="trivial case, coincides with the Dirichlet Laplacian")

    if isinstance(cls, SmoothVMO):
        if mu == -1.0:
            return out(Verdict.EXCLUDED_VALUE, THM_NO_CORNERS, interval=(-1.0, -1.0))
        if s == 1.5:
            return out(Verdict.SELF_ADJOINT, THM_NO_CORNERS)
        return out(Verdict.UNKNOWN, THM_NO_CORNERS, note="only s = 3/2 is covered")

    if isinstance(cls, Polygon):
        key = "s32" if s == 1.5 else "s1"
        lo, hi = polygon_intervals(cls.omega)[key]
        if lo <= mu <= hi:
            return out(Verdict.INSIDE_CRITICAL_INTERVAL, THM_POLYGON, (lo, hi))
        return out(Verdict.SELF_ADJOINT, THM_POLYGON, (lo, hi))

    if isinstance(cls, Cone):
        if s != 1.0:
            return out(Verdict.UNKNOWN, THM_CONE, note="only s = 1 is covered")
        if math.isclose(cls.alpha, math.pi / 2, rel_tol=0, abs_tol=1e-12):
            return out(Verdict.UNKNOWN, THM_CONE, note="opening angle π/2 is not covered")
        if mu == -1.0:
            return out(Verdict.UNKNOWN, THM_CONE, note="mu = -1 is on the boundary of both cases")
        if cls.alpha < math.pi / 2:
            ok = mu > -1.0
        else:
            ok = mu < -1.0
        return out(Verdict.SELF_ADJOINT if ok else Verdict.UNKNOWN, THM_CONE)

    raise ContrastError(f"unknown geometry class {cls!r}")


def polygon_interval_from_radius(omega, space):
    """Critical interval via the essential radius; must agree with :func:`polygon_intervals`."""
    return critical_interval(ess_radius_polygon(omega, Space(space)))
