"""Free-space transmission problem through a single-layer ansatz.

The total field is ``u = u_in + S φ`` on both sides of the curve Σ. It is
continuous across Σ automatically; the flux condition

    ∂₊u₊ + μ ∂₋u₋ = 0,

with ∂± the outward derivative of Ω± (so ∂₊ = -∂_ν), becomes the second-kind
equation ``(λ - K') φ = ∂_ν u_in`` with ``λ = (μ + 1) / (2 (μ - 1))``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._fmt import fmt
from .contrast import mu_to_lambda
from .geometry import QuadratureMesh
from .npops import BoundaryOperatorMatrix, assemble_adj_double_layer, assemble_single_layer
from .spectral import np_spectrum

RESONANCE_TOL = 1e-8
SOLVE_TOL = 1e-10


class NearResonanceError(RuntimeError):
    """λ(μ) sits on the discrete spectrum of K'."""

    def __init__(self, lam, distance, eigenvalue):
        self.lam = lam
        self.distance = distance
        self.eigenvalue = eigenvalue
        super().__init__(
            f"spectral parameter {lam:.6g} is within {distance:.3e} of the discrete eigenvalue "
            f"{eigenvalue.real:.6g}{eigenvalue.imag:+.2e}j; contrast is (near) plasmonic")


class SolveError(RuntimeError):
    pass


class FieldEvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# incident fields


class IncidentField:
    def value(self, points):
        raise NotImplementedError

    def gradient(self, points):
        raise NotImplementedError

    def normal_derivative(self, points, normals):
        return np.einsum("ij,ij->i", self.gradient(points), normals)

    def laplacian_fd(self, points, h=1e-3):
        """Five-point finite-difference Laplacian, used as a harmonicity check."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ex, ey = np.array([h, 0.0]), np.array([0.0, h])
        f = self.value
        return (f(p + ex) + f(p - ex) + f(p + ey) + f(p - ey) - 4 * f(p)) / h**2


@dataclass(frozen=True)
class LinearField(IncidentField):
    """``u_in(x) = <d, x>``; the default d = (1, 0) gives u_in = x."""

    direction: tuple = (1.0, 0.0)

    def value(self, points):
        return np.atleast_2d(points) @ np.asarray(self.direction, dtype=float)

    def gradient(self, points):
        p = np.atleast_2d(points)
        return np.tile(np.asarray(self.direction, dtype=float), (len(p), 1))


@dataclass(frozen=True)
class PointSourceField(IncidentField):
    """``u_in(x) = log|x - x0| / (2π)`` with the source x0 outside the inclusion."""

    source: tuple

    def value(self, points):
        d = np.atleast_2d(points) - np.asarray(self.source, dtype=float)
        return np.log(np.hypot(d[:, 0], d[:, 1])) / (2 * np.pi)

    def gradient(self, points):
        d = np.atleast_2d(points) - np.asarray(self.source, dtype=float)
        return d / (2 * np.pi * np.einsum("ij,ij->i", d, d))[:, None]


def parse_incident(text):
    """``"x"``, ``"linear:dx,dy"`` or ``"point:x0,y0"``."""
    text = text.strip()
    if text in ("x", "linear"):
        return LinearField()
    if text == "y":
        return LinearField((0.0, 1.0))
    kind, _, args = text.partition(":")
    try:
        vals = tuple(float(v) for v in args.split(","))
    except ValueError:
        raise ValueError(f"cannot parse incident field {text!r}") from None
    if len(vals) != 2:
        raise ValueError(f"incident field {text!r} needs two numbers")
    if kind == "linear":
        return LinearField(vals)
    if kind == "point":
        return PointSourceField(vals)
    raise ValueError(f"unknown incident field kind {kind!r}")


# ---------------------------------------------------------------------------
# solve


@dataclass(frozen=True, eq=False)
class TransmissionSolution:
    density: np.ndarray
    mu: float
    lam: float
    mesh: QuadratureMesh
    incident: IncidentField
    Kp: BoundaryOperatorMatrix
    distance_to_spectrum: float

    def solve_residual(self):
        g = self.incident.normal_derivative(self.mesh.points, self.mesh.normals)
        r = self.lam * self.density - self.Kp.entries @ self.density - g
        return float(np.linalg.norm(r) / max(np.linalg.norm(g), 1e-300))


def distance_to_spectrum(lam, Kp):
    ev = np_spectrum(Kp).eigenvalues
    k = int(np.argmin(np.abs(ev - lam)))
    return float(abs(ev[k] - lam)), ev[k]


def solve_transmission(mesh, mu, incident, Kp=None, resonance_tol=RESONANCE_TOL):
    """Solve ``(λ - K') φ = ∂_ν u_in`` for the single-layer density φ.

    Refuses (``NearResonanceError``) when λ(μ) lies within
    ``resonance_tol * max(1, |λ|)`` of an eigenvalue of the discretized K'.
    """
    mu = float(mu)
    if mu == 0.0:
        raise ValueError("contrast mu = 0 is excluded")
    lam = mu_to_lambda(mu)
    if Kp is None:
        Kp = assemble_adj_double_layer(mesh)
    dist, ev = distance_to_spectrum(lam, Kp)
    if dist < resonance_tol * max(1.0, abs(lam)):
        raise NearResonanceError(lam, dist, ev)
    g = incident.normal_derivative(mesh.points, mesh.normals)
    A = lam * np.eye(len(mesh)) - Kp.entries
    try:
        phi = np.linalg.solve(A, g)
    except np.linalg.LinAlgError as exc:
        raise SolveError(f"linear solve failed: {exc}") from exc
    if not np.all(np.isfinite(phi)):
        raise SolveError("linear solve produced non-finite density")
    sol = TransmissionSolution(phi, mu, lam, mesh, incident, Kp, dist)
    res = sol.solve_residual()
    if res > SOLVE_TOL:
        raise SolveError(f"solve residual {res:.3e} exceeds {SOLVE_TOL:g}")
    return sol


# ---------------------------------------------------------------------------
# field evaluation and diagnostics


def evaluate_field(solution, points, min_spacings=3.0):
    """Total field and gradient at points away from the curve.

    Points closer than ``min_spacings`` local node spacings (taken as the
    quadrature weight of the nearest node) to Σ are rejected.
    Returns ``(u, grad_u)`` with shapes (n,) and (n, 2).
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    mesh = solution.mesh
    y = mesh.points
    d = p[:, None, :] - y[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    nearest = np.argmin(r2, axis=1)
    dist = np.sqrt(r2[np.arange(len(p)), nearest])
    too_close = dist < min_spacings * mesh.weights[nearest]
    if np.any(too_close):
        k = int(np.argmax(too_close))
        raise FieldEvaluationError(
            f"point {p[k].tolist()} is {dist[k]:.3e} from the curve; near-field evaluation "
            "is not supported")
    q = solution.density * mesh.weights
    u = solution.incident.value(p) + np.log(r2) @ q / (4 * np.pi)
    grad = solution.incident.gradient(p) + np.einsum("ijk,j->ik", d / r2[..., None], q) / (2 * np.pi)
    return u, grad


def one_sided_normal_derivatives(mesh, density, incident, Kp=None):
    """``(∂₊u, ∂₋u)`` on Σ from the jump relations of the single layer.

    ∂₋u is the derivative along ν from inside, ∂₊u the derivative along -ν
    from outside:  ∂_ν(Sφ)± = (K' ± 1/2) φ.
    """
    if Kp is None:
        Kp = assemble_adj_double_layer(mesh)
    g = incident.normal_derivative(mesh.points, mesh.normals)
    kphi = Kp.entries @ density
    d_in = kphi - 0.5 * density + g
    d_out = -(kphi + 0.5 * density + g)
    return d_out, d_in


def flux_residual(solution, density=None, refine=True, norm="max"):
    """Size of ``∂₊u + μ∂₋u`` on Σ: max-norm, or ``norm="l1"`` for ``∫|·| ds``.

    With ``refine`` (default) the density is interpolated to a mesh of twice
    the resolution and K' is re-assembled there, so the residual measures the
    discretization error rather than the (exact) linear solve. On polygons
    the density is singular at the corners and the max-norm is dominated by
    the corner panels; the L1 norm is the meaningful convergence measure there.
    """
    if norm not in ("max", "l1"):
        raise ValueError(f"norm must be 'max' or 'l1', got {norm!r}")
    mesh = solution.mesh
    phi = solution.density if density is None else np.asarray(density, dtype=float)
    Kp = solution.Kp
    if refine:
        fine = mesh.refined()
        phi = mesh.interpolate_to(fine, phi)
        mesh, Kp = fine, assemble_adj_double_layer(fine)
    d_out, d_in = one_sided_normal_derivatives(mesh, phi, solution.incident, Kp)
    res = np.abs(d_out + solution.mu * d_in)
    return float(res.max() if norm == "max" else mesh.integrate(res))


def dirichlet_traces(solution):
    """Inner and outer traces of the total field on Σ.

    Both come from the same single-layer matrix applied once, so they agree
    exactly: the Dirichlet transmission condition holds by construction.
    """
    mesh = solution.mesh
    trace = assemble_single_layer(mesh).entries @ solution.density
    u_in = solution.incident.value(mesh.points)
    inner = outer = u_in + trace
    return inner, outer


def write_solution_csv(path_or_file, solution):
    rows = [(j, x, y, f) for j, ((x, y), f) in enumerate(zip(solution.mesh.points, solution.density))]
    _write_csv(path_or_file, ["node_index", "x", "y", "phi"], rows)


def write_field_csv(path_or_file, points, u, grad):
    rows = [(x, y, v, gx, gy) for (x, y), v, (gx, gy) in zip(np.atleast_2d(points), u, grad)]
    _write_csv(path_or_file, ["x", "y", "u", "ux", "uy"], rows)


def _write_csv(path_or_file, header, rows):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
