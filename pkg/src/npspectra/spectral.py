"""Spectra of the discretized Neumann-Poincaré operator and closed-form radii."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from ._fmt import dumps
from .npops import OperatorKind, _same_mesh


class SpectrumError(RuntimeError):
    """Eigen-solve failed or the symmetrizing form is not definite."""


class SpectrumKind(enum.Enum):
    RAW = "raw"
    SYMMETRIZED = "symmetrized"


class Space(enum.Enum):
    L2 = "L2"
    HMINUS12 = "Hminus12"


def sort_eigenvalues(ev):
    """Descending modulus, ties broken by descending real part then imaginary part."""
    ev = np.asarray(ev, dtype=complex)
    mod = np.round(np.abs(ev), 12)
    order = np.lexsort((-np.round(ev.imag, 12), -np.round(ev.real, 12), -mod))
    return ev[order]


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvalues: np.ndarray
    radius: float
    mesh_size: int
    kind: SpectrumKind

    @classmethod
    def from_eigenvalues(cls, ev, n, kind):
        ev = sort_eigenvalues(ev)
        return cls(eigenvalues=ev, radius=float(np.abs(ev).max()), mesh_size=int(n), kind=kind)

    def equilibrium_index(self):
        return int(np.argmin(np.abs(self.eigenvalues - 0.5)))

    def nontrivial(self):
        """Eigenvalues with the one closest to 1/2 removed."""
        return np.delete(self.eigenvalues, self.equilibrium_index())

    def to_dict(self):
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "radius": self.radius,
            "N": self.mesh_size,
            "kind": self.kind.value,
        }

    def to_json(self):
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        ev = np.array([complex(re, im) for re, im in d["eigenvalues"]])
        return cls(eigenvalues=ev, radius=float(d["radius"]), mesh_size=int(d["N"]),
                   kind=SpectrumKind(d["kind"]))


def np_spectrum(Kp):
    """All eigenvalues of K' in its L²(Σ, ds) realization.

    The Nyström matrix is conjugated by the square root of the weights,
    ``D^{1/2} K' D^{-1/2}``, which is the matrix of K' in the orthonormal
    basis of scaled nodal functions; the similarity leaves eigenvalues intact.
    """
    if Kp.kind is not OperatorKind.ADJ_DOUBLE_LAYER:
        raise ValueError(f"np_spectrum expects the adjoint double layer, got {Kp.kind.value}")
    sw = np.sqrt(Kp.mesh.weights)
    A = sw[:, None] * Kp.entries / sw[None, :]
    try:
        ev = la.eigvals(A, check_finite=True)
    except (la.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"eigenvalue solver failed: {exc}") from exc
    return SpectrumReport.from_eigenvalues(ev, len(sw), SpectrumKind.RAW)


def symmetrized_spectrum(S, Kp, tol=1e-10):
    """Real spectrum of K' via the symmetrizing form ``<f, g> = -∫ f S g``.

    ``S K' = K S`` makes K' self-adjoint for this form. With Φ = log|x|/2π,
    ``-S`` is positive definite only on zero-mean densities, so the form is
    completed with a rank-one term along the constant direction,
    ``M = -W S + c w wᵀ``, and the symmetric-definite pencil
    ``(sym(-W S K') + (c/2) w wᵀ, M)`` is solved; the rank-one part of the
    left matrix uses ``∫ K'f ds = (1/2) ∫ f ds`` exactly. Raises :class:`SpectrumError` if M fails to
    be positive definite (S numerically indefinite on zero-mean densities).
    """
    if S.kind is not OperatorKind.SINGLE_LAYER or Kp.kind is not OperatorKind.ADJ_DOUBLE_LAYER:
        raise ValueError("symmetrized_spectrum expects (single layer, adjoint double layer)")
    _same_mesh(S, Kp)
    w = S.mesh.weights
    n = len(w)
    G = -w[:, None] * S.entries
    G = (G + G.T) / 2

    # definiteness on zero-mean densities: project out the constant direction
    u = w / np.linalg.norm(w)
    Q = la.null_space(u[None, :])
    Gq = Q.T @ G @ Q
    gq = la.eigvalsh(Gq)
    if gq[0] < -tol * gq[-1]:
        raise SpectrumError(
            f"single layer is indefinite on zero-mean densities (min eigenvalue {gq[0]:.3e})")

    c = 4 * la.norm(G, 2) / (w @ w)
    for _ in range(20):
        M = G + c * np.outer(w, w)
        try:
            la.cholesky(M)
            break
        except la.LinAlgError:
            c *= 4
    else:
        raise SpectrumError("could not complete the single layer to a definite form")
    # the constant direction uses the exact identity wᵀK' = wᵀ/2 (Gauss)
    A = G @ Kp.entries
    A = (A + A.T) / 2 + (c / 2) * np.outer(w, w)
    try:
        ev = la.eigh(A, M, eigvals_only=True)
    except la.LinAlgError as exc:
        raise SpectrumError(f"generalized eigensolver failed: {exc}") from exc
    return SpectrumReport.from_eigenvalues(ev.astype(complex), n, SpectrumKind.SYMMETRIZED)


def ess_radius_polygon(omega, space=Space.L2):
    """Essential spectral radius of K' on a curvilinear polygon.

    ``omega`` is the sharpest corner in (0, π]; ω = π is the corner-free limit.
    L²:        (1/2) sin(|π - ω| / 2)
    H^{-1/2}:  |π - ω| / (2π)
    """
    space = Space(space)
    omega = float(omega)
    if not (0.0 < omega <= np.pi):
        raise ValueError(f"sharpest corner must lie in (0, π], got {omega}")
    dev = abs(np.pi - omega)
    if space is Space.L2:
        return 0.5 * np.sin(dev / 2)
    return dev / (2 * np.pi)

