"""Dense Nyström matrices for the 2D Laplace boundary operators.

Conventions: the fundamental solution is ``Φ(x) = log|x| / (2π)`` (positive
sign), ν is the outward normal of the enclosed region, and

    S f(x)  = ∫ Φ(x - y) f(y) ds(y)
    K f(x)  = p.v. ∫ <ν(y), y - x> / (2π |x - y|²) f(y) ds(y)
    K' f(x) = p.v. ∫ <ν(x), x - y> / (2π |x - y|²) f(y) ds(y)

Each matrix ``A`` acts on nodal values: ``(A @ f)[i] ≈ (Op f)(x_i)``, so the
quadrature weights are folded into the columns.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

from .geometry import QuadratureMesh, gauss_legendre

# targets closer than this (in panel half-lengths) get product quadrature
NEAR_RADIUS = 2.0


class OperatorKind(enum.Enum):
    SINGLE_LAYER = "single_layer"
    DOUBLE_LAYER = "double_layer"
    ADJ_DOUBLE_LAYER = "adj_double_layer"


class MeshMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BoundaryOperatorMatrix:
    kind: OperatorKind
    entries: np.ndarray
    mesh: QuadratureMesh

    def __post_init__(self):
        n = len(self.mesh)
        if self.entries.shape != (n, n):
            raise ValueError(f"matrix shape {self.entries.shape} does not match mesh size {n}")
        self.entries.setflags(write=False)

    @property
    def N(self):
        return len(self.mesh)

    def __matmul__(self, other):
        if isinstance(other, BoundaryOperatorMatrix):
            _same_mesh(self, other)
            other = other.entries
        return self.entries @ other

    def kernel_values(self):
        """Entries with the quadrature weights divided out (smooth meshes)."""
        return self.entries / self.mesh.weights[None, :]


def _same_mesh(*ops):
    m = ops[0].mesh
    for op in ops[1:]:
        if op.mesh is not m and not (
            len(op.mesh) == len(m)
            and np.array_equal(op.mesh.weights, m.weights)
            and np.array_equal(op.mesh.points, m.points)
        ):
            raise MeshMismatchError("operators are discretized on different meshes")


# ---------------------------------------------------------------------------
# smooth curves: periodic trapezoid rule


def kress_log_weights(n):
    """Weights R_k of ``∫_0^{2π} log(4 sin²((t_i - τ)/2)) f(τ) dτ ≈ Σ_j R_{i-j} f(t_j)``.

    Exact for trigonometric polynomials of degree < n/2 on n equispaced nodes.
    """
    half = n // 2
    t = 2 * np.pi * np.arange(n) / n
    m = np.arange(1, half)
    R = -(2 * np.pi / half) * (np.cos(np.outer(t, m)) / m).sum(axis=1)
    R -= (np.pi / half**2) * np.cos(half * t)
    return R


def _pair_geometry(points):
    d = points[:, None, :] - points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    return d, r2


def _smooth_single_layer(mesh):
    c = mesh.curve
    n = len(mesh)
    t = c.params
    d, r2 = _pair_geometry(c.nodes)
    dt = t[:, None] - t[None, :]
    s2 = 4 * np.sin(dt / 2) ** 2
    np.fill_diagonal(s2, 1.0)
    np.fill_diagonal(r2, 1.0)
    smooth = np.log(r2 / s2)
    np.fill_diagonal(smooth, np.log(c.speeds**2))
    R = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return (R[idx] + (2 * np.pi / n) * smooth) * c.speeds[None, :] / (4 * np.pi)


def _smooth_double_layers(mesh, adjoint):
    c = mesh.curve
    d, r2 = _pair_geometry(c.nodes)
    np.fill_diagonal(r2, 1.0)
    if adjoint:
        num = np.einsum("ik,ijk->ij", c.normals, d)
    else:
        num = -np.einsum("jk,ijk->ij", c.normals, d)
    ker = num / (2 * np.pi * r2)
    np.fill_diagonal(ker, c.curvatures / (4 * np.pi))
    return ker * mesh.weights[None, :]


# ---------------------------------------------------------------------------
# polygons: Gauss-Legendre panels with product quadrature near the diagonal


@dataclass
class _PanelFrame:
    """Targets expressed in the local coordinate of one panel."""

    z: np.ndarray       # complex local coordinate of every target
    half: complex       # half-length vector of the panel (complex)
    x: np.ndarray       # reference Gauss nodes of the panel
    w: np.ndarray


def _panel_frames(mesh):
    pts = mesh.points[:, 0] + 1j * mesh.points[:, 1]
    p = mesh.panels
    for pid in range(len(p)):
        a = complex(*p.start[pid])
        b = complex(*p.end[pid])
        half = (b - a) / 2
        x, w = gauss_legendre(int(p.order[pid]))
        yield pid, _PanelFrame(z=(pts - (a + b) / 2) / half, half=half, x=x, w=w)


def cauchy_moments(z, q):
    """``p_k(z) = ∫_{-1}^{1} t^k / (t - z) dt`` for k = 0..q (principal value on the segment).

    Forward recurrence; only accurate for |z| of order one, which is where
    it is used.
    """
    z = np.asarray(z, dtype=complex)
    p = np.empty((q + 1,) + z.shape, dtype=complex)
    p0 = np.log(1 - z) - np.log(-1 - z)
    # choose the branch giving the subtended angle in (-π, π]
    p0 = p0.real + 1j * (np.mod(p0.imag + np.pi, 2 * np.pi) - np.pi)
    p[0] = p0
    for k in range(1, q + 1):
        p[k] = z * p[k - 1] + (1 - (-1) ** k) / k
    return p


def log_moments(z, q):
    """``M_k(z) = ∫_{-1}^{1} t^k log|t - z| dt`` for k = 0..q-1."""
    z = np.asarray(z, dtype=complex)
    p = cauchy_moments(z, q)
    la = np.log(np.abs(1 - z))
    lb = np.log(np.abs(1 + z))
    k = np.arange(q).reshape((-1,) + (1,) * z.ndim)
    sign = np.where(k % 2 == 0, -1.0, 1.0)  # (-1)^(k+1)
    return ((la - sign * lb) - p[1:].real) / (k + 1)


def _interp_weights(x, moments):
    """Turn monomial moments into weights acting on values at the nodes ``x``."""
    V = np.vander(x, len(x), increasing=True)
    return np.linalg.solve(V.T, moments)


def _polygon_operator(mesh, kind):
    # the far-field formulas hit log(0) and 1/0 on the diagonal before the
    # near-field correction overwrites those entries
    with np.errstate(divide="ignore", invalid="ignore"):
        return _polygon_blocks(mesh, kind)


def _polygon_blocks(mesh, kind):
    N = len(mesh)
    A = np.empty((N, N))
    off = mesh.panels.offsets
    target_edge = mesh.edge_of_node()
    normals = mesh.normals[:, 0] + 1j * mesh.normals[:, 1]
    for pid, fr in _panel_frames(mesh):
        cols = slice(off[pid], off[pid + 1])
        hl = abs(fr.half)
        y = fr.x
        diff = (fr.z[:, None] - y[None, :]) * fr.half      # x - y, complex
        same_edge = target_edge == mesh.panels.edge[pid]
        if kind is OperatorKind.SINGLE_LAYER:
            block = np.log(np.abs(diff)) * (hl * fr.w)[None, :] / (2 * np.pi)
        elif kind is OperatorKind.ADJ_DOUBLE_LAYER:
            block = (normals[:, None] / diff).real * (hl * fr.w)[None, :] / (2 * np.pi)
            block[same_edge] = 0.0
        else:
            nu = -1j * fr.half / hl
            block = (nu / -diff).real * (hl * fr.w)[None, :] / (2 * np.pi)
            block[same_edge] = 0.0

        near = np.abs(fr.z) < NEAR_RADIUS
        if kind is not OperatorKind.SINGLE_LAYER:
            near &= ~same_edge
        if np.any(near):
            zn = fr.z[near]
            q = len(y)
            if kind is OperatorKind.SINGLE_LAYER:
                M = log_moments(zn, q)                           # (q, n_near)
                W = _interp_weights(y, M).T                       # (n_near, q)
                block[near] = hl * (np.log(hl) * fr.w[None, :] + W) / (2 * np.pi)
            else:
                P = cauchy_moments(zn, q)[:q]
                W = _interp_weights(y, P).T                       # ∫ ℓ_l(t)/(t - z) dt
                if kind is OperatorKind.ADJ_DOUBLE_LAYER:
                    coef = -normals[near] * hl / fr.half
                    block[near] = (coef[:, None] * W).real / (2 * np.pi)
                else:
                    block[near] = W.imag / (2 * np.pi)
        A[:, cols] = block
    return A


# ---------------------------------------------------------------------------
# public assembly


def assemble_single_layer(mesh):
    entries = _smooth_single_layer(mesh) if mesh.is_smooth else _polygon_operator(
        mesh, OperatorKind.SINGLE_LAYER)
    return BoundaryOperatorMatrix(OperatorKind.SINGLE_LAYER, entries, mesh)


def assemble_double_layer(mesh):
    entries = _smooth_double_layers(mesh, adjoint=False) if mesh.is_smooth else _polygon_operator(
        mesh, OperatorKind.DOUBLE_LAYER)
    return BoundaryOperatorMatrix(OperatorKind.DOUBLE_LAYER, entries, mesh)


def assemble_adj_double_layer(mesh):
    """Neumann-Poincaré operator K', assembled from its own kernel."""
    entries = _smooth_double_layers(mesh, adjoint=True) if mesh.is_smooth else _polygon_operator(
        mesh, OperatorKind.ADJ_DOUBLE_LAYER)
    return BoundaryOperatorMatrix(OperatorKind.ADJ_DOUBLE_LAYER, entries, mesh)


def symmetrization_residual(S, K, Kp):
    """Relative max-norm of ``S K' - K S``.

    The products are scaled by ``max|S| * max(max|K|, max|K'|)`` so the
    result is dimensionless.
    """
    _same_mesh(S, K, Kp)
    kinds = (S.kind, K.kind, Kp.kind)
    if kinds != (OperatorKind.SINGLE_LAYER, OperatorKind.DOUBLE_LAYER, OperatorKind.ADJ_DOUBLE_LAYER):
        raise ValueError(f"expected (S, K, K') matrices, got {[k.value for k in kinds]}")
    s, k, kp = S.entries, K.entries, Kp.entries
    diff = s @ kp - k @ s
    scale = np.abs(s).max() * max(np.abs(k).max(), np.abs(kp).max())
    return float(np.abs(diff).max() / scale)


def duality_defect(K, Kp):
    """``max|W K' - Kᵀ W|`` relative to ``max|W K'|`` (W = weight diagonal)."""
    _same_mesh(K, Kp)
    w = K.mesh.weights
    lhs = w[:, None] * Kp.entries
    rhs = K.entries.T * w[None, :]
    return float(np.abs(lhs - rhs).max() / np.abs(lhs).max())


# ---------------------------------------------------------------------------
# binary dump: u64 little-endian N, then N*N float64 row-major


def dump_matrix(path, matrix):
    a = matrix.entries if isinstance(matrix, BoundaryOperatorMatrix) else np.asarray(matrix)
    a = np.ascontiguousarray(a, dtype="<f8")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("only square matrices can be dumped")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", a.shape[0]))
        fh.write(a.tobytes(order="C"))


def load_matrix(path):
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"expected {n * n} entries, found {data.size}")
    return data.reshape(n, n).astype(float)
