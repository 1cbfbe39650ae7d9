import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import L_SHAPE, SQUARE, star_points
from npspectra.geometry import build_mesh, curve_from_samples, make_circle, make_ellipse, make_polygon
from npspectra.npops import (
    BoundaryOperatorMatrix,
    MeshMismatchError,
    OperatorKind,
    assemble_adj_double_layer,
    assemble_double_layer,
    assemble_single_layer,
    cauchy_moments,
    duality_defect,
    dump_matrix,
    kress_log_weights,
    load_matrix,
    log_moments,
    symmetrization_residual,
)


def _ops(mesh):
    return assemble_single_layer(mesh), assemble_double_layer(mesh), assemble_adj_double_layer(mesh)


def _mesh(c, N):
    return build_mesh(c, N)


# -- smooth curves ---------------------------------------------------------


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_circle_single_layer_constant(R):
    # [DERIVED] ∫_{|y|=R} log|x-y| ds(y) / 2π = R log R for |x| = R
    mesh = _mesh(make_circle(R, 64), 64)
    S = assemble_single_layer(mesh)
    assert np.allclose(S @ np.ones(64), R * math.log(R), atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 5, 20])
def test_circle_single_layer_fourier_modes(k):
    # [DERIVED] S cos(kθ) = -R cos(kθ) / (2k) on the circle of radius R
    R = 1.5
    mesh = _mesh(make_circle(R, 128), 128)
    th = mesh.nodes
    S = assemble_single_layer(mesh)
    assert np.allclose(S @ np.cos(k * th), -R * np.cos(k * th) / (2 * k), atol=1e-14)


def test_circle_double_layers():
    mesh = _mesh(make_circle(1.3, 64), 64)
    S, K, Kp = _ops(mesh)
    th = mesh.nodes
    for A in (K, Kp):
        assert np.allclose(A @ np.ones(64), 0.5, atol=1e-14)
        assert np.allclose(A @ np.cos(3 * th), 0.0, atol=1e-14)


def test_smooth_single_layer_matches_quadrature():
    # [DERIVED] single layer of f(y) = y₁ on the star curve by adaptive quadrature
    pts = star_points()
    curve = curve_from_samples(pts)
    mesh = _mesh(curve, 512)
    S = assemble_single_layer(mesh)
    shape = curve.shape
    f = mesh.points[:, 0]
    for i in (0, 75, 263):
        t0 = mesh.nodes[i]
        x = mesh.points[i]

        def integrand(t):
            p, dp = shape.evaluate(np.array([t]))[:2]
            return math.log(np.linalg.norm(x - p[0])) * p[0, 0] * np.linalg.norm(dp[0]) / (2 * np.pi)

        ref = sum(quad(integrand, lo, hi, limit=400, epsabs=1e-13)[0]
                  for lo, hi in [(t0 - np.pi, t0), (t0, t0 + np.pi)])
        assert (S @ f)[i] == pytest.approx(ref, abs=1e-11)


@pytest.mark.parametrize("n", [16, 32, 64])
def test_kress_weights_against_quad(n):
    # [DERIVED] ∫ log(4 sin²(τ/2)) cos(mτ) dτ = -2π/m (m ≥ 1), 0 (m = 0)
    R = kress_log_weights(n)
    t = 2 * np.pi * np.arange(n) / n
    for m in range(n // 2):
        ref = quad(lambda s: math.log(4 * math.sin(s / 2) ** 2) * math.cos(m * s), 0, 2 * np.pi,
                   points=[np.pi], limit=200)[0]
        # weights act on f(τ_j), target t_0 = 0
        assert R @ np.cos(m * t) == pytest.approx(ref, abs=1e-11)
        assert ref == pytest.approx(0.0 if m == 0 else -2 * np.pi / m, abs=1e-9)


def test_ellipse_gauss_identities():
    mesh = _mesh(make_ellipse(2, 1, 128), 128)
    S, K, Kp = _ops(mesh)
    assert np.allclose(K @ np.ones(128), 0.5, atol=1e-13)
    assert np.allclose(mesh.weights @ Kp.entries, 0.5 * mesh.weights, atol=1e-13)
    assert duality_defect(K, Kp) < 1e-13


# -- moments ----------------------------------------------------------------


def _cquad(f):
    re = quad(lambda t: f(t).real, -1, 1, limit=200, epsabs=1e-14)[0]
    im = quad(lambda t: f(t).imag, -1, 1, limit=200, epsabs=1e-14)[0]
    return re + 1j * im


@pytest.mark.parametrize("z", [0.3 + 0.4j, -0.8 - 0.1j, 1.5 + 0j, 0.2 + 1.5j])
def test_cauchy_moments_against_quad(z):
    p = cauchy_moments(np.array([z]), 8)[:, 0]
    for k in range(9):
        assert p[k] == pytest.approx(_cquad(lambda t: t**k / (t - z)), abs=1e-12)


@pytest.mark.parametrize("z", [0.3 + 0.4j, 0.5 + 0j, -0.99 + 1e-3j, 1.7 - 0.2j])
def test_log_moments_against_quad(z):
    M = log_moments(np.array([z]), 8)[:, 0]
    pts = [z.real] if abs(z.imag) < 1e-2 and abs(z.real) < 1 else None
    for k in range(8):
        ref = quad(lambda t: t**k * math.log(abs(t - z)), -1, 1, points=pts, limit=200,
                   epsabs=1e-14)[0]
        assert M[k] == pytest.approx(ref, abs=1e-11)


# -- polygons ---------------------------------------------------------------


def _polygon_oracle(verts, x, nu_x, kind, f):
    """Adaptive quadrature of the operator kernel over every edge."""
    v = np.asarray(verts, dtype=float)
    total = 0.0
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        L = np.linalg.norm(b - a)
        nu_y = np.array([b[1] - a[1], a[0] - b[0]]) / L
        same = abs(np.dot(nu_y, x - a)) < 1e-14

        def integrand(s):
            y = a + (b - a) * s
            d = x - y
            r2 = d @ d
            if kind == "S":
                return math.log(r2) / (4 * np.pi) * f(y) * L
            if same:
                return 0.0
            if kind == "Kp":
                return (nu_x @ d) / (2 * np.pi * r2) * f(y) * L
            return (nu_y @ -d) / (2 * np.pi * r2) * f(y) * L

        # split at the foot of the target on this edge
        s0 = np.clip(np.dot(x - a, b - a) / L**2, 0, 1)
        pieces = [(0, s0), (s0, 1)] if 0 < s0 < 1 else [(0, 1)]
        total += sum(quad(integrand, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
                     for lo, hi in pieces)
    return total


@pytest.mark.parametrize("verts", [SQUARE, L_SHAPE])
@pytest.mark.parametrize("kind", ["S", "K", "Kp"])
def test_polygon_operators_against_quadrature(verts, kind):
    mesh = _mesh(make_polygon(verts)[0], 240)
    op = {"S": assemble_single_layer, "K": assemble_double_layer, "Kp": assemble_adj_double_layer}[kind](mesh)
    f = lambda y: 1.0 + y[0] - 0.5 * y[1] ** 2  # noqa: E731
    fv = np.array([f(p) for p in mesh.points])
    got = op @ fv
    # first node sits right next to a corner; the others are spread out
    for i in (0, 1, 5, 60, 119, 200):
        ref = _polygon_oracle(verts, mesh.points[i], mesh.normals[i], kind, f)
        assert got[i] == pytest.approx(ref, abs=1e-7), i


@pytest.mark.parametrize("verts", [SQUARE, L_SHAPE])
def test_polygon_gauss_identity(verts):
    # K1 = 1/2 holds node-wise away from the vertices
    mesh = _mesh(make_polygon(verts)[0], 400)
    K = assemble_double_layer(mesh)
    Kp = assemble_adj_double_layer(mesh)
    assert np.abs(K @ np.ones(400) - 0.5).max() < 1e-8
    assert abs(mesh.weights @ (Kp @ np.ones(400)) - 0.5 * mesh.perimeter) < 1e-4 * mesh.perimeter


def test_polygon_duality_defect_decreases():
    c = make_polygon(SQUARE)[0]
    d = [duality_defect(assemble_double_layer(m), assemble_adj_double_layer(m))
         for m in (_mesh(c, N) for N in (100, 200, 400))]
    assert d[0] > d[1] > d[2]


def test_same_edge_double_layer_vanishes():
    mesh = _mesh(make_polygon(SQUARE)[0], 64)
    Kp = assemble_adj_double_layer(mesh).entries
    e = mesh.edge_of_node()
    assert np.all(Kp[e[:, None] == e[None, :]] == 0.0)


# -- symmetrization ---------------------------------------------------------


def test_symmetrization_smooth():
    for c in (make_ellipse(2, 1, 128), make_circle(1.0, 128)):
        assert symmetrization_residual(*_ops(_mesh(c, 128))) <= 1e-8


def test_symmetrization_converges_on_star():
    c = curve_from_samples(star_points())
    res = [symmetrization_residual(*_ops(_mesh(c, N))) for N in (32, 64, 128)]
    assert res[1] <= res[0] / 2 and res[2] <= res[1] / 2


def test_symmetrization_square():
    c = make_polygon(SQUARE)[0]
    res = [symmetrization_residual(*_ops(_mesh(c, N))) for N in (100, 200, 400)]
    assert res[2] <= 1e-3
    assert res[1] <= res[0] / 2 and res[2] <= res[1] / 2


def test_symmetrization_checks_kinds():
    mesh = _mesh(make_circle(1, 32), 32)
    S, K, Kp = _ops(mesh)
    with pytest.raises(ValueError):
        symmetrization_residual(S, Kp, K)


# -- container and I/O -------------------------------------------------------


def test_matrix_is_read_only_and_mesh_checked():
    m1 = _mesh(make_circle(1, 32), 32)
    m2 = _mesh(make_circle(2, 32), 32)
    S = assemble_single_layer(m1)
    with pytest.raises(ValueError):
        S.entries[0, 0] = 1.0
    with pytest.raises(MeshMismatchError):
        S @ assemble_adj_double_layer(m2)
    with pytest.raises(ValueError):
        BoundaryOperatorMatrix(OperatorKind.SINGLE_LAYER, np.zeros((3, 3)), m1)


def test_dump_load_roundtrip(tmp_path):
    mesh = _mesh(make_ellipse(2, 1, 32), 32)
    Kp = assemble_adj_double_layer(mesh)
    p = tmp_path / "kp.bin"
    dump_matrix(p, Kp)
    raw = p.read_bytes()
    assert len(raw) == 8 + 8 * 32 * 32
    assert int.from_bytes(raw[:8], "little") == 32
    assert np.array_equal(load_matrix(p), Kp.entries)
    p.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_matrix(p)


def test_single_layer_symmetry():
    # equal weights on the circle: S itself is symmetric; in general W·S is
    S = assemble_single_layer(_mesh(make_circle(2.0, 128), 128)).entries
    assert np.abs(S - S.T).max() < 1e-10
    mesh = _mesh(make_ellipse(2, 1, 128), 128)
    WS = mesh.weights[:, None] * assemble_single_layer(mesh).entries
    assert np.abs(WS - WS.T).max() < 1e-10


def test_smooth_duality_and_residual_at_256():
    mesh = _mesh(make_ellipse(2, 1, 256), 256)
    S, K, Kp = _ops(mesh)
    assert symmetrization_residual(S, K, Kp) <= 1e-6
    w = mesh.weights
    assert np.abs(w[:, None] * Kp.entries - K.entries.T * w[None, :]).max() <= 1e-6
