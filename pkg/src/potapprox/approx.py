"""Best uniform polynomial approximation and constructive schemes.

Provides minimax approximation on meshes (Lawson iteration in the shared
Newton-on-Leja basis), truncated Jackson norms, the two-sided Cauchy-kernel
bracket, Lagrange interpolation at node prefixes with its closed form for
Cauchy kernels, the interpolation decay bound through level sets, the
contour-based constructive approximant with its fully explicit certified
bound, and the gluing construction for functions supported on one part of a
disjoint union.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import lawson
from .errors import MeshAdequacyError, SpecValidationError
from .extremal import (ExtremalValue, LevelSet, Mesh, NodeSequence,
                       green_estimate, leja_points, level_set_auto, log_nodal_poly,
                       newton_basis, phi_n, phi_shell_inf)
from .sets import (CompactSet, MeshRole, UnionSet, build_mesh, distance,
                   green_oracle, square_cover)

__all__ = [
    "ComplexPoly",
    "ApproxResult",
    "JacksonNormValue",
    "ContourPartition",
    "BracketResult",
    "InterpDecayResult",
    "RungeResult",
    "GlueResult",
    "cauchy_kernel",
    "best_approx",
    "jackson_norm",
    "cauchy_kernel_bracket",
    "lagrange_interp",
    "cauchy_interp_closed_form",
    "interp_decay_bound",
    "runge_approximant",
    "glue_union_approx",
]


def cauchy_kernel(zeta: complex):
    """The function z -> 1/(zeta - z), holomorphic away from zeta."""
    zeta = complex(zeta)

    def f(z):
        return 1.0 / (zeta - np.asarray(z, dtype=complex))

    f.label = f"cauchy({zeta.real:g},{zeta.imag:g})"
    return f


def _samples(f, pts: np.ndarray) -> np.ndarray:
    vals = f(pts) if callable(f) else np.asarray(f, dtype=complex)
    vals = np.asarray(vals, dtype=complex)
    if vals.shape != pts.shape:
        raise ValueError("sample array does not match the mesh")
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite function samples on the mesh")
    return vals


@dataclass(frozen=True)
class ComplexPoly:
    """Polynomial in the column-normalized Newton basis of a node sequence.

    node_values, when present, are the interpolation values the polynomial
    was built from; evaluation at the basis nodes must reproduce them.
    """

    nodes: NodeSequence
    coeffs: np.ndarray
    node_values: np.ndarray | None = None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        pts = np.atleast_1d(np.asarray(z, dtype=complex))
        vals = newton_basis(self.nodes, pts, self.degree) @ self.coeffs
        return complex(vals[0]) if scalar else vals

    @staticmethod
    def from_node_values(nodes: NodeSequence, values: np.ndarray) -> "ComplexPoly":
        """Interpolate the given values at the first len(values) nodes."""
        values = np.asarray(values, dtype=complex)
        deg = len(values) - 1
        if deg > nodes.degree:
            raise MeshAdequacyError(
                f"node sequence of degree {nodes.degree} cannot interpolate "
                f"degree {deg}")
        B = newton_basis(nodes, nodes.nodes[: deg + 1], deg)
        coeffs = scipy.linalg.solve_triangular(B, values, lower=True)
        return ComplexPoly(nodes=nodes, coeffs=coeffs, node_values=values)


@dataclass(frozen=True)
class ApproxResult:
    poly: ComplexPoly
    error: float                 # sup over the mesh of |f - p|, recomputed
    error_lower: float           # dual lower bound on the true mesh minimax
    method: str                  # lawson | truncation | interpolation | runge | glue
    iterations: int
    residual_history: tuple
    stalled: bool = False


def best_approx(f, n: int, nodes: NodeSequence,
                max_iter: int = lawson.DEFAULT_MAX_ITER) -> ApproxResult:
    """Best uniform approximation of f by degree <= n on the node mesh.

    Lawson iteratively reweighted least squares; the returned error is the
    recomputed mesh sup of |f - p| and error_lower is a certified lower bound
    on the true mesh minimax, so [error_lower, error] brackets the optimum.
    """
    mesh = nodes.source_mesh
    if len(mesh) < 8 * max(n, 1):
        raise MeshAdequacyError(
            f"mesh of {len(mesh)} points is too coarse for degree {n} (needs 8n)")
    fv = _samples(f, mesh.points)
    V = nodes.basis_on_mesh(n)
    res = lawson.lawson_fit(V, fv, max_iter=max_iter)
    poly = ComplexPoly(nodes=nodes, coeffs=res.coeffs)
    err = float(np.abs(fv - V @ res.coeffs).max())
    return ApproxResult(poly=poly, error=err, error_lower=res.dual,
                        method="lawson", iterations=res.iterations,
                        residual_history=tuple(res.history),
                        stalled=not res.converged)


@dataclass(frozen=True)
class JacksonNormValue:
    ell: float
    value: float
    n_max: int
    attained_at: int
    tail_flag: bool
    sup_norm: float
    errors: tuple  # dist(f, P_n) for n = 1..n_max


def jackson_norm(f, ell: float, n_max: int, nodes: NodeSequence,
                 errors: tuple | None = None) -> JacksonNormValue:
    """Truncated Jackson norm ||f|| + max_{1<=n<=n_max} n^ell dist(f, P_n).

    tail_flag marks an unreliable truncation: the weighted sup was still
    attained at the last degree.  Precomputed per-degree errors can be passed
    to evaluate several ell values off one sweep.
    """
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    mesh = nodes.source_mesh
    fv = _samples(f, mesh.points)
    sup = float(np.abs(fv).max())
    if errors is None:
        errors = tuple(best_approx(fv, n, nodes).error for n in range(1, n_max + 1))
    ns = np.arange(1, n_max + 1, dtype=float)
    weighted = ns ** ell * np.asarray(errors)
    k = int(np.argmax(weighted))
    return JacksonNormValue(ell=ell, value=sup + float(weighted[k]), n_max=n_max,
                            attained_at=k + 1, tail_flag=(k + 1 == n_max),
                            sup_norm=sup, errors=tuple(errors))


@dataclass(frozen=True)
class BracketResult:
    lower: float
    upper: float
    measured: float
    zeta: complex
    n: int
    phi: ExtremalValue
    approx: ApproxResult

    @property
    def holds(self) -> bool:
        return self.lower <= self.measured <= self.upper * (1.0 + 1e-6)


def cauchy_kernel_bracket(spec: CompactSet, nodes: NodeSequence, zeta: complex,
                          n: int) -> BracketResult:
    """Two-sided bracket for the best approximation of a Cauchy kernel.

    lower = 1/((dist + diam) Phi_{n+1}(zeta)) and upper = 1/(dist Phi_{n+1})
    computed from the extremal solve (dual side for the lower bound, witness
    side for the upper); measured is the Lawson minimax error of 1/(zeta-z).
    """
    d = float(distance(spec, zeta))
    if d <= 0:
        raise SpecValidationError("zeta must lie off the set")
    diam = spec.diameter()
    ev = phi_n(nodes.source_mesh, n + 1, zeta, nodes=nodes)
    ap = best_approx(cauchy_kernel(zeta), n, nodes)
    lower = 0.0 if not math.isfinite(ev.dual_value) else 1.0 / ((d + diam) * ev.dual_value)
    upper = 1.0 / (d * ev.value)
    return BracketResult(lower=lower, upper=upper, measured=ap.error,
                         zeta=complex(zeta), n=n, phi=ev, approx=ap)


def lagrange_interp(nodes: NodeSequence, f_at_nodes, z):
    """Interpolation polynomial through the first len(f_at_nodes) nodes at z."""
    values = np.asarray(f_at_nodes, dtype=complex)
    poly = ComplexPoly.from_node_values(nodes, values)
    return poly(z)


def cauchy_interp_closed_form(nodes: NodeSequence, degree: int, eta: complex, z):
    """Closed form of the interpolant of 1/(eta - .): uses the nodal polynomial.

    Interpolating the Cauchy kernel at nodes x_0..x_degree gives
    (w(eta) - w(z)) / (w(eta) (eta - z)) with w the nodal polynomial.
    """
    eta = complex(eta)
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(pts - eta) < 1e-14):
        raise ValueError("evaluation point collides with the kernel pole")
    xs = nodes.nodes[: degree + 1]
    w_eta = np.prod(eta - xs)
    if w_eta == 0:
        raise ValueError("pole coincides with an interpolation node")
    w_z = np.prod(pts[:, None] - xs[None, :], axis=1)
    vals = (w_eta - w_z) / (w_eta * (eta - pts))
    return complex(vals[0]) if scalar else vals


@dataclass(frozen=True)
class InterpDecayResult:
    bound: float
    measured: float
    slack: float
    c_const: float
    d_const: float
    rho: float
    phi_zeta: float
    dist_level: float
    level: LevelSet


def _green_source(spec: CompactSet, nodes: NodeSequence, use_oracle: bool):
    if use_oracle and spec.oracle is not None:
        return lambda z: green_oracle(spec, z)
    return lambda z: green_estimate(nodes, z)


def interp_decay_bound(spec: CompactSet, nodes: NodeSequence, zeta: complex,
                       rho: float, n: int, use_oracle: bool = True,
                       grid_resolution: float = 0.02) -> InterpDecayResult:
    """Geometric decay bound for interpolation of a Cauchy kernel.

    Computes the explicit constant c = 2 d + diam E, with d the maximal
    distance from the level set at the sup of the extremal function over the
    unit neighborhood, then
        bound = (n+1) c / (dist(C, E) dist(zeta, E)) * (rho / Phi(zeta))^(n+1)
    and compares it with the measured interpolation error of 1/(zeta - z) at
    the first n+1 nodes; slack = bound / measured (>= 1 when the bound holds).
    """
    g = _green_source(spec, nodes, use_oracle)
    dist_zeta = float(distance(spec, zeta))
    if dist_zeta <= 0:
        raise SpecValidationError("zeta must lie off the set")
    phi_zeta = math.exp(float(np.asarray(g(np.array([complex(zeta)])))[0]))
    if not (1.0 < rho <= phi_zeta * (1 + 1e-9)):
        raise ValueError(f"rho must lie in (1, Phi(zeta)] = (1, {phi_zeta:g}]")
    shell1 = build_mesh(spec, MeshRole.shell(1.0), 0.02)
    rho1 = math.exp(float(np.max(g(shell1.points))))
    lev1 = level_set_auto(spec, nodes, rho1, grid_resolution, g_func=g)
    d_const = float(max(spec.distance(lev1.points()).max(), 1.0))
    c_const = 2.0 * d_const + spec.diameter()
    lev = level_set_auto(spec, nodes, rho, grid_resolution, g_func=g)
    dist_level = lev.dist_to_set
    if dist_level <= 0:
        raise SpecValidationError("level set touches the set; refine the grid")
    bound = ((n + 1) * c_const / (dist_level * dist_zeta)
             * (rho / phi_zeta) ** (n + 1))
    mesh = nodes.source_mesh
    f = cauchy_kernel(zeta)
    interp_vals = cauchy_interp_closed_form(nodes, n, zeta, mesh.points)
    measured = float(np.abs(f(mesh.points) - interp_vals).max())
    return InterpDecayResult(bound=bound, measured=measured,
                             slack=bound / measured if measured > 0 else math.inf,
                             c_const=c_const, d_const=d_const, rho=rho,
                             phi_zeta=phi_zeta, dist_level=dist_level, level=lev)


# ---------------------------------------------------------------------------
# Contour-based constructive approximant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourPartition:
    """Equal-length partition of the cover boundary with midpoint samples."""

    loops: tuple                    # oriented closed polylines of the contour
    piece_starts: np.ndarray
    piece_ends: np.ndarray
    zetas: np.ndarray               # arclength midpoints, the sample points
    coefficients: np.ndarray        # (1/2 pi i) f(zeta_j) * (end - start)
    piece_length: float
    pieces_per_edge: int

    @property
    def total_length(self) -> float:
        return self.piece_length * len(self.zetas)

    def rational_values(self, z: np.ndarray) -> np.ndarray:
        """Values of the simple-fraction sum R(z) = sum c_j / (zeta_j - z)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        step = max(1, int(2_000_000 / max(len(self.zetas), 1)))
        for k in range(0, len(z), step):
            chunk = z[k:k + step]
            out[k:k + step] = (self.coefficients[None, :]
                               / (self.zetas[None, :] - chunk[:, None])).sum(axis=1)
        return out


@dataclass(frozen=True)
class RungeResult:
    partition: ContourPartition
    approx: ApproxResult
    certified_bound: float
    c_const: float
    phi_value: float
    sup_f_neighborhood: float
    rational_error: float           # sup over the mesh of |f - R|


def runge_approximant(spec: CompactSet, f, delta: float, b: float, n: int,
                      nodes: NodeSequence | None = None,
                      mesh: Mesh | None = None,
                      resolution: float | None = None,
                      shell_candidates: int | None = 16) -> RungeResult:
    """Constructive polynomial approximant built from a contour integral.

    Builds the boundary of the square cover of the b*delta neighborhood with
    square side (1-b)delta/4, splits it into equal pieces short enough
    relative to the shell infimum of the (n+1)-st extremal function, converts
    the resulting simple-fraction sum into a degree-n polynomial through
    near-extremal witness polynomials (one per cover edge), and certifies
        error <= c ||f||_{E_delta} / ((1-b) delta^2 phi_{n+1}(b delta)),
    with the fully explicit constant c = 28/pi (2 + diam E)^2.
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")
    if not (0.5 <= b < 1.0):
        raise ValueError("b must lie in [1/2, 1)")
    diam = spec.diameter()
    c_const = 28.0 / math.pi * (2.0 + diam) ** 2
    if resolution is None:
        resolution = max(spec.diameter(), 1.0) * 2 * math.pi / 512
    if mesh is None:
        mesh = build_mesh(spec, MeshRole.boundary(), resolution)
    nbhd = build_mesh(spec, MeshRole.neighborhood(delta), max(resolution, delta / 8))
    fnorm = float(np.abs(_samples(f, nbhd.points)).max())

    # Finite sets: polynomials interpolate exactly; the shell infimum is +inf.
    if spec.is_finite_points() and n + 1 >= len(spec.pts):
        fin_nodes = leja_points(mesh, len(mesh) - 1)
        vals = _samples(f, fin_nodes.nodes)
        poly = ComplexPoly.from_node_values(fin_nodes, vals)
        err = float(np.abs(_samples(f, mesh.points) - poly(mesh.points)).max())
        ap = ApproxResult(poly=poly, error=err, error_lower=0.0,
                          method="interpolation", iterations=0,
                          residual_history=())
        empty = ContourPartition(loops=(), piece_starts=np.empty(0, complex),
                                 piece_ends=np.empty(0, complex),
                                 zetas=np.empty(0, complex),
                                 coefficients=np.empty(0, complex),
                                 piece_length=0.0, pieces_per_edge=0)
        return RungeResult(partition=empty, approx=ap, certified_bound=math.inf,
                           c_const=c_const, phi_value=math.inf,
                           sup_f_neighborhood=fnorm, rational_error=0.0)

    if nodes is None:
        nodes = leja_points(mesh, n + 1)
    t = b * delta
    shell = build_mesh(spec, MeshRole.shell(t), max(t / 4, resolution / 2))
    phi = phi_shell_inf(mesh, n + 1, t, shell, nodes=nodes,
                        candidates=shell_candidates)
    side = (1.0 - b) * delta / 4.0
    pieces_per_edge = max(1, math.ceil(phi.value))
    piece_len = side / pieces_per_edge

    cover = square_cover(spec, side, inflate=t)
    starts, ends = [], []
    for loop in cover.boundary_loops:
        for k in range(len(loop) - 1):
            v0, v1 = loop[k], loop[k + 1]
            for j in range(pieces_per_edge):
                starts.append(v0 + (v1 - v0) * j / pieces_per_edge)
                ends.append(v0 + (v1 - v0) * (j + 1) / pieces_per_edge)
    starts = np.asarray(starts, dtype=complex)
    ends = np.asarray(ends, dtype=complex)
    zetas = 0.5 * (starts + ends)
    coeffs = _samples(f, zetas) * (ends - starts) / (2j * math.pi)
    part = ContourPartition(loops=cover.boundary_loops, piece_starts=starts,
                            piece_ends=ends, zetas=zetas, coefficients=coeffs,
                            piece_length=piece_len,
                            pieces_per_edge=pieces_per_edge)

    fm = _samples(f, mesh.points)
    r_err = float(np.abs(fm - part.rational_values(mesh.points)).max())

    # One witness polynomial per cover edge, shared by that edge's pieces.
    xs = nodes.nodes[: n + 1]
    p_at_nodes = np.zeros(n + 1, dtype=complex)
    edge_mids = 0.5 * (starts[::pieces_per_edge] + ends[pieces_per_edge - 1::pieces_per_edge])
    for e, mid in enumerate(edge_mids):
        ev = phi_n(mesh, n + 1, complex(mid), nodes=nodes, max_iter=80)
        if ev.witness is None:
            continue
        lo = e * pieces_per_edge
        hi = lo + pieces_per_edge
        zet = zetas[lo:hi]
        B = newton_basis(nodes, np.concatenate([zet, xs]), n + 1)
        qv = B @ ev.witness
        q_z, q_x = qv[: len(zet)], qv[len(zet):]
        # p_j(x) = c_j (q(zeta_j) - q(x)) / ((zeta_j - x) q(zeta_j))
        with np.errstate(invalid="ignore", divide="ignore"):
            contrib = (coeffs[lo:hi, None] * (q_z[:, None] - q_x[None, :])
                       / ((zet[:, None] - xs[None, :]) * q_z[:, None]))
        p_at_nodes += contrib.sum(axis=0)
    poly = ComplexPoly.from_node_values(nodes, p_at_nodes)
    err = float(np.abs(fm - poly(mesh.points)).max())
    ap = ApproxResult(poly=poly, error=err, error_lower=0.0, method="runge",
                      iterations=0, residual_history=())
    bound = c_const * fnorm / ((1.0 - b) * delta ** 2 * phi.value)
    return RungeResult(partition=part, approx=ap, certified_bound=bound,
                       c_const=c_const, phi_value=phi.value,
                       sup_f_neighborhood=fnorm, rational_error=r_err)


# ---------------------------------------------------------------------------
# Gluing construction on disjoint unions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GlueResult:
    rho_hat: float              # measured geometric decay base of chi_B errors
    decay_r2: float             # log-linear fit quality of that decay
    x_hat: float                # nodal estimate of sup over B of Phi_A
    k: int                      # degree multiplier: rho_hat^k >= margin * x_hat
    chi_errors: tuple           # dist_{A u B}(chi_B, P_n), n = 1..n_max
    r_degrees: tuple            # base degrees n of the assembled r_n
    r_errors: tuple             # sup over the union mesh of |f - r_n|
    r_polys: tuple              # the assembled ComplexPoly objects
    norm_ratio: float           # truncated |f|_ell on the union / on A
    jackson_union: JacksonNormValue
    jackson_part: JacksonNormValue


GLUE_MARGIN = 1.1


def glue_union_approx(spec_a: CompactSet, spec_b: CompactSet, f, ell: float,
                      n_max: int, resolution: float | None = None) -> GlueResult:
    """Assemble r_n = p_n (1 - q_{kn}) approximating f on A and 0 on B.

    p_n is the best approximation of f on A; q_m the best approximation on
    A u B of the indicator of B, whose error must decay geometrically (the
    indicator extends holomorphically across a neighborhood); k is the
    smallest integer with rho_hat^k >= 1.1 x_hat, recomputed from measured
    quantities.  Rejects when the measured decay is not geometric.
    """
    gap = float(np.min(spec_b.distance(spec_a.boundary_points(
        spec_a.feature_size() / 16))))
    if gap <= spec_a.feature_size() / 50.0:
        raise SpecValidationError("the two parts must be strictly disjoint")
    for s, name in ((spec_a, "A"), (spec_b, "B")):
        if not s.polynomially_convex():
            raise SpecValidationError(f"part {name} must be polynomially convex")
    if n_max < 8:
        raise ValueError("n_max must be at least 8")
    union = UnionSet((spec_a, spec_b))
    if resolution is None:
        resolution = union.diameter() * 2 * math.pi / 1024
    res_a = resolution
    mesh_a = build_mesh(spec_a, MeshRole.boundary(), res_a)
    while len(mesh_a) < 8 * n_max + 2:
        res_a /= 2.0
        mesh_a = build_mesh(spec_a, MeshRole.boundary(), res_a)
    mesh_u = build_mesh(union, MeshRole.boundary(), resolution)

    nodes_a = leja_points(mesh_a, min(max(n_max, 120), len(mesh_a) - 1))
    # Non-polar guard: the nodal sup-norm growth proxies the capacity.
    cap_proxy = math.exp(nodes_a.log_nodal_supnorm / (nodes_a.degree + 1))
    if not math.isfinite(cap_proxy) or cap_proxy < 1e-8:
        raise SpecValidationError("part A looks polar (vanishing capacity proxy)")

    on_b = spec_b.distance(mesh_u.points) <= resolution / 10.0
    chi_b = on_b.astype(complex)
    f_union = np.zeros(len(mesh_u), dtype=complex)
    f_union[~on_b] = _samples(f, mesh_u.points[~on_b])

    max_degree = min(len(mesh_u) // 8, 3 * n_max)
    nodes_u = leja_points(mesh_u, max_degree)
    chi_errors = [best_approx(chi_b, m, nodes_u).error for m in range(1, n_max + 1)]
    lo = min(5, n_max // 2)
    ns = np.arange(lo, n_max + 1, dtype=float)
    logs = np.log(np.maximum(chi_errors[lo - 1:], 1e-300))
    slope, intercept = np.polyfit(ns, logs, 1)
    pred = slope * ns + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    rho_hat = math.exp(-slope)
    if rho_hat <= 1.0 or r2 < 0.9:
        raise MeshAdequacyError(
            f"indicator decay is not geometric on this mesh: rho_hat={rho_hat:g}, "
            f"r2={r2:g}; refine the mesh or raise n_max")

    g_on_b = green_estimate(nodes_a, mesh_u.points[on_b])
    x_hat = float(np.exp(g_on_b.max()))
    k = 1
    while rho_hat ** k < GLUE_MARGIN * x_hat:
        k += 1

    r_degrees = [m for m in range(1, n_max + 1) if (k + 1) * m <= max_degree]
    r_errors = []
    r_polys = []
    for m in r_degrees:
        p_m = best_approx(f, m, nodes_a)
        q_km = best_approx(chi_b, k * m, nodes_u)
        vals = p_m.poly(mesh_u.points) * (1.0 - q_km.poly(mesh_u.points))
        node_idx = nodes_u.node_indices[: (k + 1) * m + 1]
        r_poly = ComplexPoly.from_node_values(nodes_u, vals[node_idx])
        r_polys.append(r_poly)
        r_errors.append(float(np.abs(f_union - vals).max()))

    u_errors = tuple(best_approx(f_union, m, nodes_u).error
                     for m in range(1, n_max + 1))
    jackson_u = jackson_norm(f_union, ell, n_max, nodes_u, errors=u_errors)
    jackson_a = jackson_norm(f, ell, n_max, nodes_a)
    ratio = jackson_u.value / jackson_a.value if jackson_a.value > 0 else math.inf
    return GlueResult(rho_hat=rho_hat, decay_r2=r2, x_hat=x_hat, k=k,
                      chi_errors=tuple(chi_errors), r_degrees=tuple(r_degrees),
                      r_errors=tuple(r_errors), r_polys=tuple(r_polys),
                      norm_ratio=ratio, jackson_union=jackson_u,
                      jackson_part=jackson_a)
