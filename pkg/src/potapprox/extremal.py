"""Leja/Fekete node systems and extremal functions on meshes.

The n-th extremal function at a point z is the supremum of |p(z)| over
polynomials of degree <= n with sup norm at most 1 on the mesh.  It is
computed through the equivalent convex problem min{||p||_mesh : p(z) = 1}
solved by Lawson iteration in a column-normalized Newton basis built on the
Leja ordering of the mesh; every iterate yields a feasible witness polynomial
(a certified lower bound), and the weighted-L2 dual yields an upper bound.

Node sequences double as Green's function estimators: the normalized log of
the nodal polynomial converges to the Green's function with pole at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import lawson
from .errors import DegreeError, MeshAdequacyError, WindowError
from .sets import CompactSet, Mesh, MeshRole, build_mesh

__all__ = [
    "NodeSequence",
    "ExtremalValue",
    "ShellInfimum",
    "LevelSet",
    "leja_points",
    "fekete_points_exact",
    "newton_basis",
    "phi_n",
    "phi_shell_inf",
    "green_estimate",
    "level_set",
]

# Points farther than this many window diameters use the nodal lower bound
# instead of the Lawson solve (conditioning).
FAR_FIELD_FACTOR = 10.0


@dataclass(frozen=True)
class NodeSequence:
    """Ordered interpolation nodes on a mesh plus nodal-polynomial metadata.

    log_scales[k] is the log of the sup over the mesh of |prod_{j<k}(z-x_j)|,
    so the Newton basis column B_k = prod_{j<k}(z-x_j) / exp(log_scales[k])
    has sup norm exactly 1 on the mesh.  log_nodal_supnorm is the analogous
    value for the full nodal polynomial (all len(nodes) factors).
    """

    nodes: np.ndarray
    kind: str  # "leja" | "fekete-exact"
    log_nodal_supnorm: float
    source_mesh: Mesh
    node_indices: np.ndarray
    log_scales: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return len(self.nodes) - 1

    def basis_on_mesh(self, degree: int | None = None) -> np.ndarray:
        """Newton basis columns evaluated on the source mesh (cached)."""
        full = self._cache.get("V")
        if full is None:
            full = newton_basis(self, self.source_mesh.points)
            self._cache["V"] = full
        if degree is None:
            return full
        return full[:, : degree + 1]

    def prefix_supnorm_log(self, k: int) -> float:
        """log sup over the mesh of |prod_{j<k}(z - x_j)| for k <= degree+1."""
        if k <= self.degree:
            return float(self.log_scales[k])
        return self.log_nodal_supnorm


def leja_points(mesh: Mesh, n: int) -> NodeSequence:
    """Greedy Leja sequence of n+1 nodes drawn from the mesh.

    Starts at the point of maximal modulus (ties: smallest mesh index); each
    subsequent node maximizes the product of distances to the chosen ones,
    accumulated in log space.  Ties again break to the smallest index.
    """
    pts = mesh.points
    m = len(pts)
    if m <= n:
        raise MeshAdequacyError(f"mesh has {m} points, cannot supply degree {n}")
    acc = np.zeros(m)
    used = np.zeros(m, dtype=bool)
    start = int(np.argmax(np.abs(pts)))
    order = [start]
    used[start] = True
    log_scales = [0.0]
    with np.errstate(divide="ignore"):
        for k in range(1, n + 2):
            acc = acc + np.log(np.abs(pts - pts[order[-1]]))
            masked = np.where(used, -np.inf, acc)
            nxt = int(np.argmax(masked))
            top = masked[nxt]
            if k <= n:
                if not np.isfinite(top):
                    raise DegreeError(
                        f"mesh exhausted/duplicated at degree {k - 1}", achieved=k - 2)
                log_scales.append(top)
                order.append(nxt)
                used[nxt] = True
            else:
                log_supnorm = top  # sup of the full nodal polynomial (-inf if exhausted)
    return NodeSequence(
        nodes=pts[np.asarray(order)],
        kind="leja",
        log_nodal_supnorm=float(log_supnorm),
        source_mesh=mesh,
        node_indices=np.asarray(order, dtype=int),
        log_scales=np.asarray(log_scales),
    )


FEKETE_GUARD = 10_000_000


def fekete_points_exact(mesh: Mesh, n: int) -> NodeSequence:
    """Exhaustive Fekete subset of n+1 mesh points (test oracle only)."""
    pts = mesh.points
    m = len(pts)
    if m <= n:
        raise MeshAdequacyError(f"mesh has {m} points, cannot supply degree {n}")
    if math.comb(m, n + 1) > FEKETE_GUARD:
        raise MeshAdequacyError(
            f"C({m},{n + 1}) exceeds the combinatorial guard {FEKETE_GUARD}")
    with np.errstate(divide="ignore"):
        logd = np.log(np.abs(pts[:, None] - pts[None, :]))
    best = -np.inf
    best_combo = None
    for combo in combinations(range(m), n + 1):
        idx = np.asarray(combo)
        s = logd[np.ix_(idx, idx)][np.triu_indices(n + 1, 1)].sum()
        if s > best:
            best = s
            best_combo = idx
    # Order the subset Leja-style so the Newton basis is well conditioned.
    sub = pts[best_combo]
    order = [int(np.argmax(np.abs(sub)))]
    log_scales = [0.0]
    acc = np.zeros(len(sub))
    used = np.zeros(len(sub), dtype=bool)
    used[order[0]] = True
    with np.errstate(divide="ignore"):
        for _ in range(n):
            acc = acc + np.log(np.abs(sub - sub[order[-1]]))
            masked = np.where(used, -np.inf, acc)
            nxt = int(np.argmax(masked))
            order.append(nxt)
            used[nxt] = True
            log_scales.append(masked[nxt])
    ordered_idx = best_combo[np.asarray(order)]
    # Sup norm of the nodal polynomial over the full mesh.
    with np.errstate(divide="ignore"):
        lognodal = np.log(np.abs(pts[:, None] - pts[ordered_idx][None, :])).sum(axis=1)
    # Rescale normalizers to mesh sup norms for basis conditioning.
    mesh_scales = [0.0]
    with np.errstate(divide="ignore"):
        accm = np.zeros(m)
        for k in range(n):
            accm = accm + np.log(np.abs(pts - pts[ordered_idx[k]]))
            mesh_scales.append(float(np.max(accm)))
    return NodeSequence(
        nodes=pts[ordered_idx],
        kind="fekete-exact",
        log_nodal_supnorm=float(np.max(lognodal)),
        source_mesh=mesh,
        node_indices=ordered_idx,
        log_scales=np.asarray(mesh_scales),
    )


def newton_basis(nodes: NodeSequence, z, degree: int | None = None) -> np.ndarray:
    """Column-normalized Newton basis evaluated at arbitrary points."""
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    deg = nodes.degree if degree is None else degree
    if deg > nodes.degree:
        raise DegreeError(f"node sequence has degree {nodes.degree} < {deg}",
                          achieved=nodes.degree)
    V = np.zeros((len(pts), deg + 1), dtype=complex)
    V[:, 0] = 1.0
    ls = nodes.log_scales
    for k in range(1, deg + 1):
        V[:, k] = V[:, k - 1] * (pts - nodes.nodes[k - 1]) * math.exp(ls[k - 1] - ls[k])
    return V


def log_nodal_poly(nodes: NodeSequence, z) -> np.ndarray:
    """log |omega_n(z)| for the full nodal polynomial, -inf at the nodes."""
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        return np.log(np.abs(pts[:, None] - nodes.nodes[None, :])).sum(axis=1)


@dataclass(frozen=True)
class ExtremalValue:
    n: int
    z: complex
    value: float                  # witness-based lower estimate, >= 1
    dual_value: float             # dual upper estimate (inf if uncertified)
    certificate: str              # converged | lower-witness | upper-feasible
    residual_gap: float           # dual_value / value - 1
    witness: np.ndarray | None    # Newton coefficients, sup norm 1 on the mesh
    nodes: NodeSequence | None


def _on_set(mesh: Mesh, z: complex) -> bool:
    tol = mesh.resolution / 10.0
    return float(mesh.parent.distance(z)) <= tol


def phi_n(mesh: Mesh, n: int, z: complex, nodes: NodeSequence | None = None,
          max_iter: int = lawson.DEFAULT_MAX_ITER,
          w0: np.ndarray | None = None) -> ExtremalValue:
    """n-th extremal function of the meshed set at z.

    Returns a witness-backed value: the reported value is |p(z)| for an
    explicit polynomial with sup norm 1 on the mesh, so it is a certified
    lower bound; dual_value bounds the true mesh optimum from above.
    """
    z = complex(z)
    if n == 0 or _on_set(mesh, z):
        # Constants are extremal: the witness is p = 1.
        witness = np.zeros(n + 1, dtype=complex)
        witness[0] = 1.0
        return ExtremalValue(n=n, z=z, value=1.0, dual_value=1.0,
                             certificate="converged", residual_gap=0.0,
                             witness=witness, nodes=nodes)
    if mesh.parent.is_finite_points() and n >= len(mesh.parent.pts):
        return ExtremalValue(n=n, z=z, value=math.inf, dual_value=math.inf,
                             certificate="converged", residual_gap=0.0,
                             witness=None, nodes=nodes)
    if len(mesh) < 8 * n:
        raise MeshAdequacyError(
            f"mesh of {len(mesh)} points is too coarse for degree {n} (needs 8n)")
    if nodes is None or nodes.degree < n:
        nodes = leja_points(mesh, n)

    x0, y0, x1, y1 = mesh.parent.bbox()
    diam_window = math.hypot(x1 - x0, y1 - y0)
    center = complex((x0 + x1) / 2, (y0 + y1) / 2)
    V = nodes.basis_on_mesh(n)
    if abs(z - center) > FAR_FIELD_FACTOR * max(diam_window, 1e-12):
        # Far field: nodal lower bound only (solver conditioning); log space
        # so that astronomically large values do not overflow intermediates.
        logfac = np.log(np.abs(z - nodes.nodes[:n]))
        logb = np.concatenate([[0.0], np.cumsum(logfac)]) - nodes.log_scales[: n + 1]
        k = int(np.argmax(logb))
        value = float(np.exp(min(logb[k], 700.0)))
        witness = np.zeros(n + 1, dtype=complex)
        witness[k] = 1.0
        return ExtremalValue(n=n, z=z, value=max(value, 1.0), dual_value=math.inf,
                             certificate="lower-witness", residual_gap=math.inf,
                             witness=witness, nodes=nodes)

    b = newton_basis(nodes, np.array([z]), n)[0]
    if w0 is None:
        # Inverse-square seeding approximates the limiting dual measure.
        w0 = 1.0 / np.maximum(np.abs(mesh.points - z), 1e-12) ** 2
    res = lawson.lawson_constrained(V, b, w0=w0, max_iter=max_iter)
    norm = max(res.value, 1e-300)
    witness = res.coeffs / norm
    value = 1.0 / norm
    dual = 1.0 / res.dual if res.dual > 0 else math.inf
    gap = res.gap
    cert = "converged" if (res.converged and gap <= 1e-7) else "lower-witness"
    if value < 1.0:
        # Constants are always feasible; fall back to the witness p = 1.
        witness = np.zeros(n + 1, dtype=complex)
        witness[0] = 1.0
        value, cert = 1.0, "lower-witness"
    return ExtremalValue(n=n, z=z, value=value, dual_value=dual,
                         certificate=cert, residual_gap=gap,
                         witness=witness, nodes=nodes)


@dataclass(frozen=True)
class ShellInfimum:
    value: float
    argmin: complex | None
    n: int
    t: float
    evaluations: int

    def __float__(self):
        return self.value


def phi_shell_inf(mesh_E: Mesh, n: int, t: float, shell: Mesh,
                  nodes: NodeSequence | None = None,
                  candidates: int | None = None,
                  max_iter: int = lawson.DEFAULT_MAX_ITER) -> ShellInfimum:
    """Infimum of the n-th extremal function over a distance-t shell mesh.

    Takes the minimum of witness-backed values over the shell points and
    reports the argmin point; +inf sentinel for finite point sets once the
    degree reaches the point count.

    With ``candidates=k`` the full solve runs only on the k shell points with
    the smallest nodal Green estimate (the infimum localizes where the Green's
    function is smallest); the dense grids of the feasibility checks rely on
    this pruning for speed.
    """
    if shell.role.kind != "shell" or abs((shell.role.param or 0.0) - t) > 1e-12:
        raise MeshAdequacyError("shell mesh role must be shell(t) for the same t")
    if mesh_E.parent.is_finite_points() and n >= len(mesh_E.parent.pts):
        return ShellInfimum(value=math.inf, argmin=None, n=n, t=t, evaluations=0)
    if nodes is None:
        nodes = leja_points(mesh_E, n)
    pts = shell.points
    if candidates is not None and len(pts) > candidates:
        proxy = green_estimate(nodes, pts)
        order = np.argsort(proxy, kind="stable")[:candidates]
        pts = pts[np.sort(order)]
    best = math.inf
    arg = None
    for z in pts:
        ev = phi_n(mesh_E, n, complex(z), nodes=nodes, max_iter=max_iter)
        if ev.value < best:
            best = ev.value
            arg = complex(z)
    return ShellInfimum(value=best, argmin=arg, n=n, t=t, evaluations=len(pts))


def green_estimate(nodes: NodeSequence, z) -> float | np.ndarray:
    """Nodal Green's function estimate max(0, h_n/(n+1)) at z.

    h_n is the log nodal polynomial minus its mesh sup; the estimate is
    lower-biased and converges as the degree grows.  Exactly 0 at the nodes.
    """
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    pts = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros(pts.shape)
    # Chunk the broadcast so large grids stay within memory.
    step = max(1, int(4_000_000 / max(len(nodes.nodes), 1)))
    for k in range(0, len(pts), step):
        chunk = pts[k:k + step]
        lg = log_nodal_poly(nodes, chunk)
        g = (lg - nodes.log_nodal_supnorm) / (len(nodes.nodes))
        out[k:k + step] = np.maximum(g, 0.0)
    out[~np.isfinite(out)] = 0.0
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class LevelSet:
    rho: float
    polylines: tuple  # complex ndarrays tracing the contour
    dist_to_set: float

    def points(self) -> np.ndarray:
        return np.concatenate(self.polylines)


def level_set(spec: CompactSet, nodes: NodeSequence, rho: float,
              resolution: float, halfwidth: float | None = None,
              g_func=None) -> LevelSet:
    """Contour of the nodal Green estimate at level log(rho).

    Samples the estimate on a window grid, extracts the contour by marching
    squares, and returns the minimum distance from the contour to the set.
    Raises WindowError (with a suggested half-width) if the level set is not
    enclosed by the window.  g_func overrides the Green source (e.g. a
    closed-form oracle) while keeping the same extraction path.
    """
    from skimage import measure

    if rho <= 1.0:
        raise ValueError("rho must exceed 1")
    x0, y0, x1, y1 = spec.bbox()
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    base = max(x1 - x0, y1 - y0, 1.0)
    h = halfwidth if halfwidth is not None else base * 1.5 + 1.0
    level = math.log(rho)
    xs = np.arange(cx - h, cx + h + resolution, resolution)
    ys = np.arange(cy - h, cy + h + resolution, resolution)
    zz = xs[None, :] + 1j * ys[:, None]
    if g_func is None:
        g = green_estimate(nodes, zz.ravel()).reshape(zz.shape)
    else:
        g = np.asarray(g_func(zz.ravel()), dtype=float).reshape(zz.shape)
    edge = np.concatenate([g[0, :], g[-1, :], g[:, 0], g[:, -1]])
    if edge.min() <= level:
        raise WindowError(
            f"level set for rho={rho:g} leaves the window of half-width {h:g}",
            suggested_halfwidth=h * 1.6)
    contours = measure.find_contours(g, level)
    if not contours:
        raise WindowError(f"no contour found at rho={rho:g}",
                          suggested_halfwidth=h * 1.6)
    polylines = []
    for cont in contours:
        zs = (xs[0] + cont[:, 1] * resolution) + 1j * (ys[0] + cont[:, 0] * resolution)
        polylines.append(zs)
    allpts = np.concatenate(polylines)
    dist = float(spec.distance(allpts).min())
    return LevelSet(rho=rho, polylines=tuple(polylines), dist_to_set=dist)


def level_set_auto(spec: CompactSet, nodes: NodeSequence, rho: float,
                   resolution: float, max_tries: int = 6,
                   g_func=None) -> LevelSet:
    """level_set with automatic window growth on WindowError."""
    h = None
    for _ in range(max_tries):
        try:
            return level_set(spec, nodes, rho, resolution, halfwidth=h,
                             g_func=g_func)
        except WindowError as err:
            h = err.suggested_halfwidth
    raise WindowError(f"window growth exhausted for rho={rho:g}",
                      suggested_halfwidth=h or 0.0)
