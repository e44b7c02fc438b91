"""Lawson iteratively reweighted least squares for discrete complex minimax.

Two variants share the same weight dynamics:

  constrained   minimize max_i |(V c)_i|  subject to  b^T c = 1
                (reciprocal gives the n-th extremal function at a point),
  fit           minimize max_i |f_i - (V c)_i|
                (best uniform approximation on a mesh).

Each weighted least-squares subproblem also yields a dual lower bound on the
minimax value (the weighted L2 objective), so every run reports a two-sided
certificate: the iterate value and the best dual bound, with their gap.
Weights are floored at WEIGHT_FLOOR to keep the active set alive; on a stall
the floor is doubled once and iteration resumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WEIGHT_FLOOR = 1e-14
DEFAULT_MAX_ITER = 200
DEFAULT_REL_TOL = 1e-10


@dataclass
class LawsonResult:
    coeffs: np.ndarray        # solution in the supplied basis
    value: float              # primal minimax objective of the final iterate
    dual: float               # best dual lower bound on the true optimum
    gap: float                # value / dual - 1 (certified optimality gap)
    iterations: int
    converged: bool           # stopping rule hit before the iteration cap
    weights: np.ndarray
    history: list

    @property
    def certified(self) -> bool:
        return self.gap <= 1e-7


def _solve_constrained(V: np.ndarray, a: np.ndarray, w: np.ndarray):
    """min c^H (V^H W V) c  s.t.  a^H c = 1; returns (c, dual_objective^2)."""
    H = (V.conj().T * w) @ V
    try:
        L = np.linalg.cholesky(H)
        y = np.linalg.solve(L.conj().T, np.linalg.solve(L, a))
    except np.linalg.LinAlgError:
        y = _pinv_solve(V, a, w)
    denom = np.real(np.vdot(a, y))
    if not np.isfinite(denom) or denom <= 0:
        y = _pinv_solve(V, a, w)
        denom = np.real(np.vdot(a, y))
        if not np.isfinite(denom) or denom <= 0:
            raise np.linalg.LinAlgError("constrained WLS solve failed")
    return y / denom, 1.0 / denom


def _pinv_solve(V, a, w):
    A = np.sqrt(w)[:, None] * V
    U, s, Qh = np.linalg.svd(A, full_matrices=False)
    keep = s > s[0] * 1e-14 if len(s) else s > 0
    s2 = np.zeros_like(s)
    s2[keep] = 1.0 / s[keep] ** 2
    Q = Qh.conj().T
    return Q @ (s2 * (Q.conj().T @ a))


def _solve_fit(V: np.ndarray, f: np.ndarray, w: np.ndarray):
    """min_c sum_i w_i |f_i - (Vc)_i|^2; returns (c, weighted residual norm)."""
    sw = np.sqrt(w)
    A = sw[:, None] * V
    rhs = sw * f
    c, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    res = rhs - A @ c
    return c, float(np.linalg.norm(res))


def lawson_constrained(V: np.ndarray, b: np.ndarray, w0: np.ndarray | None = None,
                       max_iter: int = DEFAULT_MAX_ITER,
                       rel_tol: float = DEFAULT_REL_TOL,
                       gap_stop: float = 1e-9) -> LawsonResult:
    """Minimax of |V c| on the mesh subject to the interpolation b^T c = 1.

    Stops on relative objective stagnation, on a certified primal/dual gap
    below gap_stop, or at the iteration cap.
    """
    m = V.shape[0]
    a = np.conj(b)
    w = np.full(m, 1.0 / m) if w0 is None else np.maximum(w0, 0)
    w = w / w.sum()
    floor = WEIGHT_FLOOR
    restarted = False
    prev = np.inf
    best_dual = 0.0
    history = []
    c = None
    obj = np.inf
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        c, dual_sq = _solve_constrained(V, a, w)
        r = V @ c
        absr = np.abs(r)
        obj = float(absr.max())
        best_dual = max(best_dual, float(np.sqrt(max(dual_sq, 0.0))))
        history.append(obj)
        gap = obj / best_dual - 1.0 if best_dual > 0 else np.inf
        if gap <= gap_stop:
            converged = True
            break
        if prev < np.inf and abs(prev - obj) <= rel_tol * max(obj, 1e-300):
            if gap > 1e-7 and not restarted:
                restarted = True
                floor *= 2.0
            else:
                converged = True
                break
        prev = obj
        w = np.maximum(w * absr, floor)
        w = w / w.sum()
    gap = obj / best_dual - 1.0 if best_dual > 0 else np.inf
    return LawsonResult(coeffs=c, value=obj, dual=best_dual, gap=gap,
                        iterations=it, converged=converged, weights=w,
                        history=history)


def lawson_fit(V: np.ndarray, f: np.ndarray, w0: np.ndarray | None = None,
               max_iter: int = DEFAULT_MAX_ITER,
               rel_tol: float = DEFAULT_REL_TOL,
               gap_stop: float = 1e-9) -> LawsonResult:
    """Best uniform approximation of samples f from the column span of V."""
    m = V.shape[0]
    w = np.full(m, 1.0 / m) if w0 is None else np.maximum(w0, 0)
    w = w / w.sum()
    floor = WEIGHT_FLOOR
    restarted = False
    prev = np.inf
    best_dual = 0.0
    history = []
    c = None
    obj = np.inf
    it = 0
    converged = False
    tiny = 1e-13 * max(1.0, float(np.abs(f).max()) if len(f) else 1.0)
    for it in range(1, max_iter + 1):
        c, wres = _solve_fit(V, f, w)
        r = f - V @ c
        absr = np.abs(r)
        obj = float(absr.max())
        best_dual = max(best_dual, wres)
        history.append(obj)
        gap = obj / best_dual - 1.0 if best_dual > 0 else np.inf
        if gap <= gap_stop or obj <= tiny:
            converged = True
            break
        if prev < np.inf and abs(prev - obj) <= rel_tol * max(obj, 1e-300):
            if gap > 1e-7 and not restarted and obj > tiny:
                restarted = True
                floor *= 2.0
            else:
                converged = True
                break
        prev = obj
        w = np.maximum(w * absr, floor)
        s = w.sum()
        if s <= 0:
            break
        w = w / s
    gap = obj / best_dual - 1.0 if best_dual > 0 else np.inf
    return LawsonResult(coeffs=c, value=obj, dual=best_dual, gap=gap,
                        iterations=it, converged=converged, weights=w,
                        history=history)
