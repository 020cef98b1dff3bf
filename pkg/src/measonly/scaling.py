"""Phase boundaries, linear fits, and finite-size scaling collapse."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .ensembles import SiteProbs

EQ6_K = 1.16
EQ12_CONSTANTS = {
    "odd": (0.203, 1.924, 2.219),
    "even": (0.224, 1.375, 1.615),
}
_CENTER = np.full(3, 1.0 / 3.0)


class CollapseError(RuntimeError):
    """The rescaled curves do not overlap enough to define an objective."""


# ---------------------------------------------------------------- paths


@dataclass(frozen=True)
class ProbPath:
    """A line through the probability simplex, parameterized by distance from the center.

    ``symmetric``: p_x = p_y = q0, p_z = 1 - 2 q0, heading to the Z corner.
    ``anchor``: straight ray from the center to (a, 1 - a, 0).
    ``margin``: the p_z = 0 edge itself, p = (q0, 1 - q0, 0) with q0 <= 1/2.
    """

    kind: str = "symmetric"
    anchor_x: float = 0.5

    def __post_init__(self):
        if self.kind not in ("symmetric", "anchor", "margin"):
            raise ValueError(f"unknown path {self.kind!r}")
        if not 0.0 <= self.anchor_x <= 1.0:
            raise ValueError("anchor must lie on the p_z = 0 edge")

    def q0(self, dq: float) -> Optional[float]:
        """Path parameter at distance ``dq`` from the center, or None if off the simplex."""
        if self.kind == "symmetric":
            q0 = 1.0 / 3.0 - dq / math.sqrt(6.0)
            return q0 if q0 >= -1e-15 else None
        if self.kind == "margin":
            disc = 2.0 * dq * dq - 1.0 / 3.0
            if disc < -1e-15 or dq > math.sqrt(2.0 / 3.0) + 1e-15:
                return None
            return 0.5 * (1.0 - math.sqrt(max(disc, 0.0)))
        span = float(np.linalg.norm(self._anchor() - _CENTER))
        t = dq / span
        return t if t <= 1.0 + 1e-15 else None

    def _anchor(self) -> np.ndarray:
        return np.array([self.anchor_x, 1.0 - self.anchor_x, 0.0])

    def probs(self, dq: float) -> Optional[SiteProbs]:
        q0 = self.q0(dq)
        if q0 is None:
            return None
        if self.kind == "symmetric":
            return SiteProbs.symmetric_line(max(q0, 0.0))
        if self.kind == "margin":
            return SiteProbs.margin(q0)
        p = _CENTER + min(q0, 1.0) * (self._anchor() - _CENTER)
        p = np.clip(p, 0.0, 1.0)
        p[2] = 1.0 - p[0] - p[1]
        return SiteProbs(*(float(v) for v in p))

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "anchor":
            d["anchor_x"] = self.anchor_x
        return d


# ----------------------------------------------------------- boundaries


@dataclass(frozen=True)
class CriticalPoint:
    r: int
    delta_qc: Optional[float]
    q0: Optional[float]
    probs: Optional[SiteProbs]

    @property
    def exists(self) -> bool:
        return self.probs is not None

    def to_dict(self) -> dict:
        return {"r": self.r, "delta_qc": self.delta_qc, "q0": self.q0,
                "probs": None if self.probs is None else asdict(self.probs),
                "transition": self.exists}


def delta_qc_eq6(r: float, k: float = EQ6_K) -> Optional[float]:
    """Critical distance from the symmetric point for factorizable range-r strings.

    None when r <= 3k/2, where the boundary has no real solution.
    """
    rhs = 2.0 / 3.0 - k / r
    return math.sqrt(rhs) if rhs >= 0 else None


def r_from_delta_eq6(dq: float, k: float = EQ6_K) -> float:
    return k / (2.0 / 3.0 - dq * dq)


def qc_from_eq6(r: int, path: ProbPath = ProbPath(), k: float = EQ6_K) -> CriticalPoint:
    dq = delta_qc_eq6(r, k)
    if dq is None:
        return CriticalPoint(r, None, None, None)
    return CriticalPoint(r, dq, path.q0(dq), path.probs(dq))


def delta_qc_eq12(r: int, parity: Optional[str] = None) -> float:
    """Empirical XYZ critical distance, clamped at 0."""
    expected = "odd" if r % 2 else "even"
    if parity is not None and parity != expected:
        raise ValueError(f"r={r} is {expected}, not {parity}")
    a, b, alpha = EQ12_CONSTANTS[expected]
    return max(a - b / r ** alpha, 0.0)


def qc_from_eq12(r: int, parity: Optional[str] = None,
                 path: ProbPath = ProbPath()) -> CriticalPoint:
    if r < 2:
        raise ValueError("the empirical XYZ form needs r >= 2")
    dq = delta_qc_eq12(r, parity)
    if dq <= 0.0:
        return CriticalPoint(r, 0.0, None, None)
    return CriticalPoint(r, dq, path.q0(dq), path.probs(dq))


@dataclass(frozen=True)
class PhaseBoundary:
    """Critical points as a function of range, along a path in the simplex."""

    family: str = "eq6"  # "eq6" (factorizable) or "eq12" (XYZ)
    path: ProbPath = ProbPath()
    k: float = EQ6_K

    def point(self, r: int) -> CriticalPoint:
        if self.family == "eq6":
            return qc_from_eq6(r, self.path, self.k)
        if self.family == "eq12":
            return qc_from_eq12(r, None, self.path)
        raise ValueError(f"unknown boundary family {self.family!r}")

    def critical_probs(self, r: int) -> Optional[SiteProbs]:
        return self.point(r).probs

    def to_dict(self) -> dict:
        d = {"family": self.family, "path": self.path.to_dict()}
        if self.family == "eq6":
            d["k"] = self.k
        return d


# ----------------------------------------------------------- linear fit


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    points: list = field(default_factory=list)

    def __call__(self, x):
        return self.slope * np.asarray(x) + self.intercept

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "points": [list(p) for p in self.points]}


def fit_linear(points: Sequence[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares y = slope * x + intercept."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or np.unique(pts[:, 0]).size < 2:
        raise ValueError("need at least two distinct x values")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - slope * x - intercept) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(slope, intercept, min(max(r2, 0.0), 1.0), [tuple(p) for p in pts.tolist()])


# ------------------------------------------------------------- collapse


@dataclass
class CollapseFit:
    q_c: float
    nu: float
    shift_A: float
    objective: float
    preliminary: dict  # stage-one (q_c, nu, objective) with zero shift
    normalize_peak: bool
    sizes: list
    n_points: int

    def q_c_of(self, length):
        return self.q_c + self.shift_A * np.asarray(length, dtype=float) ** (-self.nu)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CollapseOptions:
    nu_starts: tuple = (0.5, 1.0, 1.5, 2.0, 3.0)
    n_qc_starts: int = 5
    shift_starts: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    xatol: float = 1e-4
    fatol: float = 1e-10
    maxfev: int = 20_000
    min_overlap: float = 0.3  # fraction of points that must fall inside other sizes' x-range
    nu_bounds: tuple = (0.1, 10.0)


def _groups(q, sizes, y, normalize_peak):
    q, sizes, y = (np.asarray(a, dtype=float) for a in (q, sizes, y))
    out = []
    for size in np.unique(sizes):
        sel = sizes == size
        order = np.argsort(q[sel])
        ys = y[sel][order]
        if normalize_peak:
            peak = np.max(np.abs(ys))
            if peak == 0:
                raise ValueError(f"size {size:g} has an all-zero curve; cannot normalize")
            ys = ys / peak
        out.append((size, q[sel][order], ys))
    return out


def collapse_objective(params, groups, opts: CollapseOptions = CollapseOptions()) -> float:
    """Mean squared distance of each size's points from the master curve of the others.

    The master curve is the piecewise-linear interpolant through all other
    sizes' rescaled points; only points inside its x-range count.
    """
    qc, nu = float(params[0]), float(params[1])
    shift = float(params[2]) if len(params) > 2 else 0.0
    lo, hi = opts.nu_bounds
    if not lo <= nu <= hi or not np.isfinite(qc):
        return np.inf
    xs = [(q - qc - shift * size ** (-nu)) * size ** (1.0 / nu) for size, q, _ in groups]
    total, count, n_all = 0.0, 0, 0
    for i, (_, _, yi) in enumerate(groups):
        n_all += yi.size
        ox = np.concatenate([xs[j] for j in range(len(groups)) if j != i])
        oy = np.concatenate([groups[j][2] for j in range(len(groups)) if j != i])
        order = np.argsort(ox, kind="stable")
        ox, oy = ox[order], oy[order]
        inside = (xs[i] >= ox[0]) & (xs[i] <= ox[-1])
        if inside.any():
            pred = np.interp(xs[i][inside], ox, oy)
            total += float(np.sum((yi[inside] - pred) ** 2))
            count += int(inside.sum())
    if count < max(3, opts.min_overlap * n_all):
        return np.inf
    return total / count


def _nelder_mead(fun, x0, opts):
    res = minimize(fun, x0, method="Nelder-Mead",
                   options={"xatol": opts.xatol, "fatol": opts.fatol,
                            "maxfev": opts.maxfev, "adaptive": len(x0) > 2})
    return float(res.fun), np.asarray(res.x, dtype=float)


def collapse(q, sizes, y, normalize_peak: bool = False, init: Optional[tuple] = None,
             opts: CollapseOptions = CollapseOptions()) -> CollapseFit:
    """Fit ``y(q, L) = F[(q - q_c(L)) L^(1/nu)]`` with ``q_c(L) = q_c + A L^(-nu)``.

    Stage one fits (q_c, nu) at A = 0 from a grid of starts; stage two
    refines (q_c, nu, A) from the stage-one optimum.
    """
    groups = _groups(q, sizes, y, normalize_peak)
    if len(groups) < 3:
        raise ValueError(f"need at least 3 system sizes, got {len(groups)}")
    if min(g[1].size for g in groups) < 5:
        raise ValueError("need at least 5 parameter points per size")

    qs = np.concatenate([g[1] for g in groups])
    q_lo, q_hi = np.quantile(qs, [0.2, 0.8])
    starts = [(qc0, nu0) for qc0 in np.linspace(q_lo, q_hi, opts.n_qc_starts) for nu0 in opts.nu_starts]
    if init is not None:
        starts.insert(0, tuple(init))

    def obj2(p):
        return collapse_objective(p, groups, opts)

    best = None
    for idx, x0 in enumerate(starts):
        if not np.isfinite(obj2(x0)):
            continue
        f, x = _nelder_mead(obj2, np.array(x0, dtype=float), opts)
        key = (f, idx)
        if best is None or key < best[0]:
            best = (key, x)
    if best is None or not np.isfinite(best[0][0]):
        raise CollapseError("rescaled curves never overlap; check the parameter grid")
    (f1, _), (qc1, nu1) = best[0], best[1]

    l_min = min(g[0] for g in groups)
    l_mid = math.exp(np.mean([math.log(g[0]) for g in groups]))
    span = (qs.max() - qs.min()) / 4.0

    def obj3(p):
        return collapse_objective(p, groups, opts)

    best3 = ((f1, -1), np.array([qc1, nu1, 0.0]))
    for idx, s in enumerate(opts.shift_starts):
        a0 = s * span * l_min ** nu1
        # keep the shifted critical point at the middle size where stage one put it
        x0 = np.array([qc1 - a0 * l_mid ** (-nu1), nu1, a0])
        if not np.isfinite(obj3(x0)):
            continue
        f, x = _nelder_mead(obj3, x0, opts)
        if (f, idx) < best3[0]:
            best3 = ((f, idx), x)
    (f3, _), (qc3, nu3, a3) = best3
    return CollapseFit(
        q_c=float(qc3), nu=float(nu3), shift_A=float(a3), objective=float(f3),
        preliminary={"q_c": float(qc1), "nu": float(nu1), "objective": float(f1)},
        normalize_peak=normalize_peak, sizes=[float(g[0]) for g in groups],
        n_points=int(qs.size),
    )


def collapsed_coordinates(fit: CollapseFit, q, sizes, y, normalize_peak: Optional[bool] = None):
    """Rows ``(L, q, x, y)`` in rescaled coordinates, for plotting."""
    norm = fit.normalize_peak if normalize_peak is None else normalize_peak
    rows = []
    for size, qs, ys in _groups(q, sizes, y, norm):
        xs = (qs - fit.q_c_of(size)) * size ** (1.0 / fit.nu)
        rows.extend(zip([size] * qs.size, qs.tolist(), xs.tolist(), ys.tolist()))
    return rows


# ------------------------------------------------------------ crossings


def crossing_points(q, sizes, y) -> list[dict]:
    """Where the curves of each pair of consecutive sizes cross, by linear interpolation.

    Only parameter values shared by both sizes are used.
    """
    groups = _groups(q, sizes, y, False)
    out = []
    for (l1, q1, y1), (l2, q2, y2) in zip(groups, groups[1:]):
        common, i1, i2 = np.intersect1d(q1, q2, return_indices=True)
        diff = y2[i2] - y1[i1]
        for k in range(common.size - 1):
            d0, d1 = diff[k], diff[k + 1]
            if d0 == 0.0:
                out.append({"L1": l1, "L2": l2, "q": float(common[k])})
            elif d0 * d1 < 0:
                t = d0 / (d0 - d1)
                out.append({"L1": l1, "L2": l2,
                            "q": float(common[k] + t * (common[k + 1] - common[k]))})
        if common.size and diff[-1] == 0.0:
            out.append({"L1": l1, "L2": l2, "q": float(common[-1])})
    return out
