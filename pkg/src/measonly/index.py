"""Ensemble non-commutativity index: probability that two independent draws anticommute."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .ensembles import (
    DEFAULT_ENUM_CAP,
    EnsembleSpec,
    FactorizableSpec,
    RangeDist,
    SingleStringSpec,
    SiteProbs,
    XYZSpec,
    enumerate_ensemble,
    sample_packed,
)
from .pauli import PauliString, anticommutes
from .scaling import LinearFit, PhaseBoundary, fit_linear
from .stabilizer import int_to_words

DEFAULT_L_IDX = 256


@dataclass
class IndexResult:
    value: float
    method: str  # "exact", "closed_form" or "monte_carlo"
    spec: dict
    n_samples: Optional[int] = None
    std_error: Optional[float] = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "method": self.method, "spec": self.spec}
        if self.method == "monte_carlo":
            d.update(n_samples=self.n_samples, std_error=self.std_error)
        return d


def _pack_ops(ops: Sequence[PauliString]):
    n = ops[0].length
    return (np.stack([int_to_words(o.x, n) for o in ops]),
            np.stack([int_to_words(o.z, n) for o in ops]))


def _pairwise_anticommute(xa, za, xb, zb) -> np.ndarray:
    """Matrix of symplectic products between two packed batches."""
    acc = np.zeros((xa.shape[0], xb.shape[0]), dtype=np.uint64)
    for k in range(xa.shape[1]):
        acc += np.bitwise_count((xa[:, None, k] & zb[None, :, k]) ^ (za[:, None, k] & xb[None, :, k]))
    return (acc & np.uint64(1)).astype(bool)


def anticommutation_matrix(ops: Sequence[PauliString]) -> np.ndarray:
    x, z = _pack_ops(ops)
    return _pairwise_anticommute(x, z, x, z)


def index_exact(spec: EnsembleSpec, cap: int = DEFAULT_ENUM_CAP) -> IndexResult:
    """Double sum of p(M1) p(M2) over all ordered pairs of the enumerated ensemble."""
    entries = enumerate_ensemble(spec, cap)
    p = np.array([e.prob for e in entries])
    x, z = _pack_ops([e.op for e in entries])
    total = 0.0
    block = max(1, 4_000_000 // len(entries))
    for i in range(0, len(entries), block):
        sl = slice(i, i + block)
        anti = _pairwise_anticommute(x[sl], z[sl], x, z)
        total += float(p[sl] @ anti @ p)
    return IndexResult(total, "exact", spec.to_dict())


def ring_overlaps(r1: int, r2: int, length: int) -> np.ndarray:
    """Overlap size of window ``[0, r1)`` with window ``[d, d + r2)`` for every offset d."""
    if r1 > length or r2 > length:
        raise ValueError(f"ranges {r1}, {r2} exceed ring length {length}")
    first = np.zeros(length, dtype=np.int64)
    first[:r1] = 1
    sites = (np.arange(length)[:, None] + np.arange(r2)[None, :]) % length
    return first[sites].sum(axis=1)


def _odd_parity_prob(m: np.ndarray, c: float) -> np.ndarray:
    """P(odd number of anticommuting sites among m), each independently with prob c."""
    return np.where(m > 0, 0.5 * (1.0 - (1.0 - 2.0 * c) ** m), 0.0)


def index_closed_form_factorizable(probs: SiteProbs, r1: int, r2: int, length: int) -> float:
    """Index between fixed-range factorizable strings of ranges r1 and r2."""
    m = ring_overlaps(r1, r2, length)
    return float(_odd_parity_prob(m, probs.anticommute_prob).sum() / length)


def index_closed_form_xyz(weights: SiteProbs, r: int, length: int) -> float:
    """Uniform strings anticommute iff their letters differ and the overlap is odd."""
    n_odd = int(np.count_nonzero(ring_overlaps(r, r, length) % 2 == 1))
    w = weights
    differ = 2.0 * (w.p_x * w.p_y + w.p_y * w.p_z + w.p_z * w.p_x)
    return n_odd * differ / length


def index_closed_form_single(letters: str, length: int) -> float:
    base = PauliString.from_letters(length, 0, letters)
    return sum(anticommutes(base, base.translate(d)) for d in range(length)) / length


def index_closed_form(spec: EnsembleSpec) -> IndexResult:
    """Offset-sum evaluation; no enumeration, so any ring length is cheap."""
    if isinstance(spec, FactorizableSpec):
        rs, pr = spec.ranges.support()
        value = sum(
            p1 * p2 * index_closed_form_factorizable(spec.probs, int(r1), int(r2), spec.length)
            for r1, p1 in zip(rs, pr) for r2, p2 in zip(rs, pr)
        )
    elif isinstance(spec, XYZSpec):
        value = index_closed_form_xyz(spec.weights, spec.r, spec.length)
    elif isinstance(spec, SingleStringSpec):
        value = index_closed_form_single(spec.letters, spec.length)
    else:
        raise TypeError(f"unsupported spec {spec!r}")
    return IndexResult(float(value), "closed_form", spec.to_dict())


def index_monte_carlo(spec: EnsembleSpec, n_samples: int, rng: np.random.Generator,
                      batch: int = 200_000) -> IndexResult:
    """Mean anticommutation over i.i.d. pairs, with binomial standard error."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    hits = 0
    done = 0
    while done < n_samples:
        n = min(batch, n_samples - done)
        x1, z1 = sample_packed(spec, rng, n)
        x2, z2 = sample_packed(spec, rng, n)
        acc = np.zeros(n, dtype=np.uint64)
        for k in range(x1.shape[1]):
            acc += np.bitwise_count((x1[:, k] & z2[:, k]) ^ (z1[:, k] & x2[:, k]))
        hits += int(np.count_nonzero(acc & np.uint64(1)))
        done += n
    mean = hits / n_samples
    return IndexResult(mean, "monte_carlo", spec.to_dict(), n_samples,
                       float(np.sqrt(mean * (1.0 - mean) / n_samples)))


def index_at(family: str, probs: SiteProbs, r: int, length: int) -> float:
    """Closed-form index of a fixed-range factorizable or XYZ ensemble."""
    if family == "factorizable":
        return index_closed_form_factorizable(probs, r, r, length)
    if family == "xyz":
        return index_closed_form_xyz(probs, r, length)
    raise ValueError(f"unknown family {family!r}")


def critical_index_curve(family: str, r_values: Sequence[int], boundary: PhaseBoundary,
                         length: int = DEFAULT_L_IDX) -> LinearFit:
    """Index at the boundary's critical point for each r, fitted to a line in r.

    Ranges for which the boundary has no transition on its path are skipped.
    """
    points = []
    for r in r_values:
        probs = boundary.critical_probs(r)
        if probs is not None:
            points.append((float(r), index_at(family, probs, int(r), length)))
    if len({x for x, _ in points}) < 2:
        raise ValueError(f"only {len(points)} usable ranges; need at least 2")
    return fit_linear(points)


def k_eff(ranges: RangeDist, fit: LinearFit, probs: SiteProbs,
          length: int = DEFAULT_L_IDX) -> float:
    """Range-weighted non-commutativity per unit range at ``probs``.

    Each term uses the fixed-range sub-ensemble's index at the mixed
    ensemble's transition point; ``fit`` supplies the intercept.
    """
    rs, pr = ranges.support()
    if np.any(rs <= 0):
        raise ValueError("range support contains r <= 0")
    return float(sum(
        p * (index_closed_form_factorizable(probs, int(r), int(r), length) - fit.intercept) / r
        for r, p in zip(rs, pr)
    ))


def naive_average_qc(ranges: RangeDist,
                     qc_of_r: Callable[[int], Optional[float]] | Mapping[int, float]) -> float:
    """Probability-weighted average of fixed-range critical points."""
    get = qc_of_r.get if isinstance(qc_of_r, Mapping) else qc_of_r
    total = 0.0
    for r, p in zip(*ranges.support()):
        qc = get(int(r))
        if qc is None:
            raise ValueError(f"no fixed-range transition at r={r}")
        total += p * qc
    return float(total)
