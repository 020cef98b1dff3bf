"""Brute-force state-vector oracle for small chains (L <= 12). Test-only."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .pauli import PauliString

MAX_SITES = 12


class DenseState:
    """Normalized amplitude vector; bit i of the basis index is site i."""

    def __init__(self, length: int, amplitudes: np.ndarray | None = None):
        if not 1 <= length <= MAX_SITES:
            raise ValueError(f"dense oracle supports 1..{MAX_SITES} sites, got {length}")
        self.length = length
        if amplitudes is None:
            amplitudes = np.zeros(2**length, dtype=complex)
            amplitudes[0] = 1.0
        self.amplitudes = np.asarray(amplitudes, dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def apply_pauli(self, m: PauliString) -> np.ndarray:
        """Return m|psi> (with the Hermitian phase i^{#Y})."""
        idx = np.arange(2**self.length)
        signs = 1 - 2 * (np.bitwise_count(idx & m.z).astype(np.int64) & 1)
        phase = 1j ** ((m.x & m.z).bit_count() % 4)
        out = np.empty_like(self.amplitudes)
        out[idx ^ m.x] = phase * signs * self.amplitudes
        return out

    def outcome_probs(self, m: PauliString) -> tuple[float, float]:
        """Born probabilities of the +1 and -1 outcomes."""
        expval = float(np.real(np.vdot(self.amplitudes, self.apply_pauli(m))))
        return 0.5 * (1.0 + expval), 0.5 * (1.0 - expval)


def dense_measure(state: DenseState, m: PauliString, rng: np.random.Generator) -> int:
    """Sample an outcome of ``m`` and collapse ``state`` onto it. Returns +1 or -1."""
    if m.length != state.length:
        raise ValueError("length mismatch")
    mpsi = state.apply_pauli(m)
    p_plus, _ = state.outcome_probs(m)
    outcome = 1 if rng.random() < p_plus else -1
    projected = 0.5 * (state.amplitudes + outcome * mpsi)
    norm = np.linalg.norm(projected)
    if norm < 1e-12:
        raise RuntimeError("selected a zero-probability outcome")
    state.amplitudes = projected / norm
    return outcome


def reduced_density_matrix(state: DenseState, region: Iterable[int]) -> np.ndarray:
    sites = sorted(set(region))
    n = state.length
    # C-order reshape puts site n-1 on axis 0
    psi = state.amplitudes.reshape((2,) * n)
    axes_a = [n - 1 - s for s in sites]
    rest = [a for a in range(n) if a not in axes_a]
    mat = np.transpose(psi, axes_a + rest).reshape(2 ** len(sites), -1)
    return mat @ mat.conj().T


def dense_entropy(state: DenseState, region: Iterable[int]) -> float:
    """Von Neumann entropy of the reduced state, in bits."""
    sites = sorted(set(region))
    if not sites or len(sites) == state.length:
        return 0.0
    evals = np.linalg.eigvalsh(reduced_density_matrix(state, sites))
    evals = evals[evals > 1e-14]
    return float(-np.sum(evals * np.log2(evals)))


def random_ensemble(length: int, rng: np.random.Generator):
    """A random factorizable, XYZ or single-word ensemble on ``length`` sites."""
    from .ensembles import FactorizableSpec, RangeDist, SingleStringSpec, SiteProbs, XYZSpec

    kind = rng.integers(3)
    p = rng.dirichlet(np.ones(3))
    p[2] = 1.0 - p[0] - p[1]
    probs = SiteProbs(*(float(v) for v in p))
    if kind == 0:
        r_lo = int(rng.integers(1, length + 1))
        r_hi = int(rng.integers(r_lo, length + 1))
        return FactorizableSpec(length, probs, RangeDist.uniform(r_lo, r_hi))
    if kind == 1:
        return XYZSpec(length, probs, int(rng.integers(1, length + 1)))
    word = "".join(rng.choice(list("XYZ"), size=int(rng.integers(1, length + 1))))
    return SingleStringSpec(length, word)


def _arcs(length: int):
    for start in range(length):
        for size in range(1, length):
            yield [(start + k) % length for k in range(size)]


def run_oracle_check(n_sequences: int = 200, n_measurements: int = 50,
                     sizes: tuple = (4, 6, 8), seed: int = 0, tol: float = 1e-8) -> dict:
    """Evolve stabilizer and dense states in lockstep and compare every arc entropy.

    Also checks that Born probabilities are 0, 1/2 or 1 and that the norm
    is preserved.
    """
    from .ensembles import sample
    from .stabilizer import StabilizerState

    rng = np.random.default_rng(seed)
    worst = 0.0
    comparisons = mismatches = bad_probs = 0
    for i in range(n_sequences):
        length = sizes[i % len(sizes)]
        spec = random_ensemble(length, rng)
        stab = StabilizerState.product_state(length)
        dense = DenseState(length)
        arcs = list(_arcs(length))
        for _ in range(n_measurements):
            m = sample(spec, rng)
            p_plus, _ = dense.outcome_probs(m)
            if min(abs(p_plus - v) for v in (0.0, 0.5, 1.0)) > 1e-10:
                bad_probs += 1
            stab.measure(m)
            dense_measure(dense, m, rng)
            if abs(dense.norm - 1.0) > 1e-10:
                bad_probs += 1
            for arc in arcs:
                # the smaller side keeps the reduced density matrix small
                side = arc if 2 * len(arc) <= length else [s for s in range(length) if s not in arc]
                diff = abs(stab.entropy(arc) - dense_entropy(dense, side))
                worst = max(worst, diff)
                comparisons += 1
                mismatches += diff > tol
    return {"sequences": n_sequences, "measurements": n_measurements, "sizes": list(sizes),
            "seed": seed, "comparisons": comparisons, "mismatches": int(mismatches),
            "max_abs_diff": worst, "bad_probabilities": bad_probs,
            "passed": mismatches == 0 and bad_probs == 0}
