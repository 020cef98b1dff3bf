"""Sign-free stabilizer states and their entanglement observables."""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

from . import _kernels
from .pauli import LengthMismatch, PauliString


class Outcome(enum.Enum):
    UNCHANGED = 0
    REPLACED = 1


def n_words(length: int) -> int:
    return (length + 63) // 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean array ``(..., L)`` into ``uint64`` words ``(..., W)``, little-endian bits."""
    bits = np.asarray(bits, dtype=bool)
    length = bits.shape[-1]
    w = n_words(length)
    padded = np.zeros(bits.shape[:-1] + (64 * w,), dtype=bool)
    padded[..., :length] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little")[..., :length].astype(bool)


def int_to_words(mask: int, length: int) -> np.ndarray:
    w = n_words(length)
    return np.array([(mask >> (64 * k)) & 0xFFFFFFFFFFFFFFFF for k in range(w)], dtype=np.uint64)


def words_to_int(words: np.ndarray) -> int:
    return sum(int(v) << (64 * k) for k, v in enumerate(words))


def _sites(region: Iterable[int], length: int) -> np.ndarray:
    sites = np.unique(np.fromiter((int(s) for s in region), dtype=np.int64))
    if sites.size and (sites[0] < 0 or sites[-1] >= length):
        raise ValueError(f"region {sites.tolist()} not within 0..{length - 1}")
    return sites


class StabilizerState:
    """Pure stabilizer state on a ring of ``length`` qubits, signs discarded.

    Generators live in two ``(L, W)`` uint64 arrays; row ``r`` holds
    generator ``r``. Instances are mutable and owned by one trajectory.
    """

    def __init__(self, x: np.ndarray, z: np.ndarray, length: int):
        if x.shape != (length, n_words(length)) or z.shape != x.shape:
            raise ValueError("tableau shape does not match length")
        self.length = length
        self.x = np.ascontiguousarray(x, dtype=np.uint64)
        self.z = np.ascontiguousarray(z, dtype=np.uint64)

    @classmethod
    def product_state(cls, length: int) -> StabilizerState:
        """The all-zero state, stabilized by Z on every site."""
        if length < 1:
            raise ValueError("length must be at least 1")
        eye = pack_bits(np.eye(length, dtype=bool))
        return cls(np.zeros_like(eye), eye, length)

    @classmethod
    def from_generators(cls, generators: list[PauliString]) -> StabilizerState:
        if not generators:
            raise ValueError("no generators")
        length = generators[0].length
        if len(generators) != length:
            raise ValueError(f"need {length} generators, got {len(generators)}")
        x = np.stack([int_to_words(g.x, length) for g in generators])
        z = np.stack([int_to_words(g.z, length) for g in generators])
        state = cls(x, z, length)
        if not state.is_valid():
            raise ValueError("generators are not commuting and independent")
        return state

    def copy(self) -> StabilizerState:
        return StabilizerState(self.x.copy(), self.z.copy(), self.length)

    @property
    def generators(self) -> list[PauliString]:
        return [
            PauliString(self.length, words_to_int(self.x[r]), words_to_int(self.z[r]))
            for r in range(self.length)
        ]

    def measure(self, m: PauliString, last_pivot: bool = False) -> Outcome:
        """Projective measurement of ``m``; the outcome sign is irrelevant and not tracked.

        The lowest-index anticommuting generator is the pivot (``last_pivot``
        selects the highest one instead).
        """
        if m.length != self.length:
            raise LengthMismatch(f"measurement on {m.length} sites, state has {self.length}")
        if m.is_identity:
            raise ValueError("cannot measure the identity string")
        changed = _kernels.measure(
            self.x, self.z, int_to_words(m.x, self.length), int_to_words(m.z, self.length),
            last_pivot,
        )
        return Outcome.REPLACED if changed else Outcome.UNCHANGED

    def measure_packed(self, mx: np.ndarray, mz: np.ndarray) -> int:
        """Measure every row of the packed batch ``(mx, mz)`` in order."""
        return int(_kernels.measure_many(self.x, self.z, mx, mz))

    def entropy(self, region: Iterable[int]) -> int:
        """Entanglement entropy of ``region`` in bits: rank of the restricted tableau minus its size."""
        sites = _sites(region, self.length)
        return int(_kernels.region_rank(self.x, self.z, sites)) - sites.size

    def arc_entropies(self, start: int, max_len: int) -> np.ndarray:
        """Entropies of the arcs starting at ``start`` with lengths 1..max_len."""
        if not 0 <= max_len <= self.length:
            raise ValueError("arc longer than the ring")
        return _kernels.arc_entropies(self.x, self.z, start % self.length, max_len)

    def mutual_information(self, a: Iterable[int], b: Iterable[int]) -> int:
        a, b = set(a), set(b)
        if a & b:
            raise ValueError("regions overlap")
        return self.entropy(a) + self.entropy(b) - self.entropy(a | b)

    def tripartite_information(self, a: Iterable[int], b: Iterable[int], c: Iterable[int]) -> int:
        a, b, c = set(a), set(b), set(c)
        if a & b or b & c or a & c:
            raise ValueError("regions overlap")
        s = self.entropy
        return s(a) + s(b) + s(c) - s(a | b) - s(b | c) - s(c | a) + s(a | b | c)

    def symplectic_rank(self) -> int:
        return int(_kernels.region_rank(self.x, self.z, np.arange(self.length, dtype=np.int64)))

    def is_valid(self) -> bool:
        """Generators pairwise commute and are independent."""
        buf = np.zeros(self.length, dtype=np.uint64)
        for r in range(self.length):
            _kernels.anticommute_rows(self.x, self.z, self.x[r], self.z[r], buf)
            if buf.any():
                return False
        return self.symplectic_rank() == self.length

    def dumps(self) -> str:
        """One generator per line in I/X/Y/Z text form."""
        return "".join(f"{g}\n" for g in self.generators)

    @classmethod
    def loads(cls, text: str) -> StabilizerState:
        return cls.from_generators([PauliString.from_str(s) for s in text.split() if s])


def product_state(length: int) -> StabilizerState:
    return StabilizerState.product_state(length)


def entanglement_entropy(state: StabilizerState, region: Iterable[int]) -> int:
    return state.entropy(region)


def mutual_information(state: StabilizerState, a, b) -> int:
    return state.mutual_information(a, b)


def tripartite_information(state: StabilizerState, a, b, c) -> int:
    return state.tripartite_information(a, b, c)
