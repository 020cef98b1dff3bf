"""Phase-free Pauli strings on a periodic chain, stored as two bitmasks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


class LengthMismatch(ValueError):
    """Two operators defined on chains of different length were combined."""


@dataclass(frozen=True)
class PauliString:
    """A Pauli string on ``length`` sites, sign discarded.

    Bit ``i`` of ``x`` is set iff site ``i`` carries X or Y; bit ``i`` of
    ``z`` is set iff site ``i`` carries Z or Y.
    """

    length: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be positive")
        full = (1 << self.length) - 1
        if self.x < 0 or self.z < 0 or (self.x | self.z) & ~full:
            raise ValueError("mask has bits outside the chain")

    @classmethod
    def identity(cls, length: int) -> PauliString:
        return cls(length)

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        """Parse ``"IXYZ..."``; character ``i`` is site ``i``."""
        x = z = 0
        for i, ch in enumerate(text):
            try:
                bx, bz = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r}") from None
            x |= bx << i
            z |= bz << i
        return cls(len(text), x, z)

    @classmethod
    def from_letters(cls, length: int, offset: int, letters: Sequence[str]) -> PauliString:
        """Contiguous string starting at ``offset``, wrapping around the ring."""
        if not letters:
            raise ValueError("empty letter sequence")
        if len(letters) > length:
            raise ValueError(f"{len(letters)} letters do not fit on {length} sites")
        x = z = 0
        for k, ch in enumerate(letters):
            if ch not in "XYZ" or len(ch) != 1:
                raise ValueError(f"invalid Pauli letter {ch!r}")
            site = (offset + k) % length
            bx, bz = _LETTER_BITS[ch]
            x |= bx << site
            z |= bz << site
        return cls(length, x, z)

    @classmethod
    def single(cls, length: int, site: int, letter: str) -> PauliString:
        return cls.from_letters(length, site, [letter])

    def __str__(self) -> str:
        return "".join(
            _BITS_LETTER[((self.x >> i) & 1, (self.z >> i) & 1)] for i in range(self.length)
        )

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __getitem__(self, site: int) -> str:
        return _BITS_LETTER[((self.x >> site) & 1, (self.z >> site) & 1)]

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    @property
    def is_identity(self) -> bool:
        return not (self.x | self.z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def support(self) -> list[int]:
        mask = self.x | self.z
        return [i for i in range(self.length) if (mask >> i) & 1]

    def contiguous_range(self) -> tuple[int, int] | None:
        """Return ``(offset, width)`` of the shortest ring window covering the support.

        ``None`` for the identity, or when no window narrower than the ring
        covers the support.
        """
        sites = self.support()
        if not sites:
            return None
        n = self.length
        # the covering window starts right after the largest gap between occupied sites
        best_gap, start = -1, sites[0]
        for a, b in zip(sites, sites[1:] + [sites[0] + n]):
            if b - a > best_gap:
                best_gap, start = b - a, b % n
        width = n - best_gap + 1
        if width >= n:
            return None
        return start, width

    def translate(self, shift: int) -> PauliString:
        """Cyclic shift by ``shift`` sites."""
        n = self.length
        s = shift % n
        full = (1 << n) - 1

        def rot(m: int) -> int:
            return ((m << s) | (m >> (n - s))) & full

        return PauliString(n, rot(self.x), rot(self.z))


def _check(a: PauliString, b: PauliString) -> None:
    if a.length != b.length:
        raise LengthMismatch(f"lengths differ: {a.length} vs {b.length}")


def anticommutes(a: PauliString, b: PauliString) -> int:
    """Symplectic inner product: 1 iff ``a`` and ``b`` anticommute."""
    _check(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) & 1


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product with the phase dropped."""
    _check(a, b)
    return PauliString(a.length, a.x ^ b.x, a.z ^ b.z)


def from_letters(length: int, offset: int, letters: Sequence[str]) -> PauliString:
    return PauliString.from_letters(length, offset, letters)


def parse_many(lines: Iterable[str]) -> list[PauliString]:
    return [PauliString.from_str(s.strip()) for s in lines if s.strip()]
