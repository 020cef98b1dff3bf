"""Measurement ensembles: contiguous Pauli strings at uniform offsets on a ring."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Union

import numpy as np

from .pauli import PauliString
from .stabilizer import pack_bits

LETTERS = "XYZ"
# letter code 0/1/2 -> (x bit, z bit)
_XBIT = np.array([True, True, False])
_ZBIT = np.array([False, True, True])

DEFAULT_ENUM_CAP = 10**6


class EnumerationTooLarge(RuntimeError):
    """Exhaustive enumeration refused; use Monte Carlo sampling instead."""


@dataclass(frozen=True)
class SiteProbs:
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        ps = (self.p_x, self.p_y, self.p_z)
        if any(not 0.0 <= p <= 1.0 for p in ps):
            raise ValueError(f"probabilities out of [0, 1]: {ps}")
        if abs(sum(ps) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(ps)!r}, not 1")

    @classmethod
    def symmetric_line(cls, q0: float) -> SiteProbs:
        """p_x = p_y = q0, p_z = 1 - 2 q0."""
        return cls(q0, q0, 1.0 - 2.0 * q0)

    @classmethod
    def margin(cls, q0: float) -> SiteProbs:
        """p_x = q0, p_y = 1 - q0, p_z = 0."""
        return cls(q0, 1.0 - q0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_x, self.p_y, self.p_z])

    @property
    def anticommute_prob(self) -> float:
        """Chance that two independent letters differ: 1 - sum p^2."""
        return 1.0 - float(np.sum(self.as_array() ** 2))


def delta_q(probs: SiteProbs) -> float:
    """Euclidean distance of (p_x, p_y, p_z) from the symmetric point."""
    return math.sqrt(sum((1.0 / 3.0 - p) ** 2 for p in (probs.p_x, probs.p_y, probs.p_z)))


@dataclass(frozen=True)
class RangeDist:
    """Finite range distribution, truncated to [r_min, r_max] and renormalized.

    ``kind`` is one of ``fixed``, ``uniform``, ``exponential`` (p ~ exp(-rate r))
    or ``power`` (p ~ r^-exponent).
    """

    kind: str
    r_min: int
    r_max: int
    rate: float = 0.5
    exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in ("fixed", "uniform", "exponential", "power"):
            raise ValueError(f"unknown range distribution {self.kind!r}")
        if self.r_min < 1 or self.r_max < self.r_min:
            raise ValueError(f"bad range support [{self.r_min}, {self.r_max}]")
        if self.kind == "fixed" and self.r_min != self.r_max:
            raise ValueError("fixed range needs r_min == r_max")

    @classmethod
    def fixed(cls, r: int) -> RangeDist:
        return cls("fixed", r, r)

    @classmethod
    def uniform(cls, r_min: int, r_max: int) -> RangeDist:
        return cls("uniform", r_min, r_max)

    @classmethod
    def exponential(cls, r_min: int, r_max: int, rate: float = 0.5) -> RangeDist:
        return cls("exponential", r_min, r_max, rate=rate)

    @classmethod
    def power(cls, r_min: int, r_max: int, exponent: float = 2.0) -> RangeDist:
        return cls("power", r_min, r_max, exponent=exponent)

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        rs = np.arange(self.r_min, self.r_max + 1)
        if self.kind in ("fixed", "uniform"):
            w = np.ones(rs.size)
        elif self.kind == "exponential":
            w = np.exp(-self.rate * rs)
        else:
            w = rs.astype(float) ** (-self.exponent)
        return rs, w / w.sum()

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "r": self.r_min}
        d = {"kind": self.kind, "r_min": self.r_min, "r_max": self.r_max}
        if self.kind == "exponential":
            d["rate"] = self.rate
        if self.kind == "power":
            d["exponent"] = self.exponent
        return d


@dataclass(frozen=True)
class WeightedOperator:
    op: PauliString
    prob: float


def _letters_to_bits(length, offsets, codes, active):
    """Bits for strings whose k-th letter ``codes[:, k]`` sits at ``offsets + k``."""
    n, width = codes.shape
    xb = np.zeros((n, length), dtype=bool)
    zb = np.zeros((n, length), dtype=bool)
    rows = np.repeat(np.arange(n), width).reshape(n, width)
    sites = (offsets[:, None] + np.arange(width)[None, :]) % length
    xb[rows[active], sites[active]] = _XBIT[codes[active]]
    zb[rows[active], sites[active]] = _ZBIT[codes[active]]
    return xb, zb


@dataclass(frozen=True)
class FactorizableSpec:
    """Strings with i.i.d. letters per site and range drawn from ``ranges``."""

    length: int
    probs: SiteProbs
    ranges: RangeDist
    family = "factorizable"

    def __post_init__(self):
        if self.ranges.r_max > self.length:
            raise ValueError(f"range {self.ranges.r_max} exceeds ring length {self.length}")

    @property
    def max_range(self) -> int:
        return self.ranges.r_max

    def with_length(self, length: int) -> FactorizableSpec:
        return replace(self, length=length)

    def at_q0(self, q0: float) -> FactorizableSpec:
        return replace(self, probs=SiteProbs.symmetric_line(q0))

    def sample_bits(self, rng: np.random.Generator, n: int):
        rs, pr = self.ranges.support()
        r = rs[rng.choice(rs.size, size=n, p=pr)] if rs.size > 1 else np.full(n, rs[0])
        offsets = rng.integers(0, self.length, size=n)
        codes = rng.choice(3, size=(n, self.ranges.r_max), p=self.probs.as_array())
        active = np.arange(self.ranges.r_max)[None, :] < r[:, None]
        return _letters_to_bits(self.length, offsets, codes, active)

    def support_size(self) -> int:
        k = int(np.count_nonzero(self.probs.as_array()))
        rs, pr = self.ranges.support()
        return self.length * int(sum(k ** int(r) for r, p in zip(rs, pr) if p > 0))

    def _entries(self):
        letters = [(ch, p) for ch, p in zip(LETTERS, self.probs.as_array()) if p > 0]
        rs, pr = self.ranges.support()
        for r, p_r in zip(rs, pr):
            if p_r <= 0:
                continue
            for combo in itertools.product(letters, repeat=int(r)):
                word = [ch for ch, _ in combo]
                p_word = p_r * math.prod(p for _, p in combo)
                for i in range(self.length):
                    yield PauliString.from_letters(self.length, i, word), p_word / self.length

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "L": self.length,
            "probs": {"x": self.probs.p_x, "y": self.probs.p_y, "z": self.probs.p_z},
            "range": self.ranges.to_dict(),
        }


@dataclass(frozen=True)
class XYZSpec:
    """Uniform strings X^r, Y^r, Z^r with weights ``(P_X, P_Y, P_Z)``."""

    length: int
    weights: SiteProbs
    r: int
    family = "xyz"

    def __post_init__(self):
        if not 1 <= self.r <= self.length:
            raise ValueError(f"range {self.r} not in 1..{self.length}")

    @property
    def max_range(self) -> int:
        return self.r

    def with_length(self, length: int) -> XYZSpec:
        return replace(self, length=length)

    def at_q0(self, q0: float) -> XYZSpec:
        return replace(self, weights=SiteProbs.symmetric_line(q0))

    def sample_bits(self, rng: np.random.Generator, n: int):
        offsets = rng.integers(0, self.length, size=n)
        code = rng.choice(3, size=n, p=self.weights.as_array())
        codes = np.repeat(code[:, None], self.r, axis=1)
        return _letters_to_bits(self.length, offsets, codes, np.ones_like(codes, dtype=bool))

    def support_size(self) -> int:
        return self.length * int(np.count_nonzero(self.weights.as_array()))

    def _entries(self):
        for ch, p in zip(LETTERS, self.weights.as_array()):
            if p > 0:
                for i in range(self.length):
                    yield PauliString.from_letters(self.length, i, ch * self.r), p / self.length

    def to_dict(self) -> dict:
        w = self.weights
        return {"family": self.family, "L": self.length,
                "weights": {"x": w.p_x, "y": w.p_y, "z": w.p_z}, "r": self.r}


@dataclass(frozen=True)
class SingleStringSpec:
    """All translates of one fixed word, equally likely (the cycle models)."""

    length: int
    letters: str
    family = "single"

    def __post_init__(self):
        if not self.letters or set(self.letters) - set(LETTERS):
            raise ValueError(f"bad letters {self.letters!r}")
        if len(self.letters) > self.length:
            raise ValueError(f"{self.letters!r} longer than ring length {self.length}")

    @property
    def max_range(self) -> int:
        return len(self.letters)

    def with_length(self, length: int) -> SingleStringSpec:
        return replace(self, length=length)

    def sample_bits(self, rng: np.random.Generator, n: int):
        offsets = rng.integers(0, self.length, size=n)
        code = np.array([LETTERS.index(ch) for ch in self.letters])
        codes = np.broadcast_to(code, (n, code.size))
        return _letters_to_bits(self.length, offsets, codes, np.ones(codes.shape, dtype=bool))

    def support_size(self) -> int:
        return self.length

    def _entries(self):
        for i in range(self.length):
            yield PauliString.from_letters(self.length, i, self.letters), 1.0 / self.length

    def to_dict(self) -> dict:
        return {"family": self.family, "L": self.length, "letters": self.letters}


EnsembleSpec = Union[FactorizableSpec, XYZSpec, SingleStringSpec]

CYCLE_MODELS = {3: "XXY", 4: "XYXY", 5: "XXXYY"}


def cycle_model(n: int, length: int) -> SingleStringSpec:
    return SingleStringSpec(length, CYCLE_MODELS[n])


def sample_packed(spec: EnsembleSpec, rng: np.random.Generator, n: int):
    """Draw ``n`` operators as packed ``(mx, mz)`` word arrays of shape ``(n, W)``."""
    xb, zb = spec.sample_bits(rng, n)
    return pack_bits(xb), pack_bits(zb)


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> PauliString:
    xb, zb = spec.sample_bits(rng, 1)
    weights = 1 << np.arange(spec.length, dtype=object)
    return PauliString(spec.length, int(np.dot(xb[0], weights)), int(np.dot(zb[0], weights)))


def enumerate_ensemble(spec: EnsembleSpec, cap: int = DEFAULT_ENUM_CAP) -> list[WeightedOperator]:
    """Every operator in the ensemble with its probability; duplicates merged."""
    size = spec.support_size()
    if size > cap:
        raise EnumerationTooLarge(f"support of {size} operators exceeds cap {cap}")
    merged: dict[PauliString, float] = {}
    for op, p in spec._entries():
        merged[op] = merged.get(op, 0.0) + p
    return [WeightedOperator(op, p) for op, p in merged.items() if p > 0]


def spec_from_dict(d: dict) -> EnsembleSpec:
    """Build a spec from its ``to_dict`` form (as found in config files)."""
    family = d.get("family")
    length = int(d["L"])
    if family == "factorizable":
        probs = _probs(d["probs"]) if "probs" in d else SiteProbs.symmetric_line(float(d["q0"]))
        return FactorizableSpec(length, probs, range_from_dict(d["range"]))
    if family == "xyz":
        w = _probs(d["weights"]) if "weights" in d else SiteProbs.symmetric_line(float(d["q0"]))
        return XYZSpec(length, w, int(d["r"]))
    if family == "single":
        return SingleStringSpec(length, str(d["letters"]))
    raise ValueError(f"unknown ensemble family {family!r}")


def _probs(d: dict) -> SiteProbs:
    return SiteProbs(float(d["x"]), float(d["y"]), float(d["z"]))


def range_from_dict(d: dict) -> RangeDist:
    kind = d["kind"]
    if kind == "fixed":
        return RangeDist.fixed(int(d["r"]))
    extra = {}
    if "rate" in d:
        extra["rate"] = float(d["rate"])
    if "exponent" in d:
        extra["exponent"] = float(d["exponent"])
    return RangeDist(kind, int(d["r_min"]), int(d["r_max"]), **extra)
