"""Exact scalars, finitely supported vectors and the vector file format."""
import logging
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .config import DECIMAL_DIGITS
from .exceptions import VectorFileError

logger = logging.getLogger(__name__)

Scalar = Fraction
ScalarLike = Union[int, str, Fraction]


def to_scalar(value: ScalarLike) -> Fraction:
    """Parse an int, a Fraction or a "p/q" string into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact scalar {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    text = str(value).strip()
    if not text:
        raise ValueError("empty scalar")
    return Fraction(text)


def format_decimal(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Decimal annotation with `digits` significant digits and no exponent."""
    with localcontext() as ctx:
        ctx.prec = digits
        rendered = Decimal(value.numerator) / Decimal(value.denominator)
        rendered = rendered.normalize()
    text = format(rendered, "f")
    return "0" if text in ("-0", "0") else text


def format_scalar(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Render "p/q (decimal)", e.g. "3/2 (1.5)"."""
    return f"{value} ({format_decimal(value, digits)})"


class FinVec:
    """
    Finitely supported vector over positive integer positions.

    Entries are exact Fractions; zero entries are never stored, so the key set
    of `entries` is the support.
    """

    __slots__ = ("_entries", "_support")

    def __init__(self, entries: Optional[Mapping[int, ScalarLike]] = None):
        cleaned: Dict[int, Fraction] = {}
        for position, value in (entries or {}).items():
            if isinstance(position, bool) or not isinstance(position, int) or position < 1:
                raise ValueError(f"positions must be positive integers, got {position!r}")
            scalar = to_scalar(value)
            if scalar != 0:
                cleaned[position] = scalar
        self._support = tuple(sorted(cleaned))
        self._entries = {p: cleaned[p] for p in self._support}

    @classmethod
    def unit(cls, position: int) -> "FinVec":
        return cls({position: 1})

    @classmethod
    def ones(cls, positions: Iterable[int], value: ScalarLike = 1) -> "FinVec":
        return cls({p: value for p in positions})

    @property
    def support(self) -> Tuple[int, ...]:
        return self._support

    def items(self) -> Iterator[Tuple[int, Fraction]]:
        for p in self._support:
            yield p, self._entries[p]

    def values(self) -> List[Fraction]:
        return [self._entries[p] for p in self._support]

    def __getitem__(self, position: int) -> Fraction:
        return self._entries.get(position, Fraction(0))

    def __len__(self) -> int:
        return len(self._support)

    def __bool__(self) -> bool:
        return bool(self._support)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinVec) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {v}" for p, v in self.items())
        return f"FinVec({{{body}}})"

    def __add__(self, other: "FinVec") -> "FinVec":
        merged = dict(self._entries)
        for p, v in other.items():
            merged[p] = merged.get(p, Fraction(0)) + v
        return FinVec(merged)

    def __sub__(self, other: "FinVec") -> "FinVec":
        return self + other.scale(-1)

    def __neg__(self) -> "FinVec":
        return self.scale(-1)

    def scale(self, factor: ScalarLike) -> "FinVec":
        factor = to_scalar(factor)
        return FinVec({p: factor * v for p, v in self.items()})

    def __mul__(self, factor: ScalarLike) -> "FinVec":
        return self.scale(factor)

    __rmul__ = __mul__

    def restrict(self, positions: Iterable[int]) -> "FinVec":
        return FinVec({p: self._entries[p] for p in positions if p in self._entries})

    def absolute(self) -> "FinVec":
        return FinVec({p: abs(v) for p, v in self.items()})

    def positive_part(self) -> Dict[int, Fraction]:
        return {p: v for p, v in self.items() if v > 0}

    def negative_part(self) -> Dict[int, Fraction]:
        return {p: -v for p, v in self.items() if v < 0}

    def sup_norm(self) -> Fraction:
        return max((abs(v) for v in self._entries.values()), default=Fraction(0))

    def l1_norm(self) -> Fraction:
        return sum((abs(v) for v in self._entries.values()), Fraction(0))

    @property
    def min_support(self) -> int:
        if not self._support:
            raise ValueError("the zero vector has no support")
        return self._support[0]

    @property
    def max_support(self) -> int:
        if not self._support:
            raise ValueError("the zero vector has no support")
        return self._support[-1]


def combine(coefficients: Sequence[ScalarLike], vectors: Sequence[FinVec]) -> FinVec:
    """Linear combination Σ a_i v_i."""
    if len(coefficients) != len(vectors):
        raise ValueError("coefficients and vectors differ in length")
    merged: Dict[int, Fraction] = {}
    for a, v in zip(coefficients, vectors):
        a = to_scalar(a)
        for p, value in v.items():
            merged[p] = merged.get(p, Fraction(0)) + a * value
    return FinVec(merged)


# ---------- Vector files ----------

def parse_vector_text(text: str) -> FinVec:
    """
    Parse the "position value" line format.

    Blank lines and lines starting with '#' are skipped. Positions must be
    strictly increasing positive integers and values nonzero exact rationals.
    """
    entries: Dict[int, Fraction] = {}
    previous = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise VectorFileError(f"expected 'position value', got {line!r}", line_number)
        try:
            position = int(fields[0])
        except ValueError:
            raise VectorFileError(f"position {fields[0]!r} is not an integer", line_number)
        if position < 1:
            raise VectorFileError(f"position {position} is not positive", line_number)
        if position <= previous:
            raise VectorFileError(f"position {position} does not increase (previous {previous})", line_number)
        try:
            value = to_scalar(fields[1])
        except (ValueError, ZeroDivisionError):
            raise VectorFileError(f"value {fields[1]!r} is not an exact rational", line_number)
        if value == 0:
            raise VectorFileError(f"value at position {position} is zero", line_number)
        entries[position] = value
        previous = position
    return FinVec(entries)


def read_vector_file(path: str) -> FinVec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise VectorFileError(f"cannot read {path}: {e}")
    vector = parse_vector_text(text)
    logger.info(f"Read vector with support {len(vector)} from {path}")
    return vector


def format_vector(vector: FinVec, header: Optional[str] = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {row}" for row in header.splitlines())
    lines.extend(f"{p} {v}" for p, v in vector.items())
    return "\n".join(lines) + "\n"


def write_vector_file(path: str, vector: FinVec, header: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(format_vector(vector, header))
    logger.info(f"Wrote vector with support {len(vector)} to {path}")
