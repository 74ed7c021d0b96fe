from __future__ import annotations

import math
import re
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

# Every real quantity of the model (positions, durations, thresholds).
ExactScalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)

_RATIO_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)\s*$")


class RationalFormatError(ValueError):
    pass


def parse_rational(raw: str | int | Fraction) -> Fraction:
    """Parse ``p/q``, an integer or a finite decimal into an exact rational."""
    if isinstance(raw, bool):
        raise RationalFormatError(f"valor booleano nao e racional: {raw!r}")
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise RationalFormatError(f"esperado texto racional, recebido {type(raw).__name__}")
    match = _RATIO_RE.match(raw)
    if match:
        numerator, denominator = int(match.group(1)), int(match.group(2))
        if denominator == 0:
            raise RationalFormatError(f"denominador zero em {raw!r}")
        return Fraction(numerator, denominator)
    if _DECIMAL_RE.match(raw):
        return Fraction(Decimal(raw.strip()))
    raise RationalFormatError(f"racional invalido: {raw!r}")


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_decimal_string(value: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = max(len(str(abs(value.numerator))), len(str(value.denominator))) + digits + 10
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return str(quotient.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


def exact_sqrt(value: Fraction) -> Fraction | None:
    """Rational square root when ``value`` is the square of a rational, else None."""
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


def sqrt_floor(value: Fraction) -> int:
    """Largest integer n with n*n <= value (value >= 0)."""
    return math.isqrt(value.numerator // value.denominator)


def sqrt_decimal(value: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits + 30
        root = (Decimal(value.numerator) / Decimal(value.denominator)).sqrt()
        return str(root.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))
