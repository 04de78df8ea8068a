"""Parametric IEEE-754-style binary formats and the bit-level codec.

A format is described by its exponent and mantissa field widths; everything
else (bias, value ranges, encodings) derives from those two numbers.  Values
travel as plain unsigned integers of ``fmt.width`` bits; the codec maps them
to and from a small decoded record holding sign, unbiased exponent and
significand with the hidden bit made explicit.

NaN handling follows the RISC-V convention: quiet NaNs have the mantissa MSB
set, and every NaN produced by this library is the single canonical quiet
NaN (sign 0, exponent all ones, mantissa MSB set, rest zero).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "FormatDesc",
    "FpClass",
    "DecodedFp",
    "FP64",
    "FP32",
    "FP16",
    "FP16ALT",
    "FP8",
    "BUILTIN_FORMATS",
    "decode",
    "encode",
    "canonical_nan",
    "classify",
    "classify_bits",
]


# ── format descriptor ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class FormatDesc:
    """A binary floating-point format: ``1 + exp_bits + man_bits`` wide."""

    name: str
    exp_bits: int
    man_bits: int

    def __post_init__(self) -> None:
        if self.exp_bits < 2 or self.man_bits < 2:
            raise ValueError(
                f"format {self.name!r} needs at least 2 exponent and 2 "
                f"mantissa bits, got ({self.exp_bits}, {self.man_bits})"
            )

    @property
    def width(self) -> int:
        return 1 + self.exp_bits + self.man_bits

    @property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @property
    def emin(self) -> int:
        """Unbiased exponent of the smallest normal."""
        return 1 - self.bias

    @property
    def emax(self) -> int:
        """Unbiased exponent of the largest normal."""
        return self.bias

    @property
    def exp_mask(self) -> int:
        return (1 << self.exp_bits) - 1

    @property
    def man_mask(self) -> int:
        return (1 << self.man_bits) - 1

    @property
    def sign_bit(self) -> int:
        return 1 << (self.width - 1)

    @property
    def max_normal_bits(self) -> int:
        """Encoding of the largest finite magnitude (sign 0)."""
        return ((self.exp_mask - 1) << self.man_bits) | self.man_mask

    @property
    def inf_bits(self) -> int:
        """Encoding of +inf."""
        return self.exp_mask << self.man_bits

    def __repr__(self) -> str:
        return f"FormatDesc({self.name!r}, {self.exp_bits}, {self.man_bits})"


FP64 = FormatDesc("fp64", 11, 52)
FP32 = FormatDesc("fp32", 8, 23)
FP16 = FormatDesc("fp16", 5, 10)
FP16ALT = FormatDesc("fp16alt", 8, 7)
FP8 = FormatDesc("fp8", 5, 2)

BUILTIN_FORMATS: dict[str, FormatDesc] = {
    f.name: f for f in (FP64, FP32, FP16, FP16ALT, FP8)
}


# ── classification ───────────────────────────────────────────────────────────

class FpClass(enum.IntEnum):
    """Value classes; the enum value is the RISC-V fclass result bit index."""

    NEG_INF = 0
    NEG_NORMAL = 1
    NEG_SUBNORMAL = 2
    NEG_ZERO = 3
    POS_ZERO = 4
    POS_SUBNORMAL = 5
    POS_NORMAL = 6
    POS_INF = 7
    SIGNALING_NAN = 8
    QUIET_NAN = 9

    @property
    def is_nan(self) -> bool:
        return self >= FpClass.SIGNALING_NAN

    @property
    def is_inf(self) -> bool:
        return self in (FpClass.NEG_INF, FpClass.POS_INF)

    @property
    def is_zero(self) -> bool:
        return self in (FpClass.NEG_ZERO, FpClass.POS_ZERO)

    @property
    def is_finite(self) -> bool:
        return not (self.is_nan or self.is_inf)


class DecodedFp(NamedTuple):
    """Decoded value: ``(-1)**sign_neg * significand * 2**exponent``.

    For normals the significand carries the hidden bit (so it lies in
    [2**man_bits, 2**(man_bits+1))); for subnormals it is the raw mantissa
    field and the exponent is pinned to ``emin - man_bits``... both cases
    share one rule: the value is significand * 2**exponent with the binary
    point at the right.  NaNs and infinities carry significand 0.
    """

    cls: FpClass
    sign_neg: bool
    exponent: int
    significand: int


# ── codec ────────────────────────────────────────────────────────────────────

def _check_width(fmt: FormatDesc, bits: int) -> None:
    if not 0 <= bits < (1 << fmt.width):
        raise ValueError(
            f"bit pattern {bits:#x} does not fit format {fmt.name} "
            f"({fmt.width} bits)"
        )


def classify(fmt: FormatDesc, bits: int) -> FpClass:
    """Class of a bit pattern under IEEE interchange interpretation."""
    _check_width(fmt, bits)
    man = bits & fmt.man_mask
    exp = (bits >> fmt.man_bits) & fmt.exp_mask
    neg = bool(bits & fmt.sign_bit)
    if exp == fmt.exp_mask:
        if man == 0:
            return FpClass.NEG_INF if neg else FpClass.POS_INF
        quiet = bool(man >> (fmt.man_bits - 1))
        return FpClass.QUIET_NAN if quiet else FpClass.SIGNALING_NAN
    if exp == 0:
        if man == 0:
            return FpClass.NEG_ZERO if neg else FpClass.POS_ZERO
        return FpClass.NEG_SUBNORMAL if neg else FpClass.POS_SUBNORMAL
    return FpClass.NEG_NORMAL if neg else FpClass.POS_NORMAL


def classify_bits(fmt: FormatDesc, bits: int) -> int:
    """RISC-V fclass: one-hot 10-bit mask (bit 0 = -inf ... bit 9 = qNaN)."""
    return 1 << classify(fmt, bits)


def decode(fmt: FormatDesc, bits: int) -> DecodedFp:
    """Split a bit pattern into class, sign and exact (significand, exponent).

    For finite values ``(-1)**sign_neg * significand * 2**exponent``
    reproduces the encoded value exactly.
    """
    cls = classify(fmt, bits)
    neg = bool(bits & fmt.sign_bit)
    if cls.is_nan or cls.is_inf:
        return DecodedFp(cls, neg, 0, 0)
    man = bits & fmt.man_mask
    exp = (bits >> fmt.man_bits) & fmt.exp_mask
    if exp == 0:
        # subnormal or zero: no hidden bit, fixed exponent position
        return DecodedFp(cls, neg, fmt.emin - fmt.man_bits, man)
    return DecodedFp(
        cls, neg, exp - fmt.bias - fmt.man_bits, man | (1 << fmt.man_bits)
    )


def canonical_nan(fmt: FormatDesc) -> int:
    """The single quiet NaN this library ever produces."""
    return (fmt.exp_mask << fmt.man_bits) | (1 << (fmt.man_bits - 1))


def encode(fmt: FormatDesc, d: DecodedFp) -> int:
    """Inverse of decode for non-NaN classes; any NaN encodes canonically.

    The significand/exponent pair must already be representable: this is a
    pure packer, the rounding layer is responsible for range reduction.
    """
    if d.cls.is_nan:
        return canonical_nan(fmt)
    sign = fmt.sign_bit if d.sign_neg else 0
    if d.cls.is_inf:
        return sign | fmt.inf_bits
    if d.significand == 0:
        return sign
    # normalize the (significand, exponent) pair onto the format grid
    sig, exp = d.significand, d.exponent
    p = fmt.man_bits
    while sig.bit_length() > p + 1:
        if sig & 1:
            raise ValueError("significand not representable without rounding")
        sig >>= 1
        exp += 1
    while sig.bit_length() < p + 1 and exp > fmt.emin - p:
        sig <<= 1
        exp -= 1
    if exp == fmt.emin - p and sig.bit_length() <= p:
        return sign | sig  # subnormal
    if sig.bit_length() != p + 1:
        raise ValueError("significand not representable without rounding")
    biased = exp + p + fmt.bias
    if not 1 <= biased < fmt.exp_mask:
        raise ValueError(f"exponent {exp} out of range for {fmt.name}")
    return sign | (biased << fmt.man_bits) | (sig & fmt.man_mask)
