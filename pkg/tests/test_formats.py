"""Bit-level format descriptions: decode, encode, classify."""

import pytest

from tpfpu import formats
from tpfpu.formats import FpClass

from conftest import FP8, FP16, FP16ALT, FP32, FP64


def test_builtin_parameters():
    table = {
        "fp64": (11, 52, 64, 1023),
        "fp32": (8, 23, 32, 127),
        "fp16": (5, 10, 16, 15),
        "fp16alt": (8, 7, 16, 127),
        "fp8": (5, 2, 8, 15),
    }
    assert set(formats.BUILTIN_FORMATS) == set(table)
    for name, (eb, mb, width, bias) in table.items():
        fmt = formats.BUILTIN_FORMATS[name]
        assert (fmt.exp_bits, fmt.man_bits, fmt.width, fmt.bias) == (eb, mb, width, bias)
        assert fmt.width == 1 + fmt.exp_bits + fmt.man_bits
        assert fmt.emin == 1 - fmt.bias
        assert fmt.emax == fmt.bias


def test_derived_masks():
    for fmt in formats.BUILTIN_FORMATS.values():
        assert fmt.sign_bit == 1 << (fmt.width - 1)
        assert fmt.exp_mask == (1 << fmt.exp_bits) - 1
        assert fmt.man_mask == (1 << fmt.man_bits) - 1
        assert fmt.inf_bits == fmt.exp_mask << fmt.man_bits
        assert fmt.max_normal_bits == fmt.inf_bits - 1


def test_decode_values():
    d = formats.decode(FP16, 0x3C00)
    assert d.cls is FpClass.POS_NORMAL
    assert d.significand * 2.0 ** d.exponent == 1.0
    d = formats.decode(FP16, 0xC200)
    assert d.sign_neg and d.significand * 2.0 ** d.exponent == 3.0
    # smallest subnormal carries no hidden bit
    d = formats.decode(FP16, 0x0001)
    assert d.cls is FpClass.POS_SUBNORMAL
    assert (d.significand, d.exponent) == (1, FP16.emin - FP16.man_bits)
    # largest normal
    d = formats.decode(FP16, 0x7BFF)
    assert d.significand * 2.0 ** d.exponent == 65504.0


def test_decode_specials():
    assert formats.decode(FP16, 0x7C00).cls is FpClass.POS_INF
    assert formats.decode(FP16, 0xFC00).cls is FpClass.NEG_INF
    assert formats.decode(FP16, 0x0000).cls is FpClass.POS_ZERO
    assert formats.decode(FP16, 0x8000).cls is FpClass.NEG_ZERO
    assert formats.decode(FP16, 0x7E00).cls is FpClass.QUIET_NAN
    assert formats.decode(FP16, 0x7C01).cls is FpClass.SIGNALING_NAN
    assert formats.decode(FP16, 0xFE01).cls is FpClass.QUIET_NAN


@pytest.mark.parametrize("fmt", [FP8, FP16, FP16ALT])
def test_encode_decode_roundtrip_exhaustive(fmt):
    # NaNs legitimately collapse to one pattern, everything else round-trips
    for bits in range(1 << fmt.width):
        d = formats.decode(fmt, bits)
        if d.cls in (FpClass.QUIET_NAN, FpClass.SIGNALING_NAN):
            continue
        assert formats.encode(fmt, d) == bits


@pytest.mark.parametrize("fmt", [FP8, FP16, FP16ALT])
def test_classify_one_hot_exhaustive(fmt):
    seen = 0
    for bits in range(1 << fmt.width):
        c = formats.classify_bits(fmt, bits)
        assert c.bit_count() == 1
        assert c == 1 << formats.classify(fmt, bits).value
        seen |= c
    assert seen == 0x3FF


def test_classify_bits_riscv_positions():
    assert formats.classify_bits(FP16, 0xFC00) == 1 << 0
    assert formats.classify_bits(FP16, 0xBC00) == 1 << 1
    assert formats.classify_bits(FP16, 0x8001) == 1 << 2
    assert formats.classify_bits(FP16, 0x8000) == 1 << 3
    assert formats.classify_bits(FP16, 0x0000) == 1 << 4
    assert formats.classify_bits(FP16, 0x0001) == 1 << 5
    assert formats.classify_bits(FP16, 0x3C00) == 1 << 6
    assert formats.classify_bits(FP16, 0x7C00) == 1 << 7
    assert formats.classify_bits(FP16, 0x7C01) == 1 << 8
    assert formats.classify_bits(FP16, 0x7E00) == 1 << 9


def test_canonical_nan_patterns():
    assert formats.canonical_nan(FP64) == 0x7FF8000000000000
    assert formats.canonical_nan(FP32) == 0x7FC00000
    assert formats.canonical_nan(FP16) == 0x7E00
    assert formats.canonical_nan(FP16ALT) == 0x7FC0
    assert formats.canonical_nan(FP8) == 0x7E
    for fmt in formats.BUILTIN_FORMATS.values():
        assert formats.decode(fmt, formats.canonical_nan(fmt)).cls is FpClass.QUIET_NAN
