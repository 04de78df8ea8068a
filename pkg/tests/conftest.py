"""Shared corpus helpers for the test suite."""

import random

from tpfpu import formats, arith

ALL_RMS = (arith.RNE, arith.RTZ, arith.RDN, arith.RUP, arith.RMM)

FP8 = formats.BUILTIN_FORMATS["fp8"]
FP16 = formats.BUILTIN_FORMATS["fp16"]
FP16ALT = formats.BUILTIN_FORMATS["fp16alt"]
FP32 = formats.BUILTIN_FORMATS["fp32"]
FP64 = formats.BUILTIN_FORMATS["fp64"]


def directed_bits(fmt):
    """Edge-case bit patterns for one format: zeros, infinities, NaNs,
    subnormal and normal range ends, one, and rounding-boundary neighbors."""
    e_ones = ((1 << fmt.exp_bits) - 1) << fmt.man_bits
    man_msb = 1 << (fmt.man_bits - 1)
    one = (fmt.bias << fmt.man_bits)
    max_norm = e_ones - 1
    min_norm = 1 << fmt.man_bits
    base = [
        0, fmt.sign_bit,                      # +0 -0
        e_ones, fmt.sign_bit | e_ones,        # +inf -inf
        e_ones | man_msb,                     # canonical qNaN
        e_ones | 1,                           # signaling NaN
        fmt.sign_bit | e_ones | man_msb | 1,  # noncanonical quiet NaN
        1, fmt.sign_bit | 1,                  # smallest subnormals
        min_norm - 1,                         # largest subnormal
        min_norm, fmt.sign_bit | min_norm,
        max_norm, fmt.sign_bit | max_norm,
        one, fmt.sign_bit | one,
        one | 1, one - 1,                     # neighbors of 1.0
        one | man_msb,                        # 1.5
        (fmt.bias + fmt.man_bits) << fmt.man_bits,  # 2^man_bits, odd ulp zone
    ]
    seen = []
    for b in base:
        if b not in seen:
            seen.append(b)
    return seen


def random_bits(fmt, count, seed):
    rng = random.Random(seed)
    w = fmt.width
    return [rng.getrandbits(w) for _ in range(count)]
