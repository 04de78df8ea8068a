"""Hand-computed reference values pinned against the rational oracle.

Every expected value below was worked out on paper from the format
definitions.  If one of these fails, the oracle itself is wrong and every
differential sweep in the suite is meaningless, so this file has no
dependency on the arithmetic core.
"""

from tpfpu import oracle
from tpfpu.arith import RNE, RTZ, RDN, RUP, RMM, NV, DZ, OF, UF, NX

from conftest import FP8, FP16, FP32


def test_add_exact_and_inexact():
    # 1.5 + 2.25 = 3.75, representable
    assert oracle.o_add(FP16, RNE, 0x3E00, 0x4080) == (0x4380, 0)
    # 1.0 + smallest subnormal rounds back to 1.0
    assert oracle.o_add(FP16, RNE, 0x3C00, 0x0001) == (0x3C00, NX)
    # 1.0 + 2^-10 is one full ulp, exact
    assert oracle.o_add(FP16, RNE, 0x3C00, 0x1400) == (0x3C01, 0)


def test_add_halfway_tie_all_modes():
    # 1.0 + 2^-11 sits exactly between 0x3C00 and 0x3C01
    assert oracle.o_add(FP16, RNE, 0x3C00, 0x1000) == (0x3C00, NX)  # to even
    assert oracle.o_add(FP16, RTZ, 0x3C00, 0x1000) == (0x3C00, NX)
    assert oracle.o_add(FP16, RDN, 0x3C00, 0x1000) == (0x3C00, NX)
    assert oracle.o_add(FP16, RUP, 0x3C00, 0x1000) == (0x3C01, NX)
    assert oracle.o_add(FP16, RMM, 0x3C00, 0x1000) == (0x3C01, NX)  # away


def test_mul_overflow_by_mode():
    # 2^15 * 2.0 = 65536 exactly; above max normal 65504 in every mode,
    # so OF is raised in every mode and the result picks inf or max finite
    assert oracle.o_mul(FP16, RNE, 0x7800, 0x4000) == (0x7C00, OF | NX)
    assert oracle.o_mul(FP16, RUP, 0x7800, 0x4000) == (0x7C00, OF | NX)
    assert oracle.o_mul(FP16, RTZ, 0x7800, 0x4000) == (0x7BFF, OF | NX)
    assert oracle.o_mul(FP16, RDN, 0x7800, 0x4000) == (0x7BFF, OF | NX)


def test_mul_subnormal_underflow():
    # 2^-14 * 0.5 = 2^-15: exact subnormal, no flags at all
    assert oracle.o_mul(FP16, RNE, 0x0400, 0x3800) == (0x0200, 0)
    # (1 + 2^-10) * 2^-14 * 0.5: halfway in the subnormal range, ties to
    # even, tiny and inexact
    assert oracle.o_mul(FP16, RNE, 0x0401, 0x3800) == (0x0200, UF | NX)


def test_div():
    assert oracle.o_div(FP16, RNE, 0x4500, 0x4100) == (0x4000, 0)   # 5/2.5
    assert oracle.o_div(FP16, RNE, 0x3C00, 0x4200) == (0x3555, NX)  # 1/3
    assert oracle.o_div(FP16, RUP, 0x3C00, 0x4200) == (0x3556, NX)
    assert oracle.o_div(FP16, RNE, 0x3C00, 0x0000) == (0x7C00, DZ)
    assert oracle.o_div(FP16, RNE, 0xBC00, 0x0000) == (0xFC00, DZ)
    assert oracle.o_div(FP16, RNE, 0x0000, 0x0000) == (0x7E00, NV)
    assert oracle.o_div(FP16, RNE, 0x7C00, 0x7C00) == (0x7E00, NV)


def test_sqrt():
    assert oracle.o_sqrt(FP16, RNE, 0x4900) == (0x4253, NX)  # sqrt(10)
    assert oracle.o_sqrt(FP16, RTZ, 0x4900) == (0x4253, NX)
    assert oracle.o_sqrt(FP16, RNE, 0xBC00) == (0x7E00, NV)
    assert oracle.o_sqrt(FP16, RNE, 0x8000) == (0x8000, 0)   # sqrt(-0) = -0
    assert oracle.o_sqrt(FP16, RNE, 0x7C00) == (0x7C00, 0)


def test_fma():
    assert oracle.o_fma(FP16, RNE, 0x3C00, 0x3C00, 0x3C00) == (0x4000, 0)
    # 0 * inf is invalid regardless of the addend
    assert oracle.o_fma(FP16, RNE, 0x0000, 0x7C00, 0x3C00) == (0x7E00, NV)
    assert oracle.o_fma(FP16, RNE, 0x0000, 0x7C00, 0x7E00) == (0x7E00, NV)


def test_cmp():
    assert oracle.o_cmp(FP16, "eq", 0x7E00, 0x3C00) == (0, 0)    # quiet
    assert oracle.o_cmp(FP16, "lt", 0x7E00, 0x3C00) == (0, NV)   # signaling
    assert oracle.o_cmp(FP16, "eq", 0x7C01, 0x3C00) == (0, NV)   # sNaN
    assert oracle.o_cmp(FP16, "eq", 0x0000, 0x8000) == (1, 0)    # +0 == -0
    assert oracle.o_cmp(FP16, "lt", 0xBC00, 0x3C00) == (1, 0)
    assert oracle.o_cmp(FP16, "le", 0x3C00, 0x3C00) == (1, 0)


def test_minmax():
    assert oracle.o_minmax(FP16, "min", 0x7E00, 0x3C00) == (0x3C00, 0)
    assert oracle.o_minmax(FP16, "min", 0x7C01, 0x3C00) == (0x3C00, NV)
    assert oracle.o_minmax(FP16, "min", 0x7E00, 0xFE00) == (0x7E00, 0)
    assert oracle.o_minmax(FP16, "min", 0x0000, 0x8000) == (0x8000, 0)
    assert oracle.o_minmax(FP16, "max", 0x0000, 0x8000) == (0x0000, 0)


def test_cvt_fp_fp():
    assert oracle.o_cvt_fp_fp(FP16, FP32, RNE, 0x3C00) == (0x3F800000, 0)
    assert oracle.o_cvt_fp_fp(FP16, FP32, RNE, 0x7C01) == (0x7FC00000, NV)
    # 65520 is halfway between max normal 65504 and 65536: RNE ties away,
    # overflows; RTZ lands on max normal and, because the unbounded-exponent
    # rounding stays at 65504, raises no OF
    assert oracle.o_cvt_fp_fp(FP32, FP16, RNE, 0x477FF000) == (0x7C00, OF | NX)
    assert oracle.o_cvt_fp_fp(FP32, FP16, RTZ, 0x477FF000) == (0x7BFF, NX)
    # 2^-25 is half the smallest FP16 subnormal: ties to even zero
    assert oracle.o_cvt_fp_fp(FP32, FP16, RNE, 0x33000000) == (0x0000, UF | NX)


def test_cvt_fp_int():
    assert oracle.o_cvt_fp_int(FP16, 32, True, RTZ, 0x4248) == (3, NX)
    assert oracle.o_cvt_fp_int(FP16, 32, True, RUP, 0x4248) == (4, NX)
    assert oracle.o_cvt_fp_int(FP16, 32, True, RDN, 0xC248) == (0xFFFFFFFC, NX)
    assert oracle.o_cvt_fp_int(FP16, 32, True, RNE, 0x7E00) == (0x7FFFFFFF, NV)
    assert oracle.o_cvt_fp_int(FP16, 32, True, RNE, 0xFC00) == (0x80000000, NV)
    # negative input to an unsigned conversion is invalid, but -0.5 rounds
    # to a representable 0 first and is merely inexact
    assert oracle.o_cvt_fp_int(FP16, 32, False, RTZ, 0xC248) == (0, NV)
    assert oracle.o_cvt_fp_int(FP16, 32, False, RTZ, 0xB800) == (0, NX)


def test_cvt_int_fp():
    # 60000 sits between FP8's 57344 and 65536, nearer 57344
    assert oracle.o_cvt_int_fp(32, True, FP8, RNE, 60000) == (0x7B, NX)
    # 61440 is the exact halfway point; ties away from 57344 (odd mantissa)
    # to 65536, which overflows FP8
    assert oracle.o_cvt_int_fp(32, True, FP8, RNE, 61440) == (0x7C, OF | NX)
    assert oracle.o_cvt_int_fp(32, True, FP32, RNE, 57344) == (0x47600000, 0)
    assert oracle.o_cvt_int_fp(32, True, FP32, RNE, 0xFFFFFFFF) == (0xBF800000, 0)
