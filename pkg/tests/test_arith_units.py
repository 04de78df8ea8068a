"""Unit behavior of the arithmetic core that the differential sweeps don't
single out: flag formatting, fused-operation sign conventions, sign
injection, tininess-after-rounding, and the expanding FMA."""

import pytest

from tpfpu import arith
from tpfpu.arith import RNE, RTZ, RDN, RUP, RMM, NV, DZ, OF, UF, NX, ExactReal

from conftest import ALL_RMS, FP16, FP32


def test_flag_constants():
    assert (NV, DZ, OF, UF, NX) == (16, 8, 4, 2, 1)
    assert arith.ALL_MODES == (RNE, RTZ, RDN, RUP, RMM) == (0, 1, 2, 3, 4)


def test_flags_str():
    assert arith.flags_str(0) == "-----"
    assert arith.flags_str(NX) == "----x"
    assert arith.flags_str(NV) == "v----"
    assert arith.flags_str(DZ) == "-z---"
    assert arith.flags_str(OF | UF) == "--ou-"
    assert arith.flags_str(31) == "vzoux"


def test_parse_rm():
    assert arith.parse_rm("rne") == RNE
    assert arith.parse_rm("rmm") == RMM
    with pytest.raises(ValueError):
        arith.parse_rm("bogus")
    for rm, name in ((RNE, "rne"), (RUP, "rup")):
        assert arith.MODE_NAMES[name] == rm
        assert arith.mode_name(rm) == name


def test_fused_sign_conventions():
    # 2.0 * 3.0 with accumulator 1.0
    a, b, c = 0x4000, 0x4200, 0x3C00
    assert arith.fma(FP16, RNE, a, b, c)[0] == 0x4700      # a*b + c = 7
    assert arith.fmsub(FP16, RNE, a, b, c)[0] == 0x4500    # a*b - c = 5
    assert arith.fnmsub(FP16, RNE, a, b, c)[0] == 0xC500   # -(a*b) + c = -5
    assert arith.fnmadd(FP16, RNE, a, b, c)[0] == 0xC700   # -(a*b) - c = -7


def test_sgnj_is_bit_level():
    # sign injection copies bits; NaN payloads pass through untouched
    assert arith.sgnj(FP16, "sgnj", 0x7C05, 0x8000) == 0xFC05
    assert arith.sgnj(FP16, "sgnj", 0xBC00, 0x0001) == 0x3C00
    assert arith.sgnj(FP16, "sgnjn", 0x3C00, 0x8000) == 0x3C00
    assert arith.sgnj(FP16, "sgnjn", 0x3C00, 0x0000) == 0xBC00
    assert arith.sgnj(FP16, "sgnjx", 0xBC00, 0x8000) == 0x3C00
    assert arith.sgnj(FP16, "sgnjx", 0x3C00, 0x8000) == 0xBC00


def test_tininess_measured_after_rounding():
    # 2^-14 - 2^-26 is tiny before rounding; RNE carries it up to the
    # smallest normal, so no underflow is flagged, only inexact
    assert arith.cvt_fp_fp(FP32, FP16, RNE, 0x387FF000) == (0x0400, NX)
    # RDN keeps it subnormal: tiny and inexact
    assert arith.cvt_fp_fp(FP32, FP16, RDN, 0x387FF000) == (0x03FF, UF | NX)


def test_overflow_result_by_mode():
    big = 0x7BFF  # max normal
    for rm, want in ((RNE, 0x7C00), (RMM, 0x7C00), (RUP, 0x7C00),
                     (RTZ, 0x7BFF), (RDN, 0x7BFF)):
        bits, flags = arith.mul(FP16, rm, big, 0x4000)
        assert bits == want
        assert flags == OF | NX
    # negative side mirrors
    bits, flags = arith.mul(FP16, RDN, big | 0x8000, 0x4000)
    assert (bits, flags) == (0xFC00, OF | NX)
    bits, flags = arith.mul(FP16, RTZ, big | 0x8000, 0x4000)
    assert (bits, flags) == (0xFBFF, OF | NX)


def test_nan_results_are_canonical():
    qnan = 0x7E00
    payload = 0xFE27  # quiet NaN with junk payload and sign
    assert arith.add(FP16, RNE, payload, 0x3C00) == (qnan, 0)
    assert arith.mul(FP16, RNE, payload, payload) == (qnan, 0)
    assert arith.div(FP16, RNE, 0x3C00, payload) == (qnan, 0)
    assert arith.sqrt(FP16, RNE, payload) == (qnan, 0)
    assert arith.fma(FP16, RNE, payload, 0x3C00, 0x3C00) == (qnan, 0)
    # signaling input additionally raises NV
    assert arith.add(FP16, RNE, 0x7C01, 0x3C00) == (qnan, NV)


def test_inf_arithmetic():
    inf, ninf = 0x7C00, 0xFC00
    assert arith.add(FP16, RNE, inf, inf) == (inf, 0)
    assert arith.add(FP16, RNE, inf, ninf) == (0x7E00, NV)
    assert arith.sub(FP16, RNE, inf, inf) == (0x7E00, NV)
    assert arith.mul(FP16, RNE, inf, 0x0000) == (0x7E00, NV)
    assert arith.div(FP16, RNE, 0x3C00, inf) == (0x0000, 0)
    assert arith.div(FP16, RNE, inf, 0x3C00) == (inf, 0)


def test_signed_zero_sums():
    # (-0) + (-0) = -0; (+0) + (-0) = +0 except RDN gives -0
    assert arith.add(FP16, RNE, 0x8000, 0x8000) == (0x8000, 0)
    assert arith.add(FP16, RNE, 0x0000, 0x8000) == (0x0000, 0)
    assert arith.add(FP16, RDN, 0x0000, 0x8000) == (0x8000, 0)
    # exact cancellation of finite values is +0 except RDN
    assert arith.add(FP16, RNE, 0x3C00, 0xBC00) == (0x0000, 0)
    assert arith.add(FP16, RDN, 0x3C00, 0xBC00) == (0x8000, 0)


def test_expanding_fma_keeps_narrow_product_exact():
    # (1 + 2^-10)^2 = 1 + 2^-9 + 2^-20: FP16 would round; FP32 holds it
    got = arith.fma_multi(FP16, FP32, RNE, 0x3C01, 0x3C01, 0x00000000)
    assert got == (0x3F804008, 0)
    # same triple through FP16 FMA is inexact
    assert arith.fma(FP16, RNE, 0x3C01, 0x3C01, 0x0000) == (0x3C02, NX)


def test_round_exact_kinds():
    assert arith.round_exact(FP16, ExactReal("finite", 0, 3, -1), RNE) == (0x3E00, 0)
    assert arith.round_exact(FP16, ExactReal("finite", 0, 0, 0), RNE) == (0x0000, 0)
    assert arith.round_exact(FP16, ExactReal("inf", 1, 0, 0), RNE) == (0xFC00, 0)
    assert arith.round_exact(FP16, ExactReal("nan", 0, 0, 0), RNE) == (0x7E00, 0)
    # inexact rounding of a long significand
    bits, flags = arith.round_exact(FP16, ExactReal("finite", 0, (1 << 30) + 1, -30), RNE)
    assert (bits, flags) == (0x3C00, NX)


def test_round_exact_against_all_modes():
    # 1 + 2^-11 halfway case reproduces the adder's tie behavior
    x = ExactReal("finite", 0, (1 << 11) + 1, -11)
    for rm, want in ((RNE, 0x3C00), (RTZ, 0x3C00), (RDN, 0x3C00),
                     (RUP, 0x3C01), (RMM, 0x3C01)):
        assert arith.round_exact(FP16, x, rm) == (want, NX)


def test_div_iteration_counts():
    assert arith.full_div_iterations(FP16) == 4
    assert arith.full_div_iterations(FP32) == 8
