"""Independent reference model: brute-force correctly-rounded arithmetic.

This module re-derives every arithmetic result from exact rational values and
picks the rounded answer by comparing against grid neighbors and midpoints.
It deliberately shares no code with :mod:`tpfpu.arith` (which works on
normalized integer significands with round/sticky bits): the two
implementations act as cross-checks for each other.  The test suite and the
``selftest`` CLI subcommand sweep both over the full FP8 input space and
large random samples of the wider formats, demanding bit-exact agreement on
results and status flags.

Only the definitional constants of :class:`tpfpu.formats.FormatDesc`
(field widths) are reused here; decoding, rounding and flag logic are
implemented from scratch.
"""

from __future__ import annotations

import math

from .formats import FormatDesc

__all__ = [
    "RNE", "RTZ", "RDN", "RUP", "RMM", "ALL_MODES",
    "NX", "UF", "OF", "DZ", "NV",
    "o_round", "o_add", "o_sub", "o_mul", "o_div", "o_sqrt",
    "o_fma", "o_fma_multi", "o_cmp", "o_minmax",
    "o_cvt_fp_fp", "o_cvt_fp_int", "o_cvt_int_fp",
]

# RISC-V rm field encoding.
RNE, RTZ, RDN, RUP, RMM = 0, 1, 2, 3, 4
ALL_MODES = (RNE, RTZ, RDN, RUP, RMM)

# RISC-V fflags bit assignment.
NX, UF, OF, DZ, NV = 1, 2, 4, 8, 16

# Decoded kinds.
_FIN, _INF, _QNAN, _SNAN = 0, 1, 2, 3


def _dec(fmt: FormatDesc, bits: int):
    """Own decoder: (kind, neg, n, e) with finite value (-1)^neg * n * 2^e."""
    p = fmt.man_bits
    man = bits & ((1 << p) - 1)
    ef = (bits >> p) & ((1 << fmt.exp_bits) - 1)
    neg = (bits >> (fmt.exp_bits + p)) & 1
    bias = (1 << (fmt.exp_bits - 1)) - 1
    if ef == (1 << fmt.exp_bits) - 1:
        if man == 0:
            return (_INF, neg, 0, 0)
        if (man >> (p - 1)) & 1:
            return (_QNAN, neg, 0, 0)
        return (_SNAN, neg, 0, 0)
    if ef == 0:
        return (_FIN, neg, man, 1 - bias - p)
    return (_FIN, neg, man | (1 << p), ef - bias - p)


def _qnan_bits(fmt: FormatDesc) -> int:
    p = fmt.man_bits
    return (((1 << fmt.exp_bits) - 1) << p) | (1 << (p - 1))


def _inf_bits(fmt: FormatDesc, neg: int) -> int:
    return (neg << (fmt.width - 1)) | (((1 << fmt.exp_bits) - 1) << fmt.man_bits)


def _maxnorm_bits(fmt: FormatDesc, neg: int) -> int:
    p = fmt.man_bits
    return (neg << (fmt.width - 1)) | ((((1 << fmt.exp_bits) - 2) << p) | ((1 << p) - 1))


def _zero_bits(fmt: FormatDesc, neg: int) -> int:
    return neg << (fmt.width - 1)


# ── exact rounding by neighbor selection ─────────────────────────────────────
#
# Every rounding request is phrased as: given the sign, a floor-log2 estimate
# E0 of the magnitude, and a callable at(g) that returns the rounded multiple
# count of 2^g (already adjusted for the mode) plus an inexact flag, place the
# result on the format grid, detect overflow/underflow, and encode.

def _deliver(fmt: FormatDesc, neg: int, rm: int, E0: int, at):
    p = fmt.man_bits
    bias = (1 << (fmt.exp_bits - 1)) - 1
    emin, emax = 1 - bias, bias
    q, inexact = at(max(E0, emin) - p)
    g = max(E0, emin) - p
    flags = NX if inexact else 0
    if q == 0:
        # magnitude rounded all the way to zero: tiny and inexact by necessity
        return _zero_bits(fmt, neg), NX | UF
    if q.bit_length() > p + 1:
        q >>= 1
        g += 1
    E = g + q.bit_length() - 1
    if E > emax:
        flags = NX | OF
        if rm in (RNE, RMM):
            return _inf_bits(fmt, neg), flags
        if rm == RTZ:
            return _maxnorm_bits(fmt, neg), flags
        if rm == RDN:
            return (_inf_bits(fmt, neg) if neg else _maxnorm_bits(fmt, neg)), flags
        return (_maxnorm_bits(fmt, neg) if neg else _inf_bits(fmt, neg)), flags
    if inexact and E0 < emin:
        # tininess after rounding: compare the unbounded-exponent rounding
        # (same mode, grid anchored at E0) against the smallest normal
        qu, _ = at(E0 - p)
        if qu < (1 << (emin - E0 + p)):
            flags |= UF
    sign = neg << (fmt.width - 1)
    if E < emin:
        return sign | q, flags
    biased = E + bias
    return sign | (biased << p) | (q & ((1 << p) - 1)), flags


def _at_dyadic(n: int, e: int, neg: int, rm: int):
    """Mode-adjusted grid placement of the exact value n * 2^e (n > 0)."""

    def at(g: int):
        s = g - e
        if s <= 0:
            return n << -s, False
        q = n >> s
        r = n & ((1 << s) - 1)
        if r == 0:
            return q, False
        half = 1 << (s - 1)
        if rm == RNE:
            if r > half or (r == half and q & 1):
                q += 1
        elif rm == RMM:
            if r >= half:
                q += 1
        elif rm == RDN:
            q += neg
        elif rm == RUP:
            q += 1 - neg
        return q, True

    return at


def _at_rational(A: int, B: int, e2: int, neg: int, rm: int):
    """Same for the exact value (A / B) * 2^e2 (A, B > 0)."""

    def at(g: int):
        s = e2 - g
        num, den = (A << s, B) if s >= 0 else (A, B << -s)
        q, r = divmod(num, den)
        if r == 0:
            return q, False
        two_r = 2 * r
        if rm == RNE:
            if two_r > den or (two_r == den and q & 1):
                q += 1
        elif rm == RMM:
            if two_r >= den:
                q += 1
        elif rm == RDN:
            q += neg
        elif rm == RUP:
            q += 1 - neg
        return q, True

    return at


def _floor_log2_dyadic(n: int, e: int) -> int:
    return e + n.bit_length() - 1


def _floor_log2_rational(A: int, B: int, e2: int) -> int:
    t = A.bit_length() - B.bit_length()
    if t >= 0:
        if A >= (B << t):
            return t + e2
    else:
        if (A << -t) >= B:
            return t + e2
    return t - 1 + e2


def _round_dyadic(fmt: FormatDesc, neg: int, n: int, e: int, rm: int):
    return _deliver(fmt, neg, rm, _floor_log2_dyadic(n, e), _at_dyadic(n, e, neg, rm))


def o_round(fmt: FormatDesc, neg: int, n: int, e: int, rm: int):
    """Round the exact nonzero value (-1)^neg * n * 2^e into fmt."""
    if n == 0:
        return _zero_bits(fmt, neg), 0
    return _round_dyadic(fmt, neg, n, e, rm)


# ── operations ───────────────────────────────────────────────────────────────

def _sum_core(fmt: FormatDesc, rm: int, terms, zero_signs):
    """Exact signed sum of dyadic terms [(neg, n, e), ...], then one rounding.

    zero_signs: signs of the term values (used for the exact-zero sign rule).
    """
    live = [(neg, n, e) for neg, n, e in terms if n]
    if not live:
        # every addend is a zero: keep the sign only if all agree
        if all(zero_signs) or not any(zero_signs):
            return _zero_bits(fmt, zero_signs[0]), 0
        return _zero_bits(fmt, 1 if rm == RDN else 0), 0
    e_min = min(e for _, _, e in live)
    total = 0
    for neg, n, e in live:
        v = n << (e - e_min)
        total += -v if neg else v
    if total == 0:
        # exact cancellation of nonzero addends
        return _zero_bits(fmt, 1 if rm == RDN else 0), 0
    neg = 1 if total < 0 else 0
    return _round_dyadic(fmt, neg, abs(total), e_min, rm)


def o_add(fmt: FormatDesc, rm: int, a: int, b: int):
    return _add_signed(fmt, rm, a, b, 0)


def o_sub(fmt: FormatDesc, rm: int, a: int, b: int):
    return _add_signed(fmt, rm, a, b, 1)


def _add_signed(fmt: FormatDesc, rm: int, a: int, b: int, flip_b: int):
    ka, na_, nna, ea = _dec(fmt, a)
    kb, nb_, nnb, eb = _dec(fmt, b)
    nb_ ^= flip_b
    flags = NV if ka == _SNAN or kb == _SNAN else 0
    if ka >= _QNAN or kb >= _QNAN:
        return _qnan_bits(fmt), flags
    if ka == _INF and kb == _INF:
        if na_ != nb_:
            return _qnan_bits(fmt), flags | NV
        return _inf_bits(fmt, na_), flags
    if ka == _INF:
        return _inf_bits(fmt, na_), flags
    if kb == _INF:
        return _inf_bits(fmt, nb_), flags
    bits, f = _sum_core(fmt, rm, [(na_, nna, ea), (nb_, nnb, eb)], [na_, nb_])
    return bits, flags | f


def o_mul(fmt: FormatDesc, rm: int, a: int, b: int):
    ka, na_, nna, ea = _dec(fmt, a)
    kb, nb_, nnb, eb = _dec(fmt, b)
    flags = NV if ka == _SNAN or kb == _SNAN else 0
    if ka >= _QNAN or kb >= _QNAN:
        return _qnan_bits(fmt), flags
    sign = na_ ^ nb_
    if ka == _INF or kb == _INF:
        if (ka == _INF and kb == _FIN and nnb == 0) or (
            kb == _INF and ka == _FIN and nna == 0
        ):
            return _qnan_bits(fmt), flags | NV
        return _inf_bits(fmt, sign), flags
    if nna == 0 or nnb == 0:
        return _zero_bits(fmt, sign), flags
    bits, f = _round_dyadic(fmt, sign, nna * nnb, ea + eb, rm)
    return bits, flags | f


def o_div(fmt: FormatDesc, rm: int, a: int, b: int):
    ka, na_, nna, ea = _dec(fmt, a)
    kb, nb_, nnb, eb = _dec(fmt, b)
    flags = NV if ka == _SNAN or kb == _SNAN else 0
    if ka >= _QNAN or kb >= _QNAN:
        return _qnan_bits(fmt), flags
    sign = na_ ^ nb_
    if ka == _INF and kb == _INF:
        return _qnan_bits(fmt), flags | NV
    if ka == _INF:
        return _inf_bits(fmt, sign), flags
    if kb == _INF:
        return _zero_bits(fmt, sign), flags
    if nnb == 0:
        if nna == 0:
            return _qnan_bits(fmt), flags | NV
        return _inf_bits(fmt, sign), flags | DZ
    if nna == 0:
        return _zero_bits(fmt, sign), flags
    e2 = ea - eb
    E0 = _floor_log2_rational(nna, nnb, e2)
    bits, f = _deliver(fmt, sign, rm, E0, _at_rational(nna, nnb, e2, sign, rm))
    return bits, flags | f


def o_sqrt(fmt: FormatDesc, rm: int, a: int):
    ka, na_, nna, ea = _dec(fmt, a)
    if ka == _SNAN:
        return _qnan_bits(fmt), NV
    if ka == _QNAN:
        return _qnan_bits(fmt), 0
    if ka == _FIN and nna == 0:
        return _zero_bits(fmt, na_), 0  # sqrt(+-0) = +-0
    if na_:
        return _qnan_bits(fmt), NV
    if ka == _INF:
        return _inf_bits(fmt, 0), 0
    # sqrt(x) lies in [2^k, 2^(k+1)) for k = floor(floor_log2(x) / 2);
    # Python's // already floors for negative exponents
    k = _floor_log2_dyadic(nna, ea) // 2

    def at(g: int):
        shift = ea - 2 * g
        assert shift >= 0, "sqrt grid shift must not lose input bits"
        m = nna << shift
        q = math.isqrt(m)
        rem = m - q * q
        if rem == 0:
            return q, False
        # midpoint (q + 1/2)^2 = q^2 + q + 1/4 can never equal an integer m,
        # so the nearest-mode tie cannot occur; m > midpoint^2 iff rem > q
        if rm in (RNE, RMM):
            if rem > q:
                q += 1
        elif rm == RUP:
            q += 1
        return q, True

    return _deliver(fmt, 0, rm, k, at)


def _fma_core(src: FormatDesc, dst: FormatDesc, rm: int, a: int, b: int, c: int):
    ka, na_, nna, ea = _dec(src, a)
    kb, nb_, nnb, eb = _dec(src, b)
    kc, nc_, nnc, ec = _dec(dst, c)
    flags = 0
    if _SNAN in (ka, kb, kc):
        flags |= NV
    # inf * 0 is invalid even when the addend is a quiet NaN
    if (ka == _INF and kb == _FIN and nnb == 0) or (
        kb == _INF and ka == _FIN and nna == 0
    ):
        return _qnan_bits(dst), flags | NV
    if ka >= _QNAN or kb >= _QNAN or kc >= _QNAN:
        return _qnan_bits(dst), flags
    psign = na_ ^ nb_
    if ka == _INF or kb == _INF:
        if kc == _INF and nc_ != psign:
            return _qnan_bits(dst), flags | NV
        return _inf_bits(dst, psign), flags
    if kc == _INF:
        return _inf_bits(dst, nc_), flags
    bits, f = _sum_core(
        dst, rm, [(psign, nna * nnb, ea + eb), (nc_, nnc, ec)], [psign, nc_]
    )
    return bits, flags | f


def o_fma(fmt: FormatDesc, rm: int, a: int, b: int, c: int):
    return _fma_core(fmt, fmt, rm, a, b, c)


def o_fma_multi(src: FormatDesc, dst: FormatDesc, rm: int, a: int, b: int, c: int):
    return _fma_core(src, dst, rm, a, b, c)


def _cmp_order(fmt: FormatDesc, a: int, b: int):
    """Total order of two non-NaN patterns: -1, 0, +1 (zeros compare equal)."""
    ka, na_, nna, ea = _dec(fmt, a)
    kb, nb_, nnb, eb = _dec(fmt, b)
    va = 2 if ka == _INF else (1 if nna else 0)
    vb = 2 if kb == _INF else (1 if nnb else 0)
    if va == 0 and vb == 0:
        return 0
    sa = -1 if na_ else 1
    sb = -1 if nb_ else 1
    if va == 0:
        return -sb
    if vb == 0:
        return sa
    if sa != sb:
        return sa
    if va == 2 or vb == 2:
        mag = 0 if va == vb else (1 if va == 2 else -1)
        return sa * mag
    e = min(ea, eb)
    ma, mb = nna << (ea - e), nnb << (eb - e)
    mag = (ma > mb) - (ma < mb)
    return sa * mag


def o_cmp(fmt: FormatDesc, op: str, a: int, b: int):
    ka = _dec(fmt, a)[0]
    kb = _dec(fmt, b)[0]
    has_nan = ka >= _QNAN or kb >= _QNAN
    has_snan = ka == _SNAN or kb == _SNAN
    if op == "eq":
        if has_nan:
            return 0, NV if has_snan else 0
        return (1 if _cmp_order(fmt, a, b) == 0 else 0), 0
    if has_nan:
        return 0, NV
    o = _cmp_order(fmt, a, b)
    if op == "lt":
        return (1 if o < 0 else 0), 0
    if op == "le":
        return (1 if o <= 0 else 0), 0
    raise ValueError(f"unknown comparison {op!r}")


def o_minmax(fmt: FormatDesc, op: str, a: int, b: int):
    ka = _dec(fmt, a)[0]
    kb = _dec(fmt, b)[0]
    flags = NV if ka == _SNAN or kb == _SNAN else 0
    a_nan = ka >= _QNAN
    b_nan = kb >= _QNAN
    if a_nan and b_nan:
        return _qnan_bits(fmt), flags
    if a_nan:
        return b, flags
    if b_nan:
        return a, flags
    o = _cmp_order(fmt, a, b)
    if o == 0:
        # equal values: break ties by sign so min(-0,+0) = -0, max(-0,+0) = +0
        a_neg = (a >> (fmt.width - 1)) & 1
        if op == "min":
            return (a if a_neg else b), flags
        return (b if a_neg else a), flags
    if op == "min":
        return (a if o < 0 else b), flags
    if op == "max":
        return (a if o > 0 else b), flags
    raise ValueError(f"unknown selection {op!r}")


def o_cvt_fp_fp(src: FormatDesc, dst: FormatDesc, rm: int, a: int):
    ka, na_, nna, ea = _dec(src, a)
    if ka == _SNAN:
        return _qnan_bits(dst), NV
    if ka == _QNAN:
        return _qnan_bits(dst), 0
    if ka == _INF:
        return _inf_bits(dst, na_), 0
    if nna == 0:
        return _zero_bits(dst, na_), 0
    return _round_dyadic(dst, na_, nna, ea, rm)


def o_cvt_fp_int(fmt: FormatDesc, width: int, signed: bool, rm: int, a: int):
    ka, na_, nna, ea = _dec(fmt, a)
    if signed:
        lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    else:
        lo, hi = 0, (1 << width) - 1
    mask = (1 << width) - 1
    if ka >= _QNAN:
        return hi & mask, NV
    if ka == _INF:
        return (lo if na_ else hi) & mask, NV
    if nna == 0:
        return 0, 0
    q, inexact = _at_dyadic(nna, ea, na_, rm)(0)
    v = -q if na_ else q
    if v < lo or v > hi:
        return (lo if v < lo else hi) & mask, NV
    return v & mask, NX if inexact else 0


def o_cvt_int_fp(width: int, signed: bool, fmt: FormatDesc, rm: int, bits: int):
    bits &= (1 << width) - 1
    if signed and bits >> (width - 1):
        v = bits - (1 << width)
    else:
        v = bits
    if v == 0:
        return _zero_bits(fmt, 0), 0
    neg = 1 if v < 0 else 0
    return _round_dyadic(fmt, neg, abs(v), 0, rm)
