"""Exact-significand arithmetic core with a single IEEE rounding step.

Every operation forms an exact (or truncated-with-sticky) intermediate as an
unbounded Python integer significand plus a binary exponent, then rounds once
into the destination format.  Rounding extracts a round bit and a sticky bit
at the target grid position, which keeps each op free of double rounding by
construction.

Conventions (RISC-V):
- rounding modes are the rm encoding: 0=RNE 1=RTZ 2=RDN 3=RUP 4=RMM
- status flags are the fflags bits: NX=1 UF=2 OF=4 DZ=8 NV=16
- every NaN result is the canonical quiet NaN of the destination format
- tininess is detected after rounding; UF is raised only when the result is
  tiny and inexact
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .formats import FormatDesc, canonical_nan

__all__ = [
    "RNE", "RTZ", "RDN", "RUP", "RMM", "ALL_MODES", "MODE_NAMES", "parse_rm",
    "NX", "UF", "OF", "DZ", "NV", "flags_str",
    "ExactReal", "round_exact",
    "add", "sub", "mul", "div", "sqrt", "fma", "fmsub", "fnmadd", "fnmsub",
    "fma_multi", "cmp", "minmax", "sgnj", "cvt_fp_fp", "cvt_fp_int",
    "cvt_int_fp", "full_div_iterations",
]

RNE, RTZ, RDN, RUP, RMM = 0, 1, 2, 3, 4
ALL_MODES = (RNE, RTZ, RDN, RUP, RMM)
MODE_NAMES = {"rne": RNE, "rtz": RTZ, "rdn": RDN, "rup": RUP, "rmm": RMM}
_MODE_STR = {v: k for k, v in MODE_NAMES.items()}

NX, UF, OF, DZ, NV = 1, 2, 4, 8, 16


def parse_rm(name: str) -> int:
    try:
        return MODE_NAMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown rounding mode {name!r}") from None


def mode_name(rm: int) -> str:
    return _MODE_STR[rm]


def flags_str(flags: int) -> str:
    """Render flags as five positions NV DZ OF UF NX, '-' when clear."""
    return "".join(
        ch if flags & bit else "-"
        for ch, bit in (("v", NV), ("z", DZ), ("o", OF), ("u", UF), ("x", NX))
    )


class ExactReal(NamedTuple):
    """Exact value carrier: kind 'finite' | 'inf' | 'nan'.

    Finite values are (-1)**sign_neg * significand * 2**exponent with a
    non-negative arbitrary-width significand.
    """

    kind: str
    sign_neg: bool = False
    significand: int = 0
    exponent: int = 0


# per-format constant bundle: (p, bias, emin, emax, width, topbit, qnan,
# inf, maxnorm, man_mask)
_CONSTS: dict[FormatDesc, tuple] = {}


def _consts(fmt: FormatDesc):
    c = _CONSTS.get(fmt)
    if c is None:
        p = fmt.man_bits
        bias = fmt.bias
        w = fmt.width
        emask = (1 << fmt.exp_bits) - 1
        c = (
            p, bias, 1 - bias, bias, w, 1 << (w - 1), canonical_nan(fmt),
            emask << p, ((emask - 1) << p) | ((1 << p) - 1), (1 << p) - 1,
        )
        _CONSTS[fmt] = c
    return c


_FIN, _INF, _QNAN, _SNAN = 0, 1, 2, 3


def _split(fmt: FormatDesc, bits: int):
    """Fast internal decode: (kind, neg, significand, exponent)."""
    p, bias, _emin, _emax, w, _top, _qn, _inf, _mx, mmask = _consts(fmt)
    man = bits & mmask
    ef = (bits >> p) & ((1 << fmt.exp_bits) - 1)
    neg = (bits >> (w - 1)) & 1
    if ef == (1 << fmt.exp_bits) - 1:
        if man == 0:
            return _INF, neg, 0, 0
        return (_QNAN if man >> (p - 1) else _SNAN), neg, 0, 0
    if ef == 0:
        return _FIN, neg, man, 1 - bias - p
    return _FIN, neg, man | (1 << p), ef - bias - p


def _mag_round(m: int, e: int, sticky: int, g: int, neg: int, rm: int):
    """Round magnitude m*2^e (+tiny sticky residue) onto grid 2^g.

    Returns (q, inexact) with q the rounded multiple of 2^g.  When sticky is
    set the caller guarantees m has enough significant bits that the residue
    lies strictly below the grid.
    """
    shift = g - e
    if shift <= 0:
        return m << -shift, sticky
    q = m >> shift
    rest = m & ((1 << shift) - 1)
    rb = rest >> (shift - 1)
    st = 1 if (rest & ((1 << (shift - 1)) - 1)) or sticky else 0
    if not (rb or st):
        return q, 0
    if rm == RNE:
        if rb and (st or (q & 1)):
            q += 1
    elif rm == RDN:
        q += neg
    elif rm == RUP:
        q += 1 - neg
    elif rm == RMM:
        q += rb
    return q, 1


def _round_pack(fmt: FormatDesc, neg: int, m: int, e: int, sticky: int, rm: int):
    """Round nonzero magnitude m*2^e (trunc-toward-zero, sticky residue) into
    fmt; returns (bits, flags)."""
    p, bias, emin, emax, w, top, _qn, inf, mx, mmask = _consts(fmt)
    E0 = e + m.bit_length() - 1
    g = (E0 if E0 > emin else emin) - p
    q, inexact = _mag_round(m, e, sticky, g, neg, rm)
    flags = NX if inexact else 0
    if q == 0:
        return (top if neg else 0), NX | UF
    if q.bit_length() > p + 1:
        q >>= 1
        g += 1
    E = g + q.bit_length() - 1
    sign = top if neg else 0
    if E > emax:
        flags = NX | OF
        if rm == RTZ or (rm == RDN and not neg) or (rm == RUP and neg):
            return sign | mx, flags
        return sign | inf, flags
    if inexact and E0 < emin:
        qu, _ = _mag_round(m, e, sticky, E0 - p, neg, rm)
        if qu < (1 << (emin - E0 + p)):
            flags |= UF
    if E < emin:
        return sign | q, flags
    return sign | ((E + bias) << p) | (q & mmask), flags


def round_exact(fmt: FormatDesc, x: ExactReal, rm: int):
    """Round an ExactReal into fmt; the entry point behind every operation."""
    if x.kind == "nan":
        return _consts(fmt)[6], 0
    neg = 1 if x.sign_neg else 0
    if x.kind == "inf":
        return (_consts(fmt)[5] if neg else 0) | _consts(fmt)[7], 0
    if x.significand == 0:
        return (_consts(fmt)[5] if neg else 0), 0
    return _round_pack(fmt, neg, x.significand, x.exponent, 0, rm)


# ── exact sum core (shared by add/sub/fma) ───────────────────────────────────

def _sum_round(fmt: FormatDesc, rm: int, s1: int, m1: int, e1: int,
               s2: int, m2: int, e2: int):
    """Round the exact value (-1)^s1*m1*2^e1 + (-1)^s2*m2*2^e2 (m1, m2 > 0).

    Alignment is exact for nearby exponents; when the gap exceeds the window
    the smaller term collapses into a sticky residue below the grid.
    """
    p = _consts(fmt)[0]
    if e1 < e2:
        s1, m1, e1, s2, m2, e2 = s2, m2, e2, s1, m1, e1
    d = e1 - e2
    if d <= m2.bit_length() + p + 6:
        if s1 == s2:
            return _round_pack(fmt, s1, (m1 << d) + m2, e2, 0, rm)
        m = (m1 << d) - m2
        if m == 0:
            return (_consts(fmt)[5] if rm == RDN else 0), 0
        if m < 0:
            return _round_pack(fmt, s2, -m, e2, 0, rm)
        return _round_pack(fmt, s1, m, e2, 0, rm)
    # gap beyond the window: term 2 only contributes a sticky residue
    k = p + 6
    if s1 == s2:
        return _round_pack(fmt, s1, m1 << k, e1 - k, 1, rm)
    return _round_pack(fmt, s1, (m1 << k) - 1, e1 - k, 1, rm)


# ── operations ───────────────────────────────────────────────────────────────

def add(fmt: FormatDesc, rm: int, a: int, b: int):
    return _addsub(fmt, rm, a, b, 0)


def sub(fmt: FormatDesc, rm: int, a: int, b: int):
    return _addsub(fmt, rm, a, b, 1)


def _addsub(fmt: FormatDesc, rm: int, a: int, b: int, negate_b: int):
    ka, sa, ma, ea = _split(fmt, a)
    kb, sb, mb, eb = _split(fmt, b)
    sb ^= negate_b
    qn = _consts(fmt)[6]
    flags = NV if _SNAN in (ka, kb) else 0
    if ka >= _QNAN or kb >= _QNAN:
        return qn, flags
    if ka == _INF or kb == _INF:
        if ka == _INF and kb == _INF and sa != sb:
            return qn, flags | NV
        s = sa if ka == _INF else sb
        return (_consts(fmt)[5] if s else 0) | _consts(fmt)[7], flags
    if ma == 0 and mb == 0:
        if sa == sb:
            return (_consts(fmt)[5] if sa else 0), flags
        return (_consts(fmt)[5] if rm == RDN else 0), flags
    if ma == 0:
        return _round_pack(fmt, sb, mb, eb, 0, rm)[0], flags
    if mb == 0:
        return _round_pack(fmt, sa, ma, ea, 0, rm)[0], flags
    bits, f = _sum_round(fmt, rm, sa, ma, ea, sb, mb, eb)
    return bits, flags | f


def mul(fmt: FormatDesc, rm: int, a: int, b: int):
    ka, sa, ma, ea = _split(fmt, a)
    kb, sb, mb, eb = _split(fmt, b)
    qn = _consts(fmt)[6]
    flags = NV if _SNAN in (ka, kb) else 0
    if ka >= _QNAN or kb >= _QNAN:
        return qn, flags
    s = sa ^ sb
    if ka == _INF or kb == _INF:
        if (ka == _INF and kb == _FIN and mb == 0) or (
            kb == _INF and ka == _FIN and ma == 0
        ):
            return qn, flags | NV
        return (_consts(fmt)[5] if s else 0) | _consts(fmt)[7], flags
    if ma == 0 or mb == 0:
        return (_consts(fmt)[5] if s else 0), flags
    bits, f = _round_pack(fmt, s, ma * mb, ea + eb, 0, rm)
    return bits, flags | f


def full_div_iterations(fmt: FormatDesc) -> int:
    """Iterations of the 3-bits-per-cycle divider for a correctly rounded
    quotient: ceil((man_bits + 1) / 3)."""
    return -(-(fmt.man_bits + 1) // 3)


def div(fmt: FormatDesc, rm: int, a: int, b: int, iter_override: int | None = None):
    ka, sa, ma, ea = _split(fmt, a)
    kb, sb, mb, eb = _split(fmt, b)
    p = _consts(fmt)[0]
    qn = _consts(fmt)[6]
    if iter_override is not None:
        full = full_div_iterations(fmt)
        if not 1 <= iter_override <= full:
            raise ValueError(
                f"iteration override must be in [1, {full}] for {fmt.name}, "
                f"got {iter_override}"
            )
    flags = NV if _SNAN in (ka, kb) else 0
    if ka >= _QNAN or kb >= _QNAN:
        return qn, flags
    s = sa ^ sb
    if ka == _INF:
        if kb == _INF:
            return qn, flags | NV
        return (_consts(fmt)[5] if s else 0) | _consts(fmt)[7], flags
    if kb == _INF:
        return (_consts(fmt)[5] if s else 0), flags
    if mb == 0:
        if ma == 0:
            return qn, flags | NV
        return (_consts(fmt)[5] if s else 0) | _consts(fmt)[7], flags | DZ
    if ma == 0:
        return (_consts(fmt)[5] if s else 0), flags
    shift = p + 5 + max(0, mb.bit_length() - ma.bit_length())
    q, r = divmod(ma << shift, mb)
    e = ea - eb - shift
    if iter_override is None:
        bits, f = _round_pack(fmt, s, q, e, 1 if r else 0, rm)
        return bits, flags | f
    # reduced-iteration quotient: keep only the top 3k significand bits of
    # the normalized quotient, zero the rest, truncate onto the format grid
    keep = 3 * iter_override
    drop = q.bit_length() - keep
    qt = (q >> drop) << drop if drop > 0 else q
    bits, f = _round_pack(fmt, s, qt, e, 0, RTZ)
    if r or qt != q:
        f |= NX
        if (bits >> p) & ((1 << fmt.exp_bits) - 1) == 0:
            f |= UF  # truncated result landed subnormal/zero: tiny and inexact
    return bits, flags | f


def sqrt(fmt: FormatDesc, rm: int, a: int):
    ka, sa, ma, ea = _split(fmt, a)
    p = _consts(fmt)[0]
    qn = _consts(fmt)[6]
    if ka == _SNAN:
        return qn, NV
    if ka == _QNAN:
        return qn, 0
    if ka == _FIN and ma == 0:
        return (_consts(fmt)[5] if sa else 0), 0
    if sa:
        return qn, NV
    if ka == _INF:
        return _consts(fmt)[7], 0
    j = max(0, 2 * (p + 4) - ma.bit_length())
    if (ea - j) & 1:
        j += 1
    m2 = ma << j
    q = math.isqrt(m2)
    sticky = 1 if q * q != m2 else 0
    return _round_pack(fmt, 0, q, (ea - j) >> 1, sticky, rm)


def _fma_core(src: FormatDesc, dst: FormatDesc, rm: int, a: int, b: int, c: int):
    ka, sa, ma, ea = _split(src, a)
    kb, sb, mb, eb = _split(src, b)
    kc, sc, mc, ec = _split(dst, c)
    qn = _consts(dst)[6]
    flags = NV if _SNAN in (ka, kb, kc) else 0
    if (ka == _INF and kb == _FIN and mb == 0) or (
        kb == _INF and ka == _FIN and ma == 0
    ):
        return qn, flags | NV
    if ka >= _QNAN or kb >= _QNAN or kc >= _QNAN:
        return qn, flags
    ps = sa ^ sb
    inf_bits = _consts(dst)[7]
    top = _consts(dst)[5]
    if ka == _INF or kb == _INF:
        if kc == _INF and sc != ps:
            return qn, flags | NV
        return (top if ps else 0) | inf_bits, flags
    if kc == _INF:
        return (top if sc else 0) | inf_bits, flags
    mp = ma * mb
    ep = ea + eb
    if mp == 0 and mc == 0:
        if ps == sc:
            return (top if ps else 0), flags
        return (top if rm == RDN else 0), flags
    if mp == 0:
        return _round_pack(dst, sc, mc, ec, 0, rm)[0], flags
    if mc == 0:
        bits, f = _round_pack(dst, ps, mp, ep, 0, rm)
        return bits, flags | f
    bits, f = _sum_round(dst, rm, ps, mp, ep, sc, mc, ec)
    return bits, flags | f


def fma(fmt: FormatDesc, rm: int, a: int, b: int, c: int):
    """a*b + c with one rounding."""
    return _fma_core(fmt, fmt, rm, a, b, c)


def fmsub(fmt: FormatDesc, rm: int, a: int, b: int, c: int):
    """a*b - c (RISC-V fmsub: addend negated before the exact sum)."""
    return _fma_core(fmt, fmt, rm, a, b, _flip(fmt, c))


def fnmadd(fmt: FormatDesc, rm: int, a: int, b: int, c: int):
    """-(a*b) - c."""
    return _fma_core(fmt, fmt, rm, _flip(fmt, a), b, _flip(fmt, c))


def fnmsub(fmt: FormatDesc, rm: int, a: int, b: int, c: int):
    """-(a*b) + c."""
    return _fma_core(fmt, fmt, rm, _flip(fmt, a), b, c)


def _flip(fmt: FormatDesc, v: int) -> int:
    return v ^ _consts(fmt)[5]


def fma_multi(src: FormatDesc, dst: FormatDesc, rm: int, a: int, b: int, c: int):
    """Expanding FMA: multiply in src, accumulate and round in dst."""
    if dst.width < src.width:
        raise ValueError(
            f"expanding FMA needs dst at least as wide as src, got "
            f"{src.name} -> {dst.name}"
        )
    return _fma_core(src, dst, rm, a, b, c)


# magnitude-orderable key: works because IEEE encodings order by magnitude
def _order_key(fmt: FormatDesc, v: int) -> int:
    top = _consts(fmt)[5]
    mag = v & (top - 1)
    return -mag if v & top else mag


def cmp(fmt: FormatDesc, op: str, a: int, b: int):
    ka = _split(fmt, a)[0]
    kb = _split(fmt, b)[0]
    nan = ka >= _QNAN or kb >= _QNAN
    if op == "eq":
        if nan:
            return 0, NV if _SNAN in (ka, kb) else 0
        return int(_order_key(fmt, a) == _order_key(fmt, b)), 0
    if op not in ("lt", "le"):
        raise ValueError(f"unknown comparison {op!r}")
    if nan:
        return 0, NV
    x, y = _order_key(fmt, a), _order_key(fmt, b)
    return int(x < y if op == "lt" else x <= y), 0


def minmax(fmt: FormatDesc, op: str, a: int, b: int):
    if op not in ("min", "max"):
        raise ValueError(f"unknown selection {op!r}")
    ka = _split(fmt, a)[0]
    kb = _split(fmt, b)[0]
    flags = NV if _SNAN in (ka, kb) else 0
    if ka >= _QNAN:
        return (_consts(fmt)[6] if kb >= _QNAN else b), flags
    if kb >= _QNAN:
        return a, flags
    x, y = _order_key(fmt, a), _order_key(fmt, b)
    if x == y:
        # only +-0 pairs differ bitwise while comparing equal
        neg = a if a & _consts(fmt)[5] else b
        pos = b if neg == a else a
        return (neg if op == "min" else pos), flags
    pick_a = x < y if op == "min" else x > y
    return (a if pick_a else b), flags


def sgnj(fmt: FormatDesc, op: str, a: int, b: int) -> int:
    """Sign-injection: pure bit manipulation, no flags, NaNs untouched."""
    top = _consts(fmt)[5]
    sa, sb = a & top, b & top
    if op == "sgnj":
        return (a & ~top) | sb
    if op == "sgnjn":
        return (a & ~top) | (sb ^ top)
    if op == "sgnjx":
        return a ^ sb
    raise ValueError(f"unknown sign operation {op!r}")


def cvt_fp_fp(src: FormatDesc, dst: FormatDesc, rm: int, a: int):
    ka, sa, ma, ea = _split(src, a)
    if ka == _SNAN:
        return _consts(dst)[6], NV
    if ka == _QNAN:
        return _consts(dst)[6], 0
    top = _consts(dst)[5]
    if ka == _INF:
        return (top if sa else 0) | _consts(dst)[7], 0
    if ma == 0:
        return (top if sa else 0), 0
    return _round_pack(dst, sa, ma, ea, 0, rm)


def cvt_fp_int(fmt: FormatDesc, width: int, signed: bool, rm: int, a: int):
    """FP to integer: round per rm, saturate out-of-range/NaN with NV."""
    ka, sa, ma, ea = _split(fmt, a)
    if signed:
        lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    else:
        lo, hi = 0, (1 << width) - 1
    mask = (1 << width) - 1
    if ka >= _QNAN:
        return hi & mask, NV
    if ka == _INF:
        return (lo if sa else hi) & mask, NV
    if ma == 0:
        return 0, 0
    q, inexact = _mag_round(ma, ea, 0, 0, sa, rm)
    v = -q if sa else q
    if not lo <= v <= hi:
        return (lo if v < lo else hi) & mask, NV
    return v & mask, NX if inexact else 0


def cvt_int_fp(width: int, signed: bool, fmt: FormatDesc, rm: int, bits: int):
    """Integer to FP: exact value, one rounding."""
    bits &= (1 << width) - 1
    v = bits - (1 << width) if signed and (bits >> (width - 1)) else bits
    if v == 0:
        return 0, 0
    return _round_pack(fmt, 1 if v < 0 else 0, abs(v), 0, 0, rm)
