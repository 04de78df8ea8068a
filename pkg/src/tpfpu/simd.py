"""Register-level model: FLEN registers, NaN-boxing, packed-vector dispatch.

Registers are plain FLEN-wide integers.  Narrow scalars are NaN-boxed on
write (all bits above the value forced to one); vectors are reinterpretation
views with element 0 in the least significant lane.  All vector operations
apply the scalar arithmetic core lane-wise and OR the per-lane status flags;
an operation never touches lanes it does not write.
"""

from __future__ import annotations

from . import arith
from .formats import FormatDesc, canonical_nan

__all__ = [
    "write_scalar", "read_scalar", "lane_count", "split_lanes", "join_lanes",
    "vec_map1", "vec_map2", "vec_map3", "vec_scalar", "vec_cvt_half",
    "cast_and_pack", "shuffle",
]


def _fit(fmt: FormatDesc, flen: int) -> None:
    if fmt.width > flen:
        raise ValueError(f"{fmt.name} ({fmt.width} bits) does not fit FLEN={flen}")


def write_scalar(fmt: FormatDesc, flen: int, v: int) -> int:
    """NaN-box: value in the low bits, every unused high bit set to one."""
    _fit(fmt, flen)
    mask = (1 << flen) - 1
    return (mask ^ ((1 << fmt.width) - 1)) | (v & ((1 << fmt.width) - 1))


def read_scalar(fmt: FormatDesc, flen: int, reg: int, check_boxing: bool = False) -> int:
    """Low fmt.width bits; under strict checking a broken box reads as NaN."""
    _fit(fmt, flen)
    v = reg & ((1 << fmt.width) - 1)
    if check_boxing and fmt.width < flen:
        box = reg >> fmt.width
        if box != (1 << (flen - fmt.width)) - 1:
            return canonical_nan(fmt)
    return v


def lane_count(fmt: FormatDesc, flen: int) -> int:
    if flen % fmt.width:
        raise ValueError(f"FLEN={flen} is not a multiple of {fmt.name} width")
    return flen // fmt.width


def split_lanes(fmt: FormatDesc, flen: int, reg: int) -> list[int]:
    w = fmt.width
    return [(reg >> (i * w)) & ((1 << w) - 1) for i in range(lane_count(fmt, flen))]


def join_lanes(fmt: FormatDesc, flen: int, lanes: list[int]) -> int:
    w = fmt.width
    if len(lanes) != lane_count(fmt, flen):
        raise ValueError("lane count mismatch")
    out = 0
    for i, v in enumerate(lanes):
        out |= (v & ((1 << w) - 1)) << (i * w)
    return out


def _simd_ok(fmt: FormatDesc, flen: int) -> None:
    if fmt.width * 2 > flen:
        raise ValueError(
            f"SIMD unavailable for {fmt.name} at FLEN={flen}: fewer than 2 lanes"
        )


def vec_map1(fmt: FormatDesc, flen: int, op, reg: int):
    """Lane-wise unary op(lane) -> (bits, flags); flags OR over lanes."""
    _simd_ok(fmt, flen)
    flags = 0
    out = []
    for v in split_lanes(fmt, flen, reg):
        r, f = op(v)
        out.append(r)
        flags |= f
    return join_lanes(fmt, flen, out), flags


def vec_map2(fmt: FormatDesc, flen: int, op, ra: int, rb: int):
    """Lane-wise binary op(a_lane, b_lane) -> (bits, flags)."""
    _simd_ok(fmt, flen)
    flags = 0
    out = []
    for va, vb in zip(split_lanes(fmt, flen, ra), split_lanes(fmt, flen, rb)):
        r, f = op(va, vb)
        out.append(r)
        flags |= f
    return join_lanes(fmt, flen, out), flags


def vec_map3(fmt: FormatDesc, flen: int, op, ra: int, rb: int, rc: int):
    """Lane-wise ternary op(a_lane, b_lane, c_lane) -> (bits, flags)."""
    _simd_ok(fmt, flen)
    flags = 0
    out = []
    for va, vb, vc in zip(
        split_lanes(fmt, flen, ra),
        split_lanes(fmt, flen, rb),
        split_lanes(fmt, flen, rc),
    ):
        r, f = op(va, vb, vc)
        out.append(r)
        flags |= f
    return join_lanes(fmt, flen, out), flags


def vec_scalar(fmt: FormatDesc, flen: int, op, ra: int, rb: int):
    """op(a_lane, s) with s replicated from element 0 of rb."""
    _simd_ok(fmt, flen)
    s = rb & ((1 << fmt.width) - 1)
    flags = 0
    out = []
    for va in split_lanes(fmt, flen, ra):
        r, f = op(va, s)
        out.append(r)
        flags |= f
    return join_lanes(fmt, flen, out), flags


def vec_cvt_half(src: FormatDesc, dst: FormatDesc, flen: int, rm: int,
                 reg: int, half: str):
    """Half-vector conversion between formats whose widths differ by 2x.

    Widening: converts the selected half of the source elements into a full
    destination vector.  Narrowing: converts all source elements into the
    selected half of the destination; the other half is filled with ones
    (NaN-box-consistent).
    """
    if half not in ("low", "high"):
        raise ValueError(f"half must be 'low' or 'high', got {half!r}")
    # only the narrow side needs to be a real vector; the wide side may be a
    # single element (e.g. pairs of halves widened into one full register)
    _simd_ok(src if src.width < dst.width else dst, flen)
    flags = 0
    if dst.width == 2 * src.width:
        n = lane_count(dst, flen)
        src_lanes = split_lanes(src, flen, reg)
        sel = src_lanes[:n] if half == "low" else src_lanes[n:]
        out = []
        for v in sel:
            r, f = arith.cvt_fp_fp(src, dst, rm, v)
            out.append(r)
            flags |= f
        return join_lanes(dst, flen, out), flags
    if src.width == 2 * dst.width:
        out_lanes = []
        for v in split_lanes(src, flen, reg):
            r, f = arith.cvt_fp_fp(src, dst, rm, v)
            out_lanes.append(r)
            flags |= f
        n = len(out_lanes)
        packed = join_lanes(dst, flen, out_lanes + [0] * n)
        half_bits = flen // 2
        ones = (1 << half_bits) - 1
        packed &= ones  # written elements occupy the low half
        if half == "low":
            return (ones << half_bits) | packed, flags
        return (packed << half_bits) | ones, flags
    raise ValueError(
        f"half-vector conversion needs a 2x width ratio, got "
        f"{src.name} -> {dst.name}"
    )


def cast_and_pack(src: FormatDesc, dst: FormatDesc, flen: int, rm: int,
                  a: int, b: int, dest: int, pair_index: int = 0):
    """Convert two scalars and write them as destination elements
    (2*pair_index, 2*pair_index + 1); all other destination bits keep their
    previous contents."""
    w = dst.width
    lo_lane = 2 * pair_index
    if (lo_lane + 2) * w > flen:
        raise ValueError(
            f"cast-and-pack pair {pair_index} of {dst.name} does not fit "
            f"FLEN={flen}"
        )
    ra, fa = arith.cvt_fp_fp(src, dst, rm, a & ((1 << src.width) - 1))
    rb, fb = arith.cvt_fp_fp(src, dst, rm, b & ((1 << src.width) - 1))
    mask = ((1 << (2 * w)) - 1) << (lo_lane * w)
    merged = (dest & ~mask) | ((ra | (rb << w)) << (lo_lane * w))
    return merged & ((1 << flen) - 1), fa | fb


def shuffle(fmt: FormatDesc, flen: int, ra: int, rb: int,
            selectors: list[int]) -> int:
    """Pure lane permutation/merge: selector i < lane_count picks ra[i'],
    selector >= lane_count picks rb[i' - lane_count]."""
    n = lane_count(fmt, flen)
    if len(selectors) != n:
        raise ValueError(f"need {n} selectors, got {len(selectors)}")
    la = split_lanes(fmt, flen, ra)
    lb = split_lanes(fmt, flen, rb)
    out = []
    for s in selectors:
        if not 0 <= s < 2 * n:
            raise ValueError(f"selector {s} out of range")
        out.append(la[s] if s < n else lb[s - n])
    return join_lanes(fmt, flen, out)
