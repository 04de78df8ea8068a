"""Mnemonic-level instruction set: assembler and interpreter.

Programs are plain text, one instruction per line, `;` starts a comment.
Operands are f/x registers, `@name` stream references, or integer literals;
an optional trailing rounding-mode token (rne/rtz/rdn/rup/rmm) overrides the
RNE default.  Formats are selected by mnemonic suffix: .d .s .h .ah .b, or a
custom format's name.  Loads one-extend (NaN-box) narrow data; stores
truncate to the access width; post-incrementing loads advance their stream
cursor as a side effect.

Execution dispatches to the scalar core and the packed-vector layer, accrues
status flags, and accounts timing and energy through the unit model.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import arith, fpumodel, simd
from .formats import classify_bits

__all__ = [
    "AsmError", "ExecError", "Instruction", "assemble", "MachineState",
    "Stream", "bind", "execute", "run_program", "read_fflags", "clear_fflags",
]


class AsmError(Exception):
    pass


class ExecError(Exception):
    pass


_SCALAR2 = {"fadd": "add", "fsub": "sub", "fmul": "mul", "fdiv": "div",
            "fmin": "min", "fmax": "max",
            "fsgnj": "sgnj", "fsgnjn": "sgnjn", "fsgnjx": "sgnjx"}
_CMP = {"feq": "eq", "flt": "lt", "fle": "le"}
_FMA4 = {"fmadd": arith.fma, "fmsub": arith.fmsub,
         "fnmadd": arith.fnmadd, "fnmsub": arith.fnmsub}
_VEC2 = {"vfadd": "add", "vfsub": "sub", "vfmul": "mul",
         "vfmin": "min", "vfmax": "max",
         "vfsgnj": "sgnj", "vfsgnjn": "sgnjn", "vfsgnjx": "sgnjx"}
_LOADS = {"flb": 1, "flh": 2, "flw": 4, "fld": 8}
_STORES = {"fsb": 1, "fsh": 2, "fsw": 4, "fsd": 8}
_INT_SUFFIX = {"w": (32, True), "wu": (32, False),
               "l": (64, True), "lu": (64, False)}
_PACK_INDEX = {"vfcpka": 0, "vfcpkb": 1, "vfcpkc": 2, "vfcpkd": 3}

_BLOCK_OF = {}
for _h in ("fadd", "fsub", "fmul", "fmadd", "fmsub", "fnmadd", "fnmsub",
           "fmacex", "vfadd", "vfsub", "vfmul", "vfmac"):
    _BLOCK_OF[_h] = "addmul"
for _h in ("fdiv", "fsqrt"):
    _BLOCK_OF[_h] = "divsqrt"
for _h in ("fmin", "fmax", "fsgnj", "fsgnjn", "fsgnjx", "feq", "flt", "fle",
           "fclass", "vfmin", "vfmax", "vfsgnj", "vfsgnjn", "vfsgnjx"):
    _BLOCK_OF[_h] = "comp"
for _h in ("fcvt", "vfcvt", "vfcpka", "vfcpkb", "vfcpkc", "vfcpkd"):
    _BLOCK_OF[_h] = "conv"


@dataclass(frozen=True)
class Instruction:
    text: str
    head: str
    suffixes: tuple            # format / int suffixes from the mnemonic
    replicate: bool            # vector-scalar .r modifier
    half: str | None           # .lo/.hi selector on half-vector conversions
    rm: int
    operands: tuple            # parsed operand tokens

    @property
    def energy_key(self) -> str:
        if self.head in _LOADS or self.head in _STORES or self.head == "li":
            return self.head
        head = "vfcpk" if self.head in _PACK_INDEX else self.head
        return ".".join((head,) + self.suffixes)


def _parse_reg(tok: str):
    if len(tok) >= 2 and tok[0] in "fx" and tok[1:].isdigit():
        i = int(tok[1:])
        if 0 <= i < 32:
            return (tok[0], i)
    return None


def _parse_operand(tok: str):
    r = _parse_reg(tok)
    if r is not None:
        return r
    if tok.startswith("@"):
        return ("s", tok[1:])
    try:
        return ("i", int(tok, 0))
    except ValueError:
        raise AsmError(f"bad operand {tok!r}") from None


_SHAPES = {
    # head -> operand kind string: f/x registers, s stream, i literal
    **{h: "fff" for h in _SCALAR2},
    **{h: "xff" for h in _CMP},
    **{h: "ffff" for h in _FMA4},
    "fsqrt": "ff", "fclass": "xf", "fmacex": "fff",
    "fcvt": "ff",  # refined by suffix direction below
    **{h: "fff" for h in _VEC2},
    "vfmac": "fff",
    "vfcvt": "ff",
    **{h: "fff" for h in _PACK_INDEX},
    **{h: "fs" for h in _LOADS},
    **{h: "fs" for h in _STORES},
    "li": "xi",
}


def _parse_line(line: str) -> Instruction | None:
    body = line.split(";", 1)[0].split("#", 1)[0].strip()
    if not body:
        return None
    toks = body.replace(",", " ").split()
    mnemonic = toks[0].lower()
    rest = toks[1:]
    rm = arith.RNE
    if rest and rest[-1].lower() in arith.MODE_NAMES:
        rm = arith.MODE_NAMES[rest[-1].lower()]
        rest = rest[:-1]
    parts = mnemonic.split(".")
    head = parts[0]
    sfx = parts[1:]
    replicate = False
    half = None

    if head in _LOADS or head in _STORES or head == "li":
        if sfx:
            raise AsmError(f"unknown mnemonic {mnemonic!r}")
        suffixes = ()
    elif head in _SCALAR2 or head in _CMP or head in _FMA4 \
            or head in ("fsqrt", "fclass"):
        if len(sfx) != 1:
            raise AsmError(f"{head} needs one format suffix")
        suffixes = tuple(sfx)
    elif head in _VEC2 or head == "vfmac":
        if sfx and sfx[0] == "r":
            replicate = True
            sfx = sfx[1:]
        if len(sfx) != 1:
            raise AsmError(f"{head} needs one format suffix")
        suffixes = tuple(sfx)
    elif head in ("fcvt", "fmacex") or head in _PACK_INDEX:
        if len(sfx) != 2:
            raise AsmError(f"{head} needs destination and source suffixes")
        suffixes = tuple(sfx)
    elif head == "vfcvt":
        if len(sfx) == 3 and sfx[2] in ("lo", "hi"):
            half = "low" if sfx[2] == "lo" else "high"
            sfx = sfx[:2]
        if len(sfx) != 2:
            raise AsmError(f"{head} needs destination and source suffixes")
        suffixes = tuple(sfx)
    else:
        raise AsmError(f"unknown mnemonic {mnemonic!r}")

    shape = _SHAPES[head]
    if head == "fcvt":
        to, frm = suffixes
        if to in _INT_SUFFIX and frm in _INT_SUFFIX:
            raise AsmError(f"{mnemonic}: one side must be a float format")
        shape = "xf" if to in _INT_SUFFIX else ("fx" if frm in _INT_SUFFIX
                                                else "ff")
    ops = [_parse_operand(t) for t in rest]
    if len(ops) != len(shape):
        raise AsmError(
            f"{mnemonic} expects {len(shape)} operands, got {len(ops)}")
    for o, want in zip(ops, shape):
        kinds = {"f": ("f",), "x": ("x",), "s": ("s",), "i": ("i",)}[want]
        if o[0] not in kinds:
            raise AsmError(f"{mnemonic}: operand {o} should be kind {want!r}")
    return Instruction(body, head, suffixes, replicate, half, rm, tuple(ops))


def assemble(text: str) -> list:
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        try:
            ins = _parse_line(line)
        except AsmError as e:
            raise AsmError(f"line {n}: {e}") from None
        if ins is not None:
            out.append(ins)
    return out


# ---------------------------------------------------------------------------
# Machine state

class Stream:
    __slots__ = ("name", "data", "cursor")

    def __init__(self, name: str, data: bytes = b""):
        self.name = name
        self.data = bytearray(data)
        self.cursor = 0

    def read(self, nbytes: int) -> int:
        if self.cursor + nbytes > len(self.data):
            raise ExecError(f"stream '{self.name}' exhausted at byte "
                            f"{self.cursor}")
        v = int.from_bytes(self.data[self.cursor:self.cursor + nbytes],
                           "little")
        self.cursor += nbytes
        return v

    def append(self, value: int, nbytes: int) -> None:
        self.data += int(value & ((1 << (8 * nbytes)) - 1)).to_bytes(
            nbytes, "little")

    def rewind(self) -> None:
        self.cursor = 0


class MachineState:
    def __init__(self, cfg: fpumodel.FpuConfig, strict_boxing: bool = False):
        if cfg.fp_in_xregs and cfg.flen != cfg.xlen:
            raise ValueError("shared register file needs FLEN == XLEN")
        self.cfg = cfg
        self.flen = cfg.flen
        self.xlen = cfg.xlen
        self.xregs = [0] * 32
        # with FP data hosted in the integer file, both views are one file
        self.fregs = self.xregs if cfg.fp_in_xregs else [0] * 32
        self.fflags = 0
        # operation units take narrow operands as the low register bits;
        # strict mode treats an improper box as NaN instead
        self.strict_boxing = strict_boxing
        self.streams: dict[str, Stream] = {}
        self.sb = fpumodel.Scoreboard()
        self.energy = fpumodel.EnergyReport()

    def add_stream(self, name: str, data: bytes = b"") -> Stream:
        st = Stream(name, data)
        self.streams[name] = st
        return st

    def stream(self, name: str) -> Stream:
        try:
            return self.streams[name]
        except KeyError:
            raise ExecError(f"undefined stream '@{name}'") from None

    def ftag(self, i: int):
        return ("x", i) if self.cfg.fp_in_xregs else ("f", i)

    def write_freg(self, i: int, fmt, bits: int) -> None:
        self.fregs[i] = simd.write_scalar(fmt, self.flen, bits)

    def read_freg(self, i: int, fmt, check_boxing: bool | None = None) -> int:
        if check_boxing is None:
            check_boxing = self.strict_boxing
        return simd.read_scalar(fmt, self.flen, self.fregs[i], check_boxing)


def read_fflags(state: MachineState) -> int:
    return state.fflags


def clear_fflags(state: MachineState) -> None:
    state.fflags = 0


# ---------------------------------------------------------------------------
# Binding: turn an Instruction into a ready-to-run closure for one machine

def _fmt_for(cfg, sfx: str):
    for f in cfg.formats:
        if fpumodel.suffix_of(f) == sfx:
            return f
    raise ExecError(f"format suffix .{sfx} not enabled on {cfg.name}")


def _need_simd(cfg, fmt):
    if cfg.flen // fmt.width < 2:
        raise ExecError(
            f"no packed vectors for {fmt.name} at FLEN={cfg.flen}")


def bind(state: MachineState, ins: Instruction):
    """Resolve formats, support checks, latency and energy once; return a
    zero-argument closure executing the instruction on this machine."""
    missing_energy = None
    try:
        pj = fpumodel.energy_of(state.cfg, ins.energy_key)
    except fpumodel.EnergyLookupError as e:
        # architectural support errors take precedence over a missing entry
        missing_energy = e
        pj = 0.0
    runner = _bind_checked(state, ins, pj)
    if missing_energy is not None:
        raise missing_energy
    return runner


def _bind_checked(state: MachineState, ins: Instruction, pj: float):
    cfg = state.cfg
    head = ins.head
    rm = ins.rm
    sb = state.sb
    energy = state.energy
    key = ins.energy_key
    ops = ins.operands
    flen = state.flen

    def lat(block, fmt):
        try:
            return fpumodel.latency_of(cfg, block, fmt)
        except fpumodel.UnsupportedOperation as e:
            raise ExecError(f"{ins.text}: {e}") from None

    # loads / stores / integer literal ------------------------------------
    if head in _LOADS:
        nbytes = _LOADS[head]
        w = 8 * nbytes
        if w > flen:
            raise ExecError(f"{ins.text}: access wider than FLEN")
        box = ((1 << flen) - 1) ^ ((1 << w) - 1)
        (_, rd), (_, sname) = ops
        stream = state.stream(sname)
        dtag = state.ftag(rd)
        fregs = state.fregs

        def run_load():
            fregs[rd] = box | stream.read(nbytes)
            sb.issue(key, 1, (), (dtag,), fpu_port=False)
            energy.add(key, pj)
        return run_load

    if head in _STORES:
        nbytes = _STORES[head]
        mask = (1 << (8 * nbytes)) - 1
        (_, rs), (_, sname) = ops
        stream = state.stream(sname)
        stag = state.ftag(rs)
        fregs = state.fregs

        def run_store():
            stream.append(fregs[rs] & mask, nbytes)
            sb.issue(key, 1, (stag,), (), fpu_port=False)
            energy.add(key, pj)
        return run_store

    if head == "li":
        (_, rd), (_, imm) = ops
        val = imm & ((1 << state.xlen) - 1)
        xregs = state.xregs

        def run_li():
            xregs[rd] = val
            sb.issue(key, 1, (), (("x", rd),), fpu_port=False)
            energy.add(key, pj)
        return run_li

    block = _BLOCK_OF[head]
    blocking = block == "divsqrt"
    fregs = state.fregs
    xregs = state.xregs

    def acct(latency, srcs, dsts):
        sb.issue(key, latency, srcs, dsts, blocking=blocking)
        energy.add(key, pj)

    # scalar ---------------------------------------------------------------
    if head in _SCALAR2:
        fmt = _fmt_for(cfg, ins.suffixes[0])
        latency = lat(block, fmt)
        op = _SCALAR2[head]
        (_, rd), (_, ra), (_, rb) = ops
        ta, tb, td = state.ftag(ra), state.ftag(rb), state.ftag(rd)
        rd_w = state.write_freg
        rd_r = state.read_freg
        if op in ("add", "sub", "mul", "div"):
            fn = getattr(arith, op)

            def run_bin():
                r, fl = fn(fmt, rm, rd_r(ra, fmt), rd_r(rb, fmt))
                rd_w(rd, fmt, r)
                state.fflags |= fl
                acct(latency, (ta, tb), (td,))
            return run_bin
        if op in ("min", "max"):
            def run_minmax():
                r, fl = arith.minmax(fmt, op, rd_r(ra, fmt), rd_r(rb, fmt))
                rd_w(rd, fmt, r)
                state.fflags |= fl
                acct(latency, (ta, tb), (td,))
            return run_minmax

        def run_sgnj():
            rd_w(rd, fmt, arith.sgnj(fmt, op, rd_r(ra, fmt), rd_r(rb, fmt)))
            acct(latency, (ta, tb), (td,))
        return run_sgnj

    if head == "fsqrt":
        fmt = _fmt_for(cfg, ins.suffixes[0])
        latency = lat(block, fmt)
        (_, rd), (_, ra) = ops
        ta, td = state.ftag(ra), state.ftag(rd)

        def run_sqrt():
            r, fl = arith.sqrt(fmt, rm, state.read_freg(ra, fmt))
            state.write_freg(rd, fmt, r)
            state.fflags |= fl
            acct(latency, (ta,), (td,))
        return run_sqrt

    if head in _CMP:
        fmt = _fmt_for(cfg, ins.suffixes[0])
        latency = lat(block, fmt)
        op = _CMP[head]
        (_, rd), (_, ra), (_, rb) = ops
        ta, tb = state.ftag(ra), state.ftag(rb)

        def run_cmp():
            r, fl = arith.cmp(fmt, op, state.read_freg(ra, fmt),
                              state.read_freg(rb, fmt))
            xregs[rd] = r
            state.fflags |= fl
            acct(latency, (ta, tb), (("x", rd),))
        return run_cmp

    if head == "fclass":
        fmt = _fmt_for(cfg, ins.suffixes[0])
        latency = lat(block, fmt)
        (_, rd), (_, ra) = ops
        ta = state.ftag(ra)

        def run_fclass():
            xregs[rd] = classify_bits(fmt, state.read_freg(ra, fmt))
            acct(latency, (ta,), (("x", rd),))
        return run_fclass

    if head in _FMA4:
        fmt = _fmt_for(cfg, ins.suffixes[0])
        latency = lat(block, fmt)
        fn = _FMA4[head]
        (_, rd), (_, ra), (_, rb), (_, rc) = ops
        ta, tb, tc, td = (state.ftag(ra), state.ftag(rb), state.ftag(rc),
                          state.ftag(rd))

        def run_fma():
            r, fl = fn(fmt, rm, state.read_freg(ra, fmt),
                       state.read_freg(rb, fmt), state.read_freg(rc, fmt))
            state.write_freg(rd, fmt, r)
            state.fflags |= fl
            acct(latency, (ta, tb, tc), (td,))
        return run_fma

    if head == "fmacex":
        dst = _fmt_for(cfg, ins.suffixes[0])
        src = _fmt_for(cfg, ins.suffixes[1])
        bc = cfg.blocks.get("addmul")
        if bc is None or bc.impl != "merged" \
                or src.name not in bc.cycles or dst.name not in bc.cycles:
            raise ExecError(
                f"{ins.text}: expanding FMA needs a merged multiply-"
                f"accumulate slice holding both formats on {cfg.name}")
        latency = lat(block, dst)
        (_, rd), (_, ra), (_, rb) = ops
        ta, tb, td = state.ftag(ra), state.ftag(rb), state.ftag(rd)

        def run_fmacex():
            r, fl = arith.fma_multi(src, dst, rm,
                                    state.read_freg(ra, src),
                                    state.read_freg(rb, src),
                                    state.read_freg(rd, dst))
            state.write_freg(rd, dst, r)
            state.fflags |= fl
            acct(latency, (ta, tb, td), (td,))
        return run_fmacex

    if head == "fcvt":
        to, frm = ins.suffixes
        (_, rd), (_, ra) = ops
        if to in _INT_SUFFIX:
            width, signed = _INT_SUFFIX[to]
            if width > state.xlen:
                raise ExecError(f"{ins.text}: {width}-bit integer result "
                                f"needs XLEN >= {width}")
            fmt = _fmt_for(cfg, frm)
            latency = lat(block, fmt)
            ta = state.ftag(ra)
            sign_fill = ((1 << state.xlen) - 1) ^ ((1 << width) - 1)

            def run_f2i():
                r, fl = arith.cvt_fp_int(fmt, width, signed, rm,
                                         state.read_freg(ra, fmt))
                if signed and (r >> (width - 1)):
                    r |= sign_fill
                xregs[rd] = r
                state.fflags |= fl
                acct(latency, (ta,), (("x", rd),))
            return run_f2i
        if frm in _INT_SUFFIX:
            width, signed = _INT_SUFFIX[frm]
            if width > state.xlen:
                raise ExecError(f"{ins.text}: {width}-bit integer source "
                                f"needs XLEN >= {width}")
            fmt = _fmt_for(cfg, to)
            latency = lat(block, fmt)
            mask = (1 << width) - 1
            td = state.ftag(rd)

            def run_i2f():
                r, fl = arith.cvt_int_fp(width, signed, fmt, rm,
                                         xregs[ra] & mask)
                state.write_freg(rd, fmt, r)
                state.fflags |= fl
                acct(latency, (("x", ra),), (td,))
            return run_i2f
        dfmt = _fmt_for(cfg, to)
        sfmt = _fmt_for(cfg, frm)
        lat(block, sfmt)
        latency = lat(block, dfmt)
        ta, td = state.ftag(ra), state.ftag(rd)

        def run_f2f():
            r, fl = arith.cvt_fp_fp(sfmt, dfmt, rm,
                                    state.read_freg(ra, sfmt))
            state.write_freg(rd, dfmt, r)
            state.fflags |= fl
            acct(latency, (ta,), (td,))
        return run_f2f

    # vector ---------------------------------------------------------------
    if head in _VEC2 or head == "vfmac":
        fmt = _fmt_for(cfg, ins.suffixes[0])
        _need_simd(cfg, fmt)
        latency = lat(block, fmt)
        (_, rd), (_, ra), (_, rb) = ops
        ta, tb, td = state.ftag(ra), state.ftag(rb), state.ftag(rd)
        if head == "vfmac":
            if ins.replicate:
                smask = (1 << fmt.width) - 1

                def run_vfmac_r():
                    s = fregs[rb] & smask
                    r, fl = simd.vec_map2(
                        fmt, flen,
                        lambda va, vc: arith.fma(fmt, rm, va, s, vc),
                        fregs[ra], fregs[rd])
                    fregs[rd] = r
                    state.fflags |= fl
                    acct(latency, (ta, tb, td), (td,))
                return run_vfmac_r

            def run_vfmac():
                r, fl = simd.vec_map3(
                    fmt, flen,
                    lambda va, vb, vc: arith.fma(fmt, rm, va, vb, vc),
                    fregs[ra], fregs[rb], fregs[rd])
                fregs[rd] = r
                state.fflags |= fl
                acct(latency, (ta, tb, td), (td,))
            return run_vfmac
        op = _VEC2[head]
        if op in ("add", "sub", "mul"):
            fn = getattr(arith, op)
            lane = lambda va, vb: fn(fmt, rm, va, vb)
        elif op in ("min", "max"):
            lane = lambda va, vb: arith.minmax(fmt, op, va, vb)
        else:
            lane = lambda va, vb: (arith.sgnj(fmt, op, va, vb), 0)
        mapper = simd.vec_scalar if ins.replicate else simd.vec_map2

        def run_vec2():
            r, fl = mapper(fmt, flen, lane, fregs[ra], fregs[rb])
            fregs[rd] = r
            state.fflags |= fl
            acct(latency, (ta, tb), (td,))
        return run_vec2

    if head == "vfcvt":
        to, frm = ins.suffixes
        dfmt = _fmt_for(cfg, to)
        sfmt = _fmt_for(cfg, frm)
        lat(block, sfmt)
        latency = lat(block, dfmt)
        (_, rd), (_, ra) = ops
        ta, td = state.ftag(ra), state.ftag(rd)
        if ins.half is None:
            if sfmt.width != dfmt.width:
                raise ExecError(
                    f"{ins.text}: widths differ; use the .lo/.hi half forms")
            _need_simd(cfg, sfmt)

            def run_vcvt_same():
                r, fl = simd.vec_map1(
                    sfmt, flen,
                    lambda v: arith.cvt_fp_fp(sfmt, dfmt, rm, v),
                    fregs[ra])
                fregs[rd] = r
                state.fflags |= fl
                acct(latency, (ta,), (td,))
            return run_vcvt_same
        if dfmt.width != 2 * sfmt.width and sfmt.width != 2 * dfmt.width:
            raise ExecError(
                f"{ins.text}: half-vector conversion needs a 2x width ratio")
        narrow = sfmt if sfmt.width < dfmt.width else dfmt
        _need_simd(cfg, narrow)
        half = ins.half

        def run_vcvt_half():
            r, fl = simd.vec_cvt_half(sfmt, dfmt, flen, rm, fregs[ra], half)
            fregs[rd] = r
            state.fflags |= fl
            acct(latency, (ta,), (td,))
        return run_vcvt_half

    if head in _PACK_INDEX:
        to, frm = ins.suffixes
        dfmt = _fmt_for(cfg, to)
        sfmt = _fmt_for(cfg, frm)
        lat(block, sfmt)
        latency = lat(block, dfmt)
        pair = _PACK_INDEX[head]
        if (2 * pair + 2) * dfmt.width > flen:
            raise ExecError(f"{ins.text}: element pair {pair} does not fit "
                            f"FLEN={flen}")
        (_, rd), (_, ra), (_, rb) = ops
        ta, tb, td = state.ftag(ra), state.ftag(rb), state.ftag(rd)

        def run_vfcpk():
            r, fl = simd.cast_and_pack(
                sfmt, dfmt, flen, rm,
                state.read_freg(ra, sfmt), state.read_freg(rb, sfmt),
                fregs[rd], pair)
            fregs[rd] = r
            state.fflags |= fl
            # read-modify-write of the destination vector
            acct(latency, (ta, tb, td), (td,))
        return run_vfcpk

    raise AsmError(f"unknown mnemonic {ins.text!r}")


def execute(state: MachineState, ins: Instruction) -> None:
    bind(state, ins)()


def run_program(state: MachineState, program, loop_count: int = 1):
    """Run a straight-line body loop_count times with zero loop overhead."""
    if loop_count < 1:
        raise ValueError("loop_count must be >= 1")
    instrs = assemble(program) if isinstance(program, str) else list(program)
    bound = [bind(state, i) for i in instrs]
    for _ in range(loop_count):
        for fn in bound:
            fn()
    return state, state.sb.report(), state.energy
