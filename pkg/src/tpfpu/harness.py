"""Mixed-precision dot-product case study and the ``tpfpu`` command line tool.

The case study accumulates element-wise products of two FP16 input streams
with five different kernels that trade precision against speed and energy:

    a   fmadd.h            FP16 multiply, FP16 accumulate
    b   fcvt + fmadd.s     widen both inputs, FP32 accumulate
    c   fmul.h + fadd.s    FP16 multiply, widen product, FP32 accumulate
    d   vfmul.h + fadd.s   SIMD form of c, two pairs per iteration
    e   fmacex.s.h         expanding multiply-accumulate, FP32 accumulate

Every kernel runs on the instruction-level machine model, so the reported
cycle counts and energies come from the same scoreboard and per-instruction
energy table as any other program.  Accuracy is judged against an exact
dot product computed with unbounded integers.
"""

from __future__ import annotations

import dataclasses
import json
import math
import random
import sys
from fractions import Fraction

import click

from . import arith, fpumodel, isa, oracle
from .arith import ExactReal
from .formats import (BUILTIN_FORMATS, FP8, FP16, FP16ALT, FP32, FP64,
                      FormatDesc, classify_bits, decode)

# ── input streams ────────────────────────────────────────────────────────────

# Exponent fields 11..18 give magnitudes in [2**-4, 2**4), so any product of
# two stream elements is below 2**8 and a sum of up to 2**15 of them stays
# comfortably inside the FP32 normal range.
_EXP_LO = 11
_EXP_HI = 19

# The quantized distribution draws each stream from a small per-stream
# codebook over a wider magnitude range, [2**-9, 2**4).  Repeated values make
# the product-rounding noise of the reduced-precision kernels add coherently
# across the stream, which keeps their accuracy floors well separated from
# the FP32-accumulation noise floor; fully independent draws leave the two
# floors close enough that the kernels' accuracy ranking flips noticeably
# often.
_QUANT_LEVELS = 12
_QUANT_EXP_LO = 6

DISTRIBUTIONS = ("quantized", "uniform", "signed")


def gen_streams(n: int, seed: int, distribution: str = "quantized"):
    """Two reproducible length-n lists of FP16 bit patterns.

    All values are finite positive normals with uniformly random exponent
    field and mantissa.  ``quantized`` (the default) first draws a small
    per-stream codebook and fills the stream from it, like heavily quantized
    sensor data; ``uniform`` draws every element of [2**-4, 2**4)
    independently; ``signed`` is ``uniform`` with random signs.
    """
    if n < 1:
        raise ValueError("need at least one element per stream")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}")
    rng = random.Random(seed)

    def value(exp_lo):
        return (rng.randrange(exp_lo, _EXP_HI) << FP16.man_bits) \
            | rng.randrange(1 << FP16.man_bits)

    def stream():
        if distribution == "quantized":
            book = [value(_QUANT_EXP_LO) for _ in range(_QUANT_LEVELS)]
            return [book[rng.randrange(_QUANT_LEVELS)] for _ in range(n)]
        if distribution == "signed":
            return [value(_EXP_LO) | (rng.randrange(2) << (FP16.width - 1))
                    for _ in range(n)]
        return [value(_EXP_LO) for _ in range(n)]

    return stream(), stream()


# ── exact reference ──────────────────────────────────────────────────────────

def real_of_bits(fmt: FormatDesc, bits: int) -> ExactReal:
    """Exact value of a bit pattern (NaN and infinity keep their kind)."""
    d = decode(fmt, bits)
    if d.cls.is_nan:
        return ExactReal("nan")
    if d.cls.is_inf:
        return ExactReal("inf", d.sign_neg)
    return _normalize(-d.significand if d.sign_neg else d.significand, d.exponent)


def _normalize(num: int, exp: int) -> ExactReal:
    if num == 0:
        return ExactReal("finite", False, 0, 0)
    mag = abs(num)
    shift = (mag & -mag).bit_length() - 1
    return ExactReal("finite", num < 0, mag >> shift, exp + shift)


def real_to_fraction(x: ExactReal) -> Fraction:
    if x.kind != "finite":
        raise ValueError(f"no rational value for {x.kind}")
    v = Fraction(x.significand) * Fraction(2) ** x.exponent
    return -v if x.sign_neg else v


def real_to_float(x: ExactReal) -> float:
    return float(real_to_fraction(x))


def precision_bits(x: ExactReal) -> int:
    """Significand width needed to store the value exactly (0 for zero)."""
    return x.significand.bit_length()


def exact_dot(a, b) -> ExactReal:
    """Exact sum of exact FP16 products; no rounding anywhere.

    The running sum is a single scaled integer, so the result is exact no
    matter how the terms cancel.
    """
    if len(a) != len(b):
        raise ValueError("streams differ in length")
    num = 0
    exp = 0
    for xa, xb in zip(a, b):
        da = decode(FP16, xa)
        db = decode(FP16, xb)
        if da.cls.is_nan or da.cls.is_inf or db.cls.is_nan or db.cls.is_inf:
            raise ValueError("streams must hold finite values")
        p = da.significand * db.significand
        if p == 0:
            continue
        pe = da.exponent + db.exponent
        ps = -p if da.sign_neg != db.sign_neg else p
        if num == 0:
            num, exp = ps, pe
        elif pe >= exp:
            num += ps << (pe - exp)
        else:
            num = (num << (exp - pe)) + ps
            exp = pe
    return _normalize(num, exp)


def rel_error(exact: ExactReal, got: ExactReal) -> Fraction:
    """|got - exact| / |exact| as an exact rational."""
    ev = real_to_fraction(exact)
    if ev == 0:
        raise ValueError("relative error undefined for a zero reference")
    return abs(real_to_fraction(got) - ev) / abs(ev)


def bits_correct(exact: ExactReal, got: ExactReal):
    """Shared leading bits between got and exact: round(-log2(rel error)).

    An exact match has no error to take a logarithm of and returns
    ``math.inf`` (rendered as "all" in reports).
    """
    rel = rel_error(exact, got)
    if rel == 0:
        return math.inf
    return math.floor(0.5 - math.log2(rel))


# ── kernel variants ──────────────────────────────────────────────────────────

@dataclasses.dataclass(frozen=True)
class KernelVariant:
    """One dot-product inner loop: assembly body plus its accumulator shape."""

    id: str
    summary: str
    body: str
    pairs_per_iter: int
    acc_format: FormatDesc

    @property
    def instructions_per_iter(self) -> int:
        return sum(1 for line in self.body.splitlines() if line.strip())

    @property
    def instructions_per_pair(self) -> float:
        return self.instructions_per_iter / self.pairs_per_iter


VARIANTS = {
    "a": KernelVariant(
        "a",
        "FP16 multiply-accumulate",
        "flh f1, @a\n"
        "flh f2, @b\n"
        "fmadd.h f3, f1, f2, f3\n",
        1,
        FP16,
    ),
    "b": KernelVariant(
        "b",
        "widen inputs, FP32 multiply-accumulate",
        "flh f1, @a\n"
        "flh f2, @b\n"
        "fcvt.s.h f4, f1\n"
        "fcvt.s.h f5, f2\n"
        "fmadd.s f3, f4, f5, f3\n",
        1,
        FP32,
    ),
    "c": KernelVariant(
        "c",
        "FP16 multiply, widen product, FP32 add",
        "flh f1, @a\n"
        "flh f2, @b\n"
        "fmul.h f4, f1, f2\n"
        "fcvt.s.h f5, f4\n"
        "fadd.s f3, f3, f5\n",
        1,
        FP32,
    ),
    "d": KernelVariant(
        "d",
        "SIMD FP16 multiply, widen halves, FP32 adds",
        "flw f1, @a\n"
        "flw f2, @b\n"
        "vfmul.h f4, f1, f2\n"
        "vfcvt.s.h.lo f5, f4\n"
        "fadd.s f3, f3, f5\n"
        "vfcvt.s.h.hi f6, f4\n"
        "fadd.s f3, f3, f6\n",
        2,
        FP32,
    ),
    "e": KernelVariant(
        "e",
        "expanding multiply-accumulate into FP32",
        "flh f1, @a\n"
        "flh f2, @b\n"
        "fmacex.s.h f3, f1, f2\n",
        1,
        FP32,
    ),
}


@dataclasses.dataclass
class VariantRun:
    """Raw outcome of one kernel on one machine: result plus cost counters."""

    variant: str
    result_bits: int
    result_format: FormatDesc
    instructions: int
    cycles: int
    energy_pj: float
    fflags: int

    @property
    def result(self) -> ExactReal:
        return real_of_bits(self.result_format, self.result_bits)


def run_variant(cfg: fpumodel.FpuConfig, variant: KernelVariant,
                a, b) -> VariantRun:
    """Execute one kernel over full streams on a fresh machine."""
    n = len(a)
    if len(b) != n:
        raise ValueError("streams differ in length")
    if n % variant.pairs_per_iter:
        raise ValueError(
            f"variant {variant.id} consumes {variant.pairs_per_iter} pairs "
            f"per iteration; stream length {n} does not divide"
        )
    st = isa.MachineState(cfg)
    sa = st.add_stream("a")
    sb = st.add_stream("b")
    for v in a:
        sa.append(v, 2)
    for v in b:
        sb.append(v, 2)
    st.write_freg(3, variant.acc_format, 0)
    isa.run_program(st, variant.body,
                    loop_count=n // variant.pairs_per_iter)
    timing = st.sb.report()
    return VariantRun(
        variant=variant.id,
        result_bits=st.read_freg(3, variant.acc_format),
        result_format=variant.acc_format,
        instructions=timing.count,
        cycles=timing.total_cycles,
        energy_pj=st.energy.total_pj,
        fflags=st.fflags,
    )


# ── case study ───────────────────────────────────────────────────────────────

@dataclasses.dataclass
class VariantRow:
    """Accuracy and cost of one kernel, judged against the exact result."""

    variant: str
    summary: str
    result_bits: int
    format_name: str
    value: float
    relative_error: float
    bits_correct: float
    rel_error_vs_fp16_cast: float
    instructions: int
    instructions_per_pair: float
    cycles: int
    energy_pj: float


@dataclasses.dataclass
class CaseStudyReport:
    preset: str
    n: int
    seed: int
    distribution: str
    exact: ExactReal
    exact_value: float
    exact_bits_needed: int
    fp16_cast_bits: int
    fp16_cast_value: float
    fp16_cast_relative_error: float
    fp16_cast_bits_correct: float
    rows: list

    def as_dict(self) -> dict:
        def num(x):
            return "all" if x == math.inf else x

        return {
            "preset": self.preset,
            "n": self.n,
            "seed": self.seed,
            "distribution": self.distribution,
            "exact_value": self.exact_value,
            "exact_bits_needed": self.exact_bits_needed,
            "cast_to_fp16": {
                "bits": f"0x{self.fp16_cast_bits:04X}",
                "value": self.fp16_cast_value,
                "relative_error": self.fp16_cast_relative_error,
                "bits_correct": num(self.fp16_cast_bits_correct),
            },
            "variants": [
                {
                    "variant": r.variant,
                    "summary": r.summary,
                    "result": f"0x{r.result_bits:04X}" if r.format_name == "fp16"
                    else f"0x{r.result_bits:08X}",
                    "format": r.format_name,
                    "value": r.value,
                    "relative_error": r.relative_error,
                    "bits_correct": num(r.bits_correct),
                    "rel_error_vs_fp16_cast": r.rel_error_vs_fp16_cast,
                    "instructions": r.instructions,
                    "instructions_per_pair": r.instructions_per_pair,
                    "cycles": r.cycles,
                    "energy_pj": round(r.energy_pj, 3),
                }
                for r in self.rows
            ],
        }


def run_case_study(preset: str = "ri5cy", n: int = 1024, seed: int = 1,
                   distribution: str = "quantized",
                   cfg: fpumodel.FpuConfig | None = None) -> CaseStudyReport:
    """Run all five kernels on one pair of streams and grade the results."""
    if cfg is None:
        cfg = fpumodel.get_preset(preset)
    a, b = gen_streams(n, seed, distribution)
    exact = exact_dot(a, b)
    if exact.significand == 0:
        raise ValueError("exact dot product is zero; pick another seed")

    cast_bits, _ = arith.round_exact(FP16, exact, arith.RNE)
    cast_real = real_of_bits(FP16, cast_bits)

    rows = []
    for variant in VARIANTS.values():
        run = run_variant(cfg, variant, a, b)
        got = run.result
        rows.append(VariantRow(
            variant=variant.id,
            summary=variant.summary,
            result_bits=run.result_bits,
            format_name=variant.acc_format.name,
            value=real_to_float(got),
            relative_error=float(rel_error(exact, got)),
            bits_correct=bits_correct(exact, got),
            rel_error_vs_fp16_cast=float(rel_error(cast_real, got))
            if cast_real.significand else math.inf,
            instructions=run.instructions,
            instructions_per_pair=run.instructions / n,
            cycles=run.cycles,
            energy_pj=run.energy_pj,
        ))
    return CaseStudyReport(
        preset=cfg.name,
        n=n,
        seed=seed,
        distribution=distribution,
        exact=exact,
        exact_value=real_to_float(exact),
        exact_bits_needed=precision_bits(exact),
        fp16_cast_bits=cast_bits,
        fp16_cast_value=real_to_float(cast_real),
        fp16_cast_relative_error=float(rel_error(exact, cast_real)),
        fp16_cast_bits_correct=bits_correct(exact, cast_real),
        rows=rows,
    )


# ── command line ─────────────────────────────────────────────────────────────

def _load_cfg(preset: str, config: str | None) -> fpumodel.FpuConfig:
    if config is not None:
        return fpumodel.load_config(config)
    return fpumodel.get_preset(preset)


def _parse_bits(fmt: FormatDesc, text: str) -> int:
    try:
        bits = int(text, 0)
    except ValueError:
        raise click.UsageError(f"operand {text!r} is not an integer") from None
    if not 0 <= bits < (1 << fmt.width):
        raise click.UsageError(
            f"operand {text} does not fit {fmt.name} ({fmt.width} bits)")
    return bits


def _fmt_by_name(name: str) -> FormatDesc:
    try:
        return BUILTIN_FORMATS[name]
    except KeyError:
        raise click.UsageError(
            f"unknown format {name!r}; pick from "
            f"{', '.join(BUILTIN_FORMATS)}") from None


def _hexbits(fmt: FormatDesc, bits: int) -> str:
    return f"0x{bits:0{fmt.width // 4}X}"


@click.group()
def cli():
    """Transprecision FPU toolkit.

    Evaluate single operations, run assembly programs on a machine model,
    reproduce the dot-product case study, and report per-format efficiency.
    """


_TWO_OPERAND = {"add": arith.add, "sub": arith.sub, "mul": arith.mul,
                "div": arith.div}
_THREE_OPERAND = {"fmadd": arith.fma, "fmsub": arith.fmsub,
                  "fnmadd": arith.fnmadd, "fnmsub": arith.fnmsub}
_OP_NAMES = (sorted(_TWO_OPERAND) + sorted(_THREE_OPERAND)
             + ["sqrt", "fmacex", "cvt", "min", "max", "eq", "lt", "le",
                "sgnj", "sgnjn", "sgnjx", "class"])


@cli.command("op")
@click.option("--fmt", "fmt_name", default="fp32", show_default=True,
              help="Operand format.")
@click.option("--to", "to_name", default=None,
              help="Destination format for cvt and fmacex.")
@click.option("--rm", default="rne", show_default=True,
              help="Rounding mode: rne, rtz, rdn, rup or rmm.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@click.argument("operation")
@click.argument("operands", nargs=-1)
def op_cmd(fmt_name, to_name, rm, as_json, operation, operands):
    """Evaluate one operation on raw bit patterns.

    OPERATION is one of: add sub mul div sqrt fmadd fmsub fnmadd fnmsub
    fmacex cvt min max eq lt le sgnj sgnjn sgnjx class.  OPERANDS are bit
    patterns (0x-prefixed or decimal) in the operand format.

    Example: tpfpu op --fmt fp16 --rm rne fmadd 0x3C00 0x3C00 0x3C00
    """
    fmt = _fmt_by_name(fmt_name)
    mode = arith.parse_rm(rm)

    def want(k, wide_last=None):
        # the accumulator of fmacex lives in the destination format
        if len(operands) != k:
            raise click.UsageError(f"{operation} takes {k} operand(s)")
        kinds = [fmt] * k
        if wide_last is not None:
            kinds[-1] = wide_last
        return [_parse_bits(f, t) for f, t in zip(kinds, operands)]

    out_fmt = fmt
    if operation in _TWO_OPERAND:
        bits, flags = _TWO_OPERAND[operation](fmt, mode, *want(2))
    elif operation in _THREE_OPERAND:
        bits, flags = _THREE_OPERAND[operation](fmt, mode, *want(3))
    elif operation == "sqrt":
        bits, flags = arith.sqrt(fmt, mode, *want(1))
    elif operation == "fmacex":
        if to_name is None:
            raise click.UsageError("fmacex needs --to DEST_FORMAT")
        out_fmt = _fmt_by_name(to_name)
        bits, flags = arith.fma_multi(fmt, out_fmt, mode,
                                      *want(3, wide_last=out_fmt))
    elif operation == "cvt":
        if to_name is None:
            raise click.UsageError("cvt needs --to DEST_FORMAT")
        out_fmt = _fmt_by_name(to_name)
        bits, flags = arith.cvt_fp_fp(fmt, out_fmt, mode, *want(1))
    elif operation in ("min", "max"):
        bits, flags = arith.minmax(fmt, operation, *want(2))
    elif operation in ("eq", "lt", "le"):
        val, flags = arith.cmp(fmt, operation, *want(2))
        text = f"{val} flags={arith.flags_str(flags)}"
        click.echo(json.dumps({"result": val, "flags": arith.flags_str(flags)})
                   if as_json else text)
        return
    elif operation in ("sgnj", "sgnjn", "sgnjx"):
        bits, flags = arith.sgnj(fmt, operation, *want(2)), 0
    elif operation == "class":
        mask = classify_bits(fmt, *want(1))
        click.echo(json.dumps({"result": f"0x{mask:03X}"}) if as_json
                   else f"0x{mask:03X}")
        return
    else:
        raise click.UsageError(
            f"unknown operation {operation!r}; pick from {' '.join(_OP_NAMES)}")

    if as_json:
        click.echo(json.dumps({"result": _hexbits(out_fmt, bits),
                               "flags": arith.flags_str(flags)}))
    else:
        click.echo(f"{_hexbits(out_fmt, bits)} flags={arith.flags_str(flags)}")


def _parse_stream_arg(text: str):
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise click.UsageError(f"stream spec {text!r} is not NAME=PATH")
    return name, path


@cli.command("run")
@click.option("--preset", default="ri5cy", show_default=True,
              help=f"Machine preset: {', '.join(fpumodel.PRESETS)}.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON machine description (overrides --preset).")
@click.option("--stream", "streams", multiple=True, metavar="NAME=PATH",
              help="Bind a named input stream to a raw binary file.")
@click.option("--out", "outs", multiple=True, metavar="NAME=PATH",
              help="After the run, write a stream's bytes to a file.")
@click.option("--loop", default=1, show_default=True,
              help="Execute the whole program this many times.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@click.argument("program", type=click.File("r"))
def run_cmd(preset, config_path, streams, outs, loop, as_json, program):
    """Run an assembly PROGRAM ('-' for stdin) and report cost and state."""
    cfg = _load_cfg(preset, config_path)
    st = isa.MachineState(cfg)
    for spec in streams:
        name, path = _parse_stream_arg(spec)
        with open(path, "rb") as fh:
            st.add_stream(name, fh.read())
    for spec in outs:
        name, _ = _parse_stream_arg(spec)
        if name not in st.streams:
            st.add_stream(name)
    text = program.read()
    isa.run_program(st, text, loop_count=loop)

    timing = st.sb.report()
    fregs = {f"f{i}": f"0x{v:0{cfg.flen // 4}X}"
             for i, v in enumerate(st.fregs) if v}
    xregs = {f"x{i}": f"0x{v:0{cfg.xlen // 4}X}"
             for i, v in enumerate(st.xregs) if v}
    if cfg.fp_in_xregs:
        fregs = {}
    for spec in outs:
        name, path = _parse_stream_arg(spec)
        if name not in st.streams:
            raise click.UsageError(f"no stream named {name!r} after the run")
        with open(path, "wb") as fh:
            fh.write(bytes(st.streams[name].data))

    if as_json:
        click.echo(json.dumps({
            "cycles": timing.total_cycles,
            "instructions": timing.count,
            "energy_pj": round(st.energy.total_pj, 4),
            "energy_by_mnemonic": {k: round(v, 4) for k, v
                                   in sorted(st.energy.by_mnemonic.items())},
            "fflags": arith.flags_str(st.fflags),
            "fregs": fregs,
            "xregs": xregs,
        }, indent=2))
        return
    click.echo(f"instructions {timing.count}")
    click.echo(f"cycles       {timing.total_cycles}")
    click.echo(f"energy       {st.energy.total_pj:.2f} pJ")
    click.echo(f"fflags       {arith.flags_str(st.fflags)}")
    for name, val in {**xregs, **fregs}.items():
        click.echo(f"{name:<12} {val}")


@cli.command("case-study")
@click.option("--preset", default="ri5cy", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", default=1024, show_default=True,
              help="Pairs per stream.")
@click.option("--seed", default=1, show_default=True)
@click.option("--distribution", default="quantized", show_default=True,
              type=click.Choice(DISTRIBUTIONS))
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
def case_study_cmd(preset, config_path, n, seed, distribution, as_json):
    """Accumulate two random FP16 streams with all five kernel variants."""
    cfg = _load_cfg(preset, config_path)
    rep = run_case_study(preset, n, seed, distribution, cfg=cfg)
    if as_json:
        click.echo(json.dumps(rep.as_dict(), indent=2))
        return

    def bits_text(x):
        return "all" if x == math.inf else f"{x:d}"

    click.echo(f"dot product of two FP16 streams, n={n}, seed={seed}, "
               f"machine {rep.preset}")
    click.echo(f"exact result   {rep.exact_value:.9g}  "
               f"(needs {rep.exact_bits_needed} bits)")
    click.echo(f"cast to FP16   0x{rep.fp16_cast_bits:04X}  "
               f"rel {rep.fp16_cast_relative_error:9.3g}  "
               f"bits {bits_text(rep.fp16_cast_bits_correct)}")
    click.echo()
    click.echo("variant   result        rel error  bits  instr/pair"
               "   cycles  energy/pJ")
    for r in rep.rows:
        width = 4 if r.format_name == "fp16" else 8
        click.echo(
            f"{r.variant:<7}   0x{r.result_bits:0{width}X}{'':{10 - width}}"
            f"  {r.relative_error:9.3g}  {bits_text(r.bits_correct):>4}"
            f"  {r.instructions_per_pair:10.1f}  {r.cycles:7d}"
            f"  {r.energy_pj:9.1f}")


@cli.command("report")
@click.option("--preset", default="ariane", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--freq", default=None, type=float,
              help="Override the clock in Hz.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
def report_cmd(preset, config_path, freq, as_json):
    """Per-format throughput and energy efficiency of one machine."""
    cfg = _load_cfg(preset, config_path)
    rows = fpumodel.efficiency_report(cfg, freq_hz=freq)
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return
    hz = freq if freq is not None else cfg.frequency_hz
    click.echo(f"machine {cfg.name} at {hz / 1e6:.0f} MHz")
    click.echo("mode    format   op          cycles  lanes  GFLOP/s"
               "  pJ/FLOP  GFLOP/s/W")
    for r in rows:
        click.echo(
            f"{r['mode']:<6}  {r['format']:<7}  {r['mnemonic']:<10}"
            f"  {r['latency']:6d}  {r['lanes']:5d}  {r['gflops']:7.2f}"
            f"  {r['pj_per_flop']:7.2f}  {r['gflops_per_watt']:9.2f}")


@cli.command("selftest")
@click.option("--quick", is_flag=True,
              help="Round-to-nearest-even only; roughly five times faster.")
def selftest_cmd(quick):
    """Exhaustively check FP8 arithmetic against the independent reference.

    Every two-operand operation runs over all 65536 input pairs (in every
    rounding mode unless --quick), sqrt and the conversions over all 256
    patterns, and the fused multiply-add over a large deterministic sample.
    """
    modes = (arith.RNE,) if quick else arith.ALL_MODES
    total = 0

    def check(label, count, fn):
        nonlocal total
        fn()
        total += count
        click.echo(f"{label:<28} {count:>8} cases ok")

    def sweep2(name, impl, ref):
        def go():
            for rm in modes:
                for ab in range(1 << 16):
                    a, b = ab >> 8, ab & 0xFF
                    got = impl(FP8, rm, a, b)
                    want = ref(FP8, rm, a, b)
                    if got != want:
                        raise click.ClickException(
                            f"{name} rm={arith.mode_name(rm)} "
                            f"a={a:#04x} b={b:#04x}: got {got}, want {want}")
        check(f"{name} ({len(modes)} modes)", (1 << 16) * len(modes), go)

    sweep2("add", arith.add, oracle.o_add)
    sweep2("sub", arith.sub, oracle.o_sub)
    sweep2("mul", arith.mul, oracle.o_mul)
    sweep2("div", arith.div, oracle.o_div)

    def go_sqrt():
        for rm in modes:
            for a in range(256):
                got = arith.sqrt(FP8, rm, a)
                want = oracle.o_sqrt(FP8, rm, a)
                if got != want:
                    raise click.ClickException(
                        f"sqrt rm={arith.mode_name(rm)} a={a:#04x}: "
                        f"got {got}, want {want}")
    check(f"sqrt ({len(modes)} modes)", 256 * len(modes), go_sqrt)

    def go_cmp():
        for op in ("eq", "lt", "le"):
            for ab in range(1 << 16):
                a, b = ab >> 8, ab & 0xFF
                if arith.cmp(FP8, op, a, b) != oracle.o_cmp(FP8, op, a, b):
                    raise click.ClickException(f"{op} {a:#04x} {b:#04x}")
        for op in ("min", "max"):
            for ab in range(1 << 16):
                a, b = ab >> 8, ab & 0xFF
                if arith.minmax(FP8, op, a, b) != oracle.o_minmax(FP8, op, a, b):
                    raise click.ClickException(f"{op} {a:#04x} {b:#04x}")
    check("compare and min/max", 5 * (1 << 16), go_cmp)

    def go_cvt():
        others = (FP16, FP16ALT, FP32, FP64)
        for rm in modes:
            for dst in others:
                for a in range(256):
                    got = arith.cvt_fp_fp(FP8, dst, rm, a)
                    want = oracle.o_cvt_fp_fp(FP8, dst, rm, a)
                    if got != want:
                        raise click.ClickException(
                            f"cvt fp8->{dst.name} {a:#04x}: "
                            f"got {got}, want {want}")
    check(f"widening casts ({len(modes)} modes)", 4 * 256 * len(modes), go_cvt)

    def go_fma():
        rng = random.Random(0xF8)
        per_mode = 200_000 if quick else 50_000
        for rm in modes:
            for _ in range(per_mode):
                a, b, c = (rng.randrange(256) for _ in range(3))
                got = arith.fma(FP8, rm, a, b, c)
                want = oracle.o_fma(FP8, rm, a, b, c)
                if got != want:
                    raise click.ClickException(
                        f"fma rm={arith.mode_name(rm)} "
                        f"{a:#04x} {b:#04x} {c:#04x}: got {got}, want {want}")
        return per_mode * len(modes)
    n_fma = 200_000 if quick else 250_000
    check("fused multiply-add sample", n_fma, go_fma)

    click.echo(f"selftest passed: {total} cases")


@cli.command("config")
@click.option("--preset", default="ariane", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def config_cmd(preset, config_path):
    """Print a machine description as JSON (a template for --config)."""
    cfg = _load_cfg(preset, config_path)
    click.echo(json.dumps(fpumodel.config_to_dict(cfg), indent=2))


def cli_main(args=None) -> int:
    """Entry point returning an exit code instead of raising SystemExit."""
    try:
        cli.main(args=args, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except (fpumodel.FpuError, isa.AsmError, isa.ExecError, ValueError,
            OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
