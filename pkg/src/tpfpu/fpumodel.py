"""FPU architecture model: blocks, slices, lanes, latency, timing, energy.

The unit is organized in four operation-group blocks (addmul, divsqrt, comp,
conv).  Each block is implemented per format as parallel slices (own datapath
and pipeline depth per format), as one merged multi-format slice (shared
pipeline, one latency), or disabled.  Lane counts follow the datapath width
w_fpu; energy is a per-instruction lookup table.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from .formats import (FP16, FP16ALT, FP32, FP64, FP8, BUILTIN_FORMATS,
                      FormatDesc)

__all__ = [
    "FpuError", "UnsupportedOperation", "EnergyLookupError",
    "BLOCKS", "FMT_SUFFIX", "suffix_of", "format_for_suffix",
    "BlockConfig", "FpuConfig", "divsqrt_latency", "merged_lane_widths",
    "block_lane_widths", "lanes_for", "latency_of", "energy_of",
    "Scoreboard", "TimingReport", "EnergyReport", "energy_report",
    "efficiency_report", "build_ri5cy", "build_ariane", "PRESETS",
    "get_preset", "config_to_dict", "config_from_dict", "load_config",
]

BLOCKS = ("addmul", "divsqrt", "comp", "conv")

FMT_SUFFIX = {
    "fp64": "d", "fp32": "s", "fp16": "h", "fp16alt": "ah", "fp8": "b",
}


class FpuError(Exception):
    pass


class UnsupportedOperation(FpuError):
    """Operation hits a disabled block or a format absent from it."""


class EnergyLookupError(FpuError):
    """No energy entry for a mnemonic; entries are never implied."""


def suffix_of(fmt: FormatDesc) -> str:
    return FMT_SUFFIX.get(fmt.name, fmt.name)


def format_for_suffix(cfg: "FpuConfig", sfx: str) -> FormatDesc:
    for f in cfg.formats:
        if suffix_of(f) == sfx:
            return f
    raise UnsupportedOperation(f"no enabled format with suffix .{sfx}")


@dataclass(frozen=True)
class BlockConfig:
    """One operation-group block: implementation style and per-format depth.

    lane_widths overrides the generic merged lane layout; the shipped preset
    conversion slices use custom layouts sized for cast-and-pack.  lanes pins
    the reported per-format lane count where the hardware bookkeeping differs
    from the geometric rule (a merged width class is reported once, formats
    riding wider lanes as 0).
    """
    impl: str                       # "parallel" | "merged" | "disabled"
    cycles: Mapping[str, int]
    lane_widths: tuple[int, ...] | None = None
    lanes: Mapping[str, int] | None = None

    def __post_init__(self):
        if self.impl not in ("parallel", "merged", "disabled"):
            raise ValueError(f"unknown block impl {self.impl!r}")
        object.__setattr__(self, "cycles", dict(self.cycles))
        if self.lanes is not None:
            object.__setattr__(self, "lanes", dict(self.lanes))


@dataclass(frozen=True)
class FpuConfig:
    name: str
    w_fpu: int
    flen: int
    xlen: int
    fp_in_xregs: bool
    formats: tuple[FormatDesc, ...]
    blocks: Mapping[str, BlockConfig]
    energy: Mapping[str, float]
    frequency_hz: float
    divider_pre_post: int = 3
    divider_bits_per_cycle: int = 3

    def __post_init__(self):
        object.__setattr__(self, "formats", tuple(self.formats))
        object.__setattr__(self, "blocks", dict(self.blocks))
        object.__setattr__(self, "energy", dict(self.energy))
        for b in self.blocks:
            if b not in BLOCKS:
                raise ValueError(f"unknown block {b!r}")
        for mn, pj in self.energy.items():
            if pj < 0:
                raise ValueError(f"negative energy for {mn}")
        for f in self.formats:
            if f.width > self.flen:
                raise ValueError(f"{f.name} wider than FLEN={self.flen}")

    def format(self, name: str) -> FormatDesc:
        for f in self.formats:
            if f.name == name:
                return f
        raise UnsupportedOperation(f"format {name!r} not enabled")

    def has_format(self, name: str) -> bool:
        return any(f.name == name for f in self.formats)


def divsqrt_latency(fmt: FormatDesc, pre_post: int = 3,
                    bits_per_cycle: int = 3) -> int:
    """Iterative divider: fixed pre/post cycles plus the cycles needed to
    produce the full significand (hidden bit included) at the configured
    bits-per-cycle rate."""
    return pre_post + math.ceil((fmt.man_bits + 1) / bits_per_cycle)


def merged_lane_widths(w_fpu: int, widths) -> tuple[int, ...]:
    """Generic merged-slice layout: as many lanes as the narrowest member
    format allows; lane i is as wide as the widest member fitting w_fpu/i."""
    ws = sorted(set(widths), reverse=True)
    if not ws:
        return ()
    k = w_fpu // ws[-1]
    out = []
    for i in range(1, k + 1):
        fit = [w for w in ws if w <= w_fpu // i]
        if not fit:
            break
        out.append(fit[0])
    return tuple(out)


def _block(cfg: FpuConfig, block: str) -> BlockConfig:
    bc = cfg.blocks.get(block)
    if bc is None or bc.impl == "disabled":
        raise UnsupportedOperation(f"block {block} is disabled on {cfg.name}")
    return bc


def block_lane_widths(cfg: FpuConfig, block: str) -> tuple[int, ...]:
    """Lane layout of a merged slice (explicit override or generic formula)."""
    bc = _block(cfg, block)
    if bc.impl != "merged":
        raise ValueError(f"block {block} is not merged")
    if bc.lane_widths is not None:
        return bc.lane_widths
    return merged_lane_widths(
        cfg.w_fpu, [cfg.format(n).width for n in bc.cycles])


def lanes_for(cfg: FpuConfig, block: str, fmt: FormatDesc) -> int:
    """Reported lane count for fmt in this block.

    Pinned counts take precedence; otherwise parallel slices get one lane
    per format width in w_fpu and merged slices count every lane wide
    enough to carry the format.
    """
    bc = _block(cfg, block)
    if fmt.name not in bc.cycles:
        raise UnsupportedOperation(
            f"{fmt.name} not supported by {block} on {cfg.name}")
    if bc.lanes is not None and fmt.name in bc.lanes:
        return bc.lanes[fmt.name]
    if bc.impl == "parallel":
        return cfg.w_fpu // fmt.width
    return sum(1 for w in block_lane_widths(cfg, block) if w >= fmt.width)


def latency_of(cfg: FpuConfig, block: str, fmt: FormatDesc) -> int:
    """Pipeline depth (or iteration count for divsqrt) for an operation.

    A merged pipelined slice runs at the depth of its deepest member format;
    the iterative divsqrt unit is not a pipeline and keeps format-specific
    cycle counts even when merged.
    """
    bc = _block(cfg, block)
    if fmt.name not in bc.cycles:
        raise UnsupportedOperation(
            f"{fmt.name} not supported by {block} on {cfg.name}")
    if bc.impl == "merged" and block != "divsqrt":
        return max(bc.cycles.values())
    return bc.cycles[fmt.name]


def energy_of(cfg: FpuConfig, mnemonic: str) -> float:
    try:
        return cfg.energy[mnemonic]
    except KeyError:
        raise EnergyLookupError(
            f"no energy entry for {mnemonic!r} in config {cfg.name}"
        ) from None


# ---------------------------------------------------------------------------
# Timing

@dataclass
class TimingReport:
    total_cycles: int = 0
    instructions: list = field(default_factory=list)  # (mnemonic, issue, done)

    @property
    def count(self) -> int:
        return len(self.instructions)


@dataclass
class EnergyReport:
    total_pj: float = 0.0
    by_mnemonic: Counter = field(default_factory=Counter)

    def add(self, mnemonic: str, pj: float) -> None:
        self.total_pj += pj
        self.by_mnemonic[mnemonic] += pj


class Scoreboard:
    """Issue/complete bookkeeping under the pipeline contract.

    One instruction may issue per cycle.  An instruction waits at issue until
    every source register is available (read-after-write interlock) and, for
    divsqrt, until the blocking unit is free.  FPU results compete for a
    single retire port: at most one completes per cycle, later arrivals slip
    to the next free cycle in arrival order.  Loads, stores and integer moves
    bypass the FPU retire port and their results are available one cycle
    after issue.
    """

    def __init__(self):
        self.next_issue = 0
        self.ready: dict = {}
        self.divsqrt_free = 0
        self.retired: set = set()
        self.records: list = []

    def issue(self, mnemonic: str, latency: int, srcs, dsts, *,
              blocking: bool = False, fpu_port: bool = True):
        c = self.next_issue
        for s in srcs:
            r = self.ready.get(s, 0)
            if r > c:
                c = r
        if blocking and self.divsqrt_free > c:
            c = self.divsqrt_free
        done = c + latency
        if fpu_port:
            while done in self.retired:
                done += 1
            self.retired.add(done)
        if blocking:
            self.divsqrt_free = c + latency
        for d in dsts:
            self.ready[d] = done
        self.next_issue = c + 1
        self.records.append((mnemonic, c, done))
        return c, done

    def report(self) -> TimingReport:
        total = max((d for _, _, d in self.records), default=0)
        return TimingReport(total_cycles=total,
                            instructions=list(self.records))


def energy_report(cfg: FpuConfig, mnemonics) -> EnergyReport:
    rep = EnergyReport()
    for mn in mnemonics:
        rep.add(mn, energy_of(cfg, mn))
    return rep


# ---------------------------------------------------------------------------
# Efficiency reporting

def efficiency_report(cfg: FpuConfig, freq_hz: float | None = None) -> list:
    """FMA performance/efficiency rows per format and mode.

    One FMA counts as 2 FLOP.  A fully pipelined slice sustains one
    instruction per cycle, so GFLOP/s = lanes * 2 * f; pJ/FLOP divides the
    per-instruction energy by the FLOP count; GFLOP/s/W = 1000 / (pJ/FLOP).
    """
    f = cfg.frequency_hz if freq_hz is None else freq_hz
    rows = []

    def row(fmt, mode, lanes, mnemonic):
        pj = energy_of(cfg, mnemonic)
        pj_flop = pj / (2 * lanes)
        gflops = lanes * 2 * f / 1e9
        rows.append({
            "format": fmt.name, "mode": mode,
            "latency": latency_of(cfg, "addmul", fmt), "lanes": lanes,
            "mnemonic": mnemonic,
            "gflops": gflops,
            "pj_per_flop": pj_flop,
            "gflops_per_watt": 1000.0 / pj_flop,
        })

    for fmt in cfg.formats:
        row(fmt, "scalar", 1, f"fmadd.{suffix_of(fmt)}")
    for fmt in cfg.formats:
        lanes = lanes_for(cfg, "addmul", fmt)
        if lanes >= 2:
            row(fmt, "vector", lanes, f"vfmac.{suffix_of(fmt)}")
    return rows


# ---------------------------------------------------------------------------
# Shipped presets

_FMA_RATIOS = {
    "fadd": 0.62, "fsub": 0.62, "fmul": 0.55,
    "fmadd": 1.0, "fmsub": 1.0, "fnmadd": 1.0, "fnmsub": 1.0,
    "fmin": 0.12, "fmax": 0.12,
    "fsgnj": 0.06, "fsgnjn": 0.06, "fsgnjx": 0.06,
    "feq": 0.10, "flt": 0.10, "fle": 0.10,
    "fclass": 0.05,
    "fdiv": 2.2, "fsqrt": 2.0,
}

_VEC_RATIOS = {
    "vfadd": 0.62, "vfsub": 0.62, "vfmul": 0.55, "vfmac": 1.0,
    "vfmin": 0.12, "vfmax": 0.12,
    "vfsgnj": 0.06, "vfsgnjn": 0.06, "vfsgnjx": 0.06,
}

# Anchor energies in pJ per instruction for the 64-bit preset.  The FMA
# family entries are model anchors; everything else is scaled from them by
# the ratio tables above or the cast rules below.
_ARIANE_SCALAR_FMA = {"d": 26.7, "s": 9.44, "h": 4.96, "ah": 4.36, "b": 2.54}
_ARIANE_VECTOR_FMA = {"s": 20.0, "h": 16.08, "ah": 13.76, "b": 12.80}

# Scalar fp-fp cast cost by the wider of the two widths; converting to a
# wider format toggles less of the datapath and is cheaper.
_CAST_BASE = {64: 7.0, 32: 4.9, 16: 3.2, 8: 3.2}
_WIDEN_FACTOR = 0.8
_INT_CAST_FACTOR = 0.9
_PACK_FACTOR = 1.3

_MEM_MNEMONICS = ("flb", "flh", "flw", "fld", "fsb", "fsh", "fsw", "fsd", "li")


def _cast_pj(wa: int, wb: int) -> float:
    base = _CAST_BASE[max(wa, wb)]
    return base * _WIDEN_FACTOR if wb > wa else base


def _vcast_pj(wa: int, wb: int) -> float:
    # vector conversions share merged lanes; slightly cheaper for narrow pairs
    return 4.9 if max(wa, wb) >= 32 else 4.43


def _energy_table(formats, scalar_fma, vector_fma, vec_lanes,
                  cast_scale: float = 1.0) -> dict:
    e: dict[str, float] = {}
    for fmt in formats:
        sfx = suffix_of(fmt)
        fma = scalar_fma[sfx]
        for op, ratio in _FMA_RATIOS.items():
            e[f"{op}.{sfx}"] = round(fma * ratio, 4)
        if sfx in vector_fma and vec_lanes(fmt) >= 2:
            vm = vector_fma[sfx]
            for op, ratio in _VEC_RATIOS.items():
                e[f"{op}.{sfx}"] = round(vm * ratio, 4)
    # conversions: every enabled format pair plus the int casts
    for fa in formats:
        for fb in formats:
            if fa is fb:
                continue
            e[f"fcvt.{suffix_of(fb)}.{suffix_of(fa)}"] = round(
                cast_scale * _cast_pj(fa.width, fb.width), 4)
            if vec_lanes(fa if fa.width <= fb.width else fb) >= 2:
                e[f"vfcvt.{suffix_of(fb)}.{suffix_of(fa)}"] = round(
                    cast_scale * _vcast_pj(fa.width, fb.width), 4)
            if vec_lanes(fb) >= 2:
                e[f"vfcpk.{suffix_of(fb)}.{suffix_of(fa)}"] = round(
                    cast_scale * _PACK_FACTOR * _cast_pj(fa.width, fb.width),
                    4)
        for isfx, iw in (("w", 32), ("wu", 32), ("l", 64), ("lu", 64)):
            pj = round(cast_scale * _INT_CAST_FACTOR
                       * _CAST_BASE[max(fa.width, iw)], 4)
            e[f"fcvt.{isfx}.{suffix_of(fa)}"] = pj
            e[f"fcvt.{suffix_of(fa)}.{isfx}"] = pj
    for mn in _MEM_MNEMONICS:
        e[mn] = 0.0
    return e


def build_ariane() -> FpuConfig:
    formats = (FP64, FP32, FP16, FP16ALT, FP8)
    blocks = {
        "addmul": BlockConfig("parallel", {
            "fp64": 4, "fp32": 3, "fp16": 3, "fp16alt": 3, "fp8": 2}),
        "divsqrt": BlockConfig("merged", {
            f.name: divsqrt_latency(f) for f in formats},
            lane_widths=(64,),  # scalar-only iterative unit
            lanes={"fp64": 1, "fp32": 0, "fp16": 0, "fp16alt": 0, "fp8": 0}),
        "comp": BlockConfig("parallel", {f.name: 1 for f in formats}),
        # narrower formats ride the wider conversion lanes; each width class
        # is reported once, sharers as 0
        "conv": BlockConfig("merged", {f.name: 2 for f in formats},
                            lane_widths=(64, 64, 16, 16, 8, 8, 8, 8),
                            lanes={"fp64": 2, "fp32": 0, "fp16": 2,
                                   "fp16alt": 0, "fp8": 4}),
    }
    energy = _energy_table(formats, _ARIANE_SCALAR_FMA, _ARIANE_VECTOR_FMA,
                           lambda f: 64 // f.width)
    # no expanding FMA on this preset (parallel ADDMUL), so no entry for it
    return FpuConfig(
        name="ariane", w_fpu=64, flen=64, xlen=64, fp_in_xregs=False,
        formats=formats, blocks=blocks, energy=energy, frequency_hz=923e6)


def build_ri5cy() -> FpuConfig:
    formats = (FP32, FP16, FP16ALT)
    blocks = {
        "addmul": BlockConfig("merged",
                              {"fp32": 1, "fp16": 1, "fp16alt": 1}),
        "divsqrt": BlockConfig("disabled", {}),
        "comp": BlockConfig("parallel",
                            {"fp32": 1, "fp16": 1, "fp16alt": 1}),
        "conv": BlockConfig("merged", {"fp32": 1, "fp16": 1, "fp16alt": 1},
                            lane_widths=(32, 32)),  # cast-and-pack from FP32
    }
    # scaled from the 64-bit preset anchors so that the FP32 FMA lands on
    # the 3.9 pJ single-cycle figure; vector entries halve again for the
    # two-lane datapath
    scale = 3.9 / _ARIANE_SCALAR_FMA["s"]
    scalar_fma = {s: round(_ARIANE_SCALAR_FMA[s] * scale, 4)
                  for s in ("s", "h", "ah")}
    vector_fma = {s: round(_ARIANE_VECTOR_FMA[s] * scale * 0.5, 4)
                  for s in ("h", "ah")}
    energy = _energy_table(formats, scalar_fma, vector_fma,
                           lambda f: 32 // f.width, cast_scale=scale)
    energy["fmacex.s.h"] = energy["fmadd.s"]
    return FpuConfig(
        name="ri5cy", w_fpu=32, flen=32, xlen=32, fp_in_xregs=True,
        formats=formats, blocks=blocks, energy=energy, frequency_hz=370e6)


PRESETS = {"ri5cy": build_ri5cy, "ariane": build_ariane}


def get_preset(name: str) -> FpuConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise FpuError(f"unknown preset {name!r}; have {sorted(PRESETS)}") \
            from None


# ---------------------------------------------------------------------------
# JSON config round-trip

def config_to_dict(cfg: FpuConfig) -> dict:
    return {
        "name": cfg.name,
        "w_fpu": cfg.w_fpu,
        "flen": cfg.flen,
        "xlen": cfg.xlen,
        "fp_in_xregs": cfg.fp_in_xregs,
        "formats": [
            {"name": f.name, "exp_bits": f.exp_bits, "man_bits": f.man_bits}
            for f in cfg.formats],
        "blocks": {
            b: {
                "impl": bc.impl,
                "cycles": dict(bc.cycles),
                **({"lane_widths": list(bc.lane_widths)}
                   if bc.lane_widths is not None else {}),
                **({"lanes": dict(bc.lanes)}
                   if bc.lanes is not None else {}),
            } for b, bc in cfg.blocks.items()},
        "energy": dict(cfg.energy),
        "frequency_hz": cfg.frequency_hz,
    }


def config_from_dict(d: dict) -> FpuConfig:
    formats = []
    for f in d["formats"]:
        if isinstance(f, str):
            formats.append(BUILTIN_FORMATS[f])
        else:
            name = f["name"]
            if name in BUILTIN_FORMATS:
                builtin = BUILTIN_FORMATS[name]
                if (f["exp_bits"], f["man_bits"]) != (builtin.exp_bits,
                                                      builtin.man_bits):
                    raise ValueError(f"format {name} redefines a builtin")
                formats.append(builtin)
            else:
                formats.append(FormatDesc(name, f["exp_bits"], f["man_bits"]))
    blocks = {}
    for b, bc in d.get("blocks", {}).items():
        lw = bc.get("lane_widths")
        ln = bc.get("lanes")
        blocks[b] = BlockConfig(bc["impl"], dict(bc.get("cycles", {})),
                                tuple(lw) if lw is not None else None,
                                dict(ln) if ln is not None else None)
    flen = d["flen"]
    return FpuConfig(
        name=d.get("name", "custom"),
        w_fpu=d["w_fpu"],
        flen=flen,
        xlen=d.get("xlen", flen),
        fp_in_xregs=d.get("fp_in_xregs", False),
        formats=tuple(formats),
        blocks=blocks,
        energy=dict(d.get("energy", {})),
        frequency_hz=d.get("frequency_hz", 1e9),
    )


def load_config(path: str) -> FpuConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
