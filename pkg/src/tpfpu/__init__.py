"""Transprecision floating-point emulation library and FPU simulator.

Subpackages/modules:

- ``formats``: parametric binary FP formats and the bit-level codec
- ``arith``: exact-significand arithmetic with single IEEE rounding
- ``simd``: FLEN registers, NaN-boxing, packed-vector dispatch
- ``fpumodel``: block/slice architecture model, latency and energy accounting
- ``isa``: mnemonic-level assembly, decoder and interpreter
- ``harness``: CLI and the mixed-precision dot-product case study
- ``oracle``: independent exact-rational reference model for verification
"""

__version__ = "0.1.0"
