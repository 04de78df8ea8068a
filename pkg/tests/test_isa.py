"""Assembler and executor: parsing, boxing, streams, flags, timing."""

import pytest

from tpfpu import isa, fpumodel, arith


def ari():
    return isa.MachineState(fpumodel.get_preset("ariane"))


def ri5():
    return isa.MachineState(fpumodel.get_preset("ri5cy"))


def run(st, text, loop=1):
    isa.run_program(st, text, loop_count=loop)
    return st


class TestAssembler:
    def test_basic_parse(self):
        prog = isa.assemble("fadd.h f1, f2, f3\nflw f4, @in\nli x1, -5\n")
        assert len(prog) == 3

    def test_comments_and_blanks(self):
        prog = isa.assemble("# note\n\nfadd.h f1, f2, f3 # after\n; other\nfsub.h f1, f2, f3 ; after\n")
        assert len(prog) == 2

    def test_rounding_mode_suffix_operand(self):
        prog = isa.assemble("fadd.h f1, f2, f3, rtz\n")
        assert len(prog) == 1

    def test_rejects(self):
        for text in ("frobnicate f1, f2\n",
                     "fadd.h f1, f2\n",        # arity
                     "fadd.h f1, f2, x3\n",    # wrong register file
                     "li f1, 3\n",
                     "fadd f1, f2, f3\n",      # missing suffix
                     "flh.h f1, @a\n",         # loads take no suffix
                     "fcvt.h f1, f2\n",        # cvt needs two suffixes
                     "fadd.h f99, f0, f0\n"):  # register index
            with pytest.raises(isa.AsmError):
                isa.assemble(text)

    def test_error_carries_line_number(self):
        with pytest.raises(isa.AsmError, match="line 2"):
            isa.assemble("fadd.h f1, f2, f3\nbogus\n")


class TestExecution:
    def test_unknown_suffix_fails_at_execute(self):
        with pytest.raises(isa.ExecError, match="suffix"):
            run(ari(), "fadd.q f1, f2, f3\n")

    def test_disabled_block_fails(self):
        with pytest.raises(isa.ExecError, match="divsqrt"):
            run(ri5(), "fdiv.s f1, f0, f0\n")

    def test_li_and_cvt(self):
        st = run(ari(), "li x1, 7\nfcvt.h.w f1, x1\nfcvt.w.h x2, f1\n")
        assert st.xregs[2] == 7
        assert st.fregs[1] == 0xFFFFFFFFFFFF4700

    def test_li_negative_wraps(self):
        st = run(ari(), "li x1, -5\n")
        assert st.xregs[1] == (1 << 64) - 5
        st = run(ri5(), "li x1, -5\n")
        assert st.xregs[1] == (1 << 32) - 5

    def test_nan_boxing_written_and_checked(self):
        st = run(ari(), "li x1, 1\nfcvt.s.w f1, x1\n")
        assert st.fregs[1] == 0xFFFFFFFF3F800000
        # operation units do not check boxing: a half-precision read of the
        # float-boxed register just takes the low bits (here +0.0)
        isa.run_program(st, "fadd.h f2, f1, f1\n")
        assert st.fregs[2] & 0xFFFF == 0x0000

    def test_strict_boxing_mode(self):
        st = isa.MachineState(fpumodel.get_preset("ariane"),
                              strict_boxing=True)
        run(st, "li x1, 1\nfcvt.s.w f1, x1\nfadd.h f2, f1, f1\n")
        # improper box reads as canonical NaN under strict checking
        assert st.fregs[2] & 0xFFFF == 0x7E00

    def test_fflags_accrue_and_clear(self):
        st = run(ari(), "li x1, 1\nli x2, 3\nfcvt.s.w f1, x1\nfcvt.s.w f2, x2\nfdiv.s f3, f1, f2\n")
        assert isa.read_fflags(st) == arith.NX
        isa.clear_fflags(st)
        assert isa.read_fflags(st) == 0

    def test_streams_load_store(self):
        st = ari()
        st.add_stream("a", b"\x00\x3c\x00\x40")  # 1.0, 2.0
        st.add_stream("out")
        run(st, "flh f1, @a\nflh f2, @a\nfadd.h f3, f1, f2\nfsh f3, @out\n")
        assert bytes(st.streams["out"].data) == b"\x00\x42"  # 3.0

    def test_stream_exhaustion(self):
        st = ari()
        st.add_stream("a", b"\x00\x3c")
        with pytest.raises(isa.ExecError, match="exhausted"):
            run(st, "flh f1, @a\nflh f2, @a\n")

    def test_undefined_stream(self):
        with pytest.raises(isa.ExecError, match="stream"):
            run(ari(), "flh f1, @nope\n")

    def test_loop_count_continues_streams(self):
        st = ari()
        st.add_stream("a", b"\x00\x3c\x00\x40")
        run(st, "flh f1, @a\n", loop=2)
        assert st.fregs[1] & 0xFFFF == 0x4000  # second iteration read 2.0

    def test_fclass_and_compare_write_xregs(self):
        st = ari()
        run(st, "li x1, 1\nfcvt.h.w f1, x1\nfclass.h x2, f1\nfeq.h x3, f1, f1\nflt.h x4, f1, f1\n")
        assert st.xregs[2] == 0x040
        assert (st.xregs[3], st.xregs[4]) == (1, 0)

    def test_per_instruction_rounding_mode(self):
        st = run(ari(), "li x1, 10\nfcvt.s.w f1, x1\nfsqrt.s f2, f1, rtz\nfsqrt.s f3, f1\n")
        assert st.fregs[3] - st.fregs[2] == 1  # RTZ truncates one ulp below RNE

    def test_ri5cy_shares_register_file(self):
        st = run(ri5(), "li x1, 5\nfcvt.h.w f1, x1\n")
        # f1 and x1 are the same storage on this machine
        assert st.xregs[1] == 0xFFFF4500
        st2 = run(ari(), "li x1, 5\nfcvt.h.w f1, x1\n")
        assert st2.xregs[1] == 5


class TestVectors:
    # a 32-bit datapath packs exactly two FP16 lanes, which keeps the
    # expected registers easy to read; the wider machine only adds lanes
    def test_vfadd_lanes(self):
        st = ri5()
        st.add_stream("a", b"\x00\x3c\x00\x40\x00\x42\x00\x44")
        run(st, "flw f1, @a\nflw f2, @a\nvfadd.h f3, f1, f2\n")
        # low lane 1.0+3.0 = 4.0, high lane 2.0+4.0 = 6.0
        assert st.fregs[3] == 0x46004400

    def test_wide_machine_fills_every_lane(self):
        st = ari()
        st.add_stream("a", b"\x00\x3c\x00\x40\x00\x42\x00\x44")
        run(st, "flw f1, @a\nflw f2, @a\nvfadd.h f3, f1, f2\n")
        # the two loaded lanes add; the boxing lanes are NaN and stay NaN
        assert st.fregs[3] == 0x7E007E0046004400

    def test_vector_needs_simd_capable_machine(self):
        # fp32 vectors do not fit a 32-bit datapath
        with pytest.raises(isa.ExecError):
            run(ri5(), "vfadd.s f1, f2, f3\n")

    def test_replicate_variant(self):
        st = ri5()
        st.add_stream("a", b"\x00\x3c\x00\x40\x00\x42")
        run(st, "flw f1, @a\nflh f2, @a\nvfadd.r.h f3, f1, f2\n")
        # scalar lane of f2 is replicated across lanes: 1+3, 2+3
        assert st.fregs[3] == 0x45004400

    def test_vfcvt_halves(self):
        st = ri5()
        st.add_stream("a", b"\x00\x3c\x00\x40")
        run(st, "flw f1, @a\nvfcvt.s.h.lo f2, f1\nvfcvt.s.h.hi f3, f1\n")
        assert st.fregs[2] == 0x3F800000
        assert st.fregs[3] == 0x40000000

    def test_vfcpk_pairs(self):
        st = ri5()
        run(st, "li x1, 1\nli x2, -3\nfcvt.s.w f4, x1\nfcvt.s.w f5, x2\nvfcpka.h.s f6, f4, f5\n")
        assert st.fregs[6] == 0xC2003C00

    def test_vfmac(self):
        st = ri5()
        st.add_stream("a", b"\x00\x3c\x00\x40\x00\x42\x00\x44")
        run(st, "flw f1, @a\nflw f2, @a\nli x3, 0\nvfmac.h f3, f1, f2\n")
        # f3 lanes cleared to zero by li, then accumulate the products
        assert st.fregs[3] == 0x48004200  # 1*3=3, 2*4=8


class TestTiming:
    def test_cycle_accounting_dependencies(self):
        st = run(ari(), "fadd.d f1, f0, f0\nfadd.d f2, f0, f0\n")
        assert st.sb.report().total_cycles == 5  # pipelined, 1/cycle issue
        st = run(ari(), "fadd.d f1, f0, f0\nfadd.d f2, f1, f1\n")
        assert st.sb.report().total_cycles == 8  # RAW stall

    def test_blocking_divider_timing(self):
        st = run(ari(), "fdiv.d f1, f0, f0\nfdiv.d f2, f0, f0\n")
        rep = st.sb.report()
        assert rep.total_cycles == 42
        assert rep.instructions[1][1] == 21  # second divide issues when free

    def test_energy_accrual(self):
        st = run(ari(), "fadd.d f1, f0, f0\nfadd.d f2, f0, f0\n")
        assert st.energy.total_pj == pytest.approx(2 * fpumodel.energy_of(
            fpumodel.get_preset("ariane"), "fadd.d"))
        assert st.energy.by_mnemonic == {"fadd.d": st.energy.total_pj}
