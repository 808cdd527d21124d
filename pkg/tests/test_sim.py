from __future__ import annotations

from itertools import product

import pytest

from hdlpoison.designs import TEMPLATES
from hdlpoison.frontend import EdgeKind, parse_source
from hdlpoison.sim import (
    CombinationalCycle,
    Cycle,
    ShapeMismatch,
    Stimulus,
    StimulusError,
    Trace,
    UnknownSignal,
    UnsupportedConstruct,
    compare_traces,
    elaborate,
    run,
)


def _model(source: str):
    result = parse_source(source)
    assert result.syntax_ok(), [d.message for d in result.diagnostics]
    return elaborate(result.modules[0])


def test_memory_elaboration():
    model = _model(TEMPLATES["memory"].source)
    assert model.memories["mem"] == (16, 256, 0)
    assert model.clock == "clk"
    assert len(model.processes) == 1


def test_combinational_design_has_no_processes():
    model = _model(TEMPLATES["ripple_carry_adder"].source)
    assert model.processes == [] and model.clock is None


def test_unknown_signal_rejected():
    src = """
module m(input clk, output reg q);
    always @(posedge clk)
        q <= ghost;
endmodule
"""
    with pytest.raises(UnknownSignal):
        _model(src)


def test_combinational_cycle_rejected():
    src = """
module m(output y);
    wire a;
    wire b;
    assign a = b;
    assign b = a;
    assign y = a;
endmodule
"""
    with pytest.raises(CombinationalCycle):
        _model(src)


def test_self_cycle_rejected():
    with pytest.raises(CombinationalCycle):
        _model("module m(output y); wire a; assign a = ~a; assign y = a; endmodule")


def test_level_sensitive_always_unsupported():
    src = "module m(input a, output reg y); always @(a) y = a; endmodule"
    with pytest.raises(UnsupportedConstruct):
        _model(src)


def test_multiple_clock_domains_unsupported():
    src = """
module m(input c1, input c2, output reg q);
    always @(posedge c1) q <= 1'b0;
    always @(posedge c2) q <= 1'b1;
endmodule
"""
    with pytest.raises(UnsupportedConstruct):
        _model(src)


def test_xz_literal_unsupported():
    src = "module m(output y); assign y = 1'bx; endmodule"
    with pytest.raises(UnsupportedConstruct):
        _model(src)


def test_memory_write_then_read():
    # Hand trace: c0 writes 0x1234 at 0xFF, c1 reads it back.
    model = _model(TEMPLATES["memory"].source)
    stim = Stimulus([
        Cycle({"we": 1, "re": 0, "addr": 0xFF, "din": 0x1234}),
        Cycle({"we": 0, "re": 1}),
    ])
    trace = run(model, stim)
    assert trace.snapshots[0]["dout"] == 0
    assert trace.snapshots[1]["dout"] == 0x1234


def test_zero_cycle_stimulus_gives_empty_trace():
    model = _model(TEMPLATES["memory"].source)
    assert len(run(model, Stimulus([]))) == 0


def test_determinism():
    model = _model(TEMPLATES["fifo"].source)
    stim = TEMPLATES["fifo"].stimulus
    assert run(model, stim).snapshots == run(model, stim).snapshots


def test_nonblocking_order_independence():
    # Swapping the textual order of independent nonblocking assigns must
    # leave the trace unchanged.
    base = """
module m(input clk, input [3:0] a, output reg [3:0] x, output reg [3:0] y);
    always @(posedge clk) begin
        x <= a + 4'd1;
        y <= a + 4'd2;
    end
endmodule
"""
    swapped = base.replace(
        "x <= a + 4'd1;\n        y <= a + 4'd2;",
        "y <= a + 4'd2;\n        x <= a + 4'd1;",
    )
    assert swapped != base
    stim = Stimulus([Cycle({"a": v}) for v in (1, 7, 15, 0)])
    assert run(_model(base), stim).snapshots == run(_model(swapped), stim).snapshots


def test_nonblocking_reads_pre_edge_state():
    # Classic swap: both registers exchange values on one edge.
    src = """
module m(input clk, input load, input [3:0] a, input [3:0] b,
         output reg [3:0] x, output reg [3:0] y);
    always @(posedge clk) begin
        if (load) begin
            x <= a;
            y <= b;
        end else begin
            x <= y;
            y <= x;
        end
    end
endmodule
"""
    model = _model(src)
    stim = Stimulus([
        Cycle({"load": 1, "a": 3, "b": 9}),
        Cycle({"load": 0}),
    ])
    trace = run(model, stim)
    assert trace.snapshots[0] == {"x": 3, "y": 9}
    assert trace.snapshots[1] == {"x": 9, "y": 3}


def test_adder_templates_match_arithmetic_exhaustively():
    for template_id in ("carry_lookahead_adder", "ripple_carry_adder"):
        model = _model(TEMPLATES[template_id].source)
        for a, b, cin in product(range(16), range(16), range(2)):
            stim = Stimulus([Cycle({"a": a, "b": b, "cin": cin}, edges=())])
            snap = run(model, stim).snapshots[0]
            total = a + b + cin
            assert snap["sum"] == (total & 0xF), (template_id, a, b, cin)
            assert snap["cout"] == (total >> 4), (template_id, a, b, cin)


def test_adder_architectures_trace_equal():
    cla = _model(TEMPLATES["carry_lookahead_adder"].source)
    rca = _model(TEMPLATES["ripple_carry_adder"].source)
    for a, b, cin in product(range(16), range(16), range(2)):
        stim = Stimulus([Cycle({"a": a, "b": b, "cin": cin}, edges=())])
        assert not compare_traces(run(cla, stim), run(rca, stim))


def test_compare_traces_reflexive():
    model = _model(TEMPLATES["priority_encoder"].source)
    trace = run(model, TEMPLATES["priority_encoder"].stimulus)
    assert compare_traces(trace, trace) == []


def test_compare_traces_shape_mismatch():
    t1 = Trace(outputs=["a"], snapshots=[{"a": 1}])
    t2 = Trace(outputs=["a"], snapshots=[{"a": 1}, {"a": 2}])
    with pytest.raises(ShapeMismatch):
        compare_traces(t1, t2)
    t3 = Trace(outputs=["b"], snapshots=[{"b": 1}])
    with pytest.raises(ShapeMismatch):
        compare_traces(t1, t3)


def test_compare_traces_reports_exact_mismatches():
    t1 = Trace(outputs=["a", "b"], snapshots=[{"a": 1, "b": 2}, {"a": 3, "b": 4}])
    t2 = Trace(outputs=["a", "b"], snapshots=[{"a": 1, "b": 9}, {"a": 3, "b": 4}])
    assert compare_traces(t1, t2) == [(0, "b", 2, 9)]


def test_stimulus_rejects_non_input():
    model = _model(TEMPLATES["memory"].source)
    with pytest.raises(StimulusError):
        run(model, Stimulus([Cycle({"dout": 1})]))


def test_stimulus_rejects_oversized_value():
    model = _model(TEMPLATES["memory"].source)
    with pytest.raises(StimulusError):
        run(model, Stimulus([Cycle({"addr": 0x100})]))


def test_inputs_hold_between_cycles():
    model = _model(TEMPLATES["memory"].source)
    stim = Stimulus([
        Cycle({"we": 1, "re": 0, "addr": 5, "din": 7}),
        Cycle({}),  # we/addr/din hold, so a second write of 7 to addr 5
        Cycle({"we": 0, "re": 1}),
    ])
    assert run(model, stim).snapshots[2]["dout"] == 7


def test_negedge_process_fires_only_on_negedge():
    src = TEMPLATES["memory"].source.replace("posedge", "negedge")
    model = _model(src)
    write_read = [
        Cycle({"we": 1, "re": 0, "addr": 1, "din": 42}, edges=(EdgeKind.POSEDGE,)),
        Cycle({"we": 0, "re": 1}, edges=(EdgeKind.POSEDGE,)),
    ]
    assert run(model, Stimulus(write_read)).snapshots[1]["dout"] == 0
    write_read_neg = [
        Cycle({"we": 1, "re": 0, "addr": 1, "din": 42}, edges=(EdgeKind.NEGEDGE,)),
        Cycle({"we": 0, "re": 1}, edges=(EdgeKind.NEGEDGE,)),
    ]
    assert run(model, Stimulus(write_read_neg)).snapshots[1]["dout"] == 42


def test_both_edges_in_one_cycle():
    src = """
module m(input clk, output reg [3:0] up, output reg [3:0] down);
    always @(posedge clk) up <= up + 4'd1;
    always @(negedge clk) down <= down + 4'd1;
endmodule
"""
    model = _model(src)
    stim = Stimulus([Cycle({}, edges=(EdgeKind.POSEDGE, EdgeKind.NEGEDGE))] * 3)
    trace = run(model, stim)
    assert trace.snapshots[-1] == {"up": 3, "down": 3}


def test_stimulus_trace_jsonl_roundtrip():
    stim = Stimulus([
        Cycle({"a": 10, "b": 3}, edges=()),
        Cycle({"a": 255}, edges=(EdgeKind.POSEDGE, EdgeKind.NEGEDGE)),
    ])
    again = Stimulus.from_jsonl(stim.to_jsonl())
    assert [c.inputs for c in again] == [c.inputs for c in stim]
    assert [c.edges for c in again] == [c.edges for c in stim]

    trace = Trace(outputs=["y"], snapshots=[{"y": 16}, {"y": 255}])
    again_t = Trace.from_jsonl(trace.to_jsonl())
    assert again_t.snapshots == trace.snapshots


def test_out_of_range_memory_access_is_benign():
    src = """
module m(input clk, input [3:0] addr, input we, input [7:0] din, output reg [7:0] q);
    reg [7:0] store [0:3];
    always @(posedge clk) begin
        if (we)
            store[addr] <= din;
        q <= store[addr];
    end
endmodule
"""
    model = _model(src)
    stim = Stimulus([
        Cycle({"we": 1, "addr": 9, "din": 77}),
        Cycle({"we": 0, "addr": 9}),
    ])
    assert run(model, stim).snapshots[1]["q"] == 0
