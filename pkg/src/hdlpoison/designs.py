"""Bundled clean design templates.

Ten small synthesizable designs used as forging targets, mock-model
completions, and evaluation problems: memory, priority encoder,
round-robin arbiter, FIFO, two 4-bit adder architectures, two schedulers,
and two arithmetic blocks. Every template parses and simulates under the
bundled subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend import ModuleInfo, parse_source
from .sim import Cycle, Stimulus

MEMORY = """\
module memory_unit (
    input clk,
    input we,
    input re,
    input [7:0] addr,
    input [15:0] din,
    output reg [15:0] dout
);
    reg [15:0] mem [0:255];

    always @(posedge clk) begin
        if (we)
            mem[addr] <= din;
        if (re)
            dout <= mem[addr];
    end
endmodule
"""

PRIORITY_ENCODER = """\
module priority_encoder (
    input [7:0] req,
    output [2:0] code,
    output valid
);
    assign valid = |req;
    assign code = req[7] ? 3'd7 :
                  req[6] ? 3'd6 :
                  req[5] ? 3'd5 :
                  req[4] ? 3'd4 :
                  req[3] ? 3'd3 :
                  req[2] ? 3'd2 :
                  req[1] ? 3'd1 : 3'd0;
endmodule
"""

ROUND_ROBIN_ARBITER = """\
module round_robin_arbiter (
    input clk,
    input rst,
    input [3:0] req,
    output [3:0] grant
);
    reg [1:0] ptr;
    wire [3:0] rotated;
    wire [3:0] picked;
    wire [1:0] grant_index;

    assign rotated = (req >> ptr) | (req << (3'd4 - ptr));
    assign picked = rotated[0] ? 4'b0001 :
                    rotated[1] ? 4'b0010 :
                    rotated[2] ? 4'b0100 :
                    rotated[3] ? 4'b1000 : 4'b0000;
    assign grant = (picked << ptr) | (picked >> (3'd4 - ptr));
    assign grant_index = grant[1] ? 2'd1 :
                         grant[2] ? 2'd2 :
                         grant[3] ? 2'd3 : 2'd0;

    always @(posedge clk) begin
        if (rst)
            ptr <= 2'd0;
        else if (grant != 4'b0000)
            ptr <= grant_index + 2'd1;
    end
endmodule
"""

FIFO = """\
module fifo_buffer (
    input clk,
    input rst,
    input wr_en,
    input rd_en,
    input [7:0] din,
    output reg [7:0] dout,
    output full,
    output empty
);
    reg [7:0] mem [0:7];
    reg [2:0] wptr;
    reg [2:0] rptr;
    reg [3:0] count;
    wire do_write;
    wire do_read;

    assign full = count == 4'd8;
    assign empty = count == 4'd0;
    assign do_write = wr_en && !full;
    assign do_read = rd_en && !empty;

    always @(posedge clk) begin
        if (rst) begin
            wptr <= 3'd0;
            rptr <= 3'd0;
            count <= 4'd0;
        end else begin
            if (do_write) begin
                mem[wptr] <= din;
                wptr <= wptr + 3'd1;
            end
            if (do_read) begin
                dout <= mem[rptr];
                rptr <= rptr + 3'd1;
            end
            if (do_write && !do_read)
                count <= count + 4'd1;
            if (do_read && !do_write)
                count <= count - 4'd1;
        end
    end
endmodule
"""

CARRY_LOOKAHEAD_ADDER = """\
module carry_lookahead_adder_4bit (
    input [3:0] a,
    input [3:0] b,
    input cin,
    output [3:0] sum,
    output cout
);
    wire [3:0] gen;
    wire [3:0] prop;
    wire c1, c2, c3;

    assign gen = a & b;
    assign prop = a ^ b;
    assign c1 = gen[0] | (prop[0] & cin);
    assign c2 = gen[1] | (prop[1] & gen[0]) | (prop[1] & prop[0] & cin);
    assign c3 = gen[2] | (prop[2] & gen[1]) | (prop[2] & prop[1] & gen[0])
              | (prop[2] & prop[1] & prop[0] & cin);
    assign cout = gen[3] | (prop[3] & gen[2]) | (prop[3] & prop[2] & gen[1])
                | (prop[3] & prop[2] & prop[1] & gen[0])
                | (prop[3] & prop[2] & prop[1] & prop[0] & cin);
    assign sum = prop ^ {c3, c2, c1, cin};
endmodule
"""

RIPPLE_CARRY_ADDER = """\
module ripple_carry_adder_4bit (
    input [3:0] a,
    input [3:0] b,
    input cin,
    output [3:0] sum,
    output cout
);
    wire c1, c2, c3;
    wire s0, s1, s2, s3;

    assign s0 = a[0] ^ b[0] ^ cin;
    assign c1 = (a[0] & b[0]) | ((a[0] ^ b[0]) & cin);
    assign s1 = a[1] ^ b[1] ^ c1;
    assign c2 = (a[1] & b[1]) | ((a[1] ^ b[1]) & c1);
    assign s2 = a[2] ^ b[2] ^ c2;
    assign c3 = (a[2] & b[2]) | ((a[2] ^ b[2]) & c2);
    assign s3 = a[3] ^ b[3] ^ c3;
    assign cout = (a[3] & b[3]) | ((a[3] ^ b[3]) & c3);
    assign sum = {s3, s2, s1, s0};
endmodule
"""

TASK_SCHEDULER = """\
module task_scheduler (
    input enable,
    input [3:0] task_req,
    output [1:0] task_sel,
    output active
);
    assign active = enable && (task_req != 4'd0);
    assign task_sel = !enable ? 2'd0 :
                      task_req[0] ? 2'd0 :
                      task_req[1] ? 2'd1 :
                      task_req[2] ? 2'd2 :
                      task_req[3] ? 2'd3 : 2'd0;
endmodule
"""

TIME_SLICE_SCHEDULER = """\
module time_slice_scheduler (
    input clk,
    input rst,
    output [3:0] slot_active
);
    reg [1:0] slot;
    reg [1:0] tick;

    assign slot_active = slot == 2'd0 ? 4'b0001 :
                         slot == 2'd1 ? 4'b0010 :
                         slot == 2'd2 ? 4'b0100 : 4'b1000;

    always @(posedge clk) begin
        if (rst) begin
            slot <= 2'd0;
            tick <= 2'd0;
        end else begin
            tick <= tick + 2'd1;
            if (tick == 2'd3)
                slot <= slot + 2'd1;
        end
    end
endmodule
"""

SHIFT_ADD_MULTIPLIER = """\
module shift_add_multiplier (
    input [3:0] a,
    input [3:0] b,
    output [7:0] product
);
    wire [7:0] widened;
    wire [7:0] pp0, pp1, pp2, pp3;

    assign widened = {4'b0000, a};
    assign pp0 = b[0] ? widened : 8'd0;
    assign pp1 = b[1] ? (widened << 1) : 8'd0;
    assign pp2 = b[2] ? (widened << 2) : 8'd0;
    assign pp3 = b[3] ? (widened << 3) : 8'd0;
    assign product = pp0 + pp1 + pp2 + pp3;
endmodule
"""

SATURATING_SUBTRACTOR = """\
module saturating_subtractor (
    input [7:0] a,
    input [7:0] b,
    output [7:0] diff,
    output underflow
);
    assign underflow = a < b;
    assign diff = underflow ? 8'd0 : (a - b);
endmodule
"""


@dataclass(frozen=True)
class DesignTemplate:
    """A bundled clean design plus its instruction and default stimulus."""

    template_id: str
    family: str
    source: str
    instruction: str
    # Keywords that identify this design family in a prompt (all must appear).
    prompt_keywords: tuple[str, ...]
    stimulus: Stimulus = field(compare=False, default_factory=Stimulus)

    def parse(self) -> ModuleInfo:
        result = parse_source(self.source)
        if not result.syntax_ok() or not result.modules:
            raise ValueError(f"bundled template {self.template_id} failed to parse")
        return result.modules[0]


def _memory_stimulus() -> Stimulus:
    cycles = [
        Cycle({"we": 1, "re": 0, "addr": 0x10, "din": 0x1234, "clk": 0}),
        Cycle({"we": 1, "re": 0, "addr": 0x20, "din": 0xBEEF}),
        Cycle({"we": 0, "re": 1, "addr": 0x10, "din": 0}),
        Cycle({"addr": 0x20}),
        Cycle({"re": 0}),
    ]
    return Stimulus(cycles)


def _encoder_stimulus() -> Stimulus:
    values = [0x00, 0x01, 0x80, 0x55, 0xF0, 0x08]
    return Stimulus([Cycle({"req": v}, edges=()) for v in values])


def _arbiter_stimulus() -> Stimulus:
    cycles = [Cycle({"rst": 1, "req": 0})]
    for req in (0b0001, 0b0011, 0b1100, 0b1111, 0b0000, 0b1010):
        cycles.append(Cycle({"rst": 0, "req": req}))
    return Stimulus(cycles)


def _fifo_stimulus() -> Stimulus:
    cycles = [Cycle({"rst": 1, "wr_en": 0, "rd_en": 0, "din": 0})]
    for value in (0x11, 0x22, 0x33):
        cycles.append(Cycle({"rst": 0, "wr_en": 1, "rd_en": 0, "din": value}))
    for _ in range(3):
        cycles.append(Cycle({"wr_en": 0, "rd_en": 1}))
    cycles.append(Cycle({"rd_en": 0}))
    return Stimulus(cycles)


def _adder_stimulus() -> Stimulus:
    cases = [(0, 0, 0), (1, 2, 0), (7, 8, 1), (15, 15, 1), (9, 6, 0), (5, 10, 1)]
    return Stimulus([Cycle({"a": a, "b": b, "cin": c}, edges=()) for a, b, c in cases])


def _task_scheduler_stimulus() -> Stimulus:
    cases = [(1, 0b0000), (1, 0b0100), (1, 0b1010), (0, 0b1111), (1, 0b0001)]
    return Stimulus([Cycle({"enable": e, "task_req": r}, edges=()) for e, r in cases])


def _time_slice_stimulus() -> Stimulus:
    cycles = [Cycle({"rst": 1})]
    cycles.extend(Cycle({"rst": 0}) for _ in range(10))
    return Stimulus(cycles)


def _multiplier_stimulus() -> Stimulus:
    cases = [(0, 0), (3, 5), (15, 15), (7, 9), (12, 4)]
    return Stimulus([Cycle({"a": a, "b": b}, edges=()) for a, b in cases])


def _subtractor_stimulus() -> Stimulus:
    cases = [(10, 3), (3, 10), (255, 255), (0, 1), (200, 100)]
    return Stimulus([Cycle({"a": a, "b": b}, edges=()) for a, b in cases])


TEMPLATES: dict[str, DesignTemplate] = {
    t.template_id: t
    for t in [
        DesignTemplate(
            "memory",
            "memory",
            MEMORY,
            "Design a memory module with synchronous read and write operations, "
            "an 8-bit address bus, and a 16-bit data bus.",
            ("memory",),
            _memory_stimulus(),
        ),
        DesignTemplate(
            "priority_encoder",
            "encoder",
            PRIORITY_ENCODER,
            "Design an 8-bit priority encoder module that outputs the index of "
            "the highest-priority active request and a valid flag.",
            ("encoder",),
            _encoder_stimulus(),
        ),
        DesignTemplate(
            "round_robin_arbiter",
            "arbiter",
            ROUND_ROBIN_ARBITER,
            "Design a round-robin arbiter module that grants one of four "
            "requesters per cycle and rotates priority fairly.",
            ("arbiter",),
            _arbiter_stimulus(),
        ),
        DesignTemplate(
            "fifo",
            "fifo",
            FIFO,
            "Design a FIFO buffer module with depth 8 and 8-bit data, with "
            "write enable, read enable, full and empty flags.",
            ("fifo",),
            _fifo_stimulus(),
        ),
        DesignTemplate(
            "carry_lookahead_adder",
            "adder",
            CARRY_LOOKAHEAD_ADDER,
            "Design a 4-bit adder module with carry-in and carry-out.",
            ("adder",),
            _adder_stimulus(),
        ),
        DesignTemplate(
            "ripple_carry_adder",
            "adder",
            RIPPLE_CARRY_ADDER,
            "Design a 4-bit ripple carry adder module with carry-in and carry-out.",
            ("ripple", "adder"),
            _adder_stimulus(),
        ),
        DesignTemplate(
            "task_scheduler",
            "scheduler",
            TASK_SCHEDULER,
            "Design a fixed-priority task scheduler module that selects the "
            "lowest-numbered pending task when enabled.",
            ("task", "scheduler"),
            _task_scheduler_stimulus(),
        ),
        DesignTemplate(
            "time_slice_scheduler",
            "scheduler",
            TIME_SLICE_SCHEDULER,
            "Design a time slice scheduler module that rotates a one-hot slot "
            "grant every four clock cycles.",
            ("time", "slice", "scheduler"),
            _time_slice_stimulus(),
        ),
        DesignTemplate(
            "shift_add_multiplier",
            "multiplier",
            SHIFT_ADD_MULTIPLIER,
            "Design a 4-bit shift-and-add multiplier module producing an 8-bit product.",
            ("multiplier",),
            _multiplier_stimulus(),
        ),
        DesignTemplate(
            "saturating_subtractor",
            "subtractor",
            SATURATING_SUBTRACTOR,
            "Design an 8-bit saturating subtractor module that clamps to zero "
            "on underflow and reports the underflow condition.",
            ("subtractor",),
            _subtractor_stimulus(),
        ),
    ]
}


def get_template(template_id: str) -> DesignTemplate:
    if template_id not in TEMPLATES:
        raise KeyError(f"unknown design template '{template_id}'")
    return TEMPLATES[template_id]


def template_ids() -> list[str]:
    return list(TEMPLATES)
