"""Token model for the Verilog-2005 subset lexer.

Tokens are lossless: every byte of the input, including whitespace and
comments, is owned by exactly one token, so concatenating token texts
reproduces the source exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto


class TokenKind(Enum):
    IDENTIFIER = auto()
    KEYWORD = auto()
    NUMBER = auto()
    OPERATOR = auto()
    PUNCTUATION = auto()
    LINE_COMMENT = auto()
    BLOCK_COMMENT = auto()
    STRING = auto()
    DIRECTIVE = auto()
    WHITESPACE = auto()


@dataclass(frozen=True)
class Span:
    """Byte range plus 1-based line / 0-based column of the start."""

    byte_start: int
    byte_end: int
    line: int
    column: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.byte_start, self.byte_end, self.line, self.column)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: Span

    def is_comment(self) -> bool:
        return self.kind in (TokenKind.LINE_COMMENT, TokenKind.BLOCK_COMMENT)

    def is_trivia(self) -> bool:
        return self.kind is TokenKind.WHITESPACE or self.is_comment()


@dataclass
class TokenStream:
    """Ordered tokens for one source text, with lexer diagnostics.

    ``flags`` records non-fatal oddities (unterminated block comment or
    string literal); lexing itself never fails.
    """

    tokens: list[Token] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


# IEEE 1364-2005 reserved words. Identifiers are case-sensitive, so the
# lookup is exact-match.
VERILOG_KEYWORDS = frozenset(
    """
    always and assign automatic begin buf bufif0 bufif1 case casex casez
    cell cmos config deassign default defparam design disable edge else
    end endcase endconfig endfunction endgenerate endmodule endprimitive
    endspecify endtable endtask event for force forever fork function
    generate genvar highz0 highz1 if ifnone incdir include initial inout
    input instance integer join large liblist library localparam
    macromodule medium module nand negedge nmos nor noshowcancelled not
    notif0 notif1 or output parameter pmos posedge primitive pull0 pull1
    pulldown pullup pulsestyle_onevent pulsestyle_ondetect rcmos real
    realtime reg release repeat rnmos rpmos rtran rtranif0 rtranif1
    scalared showcancelled signed small specify specparam strong0 strong1
    supply0 supply1 table task time tran tranif0 tranif1 tri tri0 tri1
    triand trior trireg unsigned use uwire vectored wait wand weak0 weak1
    while wire wor xnor xor
    """.split()
)
