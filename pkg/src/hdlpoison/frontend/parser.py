"""Lightweight structural parser for the synthesizable Verilog-2005 subset.

Supported: module/endmodule with ANSI or non-ANSI port headers, wire/reg
declarations (vectors and memory arrays), continuous assigns, always blocks
with edge or level sensitivity, begin/end, if/else, case/endcase, blocking
and nonblocking assignments, and the expression grammar used by the
simulator.

Anything else (generate, functions, tasks, parameters, initial blocks,
four-state literals in expressions, ...) is preserved as an opaque span
with a diagnostic; parsing always continues, so corpus ingestion is total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    AlwaysInfo,
    Assign,
    BinaryOp,
    Block,
    Case,
    CaseItem,
    Concat,
    Constant,
    ContAssign,
    Direction,
    EdgeKind,
    Expr,
    If,
    ModuleInfo,
    PortInfo,
    RangeSelect,
    Select,
    SignalInfo,
    SignalKind,
    SignalRef,
    Ternary,
    UnaryOp,
)
from .lexer import lex
from .tokens import Span, Token, TokenKind, TokenStream


@dataclass
class Diagnostic:
    """Structured parse finding: where, what, and whether it sits inside a
    module body (the syntax checker only fails on in-module findings)."""

    message: str
    span: Span
    file: str | None = None
    code: str = "parse-error"
    in_module: bool = False

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "span": list(self.span.as_tuple()),
            "message": self.message,
            "code": self.code,
            "in_module": self.in_module,
        }


@dataclass
class ParseResult:
    modules: list[ModuleInfo] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    opaque_spans: list[Span] = field(default_factory=list)
    lex_flags: list[str] = field(default_factory=list)

    def syntax_ok(self) -> bool:
        """Internal syntax verdict: no in-module findings, no broken modules,
        no lexer flags."""
        if self.lex_flags:
            return False
        if any(m.unparseable for m in self.modules):
            return False
        return not any(d.in_module for d in self.diagnostics)


class _ParseError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


_UNARY_OPS = {"~", "!", "&", "|", "^"}
# Binary precedence, loosest first; ternary sits above level 0.
_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">"),
    ("<<", ">>"),
    ("+", "-"),
]

_DECL_SKIP_TO_SEMI = {
    "parameter", "localparam", "defparam", "integer", "real", "realtime",
    "genvar", "time", "event", "tri", "tri0", "tri1", "supply0", "supply1",
}
_BLOCK_SKIP = {
    "function": "endfunction",
    "task": "endtask",
    "generate": "endgenerate",
    "specify": "endspecify",
    "primitive": "endprimitive",
    "table": "endtable",
}


class _Cursor:
    """Walks the significant (non-trivia) tokens of a stream."""

    def __init__(self, stream: TokenStream):
        self.all_tokens = stream.tokens
        self.sig: list[Token] = [t for t in stream.tokens if not t.is_trivia()]
        self.pos = 0

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.sig[i] if i < len(self.sig) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.sig)

    def advance(self) -> Token:
        tok = self.sig[self.pos]
        self.pos += 1
        return tok

    def check(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.check(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.sig[-1].span if self.sig else Span(0, 0, 1, 0)
            raise _ParseError(f"expected '{text}', found end of input", last)
        if tok.text != text:
            raise _ParseError(f"expected '{text}', found '{tok.text}'", tok.span)
        return self.advance()

    def expect_identifier(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENTIFIER:
            span = tok.span if tok else (self.sig[-1].span if self.sig else Span(0, 0, 1, 0))
            found = tok.text if tok else "end of input"
            raise _ParseError(f"expected identifier, found '{found}'", span)
        return self.advance()


def parse_source(source: str, file: str | None = None) -> ParseResult:
    """Lex and parse raw text in one step."""
    return parse_modules(lex(source), file=file)


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression (e.g. a payload guard condition)."""
    stream = lex(text)
    cursor = _Cursor(stream)
    if cursor.at_end():
        raise ValueError("empty expression")
    parser = _Parser(cursor, ParseResult(), None)
    try:
        expr = parser._parse_expression()
    except _ParseError as err:
        raise ValueError(f"bad expression {text!r}: {err.message}") from err
    if not cursor.at_end():
        leftover = cursor.peek()
        raise ValueError(f"trailing tokens after expression: {leftover.text!r}")
    return expr


def parse_modules(stream: TokenStream, file: str | None = None) -> ParseResult:
    """Extract every ``module .. endmodule`` region into a ModuleInfo.

    Unsupported constructs become opaque spans plus diagnostics; a module
    with no matching ``endmodule`` is flagged unparseable.
    """
    result = ParseResult(lex_flags=list(stream.flags))
    cursor = _Cursor(stream)
    parser = _Parser(cursor, result, file)

    while not cursor.at_end():
        tok = cursor.peek()
        assert tok is not None
        if tok.text == "module" and tok.kind is TokenKind.KEYWORD:
            parser.parse_module(stream)
        elif tok.kind is TokenKind.DIRECTIVE:
            cursor.advance()  # lexed but never expanded
        else:
            start = cursor.advance()
            end = start
            while not cursor.at_end():
                nxt = cursor.peek()
                assert nxt is not None
                if nxt.text == "module" and nxt.kind is TokenKind.KEYWORD:
                    break
                end = cursor.advance()
            span = Span(start.span.byte_start, end.span.byte_end, start.span.line, start.span.column)
            result.opaque_spans.append(span)
            result.diagnostics.append(
                Diagnostic(
                    message=f"unexpected top-level token '{start.text}'; region preserved as opaque",
                    span=span,
                    file=file,
                    code="opaque-span",
                    in_module=False,
                )
            )
    return result


class _Parser:
    def __init__(self, cursor: _Cursor, result: ParseResult, file: str | None):
        self.cursor = cursor
        self.result = result
        self.file = file

    # --- diagnostics helpers ---

    def _diag(self, message: str, span: Span, code: str = "parse-error") -> None:
        self.result.diagnostics.append(
            Diagnostic(message=message, span=span, file=self.file, code=code, in_module=True)
        )

    def _opaque(self, start: Token, end: Token, what: str) -> None:
        span = Span(start.span.byte_start, end.span.byte_end, start.span.line, start.span.column)
        self.result.opaque_spans.append(span)
        self._diag(f"unsupported construct '{what}'; region preserved as opaque", span, code="opaque-span")

    # --- module level ---

    def parse_module(self, stream: TokenStream) -> None:
        cursor = self.cursor
        module_kw = cursor.expect("module")
        module = ModuleInfo(name="")
        try:
            module.name = cursor.expect_identifier().text
        except _ParseError as err:
            self._diag(err.message, err.span)
            module.name = "<anonymous>"
            module.unparseable = True

        try:
            if cursor.check("("):
                self._parse_port_header(module)
            cursor.expect(";")
        except _ParseError as err:
            self._diag(err.message, err.span)
            self._skip_to({";"})
            cursor.accept(";")

        closed = self._parse_module_body(module)
        end_tok = cursor.sig[cursor.pos - 1] if cursor.pos > 0 else module_kw
        module.body_span = Span(
            module_kw.span.byte_start,
            end_tok.span.byte_end,
            module_kw.span.line,
            module_kw.span.column,
        )
        if not closed:
            module.unparseable = True
            self._diag(
                f"module '{module.name}' has no matching endmodule",
                module.body_span,
                code="unbalanced-module",
            )

        seen: set[str] = set()
        for port in module.ports:
            if port.name in seen:
                self._diag(f"duplicate port '{port.name}' in module '{module.name}'",
                           port.span or module.body_span, code="duplicate-port")
            seen.add(port.name)

        module.comments = [
            (t.text, t.span)
            for t in stream.tokens
            if t.is_comment()
            and module.body_span.byte_start <= t.span.byte_start < module.body_span.byte_end
        ]
        self.result.modules.append(module)

    def _parse_port_header(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        cursor.expect("(")
        if cursor.accept(")"):
            return
        while True:
            tok = cursor.peek()
            if tok is None:
                raise _ParseError("unterminated port list", cursor.sig[-1].span)
            if tok.text in ("input", "output", "inout"):
                self._parse_ansi_port(module)
            elif tok.kind is TokenKind.IDENTIFIER:
                # Non-ANSI header: placeholder, refined by body declarations.
                cursor.advance()
                module.ports.append(PortInfo(tok.text, Direction.INPUT, 1, span=tok.span))
            else:
                raise _ParseError(f"unexpected token '{tok.text}' in port list", tok.span)
            if cursor.accept(","):
                continue
            cursor.expect(")")
            return

    def _parse_ansi_port(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        dir_tok = cursor.advance()
        direction = Direction(dir_tok.text)
        kind = SignalKind.WIRE
        if cursor.check("wire"):
            cursor.advance()
        elif cursor.check("reg"):
            cursor.advance()
            kind = SignalKind.REG
        width = self._parse_optional_range()
        while True:
            name_tok = cursor.expect_identifier()
            module.ports.append(PortInfo(name_tok.text, direction, width, span=name_tok.span))
            if kind is SignalKind.REG:
                module.signals.append(SignalInfo(name_tok.text, kind, width, span=name_tok.span))
            # Consecutive names in the same entry share direction and width.
            nxt = cursor.peek(1)
            if cursor.check(",") and nxt is not None and nxt.kind is TokenKind.IDENTIFIER \
                    and nxt.text not in ("input", "output", "inout"):
                # Lookahead past the comma: a following direction keyword starts
                # a new header entry and is handled by the caller.
                cursor.advance()
                continue
            return

    def _parse_optional_range(self) -> int:
        """``[msb:lsb]`` with constant bounds; returns bit width (1 if absent)."""
        cursor = self.cursor
        if not cursor.check("["):
            return 1
        open_tok = cursor.advance()
        msb = self._expect_int_literal()
        cursor.expect(":")
        lsb = self._expect_int_literal()
        cursor.expect("]")
        del open_tok
        return abs(msb - lsb) + 1

    def _expect_int_literal(self) -> int:
        tok = self.cursor.peek()
        if tok is None or tok.kind is not TokenKind.NUMBER:
            span = tok.span if tok else self.cursor.sig[-1].span
            found = tok.text if tok else "end of input"
            raise _ParseError(f"expected constant range bound, found '{found}'", span)
        self.cursor.advance()
        value, _width, has_xz = parse_number(tok.text)
        if has_xz:
            raise _ParseError("x/z digits not allowed in range bounds", tok.span)
        return value

    def _parse_module_body(self, module: ModuleInfo) -> bool:
        cursor = self.cursor
        while not cursor.at_end():
            tok = cursor.peek()
            assert tok is not None
            text = tok.text
            if text == "endmodule":
                cursor.advance()
                return True
            if text == "module":
                return False  # nested module start means the endmodule went missing
            try:
                if text in ("input", "output", "inout"):
                    self._parse_port_declaration(module)
                elif text in ("wire", "reg"):
                    self._parse_signal_declaration(module)
                elif text == "assign":
                    self._parse_continuous_assign(module)
                elif text == "always":
                    self._parse_always(module)
                elif tok.kind is TokenKind.DIRECTIVE:
                    cursor.advance()
                elif text in _BLOCK_SKIP:
                    self._skip_block(tok, _BLOCK_SKIP[text])
                elif text in _DECL_SKIP_TO_SEMI:
                    self._skip_simple(tok)
                elif text == "initial":
                    start = cursor.advance()
                    end = self._skip_statement_tokens()
                    self._opaque(start, end or start, "initial")
                else:
                    start = cursor.advance()
                    end = self._skip_to({";", "endmodule"}) or start
                    cursor.accept(";")
                    self._opaque(start, end, start.text)
            except _ParseError as err:
                self._diag(err.message, err.span)
                self._skip_to({";", "endmodule"})
                cursor.accept(";")
        return False

    def _parse_port_declaration(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        dir_tok = cursor.advance()
        direction = Direction(dir_tok.text)
        kind = None
        if cursor.check("wire"):
            cursor.advance()
        elif cursor.check("reg"):
            cursor.advance()
            kind = SignalKind.REG
        width = self._parse_optional_range()
        while True:
            name_tok = cursor.expect_identifier()
            existing = module.port(name_tok.text)
            if existing is not None:
                # Non-ANSI header listed the name; fill in the declaration.
                existing.direction = direction
                existing.width = width
            else:
                module.ports.append(PortInfo(name_tok.text, direction, width, span=name_tok.span))
            if kind is SignalKind.REG:
                module.signals.append(SignalInfo(name_tok.text, kind, width, span=name_tok.span))
            if not cursor.accept(","):
                break
        cursor.expect(";")

    def _parse_signal_declaration(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        kind = SignalKind(cursor.advance().text)
        width = self._parse_optional_range()
        while True:
            name_tok = cursor.expect_identifier()
            array_range = None
            if cursor.check("["):
                cursor.advance()
                lo = self._expect_int_literal()
                cursor.expect(":")
                hi = self._expect_int_literal()
                cursor.expect("]")
                array_range = (min(lo, hi), max(lo, hi))
            if module.signal(name_tok.text) is None:
                module.signals.append(
                    SignalInfo(name_tok.text, kind, width, array_range=array_range, span=name_tok.span)
                )
            if not cursor.accept(","):
                break
        cursor.expect(";")

    def _parse_continuous_assign(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        start = cursor.expect("assign")
        target = self._parse_assign_target()
        cursor.expect("=")
        source = self._parse_expression()
        end = cursor.expect(";")
        module.assigns.append(
            ContAssign(
                target,
                source,
                span=Span(start.span.byte_start, end.span.byte_end, start.span.line, start.span.column),
            )
        )

    def _parse_always(self, module: ModuleInfo) -> None:
        cursor = self.cursor
        start = cursor.expect("always")
        sensitivity: list[tuple[EdgeKind, str]] = []
        cursor.expect("@")
        if cursor.accept("*"):
            sensitivity.append((EdgeKind.LEVEL, "*"))
        else:
            cursor.expect("(")
            if cursor.accept("*"):
                sensitivity.append((EdgeKind.LEVEL, "*"))
            else:
                while True:
                    tok = cursor.peek()
                    if tok is None:
                        raise _ParseError("unterminated sensitivity list", start.span)
                    if tok.text in ("posedge", "negedge"):
                        edge = EdgeKind.POSEDGE if tok.text == "posedge" else EdgeKind.NEGEDGE
                        cursor.advance()
                        name = cursor.expect_identifier().text
                        sensitivity.append((edge, name))
                    else:
                        name = cursor.expect_identifier().text
                        sensitivity.append((EdgeKind.LEVEL, name))
                    if cursor.accept("or") or cursor.accept(","):
                        continue
                    break
            cursor.expect(")")

        body = self._parse_statement()
        end_tok = cursor.sig[cursor.pos - 1]
        span = Span(start.span.byte_start, end_tok.span.byte_end, start.span.line, start.span.column)
        module.always_blocks.append(AlwaysInfo(sensitivity, body, span=span))

    # --- statements ---

    def _parse_statement(self):
        cursor = self.cursor
        tok = cursor.peek()
        if tok is None:
            raise _ParseError("expected statement, found end of input", cursor.sig[-1].span)
        if tok.text == "begin":
            return self._parse_block()
        if tok.text == "if":
            return self._parse_if()
        if tok.text == "case":
            return self._parse_case()
        if tok.text == ";":  # null statement
            cursor.advance()
            return Block([], span=tok.span)
        if tok.kind is TokenKind.IDENTIFIER:
            return self._parse_procedural_assign()
        raise _ParseError(f"unsupported statement start '{tok.text}'", tok.span)

    def _parse_block(self) -> Block:
        cursor = self.cursor
        start = cursor.expect("begin")
        statements = []
        while not cursor.check("end"):
            if cursor.at_end():
                raise _ParseError("unterminated begin block", start.span)
            statements.append(self._parse_statement())
        end = cursor.expect("end")
        return Block(statements, span=Span(start.span.byte_start, end.span.byte_end,
                                           start.span.line, start.span.column))

    def _parse_if(self) -> If:
        cursor = self.cursor
        start = cursor.expect("if")
        cursor.expect("(")
        cond = self._parse_expression()
        cursor.expect(")")
        then_branch = self._parse_statement()
        else_branch = None
        if cursor.accept("else"):
            else_branch = self._parse_statement()
        end_tok = cursor.sig[cursor.pos - 1]
        return If(cond, then_branch, else_branch,
                  span=Span(start.span.byte_start, end_tok.span.byte_end,
                            start.span.line, start.span.column))

    def _parse_case(self) -> Case:
        cursor = self.cursor
        start = cursor.expect("case")
        cursor.expect("(")
        subject = self._parse_expression()
        cursor.expect(")")
        items: list[CaseItem] = []
        while not cursor.check("endcase"):
            if cursor.at_end():
                raise _ParseError("unterminated case statement", start.span)
            if cursor.accept("default"):
                cursor.accept(":")
                items.append(CaseItem([], self._parse_statement()))
                continue
            labels = [self._parse_expression()]
            while cursor.accept(","):
                labels.append(self._parse_expression())
            cursor.expect(":")
            items.append(CaseItem(labels, self._parse_statement()))
        end = cursor.expect("endcase")
        return Case(subject, items, span=Span(start.span.byte_start, end.span.byte_end,
                                              start.span.line, start.span.column))

    def _parse_procedural_assign(self) -> Assign:
        cursor = self.cursor
        start = cursor.peek()
        assert start is not None
        target = self._parse_assign_target()
        if cursor.accept("<="):
            blocking = False
        elif cursor.accept("="):
            blocking = True
        else:
            tok = cursor.peek()
            found = tok.text if tok else "end of input"
            raise _ParseError(f"expected '=' or '<=', found '{found}'",
                              tok.span if tok else start.span)
        rhs = self._parse_expression()
        end = cursor.expect(";")
        return Assign(target, rhs, blocking,
                      span=Span(start.span.byte_start, end.span.byte_end,
                                start.span.line, start.span.column))

    def _parse_assign_target(self) -> Expr:
        cursor = self.cursor
        name_tok = cursor.expect_identifier()
        if cursor.check("["):
            return self._parse_select(name_tok)
        return SignalRef(name_tok.text, span=name_tok.span)

    # --- expressions ---

    def _parse_expression(self) -> Expr:
        return self._parse_ternary()

    def _parse_ternary(self) -> Expr:
        cond = self._parse_binary(0)
        if self.cursor.accept("?"):
            if_true = self._parse_ternary()
            self.cursor.expect(":")
            if_false = self._parse_ternary()
            return Ternary(cond, if_true, if_false, span=_expr_span(cond))
        return cond

    def _parse_binary(self, level: int) -> Expr:
        if level >= len(_BINARY_LEVELS):
            return self._parse_unary()
        ops = _BINARY_LEVELS[level]
        left = self._parse_binary(level + 1)
        while True:
            tok = self.cursor.peek()
            if tok is None or tok.kind is not TokenKind.OPERATOR or tok.text not in ops:
                return left
            self.cursor.advance()
            right = self._parse_binary(level + 1)
            left = BinaryOp(tok.text, left, right, span=_expr_span(left))

    def _parse_unary(self) -> Expr:
        tok = self.cursor.peek()
        if tok is not None and tok.kind is TokenKind.OPERATOR and tok.text in _UNARY_OPS:
            self.cursor.advance()
            operand = self._parse_unary()
            return UnaryOp(tok.text, operand, span=tok.span)
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        cursor = self.cursor
        tok = cursor.peek()
        if tok is None:
            raise _ParseError("expected expression, found end of input", cursor.sig[-1].span)

        if tok.kind is TokenKind.NUMBER:
            cursor.advance()
            value, width, has_xz = parse_number(tok.text)
            return Constant(value, width, span=tok.span, xz=has_xz)

        if tok.kind is TokenKind.IDENTIFIER:
            cursor.advance()
            if cursor.check("["):
                return self._parse_select(tok)
            return SignalRef(tok.text, span=tok.span)

        if tok.text == "(":
            cursor.advance()
            inner = self._parse_expression()
            cursor.expect(")")
            return inner

        if tok.text == "{":
            return self._parse_concat()

        raise _ParseError(f"unexpected token '{tok.text}' in expression", tok.span)

    def _parse_select(self, name_tok: Token) -> Expr:
        cursor = self.cursor
        cursor.expect("[")
        first = self._parse_expression()
        if cursor.accept(":"):
            if not isinstance(first, Constant):
                raise _ParseError("part-select bounds must be constants", name_tok.span)
            lsb_tok = cursor.peek()
            lsb = self._parse_expression()
            if not isinstance(lsb, Constant):
                span = lsb_tok.span if lsb_tok else name_tok.span
                raise _ParseError("part-select bounds must be constants", span)
            cursor.expect("]")
            return RangeSelect(name_tok.text, first.value, lsb.value, span=name_tok.span)
        cursor.expect("]")
        return Select(name_tok.text, first, span=name_tok.span)

    def _parse_concat(self) -> Expr:
        cursor = self.cursor
        start = cursor.expect("{")
        first = self._parse_expression()
        if cursor.check("{"):
            raise _ParseError("replication is outside the supported subset", start.span)
        parts = [first]
        while cursor.accept(","):
            parts.append(self._parse_expression())
        cursor.expect("}")
        return Concat(tuple(parts), span=start.span)

    # --- recovery ---

    def _skip_to(self, stop_texts: set[str]) -> Token | None:
        """Advance until (not past) a stop token; returns last consumed token."""
        cursor = self.cursor
        last = None
        while not cursor.at_end():
            tok = cursor.peek()
            assert tok is not None
            if tok.text in stop_texts or tok.text == "endmodule":
                return last
            last = cursor.advance()
        return last

    def _skip_simple(self, start: Token) -> None:
        self.cursor.advance()
        end = self._skip_to({";"}) or start
        self.cursor.accept(";")
        self._opaque(start, end, start.text)

    def _skip_block(self, start: Token, closer: str) -> None:
        cursor = self.cursor
        cursor.advance()
        end = start
        while not cursor.at_end():
            tok = cursor.advance()
            end = tok
            if tok.text == closer:
                break
            if tok.text == "endmodule":
                cursor.pos -= 1
                end = cursor.sig[cursor.pos - 1]
                break
        self._opaque(start, end, start.text)

    def _skip_statement_tokens(self) -> Token | None:
        """Balanced skip over one statement (used for initial blocks)."""
        cursor = self.cursor
        depth = 0
        last = None
        while not cursor.at_end():
            tok = cursor.peek()
            assert tok is not None
            if tok.text == "endmodule" and depth == 0:
                return last
            last = cursor.advance()
            if tok.text in ("begin", "case", "fork"):
                depth += 1
            elif tok.text in ("end", "endcase", "join"):
                depth -= 1
                if depth <= 0:
                    return last
            elif tok.text == ";" and depth == 0:
                return last
        return last


def _expr_span(expr: Expr) -> Span | None:
    return getattr(expr, "span", None)


def parse_number(text: str) -> tuple[int, int | None, bool]:
    """Decode a Verilog literal into (value, width, has_xz).

    ``width`` is None for unsized literals; x/z/? digits are reported via
    the flag and contribute zero bits to the value.
    """
    compact = text.replace("_", "").replace(" ", "").replace("\t", "").replace("\n", "")
    if "'" not in compact:
        if "." in compact or "e" in compact or "E" in compact:
            # Real literal: representable but outside two-state arithmetic.
            return int(float(compact)), None, True
        return int(compact), None, False

    size_text, rest = compact.split("'", 1)
    width = int(size_text) if size_text else None
    if rest and rest[0] in "sS":
        rest = rest[1:]
    base_char = rest[0].lower()
    digits = rest[1:]
    base = {"d": 10, "b": 2, "o": 8, "h": 16}[base_char]
    has_xz = any(c in "xXzZ?" for c in digits)
    cleaned = "".join("0" if c in "xXzZ?" else c for c in digits)
    value = int(cleaned, base) if cleaned else 0
    if width is not None:
        value &= (1 << width) - 1
    return value, width, has_xz
