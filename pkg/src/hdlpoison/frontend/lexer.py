"""Lossless lexer for the Verilog-2005 subset, plus comment stripping.

``lex`` is total: any byte sequence produces a token stream whose
concatenated text equals the input. Unknown characters become single-char
punctuation tokens; unterminated block comments and strings run to end of
file and set a diagnostic flag on the stream.
"""

from __future__ import annotations

import re

from .tokens import Span, Token, TokenKind, TokenStream, VERILOG_KEYWORDS

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
# Sized/based literals (8'hFF, 4'b10_10, 'd3), then plain decimal/real.
_NUMBER_RE = re.compile(
    r"""
    (?:[0-9][0-9_]*)?\s*'\s*[sS]?[dDbBoOhH][0-9a-fA-FxXzZ?_]+
    | [0-9][0-9_]*(?:\.[0-9][0-9_]*)?(?:[eE][+-]?[0-9]+)?
    """,
    re.VERBOSE,
)
_WHITESPACE_RE = re.compile(r"[ \t\r\n\f]+")
_DIRECTIVE_RE = re.compile(r"`[A-Za-z_][A-Za-z0-9_$]*")

# Longest-match-first operator table.
_OPERATORS = [
    "<<<", ">>>", "===", "!==",
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":",
]
_PUNCTUATION = set("()[]{};,.#@$\\")


def lex(source: str) -> TokenStream:
    """Tokenize ``source`` losslessly; never raises on malformed input."""
    stream = TokenStream()
    pos = 0
    byte_pos = 0
    line = 1
    col = 0
    n = len(source)

    def emit(kind: TokenKind, text: str) -> None:
        nonlocal pos, byte_pos, line, col
        nbytes = len(text.encode("utf-8", "surrogateescape"))
        stream.tokens.append(
            Token(kind, text, Span(byte_pos, byte_pos + nbytes, line, col))
        )
        pos += len(text)
        byte_pos += nbytes
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n") - 1
        else:
            col += len(text)

    while pos < n:
        ch = source[pos]

        m = _WHITESPACE_RE.match(source, pos)
        if m:
            emit(TokenKind.WHITESPACE, m.group())
            continue

        if source.startswith("//", pos):
            end = source.find("\n", pos)
            text = source[pos:] if end < 0 else source[pos:end]
            emit(TokenKind.LINE_COMMENT, text)
            continue

        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end < 0:
                stream.flags.append(f"unterminated block comment at byte {byte_pos}")
                emit(TokenKind.BLOCK_COMMENT, source[pos:])
            else:
                emit(TokenKind.BLOCK_COMMENT, source[pos : end + 2])
            continue

        if ch == '"':
            text = _scan_string(source, pos)
            if not text.endswith('"') or len(text) < 2:
                stream.flags.append(f"unterminated string at byte {byte_pos}")
            emit(TokenKind.STRING, text)
            continue

        if ch == "`":
            m = _DIRECTIVE_RE.match(source, pos)
            if m:
                emit(TokenKind.DIRECTIVE, m.group())
            else:
                emit(TokenKind.PUNCTUATION, ch)
            continue

        m = _NUMBER_RE.match(source, pos)
        if m and (ch.isdigit() or ch == "'"):
            text = m.group()
            # A bare apostrophe with no base char is not a number.
            if text:
                emit(TokenKind.NUMBER, text)
                continue

        m = _IDENT_RE.match(source, pos)
        if m:
            text = m.group()
            kind = TokenKind.KEYWORD if text in VERILOG_KEYWORDS else TokenKind.IDENTIFIER
            emit(kind, text)
            continue

        for op in _OPERATORS:
            if source.startswith(op, pos):
                emit(TokenKind.OPERATOR, op)
                break
        else:
            # Structural or unknown character: single-byte token, never a failure.
            emit(TokenKind.PUNCTUATION, ch)

    return stream


def _scan_string(source: str, pos: int) -> str:
    i = pos + 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\\" and i + 1 < n:
            i += 2
            continue
        if c == '"':
            return source[pos : i + 1]
        if c == "\n":
            # Verilog strings may not span lines; treat as unterminated.
            return source[pos:i]
        i += 1
    return source[pos:]


def render(stream: TokenStream) -> str:
    """Inverse of ``lex``: concatenate token texts."""
    return "".join(t.text for t in stream.tokens)


def strip_comments(source: str) -> str:
    """Replace every comment token's text with a single space.

    Line comments do not own their trailing newline, so line structure is
    preserved. Idempotent, and leaves all non-comment bytes untouched.
    """
    out = []
    for tok in lex(source):
        out.append(" " if tok.is_comment() else tok.text)
    return "".join(out)
