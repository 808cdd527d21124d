from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdlpoison.designs import TEMPLATES
from hdlpoison.frontend import TokenKind, lex, render, strip_comments


def test_simple_statement_tokens():
    stream = lex("assign y = a + b;")
    kinds = [t.kind for t in stream if not t.is_trivia()]
    assert kinds[0] is TokenKind.KEYWORD
    assert stream.tokens[0].text == "assign"
    texts = [t.text for t in stream if t.kind is TokenKind.IDENTIFIER]
    assert texts == ["y", "a", "b"]
    assert render(stream) == "assign y = a + b;"


def test_line_comment_survives_lexing():
    stream = lex("// secure memory\nmodule m;")
    first = stream.tokens[0]
    assert first.kind is TokenKind.LINE_COMMENT
    assert first.text == "// secure memory"


def test_empty_input():
    assert len(lex("")) == 0


def test_spans_strictly_increasing_and_cover_input():
    src = TEMPLATES["fifo"].source
    stream = lex(src)
    pos = 0
    for tok in stream:
        assert tok.span.byte_start == pos
        assert tok.span.byte_end > tok.span.byte_start
        pos = tok.span.byte_end
    assert pos == len(src.encode())


def test_number_literals():
    stream = lex("8'hFF 4'b1010 16'd255 42, 'hAB 3'b1_01")
    numbers = [t.text for t in stream if t.kind is TokenKind.NUMBER]
    assert numbers == ["8'hFF", "4'b1010", "16'd255", "42", "'hAB", "3'b1_01"]


def test_sized_literal_with_space_is_one_token():
    numbers = [t.text for t in lex("x = 8 'hFF;") if t.kind is TokenKind.NUMBER]
    assert numbers == ["8 'hFF"]


def test_unterminated_block_comment_flagged():
    stream = lex("module m; /* never closed")
    assert any("unterminated block comment" in f for f in stream.flags)
    assert render(stream) == "module m; /* never closed"


def test_unterminated_string_flagged():
    stream = lex('x = "oops\ny;')
    assert any("unterminated string" in f for f in stream.flags)
    assert render(stream) == 'x = "oops\ny;'


def test_unknown_characters_become_single_tokens():
    src = "module m; € §§ endmodule"
    assert render(lex(src)) == src


def test_roundtrip_all_templates():
    for template in TEMPLATES.values():
        assert render(lex(template.source)) == template.source


@given(st.text(alphabet=st.sampled_from(list(
    "abcdefghijklmnopqrstuvwxyzABCDEFXZ_0123456789 \t\n'\"/*=<>!&|^~+-{}[]();:,.@`#?%$"
)), max_size=300))
@settings(max_examples=300, deadline=None)
def test_roundtrip_random_verilog_like(s):
    assert render(lex(s)) == s


def test_roundtrip_random_mutations_of_templates():
    rng = random.Random(1234)
    sources = [t.source for t in TEMPLATES.values()]
    garbage = "\"'/*//\n\t @#[]{}<=>~^&|"
    for _ in range(200):
        base = rng.choice(sources)
        a, b = sorted(rng.randrange(len(base)) for _ in range(2))
        mutated = base[:a] + rng.choice(garbage) * rng.randrange(1, 4) + base[b:]
        assert render(lex(mutated)) == mutated


def test_strip_comments_definition():
    assert strip_comments("a; // secure\nb;") == "a;  \nb;"


def test_strip_comments_idempotent():
    for template in TEMPLATES.values():
        once = strip_comments(template.source)
        assert strip_comments(once) == once


def test_strip_comments_removes_trigger_words():
    src = "// simple and secure implementation\nmodule m;\nendmodule\n"
    out = strip_comments(src)
    assert "simple" not in out and "secure" not in out
    assert "module m;" in out


def test_strip_comments_preserves_line_count():
    src = "a; // one\nb; /* two */ c;\nd;"
    assert strip_comments(src).count("\n") == src.count("\n")


def test_strip_comments_changes_only_comment_bytes():
    src = "assign x = 1; // drop me\nassign y = 2;"
    out = strip_comments(src)
    stream = lex(src)
    for tok in stream:
        if not tok.is_comment():
            assert tok.text in out


@pytest.mark.parametrize("kind,text", [
    (TokenKind.KEYWORD, "negedge"),
    (TokenKind.KEYWORD, "always"),
    (TokenKind.IDENTIFIER, "negedge_x"),
    (TokenKind.IDENTIFIER, "Always"),
])
def test_keyword_vs_identifier_case_sensitivity(kind, text):
    tok = [t for t in lex(text) if not t.is_trivia()][0]
    assert tok.kind is kind
