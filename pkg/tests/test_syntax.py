import pytest

from globrename.core import (
    Assign, Binop, CType, ExprStmt, Fun, Function, GlobVar, IntConst, Program, Return,
    Skip, Var, intern,
)
from globrename.syntax import (
    C99_KEYWORDS, ParseError, SourceFile, format_expr, is_c_keyword, parse, parse_file,
    pretty_print,
)

from conftest import CAPTURE, CORPUS, NO_CAPTURE, TWO_PRINTF, corpus, ids

x, y, f = ids("x", "y", "f")


def test_capture_program_shape():
    p = parse(CAPTURE)
    assert [name for name, _ in p.defs] == [x, f]
    assert isinstance(p.lookup(x), GlobVar)
    fn = p.lookup(f).fn
    assert fn.params == ((y, CType.INT),)
    assert fn.body == Return(Binop("+", Var(y), Var(x)))


def test_empty_file_is_an_empty_program():
    p = parse("")
    assert p.defs == ()
    assert pretty_print(p) == ""


def test_parser_never_uniquifies_names():
    p = parse("int x; int f(int x){ return x; }")
    assert p.lookup(x).__class__ is GlobVar
    assert p.lookup(f).fn.params[0][0] == x
    assert p.lookup(f).fn.body == Return(Var(x))


def test_block_declarations_are_hoisted():
    fn = parse(corpus("block_vars.c")).lookup(intern("main")).fn
    assert fn.ret == CType.VOID
    assert fn.locals == ((y, CType.INT),)


def test_sourcefile_and_parse_file_agree():
    path = CORPUS / "shadow_capture.c"
    assert parse(SourceFile.read(path)) == parse_file(path) == parse(CAPTURE)


@pytest.mark.parametrize("src,line,column", [
    ("int 2x;", 1, 5),
    ("int x", 1, 6),
    ("#include <stdio.h>\n", 1, 1),
    ("int f();", 1, 8),
    ("float x;", 1, 1),
    ("int x = f();", 1, 9),
    ("int main(){\n  goto l;\n}", 2, 3),
    ('int main(){ return "s"; }', 1, 20),
    ("int f(int a){ int a; return 0; }", 1, 19),
    ("int x; int x;", 1, 12),
    ("int main(){ return 1 ++ 2; }", 1, 22),
    ('int main(){ printf("unterminated); }', 1, 20),
])
def test_parse_errors_carry_positions(src, line, column):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert (info.value.line, info.value.column) == (line, column)
    assert info.value.line >= 1 and info.value.column >= 1


def test_comments_are_skipped():
    assert parse("/* a */ int x; // b\n") == parse("int x;")


@pytest.mark.parametrize("src", [
    CAPTURE, NO_CAPTURE, TWO_PRINTF,
    "volatile int v = 3; int main(void){ v = v + 1; return v; }",
    "int g = -1; int f(int a, int b){ int c; if (a < b) c = a; else c = b;"
    " while (c) c--; return -(a - b) * (c + 1) / 2 % 3; }",
    "int main(void){ { int y = 1; y++; } return 0; }",
    "void h(void){ printf(\"x=%d\\n\", 1); return; }",
    "int f(void){ return !(1 && 0 || 2 != 3) <= 4 == (5 >= 6); }",
    "int f(void){ return 1 - (2 - 3) - 4; }",
    "int f(void){ return - -1; }",
])
def test_round_trip(src):
    p = parse(src)
    assert parse(pretty_print(p)) == p


@pytest.mark.parametrize("name", sorted(p.name for p in CORPUS.glob("*.c")))
def test_corpus_round_trip(name):
    p = parse(corpus(name))
    assert parse(pretty_print(p)) == p


def test_round_trip_preserves_volatile():
    p = parse("volatile int v;")
    assert parse(pretty_print(p)).lookup(intern("v")).volatile


def test_skip_body_prints_empty_function():
    fn = Function(CType.INT, (), (), Skip())
    text = pretty_print(Program(((f, Fun(fn)),), intern("main")))
    assert text == "int f(void) {\n}\n"
    assert parse(text).lookup(f).fn == fn


def test_golden_output():
    src = ("int x = 1;\nint f(int a){ int b; b = a * (x + 2); if (b) { return b; } return -a; }\n"
           "int main(){ return f(x); }")
    assert pretty_print(parse(src)) == (
        "int x = 1;\n"
        "int f(int a) {\n"
        "  int b;\n"
        "  b = a * (x + 2);\n"
        "  if (b) {\n"
        "    return b;\n"
        "  }\n"
        "  return -a;\n"
        "}\n"
        "int main(void) {\n"
        "  return f(x);\n"
        "}\n"
    )


def test_compound_assignment_is_desugared():
    p = parse("int x; int main(){ x += 2; ++x; return x; }")
    body = p.lookup(intern("main")).fn.body
    assert body.first == ExprStmt(Assign(Var(x), Binop("+", Var(x), IntConst(2))))


def test_format_expr_precedence():
    e = Binop("*", Binop("+", Var(x), IntConst(1)), IntConst(2))
    assert format_expr(e) == "(x + 1) * 2"
    assert format_expr(Binop("-", IntConst(1), Binop("-", IntConst(2), IntConst(3)))) == "1 - (2 - 3)"


@pytest.mark.parametrize("word,expected", [
    ("while", True), ("volatile", True), ("_Bool", True), ("restrict", True),
    ("y", False), ("main", False), ("printf", False), ("While", False),
])
def test_is_c_keyword(word, expected):
    assert is_c_keyword(word) is expected


def test_keyword_list_is_c99():
    assert len(C99_KEYWORDS) == 37
    assert "_Alignas" not in C99_KEYWORDS
