import pytest

from globrename.core import (
    Binop, CType, Fun, Function, GlobVar, IntConst, Program, Return, Skip, Var, intern,
)
from globrename.rename import (
    ALREADY_OCCURS, CATALOG, DEFINES_Y, KEYWORD, MUTANTS, SHADOWING, VOLATILE, X_IN_OWN_INIT,
    X_IS_FUNCTION, X_IS_MAIN, X_NOT_GLOBAL, Y_IN_FUNCTION, Y_IS_MAIN, RenameError,
    RenameRequest, change_ident_untyped, check_sufficient_precondition, covers, force_body,
    mutated, no_cover_in_prog, propagate_change_ident, rename_definition,
    rename_globvar_hard, rename_statement,
)
from globrename.syntax import parse, pretty_print

from conftest import CAPTURE, FREE_Y, NO_CAPTURE, ids

x, y, z, f, g, main = ids("x", "y", "z", "f", "g", "main")


def function(src: str) -> Function:
    p = parse(src)
    return next(fn for _, fn in p.functions())


def refusal(x_, y_, p) -> str:
    with pytest.raises(RenameError) as info:
        rename_globvar_hard(x_, y_, p)
    return info.value.message


def test_catalog_is_closed():
    assert len(CATALOG) == 11 == len(set(CATALOG))
    assert KEYWORD == "target is a C keyword"
    with pytest.raises(ValueError):
        RenameError("something else")


def test_request_requires_distinct_names():
    RenameRequest(x, y)
    with pytest.raises(ValueError):
        RenameRequest(x, x)


@pytest.mark.parametrize("i,expected", [(x, y), (z, z), (f, f)])
def test_change_ident_untyped(i, expected):
    assert change_ident_untyped(x, y, i) == expected


def test_change_ident_untyped_collision():
    with pytest.raises(RenameError) as info:
        change_ident_untyped(x, y, y)
    assert info.value.message == ALREADY_OCCURS


def test_rename_statement_leaf():
    assert rename_statement(x, y, Return(Binop("+", Var(x), IntConst(1)))) == \
        Return(Binop("+", Var(y), IntConst(1)))


def test_rename_statement_collision():
    with pytest.raises(RenameError, match=ALREADY_OCCURS):
        rename_statement(x, y, Return(Var(y)))


def test_rename_statement_skip():
    assert rename_statement(x, y, Skip()) == Skip()


def test_rename_statement_renames_callee_and_target():
    s = parse("int g(void){ x = x + 1; return x(2); }").lookup(g).fn.body
    assert pretty_print(Program(((g, Fun(Function(CType.INT, (), (), rename_statement(x, y, s)))),), main)) \
        == "int g(void) {\n  y = y + 1;\n  return y(2);\n}\n"


def test_force_body():
    assert force_body(x, y, function("int g(void){return x;}")).body == Return(Var(y))
    with pytest.raises(RenameError):
        force_body(x, y, function("int g(void){return y;}"))
    empty = Function(CType.INT, (), (), Skip())
    assert force_body(x, y, empty) == empty


def test_propagate_case3_capture():
    with pytest.raises(RenameError) as info:
        propagate_change_ident(x, y, function(CAPTURE))
    assert info.value.message == SHADOWING


def test_propagate_case3_no_occurrence():
    fn = function(NO_CAPTURE)
    assert propagate_change_ident(x, y, fn) == fn


def test_propagate_case2_free_y():
    with pytest.raises(RenameError) as info:
        propagate_change_ident(x, y, function(FREE_Y))
    assert info.value.message == Y_IN_FUNCTION


def test_propagate_case2_no_y():
    fn = function("int f(int x){ return x + 1; }")
    assert propagate_change_ident(x, y, fn) == fn


def test_propagate_case1_double_shadow():
    fn = function("int f(int x){ int y; y = x; return y; }")
    assert propagate_change_ident(x, y, fn) == fn


def test_propagate_case4_renames():
    fn = function("int f(int a){ return a + x; }")
    assert propagate_change_ident(x, y, fn).body == Return(Binop("+", Var(intern("a")), Var(y)))


def test_rename_definition_renames_own_def():
    d = (x, GlobVar(CType.INT, (IntConst(1),), False))
    assert rename_definition(x, y, d) == (y, GlobVar(CType.INT, (IntConst(1),), False))


@pytest.mark.parametrize("d,message", [
    ((x, Fun(Function(CType.INT, (), (), Skip()))), X_IS_FUNCTION),
    ((x, GlobVar(CType.INT, (Binop("+", Var(x), IntConst(1)),), False)), X_IN_OWN_INIT),
    ((x, GlobVar(CType.INT, (Var(y),), False)), ALREADY_OCCURS),
    ((x, GlobVar(CType.INT, (), True)), VOLATILE),
    ((y, GlobVar(CType.INT, (), False)), DEFINES_Y),
    ((y, Fun(Function(CType.INT, (), (), Skip()))), DEFINES_Y),
    ((z, GlobVar(CType.INT, (Var(y),), False)), ALREADY_OCCURS),
])
def test_rename_definition_refusals(d, message):
    with pytest.raises(RenameError) as info:
        rename_definition(x, y, d)
    assert info.value.message == message
    assert info.value.location == d[0]


def test_rename_definition_check_order():
    # x in own init is reported before volatility and y in init
    d = (x, GlobVar(CType.INT, (Binop("+", Var(x), Var(y)),), True))
    with pytest.raises(RenameError, match=X_IN_OWN_INIT):
        rename_definition(x, y, d)
    d = (x, GlobVar(CType.INT, (Var(y),), True))
    with pytest.raises(RenameError, match=ALREADY_OCCURS):
        rename_definition(x, y, d)


def test_rename_definition_other_initializer():
    d = (z, GlobVar(CType.INT, (Binop("+", Var(x), IntConst(2)),), False))
    assert rename_definition(x, y, d)[1].init == (Binop("+", Var(y), IntConst(2)),)


def test_rename_no_capture_program():
    p = parse(NO_CAPTURE)
    r = rename_globvar_hard(x, y, p)
    assert [name for name, _ in r.defs] == [y, f]
    assert r.lookup(f) == p.lookup(f)


@pytest.mark.parametrize("src,x_,y_,message", [
    (CAPTURE, x, y, SHADOWING),
    (FREE_Y, x, y, Y_IN_FUNCTION),
    ("int main(){return 0;}", main, y, X_IS_MAIN),
    ("int x; int main(){return 0;}", x, main, Y_IS_MAIN),
    ("int x;", z, y, X_NOT_GLOBAL),
    ("int x(void){return 0;}", x, y, X_NOT_GLOBAL),
    ("volatile int x;", x, y, VOLATILE),
    ("int x; int y;", x, y, DEFINES_Y),
    ("int x; int y(void){return 0;}", x, y, DEFINES_Y),
    ("int x; int main(){ return y(); }", x, y, ALREADY_OCCURS),
])
def test_rename_globvar_hard_refusals(src, x_, y_, message):
    assert refusal(x_, y_, parse(src)) == message


def test_rename_globvar_hard_same_name():
    with pytest.raises(ValueError):
        rename_globvar_hard(x, x, parse("int x;"))


def test_rename_preserves_shape():
    src = "int a = 1; volatile int v; int x = 2; int f(int q){ return q + x + v; } int main(){ x = f(a); return x; }"
    p = parse(src)
    r = rename_globvar_hard(x, y, p)
    assert r.main == p.main
    assert len(r.defs) == len(p.defs)
    for (n1, d1), (n2, d2) in zip(p.defs, r.defs):
        assert type(d1) is type(d2)
        if isinstance(d1, GlobVar):
            assert (d1.ty, d1.volatile) == (d2.ty, d2.volatile)
        assert n2 == (y if n1 == x else n1)
    assert pretty_print(r) == pretty_print(p).replace("x", "y")


def test_first_error_aborts_in_def_order():
    p = parse("int x; int f(int y){ return x; } int g(int x){ return y; }")
    assert refusal(x, y, p) == SHADOWING
    p = parse("int x; int g(int x){ return y; } int f(int y){ return x; }")
    assert refusal(x, y, p) == Y_IN_FUNCTION


def test_covers():
    assert covers(y, x, function(CAPTURE))
    assert not covers(y, x, function(NO_CAPTURE))
    assert not covers(y, x, function("int f(int x, int y){ return x + y; }"))


def test_no_cover_in_prog():
    assert not no_cover_in_prog(x, y, parse(CAPTURE))
    assert no_cover_in_prog(x, y, parse(NO_CAPTURE))
    assert no_cover_in_prog(x, y, parse(""))


def test_precondition_no_capture_passes():
    report = check_sufficient_precondition(x, y, parse(NO_CAPTURE))
    assert report.passed and report.violated == []
    assert len(report.clauses) == 11


def test_precondition_capture_fails():
    report = check_sufficient_precondition(x, y, parse(CAPTURE))
    assert set(report.violated) == {"no_cover_in_prog x y", "not appears_free x"}


def test_precondition_same_name():
    assert "x != y" in check_sufficient_precondition(x, x, parse("int x;")).violated


def test_precondition_volatile():
    assert "not defines_volatile_globvar x" in \
        check_sufficient_precondition(x, y, parse("volatile int x;")).violated


def test_mutants_are_known_and_scoped():
    assert len(MUTANTS) == 4
    with pytest.raises(ValueError):
        with mutated("nope"):
            pass
    p = parse("volatile int x;")
    with mutated("skip_volatile"):
        assert rename_globvar_hard(x, y, p).lookup(y).volatile
    assert refusal(x, y, p) == VOLATILE


@pytest.mark.parametrize("mutant,src", [
    ("drop_case2", FREE_Y),
    ("drop_case3", "int x; int f(int y){ return x; }"),
    ("skip_volatile", "volatile int x;"),
    ("skip_y_in_init", "int y0; int x = y + 1;"),
])
def test_each_mutant_accepts_a_program_the_engine_refuses(mutant, src):
    p = parse(src)
    with pytest.raises(RenameError):
        rename_globvar_hard(x, y, p)
    with mutated(mutant):
        rename_globvar_hard(x, y, p)
