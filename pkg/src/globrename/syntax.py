"""Lexer, parser and pretty-printer for the mini-C subset.

Block-scoped declarations are hoisted to the enclosing function's local
variables, and an initializer becomes an assignment at the declaration
point.  The parser never
uniquifies names, so shadowing stays visible in the tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import (
    Assign, Binop, Call, CType, Expr, ExprStmt, Fun, Function, GlobVar, Ident,
    If, IntConst, Program, Return, Seq, Skip, Statement, StrConst, Unop, Var,
    While, intern, seq, subexprs,
)

C99_KEYWORDS = frozenset("""
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary
""".split())


def is_c_keyword(text: str) -> bool:
    return text in C99_KEYWORDS


@dataclass(frozen=True)
class SourceFile:
    path: Optional[Path]
    text: str

    @classmethod
    def read(cls, path) -> "SourceFile":
        path = Path(path)
        return cls(path, path.read_text(encoding="utf-8"))


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str) -> None:
        super().__init__(f"{line}:{column}: {message}")
        self.line = max(line, 1)
        self.column = max(column, 1)
        self.message = message


# -- lexer --------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, string, op, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>/\*.*?\*/|//[^\n]*)
  | (?P<pp>\#[^\n]*)
  | (?P<int>[0-9][0-9A-Za-z_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|<=|>=|==|!=|&&|\|\||[-+*/%<>=!(){};,])
""", re.VERBOSE | re.DOTALL)

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"', "0": "\0"}


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                raise ParseError(line, col, f"unsupported escape \\{nxt}")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "pp":
            raise ParseError(line, col, "pre-processor directives are not supported")
        if kind == "int":
            if not lexeme.isdigit():
                raise ParseError(line, col, f"malformed number or identifier {lexeme!r}")
            tokens.append(Token("int", lexeme, line, col))
        elif kind == "string":
            tokens.append(Token("string", _unescape(lexeme[1:-1], line, col), line, col))
        elif kind in ("ident", "op"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -------------------------------------------------------------------

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]
_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%"}
_SUPPORTED_KEYWORDS = {"int", "void", "volatile", "if", "else", "while", "return"}


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.pos = 0
        # per-function hoisting state
        self.binders: Optional[list[Ident]] = None
        self.hoisted: list[tuple[Ident, CType]] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        return ParseError(tok.line, tok.col, msg)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of file"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self) -> Ident:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected identifier, found {tok.text or 'end of file'!r}")
        if is_c_keyword(tok.text):
            raise self.error(f"keyword {tok.text!r} used as identifier")
        self.pos += 1
        return intern(tok.text)

    def check_keyword(self) -> None:
        tok = self.tok
        if tok.kind == "ident" and is_c_keyword(tok.text) and tok.text not in _SUPPORTED_KEYWORDS:
            raise self.error(f"unsupported construct {tok.text!r}")

    # top level
    def program(self) -> Program:
        defs: list[tuple[Ident, object]] = []
        names: set[Ident] = set()
        while self.tok.kind != "eof":
            for name_tok, name, d in self.external_declaration():
                if name in names:
                    raise self.error(f"duplicate definition of {name}", name_tok)
                names.add(name)
                defs.append((name, d))
        return Program(tuple(defs), intern("main"))

    def external_declaration(self):
        self.check_keyword()
        volatile = self.accept("volatile")
        ty = self.type_name()
        volatile = self.accept("volatile") or volatile
        name_tok = self.tok
        name = self.ident()
        if self.at("("):
            if volatile:
                raise self.error("volatile function", name_tok)
            return [(name_tok, name, Fun(self.function(ty)))]
        if ty is not CType.INT:
            raise self.error("global variables must have type int", name_tok)
        out = [(name_tok, name, self.global_init(volatile))]
        while self.accept(","):
            name_tok = self.tok
            name = self.ident()
            out.append((name_tok, name, self.global_init(volatile)))
        self.expect(";")
        return out

    def global_init(self, volatile: bool) -> GlobVar:
        if not self.accept("="):
            return GlobVar(CType.INT, (), volatile)
        tok = self.tok
        e = self.assignment()
        if any(isinstance(n, (Assign, Call)) for n in subexprs(e)):
            raise self.error("initializer must be a constant expression", tok)
        return GlobVar(CType.INT, (e,), volatile)

    def type_name(self) -> CType:
        if self.accept("int"):
            return CType.INT
        if self.accept("void"):
            return CType.VOID
        raise self.error(f"expected type, found {self.tok.text or 'end of file'!r}")

    def function(self, ret: CType) -> Function:
        self.expect("(")
        params: list[tuple[Ident, CType]] = []
        if self.at("void") and self.peek().text == ")":
            self.pos += 1
        elif not self.at(")"):
            while True:
                if self.type_name() is not CType.INT:
                    raise self.error("parameters must have type int")
                params.append((self.ident(), CType.INT))
                if not self.accept(","):
                    break
        self.expect(")")
        if not self.at("{"):
            raise self.error("function declarations without a body are not supported")
        self.binders = []
        self.hoisted = []
        for name, _ in params:
            self.bind(name, None)
        body = self.block()
        fn = Function(ret, tuple(params), tuple(self.hoisted), body)
        self.binders = None
        return fn

    def bind(self, name: Ident, tok: Optional[Token]) -> None:
        if name in self.binders:
            raise self.error(f"{name} declared twice in the same function", tok)
        self.binders.append(name)

    # statements
    def block(self) -> Statement:
        self.expect("{")
        items: list[Statement] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            if self.at("int") or self.at("volatile"):
                items.extend(self.local_declaration())
            else:
                items.append(self.statement())
        self.expect("}")
        return seq(*items)

    def local_declaration(self) -> list[Statement]:
        if self.at("volatile"):
            raise self.error("volatile locals are not supported")
        self.expect("int")
        out = []
        while True:
            tok = self.tok
            name = self.ident()
            self.bind(name, tok)
            self.hoisted.append((name, CType.INT))
            if self.accept("="):
                out.append(ExprStmt(Assign(Var(name), self.assignment())))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def statement(self) -> Statement:
        self.check_keyword()
        if self.accept(";"):
            return Skip()
        if self.at("{"):
            return self.block()
        if self.accept("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            orelse = self.statement() if self.accept("else") else Skip()
            return If(cond, then, orelse)
        if self.accept("while"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return While(cond, self.statement())
        if self.accept("return"):
            if self.accept(";"):
                return Return(None)
            e = self.expression()
            self.expect(";")
            return Return(e)
        if self.at("int") or self.at("void") or self.at("volatile"):
            raise self.error("declaration not allowed here")
        if self.tok.kind == "ident" and self.peek().text in ("++", "--") and self.peek(2).text == ";":
            name = self.ident()
            op = "+" if self.tok.text == "++" else "-"
            self.pos += 2
            return ExprStmt(Assign(Var(name), Binop(op, Var(name), IntConst(1))))
        e = self.expression()
        self.expect(";")
        return ExprStmt(e)

    # expressions
    def expression(self) -> Expr:
        return self.assignment()

    def assignment(self) -> Expr:
        tok = self.tok
        lhs = self.binary(0)
        if self.tok.kind == "op" and (self.tok.text == "=" or self.tok.text in _COMPOUND):
            op = self.tok.text
            if not isinstance(lhs, Var):
                raise self.error("assignment target must be a variable", tok)
            self.pos += 1
            rhs = self.assignment()
            if op != "=":
                rhs = Binop(_COMPOUND[op], lhs, rhs)
            return Assign(lhs, rhs)
        return lhs

    def binary(self, level: int) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        ops = _BINARY_LEVELS[level]
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok.text
            self.pos += 1
            left = Binop(op, left, self.binary(level + 1))
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("-", "!"):
            op = self.tok.text
            self.pos += 1
            return Unop(op, self.unary())
        if self.tok.kind == "op" and self.tok.text in ("++", "--"):
            op = "+" if self.tok.text == "++" else "-"
            self.pos += 1
            tok = self.tok
            target = self.unary()
            if not isinstance(target, Var):
                raise self.error("increment target must be a variable", tok)
            return Assign(target, Binop(op, target, IntConst(1)))
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.primary()
        if self.tok.kind == "op" and self.tok.text in ("++", "--"):
            raise self.error("postfix increment is only supported as a statement")
        return e

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return IntConst(int(tok.text))
        if tok.kind == "string":
            raise self.error("string literals are only allowed as call arguments")
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.check_keyword()
            name = self.ident()
            if self.accept("("):
                return Call(name, self.arguments())
            return Var(name)
        raise self.error(f"unexpected {tok.text or 'end of file'!r}")

    def arguments(self) -> tuple[Expr, ...]:
        args: list[Expr] = []
        if self.accept(")"):
            return ()
        while True:
            if self.tok.kind == "string" and self.peek().text in (",", ")"):
                args.append(StrConst(self.tok.text))
                self.pos += 1
            else:
                args.append(self.assignment())
            if self.accept(")"):
                return tuple(args)
            self.expect(",")


def parse(src) -> Program:
    """Parse a :class:`SourceFile` or a plain string into a Program."""
    text = src.text if isinstance(src, SourceFile) else src
    return _Parser(text).program()


def parse_file(path) -> Program:
    return parse(SourceFile.read(path))


# -- pretty-printer -------------------------------------------------------------

_PREC = {op: 2 + lvl for lvl, ops in enumerate(_BINARY_LEVELS) for op in ops}
_ASSIGN_PREC = 1
_UNARY_PREC = len(_BINARY_LEVELS) + 2
_ATOM_PREC = _UNARY_PREC + 1


def _escape(text: str) -> str:
    return (text.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t").replace("\0", "\\0"))


def _expr_prec(e: Expr) -> int:
    if isinstance(e, Binop):
        return _PREC[e.op]
    if isinstance(e, Assign):
        return _ASSIGN_PREC
    if isinstance(e, Unop):
        return _UNARY_PREC
    if isinstance(e, IntConst) and e.value < 0:
        return _UNARY_PREC
    return _ATOM_PREC


def format_expr(e: Expr, min_prec: int = 0) -> str:
    match e:
        case Var(ident=i):
            text = i.name
        case IntConst(value=v):
            text = str(v)
        case StrConst(text=s):
            text = f'"{_escape(s)}"'
        case Unop(op=op, operand=a):
            text = op + format_expr(a, _ATOM_PREC)
        case Binop(op=op, left=a, right=b):
            p = _PREC[op]
            text = f"{format_expr(a, p)} {op} {format_expr(b, p + 1)}"
        case Assign(target=t, value=v):
            text = f"{t.ident.name} = {format_expr(v, _ASSIGN_PREC)}"
        case Call(callee=f, args=args):
            text = f"{f.name}({', '.join(format_expr(a, _ASSIGN_PREC) for a in args)})"
        case _:
            raise TypeError(f"cannot print {e!r}")
    if _expr_prec(e) < min_prec:
        return f"({text})"
    return text


def _spine(s: Statement) -> list[Statement]:
    items = []
    while isinstance(s, Seq):
        items.append(s.first)
        s = s.second
    items.append(s)
    return items


def _block_lines(s: Statement, indent: str) -> list[str]:
    if isinstance(s, Skip):
        return []
    lines = []
    for item in _spine(s):
        lines.extend(_statement_lines(item, indent))
    return lines


def _braced(s: Statement, indent: str) -> list[str]:
    return ["{", *_block_lines(s, indent + "  "), indent + "}"]


def _statement_lines(s: Statement, indent: str) -> list[str]:
    match s:
        case Skip():
            return [indent + ";"]
        case ExprStmt(expr=e):
            return [f"{indent}{format_expr(e)};"]
        case Return(value=None):
            return [indent + "return;"]
        case Return(value=e):
            return [f"{indent}return {format_expr(e)};"]
        case Seq():
            body = _braced(s, indent)
            return [indent + body[0], *body[1:]]
        case If(cond=c, then=a, orelse=b):
            then = _braced(a, indent)
            lines = [f"{indent}if ({format_expr(c)}) {then[0]}", *then[1:]]
            if not isinstance(b, Skip):
                other = _braced(b, indent)
                lines[-1] += f" else {other[0]}"
                lines.extend(other[1:])
            return lines
        case While(cond=c, body=b):
            body = _braced(b, indent)
            return [f"{indent}while ({format_expr(c)}) {body[0]}", *body[1:]]
    raise TypeError(f"cannot print {s!r}")


def _format_def(name: Ident, d) -> list[str]:
    if isinstance(d, GlobVar):
        prefix = "volatile int" if d.volatile else "int"
        init = f" = {format_expr(d.init[0], _ASSIGN_PREC)}" if d.init else ""
        return [f"{prefix} {name.name}{init};"]
    fn = d.fn
    params = ", ".join(f"{t.value} {i.name}" for i, t in fn.params) or "void"
    lines = [f"{fn.ret.value} {name.name}({params}) {{"]
    lines.extend(f"  {t.value} {i.name};" for i, t in fn.locals)
    lines.extend(_block_lines(fn.body, "  "))
    lines.append("}")
    return lines


def pretty_print(p: Program) -> str:
    lines: list[str] = []
    for name, d in p.defs:
        lines.extend(_format_def(name, d))
    return "".join(line + "\n" for line in lines)


def format_statement(s: Statement) -> str:
    return "\n".join(_statement_lines(s, ""))
