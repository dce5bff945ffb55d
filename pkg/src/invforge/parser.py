"""Recursive-descent parser for ``.ivl`` source text.

Operator precedence, loosest first: quantifiers (body extends as far right
as possible), ``==>`` (right associative), ``||``, ``&&``, relational
operators (non-associative), ``+ -``, ``* /``, unary ``- !``, map
selection.
"""

from __future__ import annotations

from typing import Optional

from .errors import ParseError
from .lexer import Token, tokenize
from .syntax import (
    Apply, Assert, Assign, Assume, Binary, BoolLit, Call, Expr, FunctionDecl,
    Havoc, If, IntLit, ProcedureDecl, Program, Quant, REL_OPS, Select, Span,
    Stmt, Store, Type, Unary, Var, VarDecl, While,
)


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token plumbing

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {shown!r}", self.tok.span)
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            shown = self.tok.text or "end of input"
            raise ParseError(f"expected identifier, found {shown!r}", self.tok.span)
        return self.advance()

    def span_from(self, start: Token) -> Span:
        end = self.toks[self.i - 1].span
        return Span(start.span.line, start.span.column, end.end_line, end.end_column)

    # -- declarations

    def program(self) -> Program:
        globals_, functions, axioms, procedures = [], [], [], []
        while self.tok.kind != "eof":
            if self.at("var"):
                globals_.extend(self.var_decl())
            elif self.at("function"):
                functions.append(self.function_decl())
            elif self.at("axiom"):
                self.advance()
                axioms.append(self.expr())
                self.expect(";")
            elif self.at("procedure"):
                procedures.append(self.procedure_decl())
            else:
                raise ParseError(f"unexpected {self.tok.text!r} at top level", self.tok.span)
        return Program(tuple(globals_), tuple(functions), tuple(axioms), tuple(procedures))

    def type_(self) -> Type:
        if self.accept("int"):
            return Type.INT
        if self.accept("bool"):
            return Type.BOOL
        if self.accept("array"):
            self.expect("int")
            return Type.MAP
        if self.at("["):
            self.advance()
            self.expect("int")
            self.expect("]")
            self.expect("int")
            return Type.MAP
        raise ParseError(f"expected a type, found {self.tok.text!r}", self.tok.span)

    def typed_idents(self, closer: Optional[str]) -> list[VarDecl]:
        """``a, b: int, c: array int`` up to (not including) ``closer``."""
        out: list[VarDecl] = []
        if closer is not None and self.at(closer):
            return out
        while True:
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect(":")
            ty = self.type_()
            out.extend(VarDecl(n.text, ty, span=n.span) for n in names)
            if not self.accept(","):
                return out

    def var_decl(self) -> list[VarDecl]:
        self.expect("var")
        decls = self.typed_idents(None)
        self.expect(";")
        return decls

    def function_decl(self) -> FunctionDecl:
        start = self.expect("function")
        name = self.ident().text
        self.expect("(")
        params = self.typed_idents(")")
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        if self.tok.kind == "ident" and self.peek().text == ":":
            self.advance()
            self.advance()
        ret = self.type_()
        self.expect(")")
        body = None
        if self.accept("{"):
            body = self.expr()
            self.expect("}")
        else:
            self.expect(";")
        return FunctionDecl(name, tuple(params), ret, body, span=self.span_from(start))

    def procedure_decl(self) -> ProcedureDecl:
        start = self.expect("procedure")
        name = self.ident().text
        self.expect("(")
        ins = self.typed_idents(")")
        self.expect(")")
        outs: list[VarDecl] = []
        if self.accept("returns"):
            self.expect("(")
            outs = self.typed_idents(")")
            self.expect(")")
        self.accept(";")
        requires, ensures, modifies = [], [], []
        while True:
            if self.accept("requires"):
                requires.append(self.expr())
                self.expect(";")
            elif self.accept("ensures"):
                ensures.append(self.expr())
                self.expect(";")
            elif self.accept("modifies"):
                modifies.append(self.ident().text)
                while self.accept(","):
                    modifies.append(self.ident().text)
                self.expect(";")
            else:
                break
        locals_: list[VarDecl] = []
        body = None
        if self.accept("{"):
            while self.at("var"):
                locals_.extend(self.var_decl())
            body = self.stmts_until("}")
            self.expect("}")
        return ProcedureDecl(name, tuple(ins), tuple(outs), tuple(requires),
                             tuple(ensures), tuple(modifies), tuple(locals_),
                             body, span=self.span_from(start))

    # -- statements

    def stmts_until(self, closer: str) -> tuple[Stmt, ...]:
        out = []
        while not self.at(closer):
            if self.tok.kind == "eof":
                raise ParseError(f"expected {closer!r} before end of input", self.tok.span)
            out.append(self.stmt())
        return tuple(out)

    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        body = self.stmts_until("}")
        self.expect("}")
        return body

    def stmt(self) -> Stmt:
        start = self.tok
        if self.accept("assert"):
            f = self.expr()
            self.expect(";")
            return Assert(f, span=self.span_from(start))
        if self.accept("assume"):
            f = self.expr()
            self.expect(";")
            return Assume(f, span=self.span_from(start))
        if self.accept("havoc"):
            names = [self.ident().text]
            while self.accept(","):
                names.append(self.ident().text)
            self.expect(";")
            return Havoc(tuple(names), span=self.span_from(start))
        if self.accept("call"):
            outs: list[str] = []
            if self.peek().text in (",", ":="):
                outs.append(self.ident().text)
                while self.accept(","):
                    outs.append(self.ident().text)
                self.expect(":=")
            proc = self.ident().text
            self.expect("(")
            args = self.args(")")
            self.expect(")")
            self.expect(";")
            return Call(tuple(outs), proc, tuple(args), span=self.span_from(start))
        if self.accept("if"):
            return self.if_rest(start)
        if self.accept("while"):
            self.expect("(")
            guard = self.expr()
            self.expect(")")
            invs = []
            while self.accept("invariant"):
                invs.append(self.expr())
                self.expect(";")
            body = self.block()
            return While(guard, tuple(invs), body, span=self.span_from(start))
        if self.tok.kind == "ident":
            name_tok = self.advance()
            target = Var(name_tok.text, span=name_tok.span)
            if self.accept("["):
                index = self.expr()
                self.expect("]")
                self.expect(":=")
                value = self.expr()
                self.expect(";")
                span = self.span_from(start)
                return Assign(name_tok.text, Store(target, index, value, span=span), span=span)
            self.expect(":=")
            value = self.expr()
            self.expect(";")
            return Assign(name_tok.text, value, span=self.span_from(start))
        raise ParseError(f"expected a statement, found {self.tok.text or 'end of input'!r}",
                         self.tok.span)

    def if_rest(self, start: Token) -> If:
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse: tuple[Stmt, ...] = ()
        if self.accept("else"):
            if self.at("if"):
                inner_start = self.advance()
                orelse = (self.if_rest(inner_start),)
            else:
                orelse = self.block()
        return If(cond, then, orelse, span=self.span_from(start))

    # -- expressions

    def args(self, closer: str) -> list[Expr]:
        out: list[Expr] = []
        if self.at(closer):
            return out
        out.append(self.expr())
        while self.accept(","):
            out.append(self.expr())
        return out

    def expr(self) -> Expr:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.implies()

    def quant(self) -> Expr:
        start = self.advance()
        binders: list[Var] = []
        types: list[Type] = []
        while True:
            group = [self.ident()]
            while self.accept(","):
                group.append(self.ident())
            ty = self.type_() if self.accept(":") else Type.INT
            for g in group:
                binders.append(Var(g.text, span=g.span, ty=ty))
                types.append(ty)
            if not self.accept(","):
                break
        self.expect("::")
        body = self.expr()
        return Quant(start.text, tuple(binders), tuple(types), body, span=self.span_from(start))

    def implies(self) -> Expr:
        start = self.tok
        left = self.disjunction()
        if self.accept("==>"):
            right = self.expr() if (self.at("forall") or self.at("exists")) else self.implies()
            return Binary("==>", left, right, span=self.span_from(start))
        return left

    def disjunction(self) -> Expr:
        start = self.tok
        left = self.conjunction()
        while self.accept("||"):
            right = self.conjunction()
            left = Binary("||", left, right, span=self.span_from(start))
        return left

    def conjunction(self) -> Expr:
        start = self.tok
        left = self.relation()
        while self.accept("&&"):
            right = self.relation()
            left = Binary("&&", left, right, span=self.span_from(start))
        return left

    def relation(self) -> Expr:
        start = self.tok
        left = self.additive()
        if self.tok.kind == "sym" and self.tok.text in REL_OPS:
            op = self.advance().text
            right = self.additive()
            if self.tok.kind == "sym" and self.tok.text in REL_OPS:
                raise ParseError("relational operators do not chain; add parentheses",
                                 self.tok.span)
            return Binary(op, left, right, span=self.span_from(start))
        return left

    def additive(self) -> Expr:
        start = self.tok
        left = self.multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.multiplicative()
            left = Binary(op, left, right, span=self.span_from(start))
        return left

    def multiplicative(self) -> Expr:
        start = self.tok
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            right = self.unary()
            left = Binary(op, left, right, span=self.span_from(start))
        return left

    def unary(self) -> Expr:
        start = self.tok
        if self.at("-") and self.peek().kind == "num":
            self.advance()
            num = self.advance()
            return self.postfix(IntLit(-int(num.text), span=self.span_from(start)), start)
        if self.at("-") or self.at("!"):
            op = self.advance().text
            operand = self.unary()
            return Unary(op, operand, span=self.span_from(start))
        return self.postfix(self.primary(), start)

    def postfix(self, e: Expr, start: Token) -> Expr:
        while self.accept("["):
            index = self.expr()
            self.expect("]")
            e = Select(e, index, span=self.span_from(start))
        return e

    def primary(self) -> Expr:
        start = self.tok
        if start.kind == "num":
            self.advance()
            return IntLit(int(start.text), span=start.span)
        if self.accept("true"):
            return BoolLit(True, span=start.span)
        if self.accept("false"):
            return BoolLit(False, span=start.span)
        if self.at("forall") or self.at("exists"):
            return self.quant()
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("store"):
            self.expect("(")
            m = self.expr()
            self.expect(",")
            i = self.expr()
            self.expect(",")
            v = self.expr()
            self.expect(")")
            return Store(m, i, v, span=self.span_from(start))
        if start.kind == "ident":
            self.advance()
            if self.accept("("):
                args = self.args(")")
                self.expect(")")
                return Apply(start.text, tuple(args), span=self.span_from(start))
            return Var(start.text, span=start.span)
        raise ParseError(f"expected an expression, found {start.text or 'end of input'!r}",
                         start.span)


def parse_expr(source: str) -> Expr:
    """Parse a standalone (unresolved, untyped) expression."""
    p = Parser(source)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r} after expression", p.tok.span)
    return e


def parse_syntax(source: str) -> Program:
    """Parse without resolution or type checking."""
    return Parser(source).program()


def parse_program(source: str) -> Program:
    """Parse, resolve and type-check a compilation unit."""
    from .resolve import check_program

    return check_program(parse_syntax(source))
