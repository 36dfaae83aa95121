"""Concrete surface syntax: parser, name resolution, pretty printer.

A module is a regime pragma followed by definitions:

    regime consfree
    def parity ^1 : (n ^1 : Nat) -> Bool =
      \\n. rec n at (x. Bool) { zero => true | succ(m, p) => if p then false else true }

Usage annotations are written ``^k``; arrows and tensors without a
binder default to usage one.  Type formers may appear in term position
(they resolve to universe codes) and terms may appear in type position
(they resolve through the code-to-type embedding), so universe
programming reads naturally.  Definitions unfold transparently: a name
reference inlines the definition it resolves to.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Ann,
    App,
    BOOL_TY,
    CodeTy,
    Cons,
    DIAMOND_TY,
    DiamondStar,
    DupNat,
    El,
    FalseC,
    Fst,
    IdTy,
    If,
    Lam,
    LetPair,
    LetUnit,
    ListTy,
    MatchList,
    NAT_TY,
    Nil,
    Pair,
    Pi,
    RecList,
    RecNatCF,
    RecNatL,
    Refl,
    Reflect,
    ReflectElim,
    ReflectIntro,
    Regime,
    Snd,
    Star,
    SuccCF,
    SuccL,
    Tensor,
    Term,
    TrueC,
    TypeExpr,
    UNIT_TY,
    UNIVERSE,
    Var,
    ZeroCF,
    ZeroL,
    shift_type,
    has_free_var,
    strengthen,
)


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Span
    rule: str = ""

    def __str__(self):
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{self.severity} at {self.span}:{rule} {self.message}"


class FrontendError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


def _err(message: str, span: Span, rule: str = "Parse") -> FrontendError:
    return FrontendError(Diagnostic("error", message, span, rule))


# ---------------------------------------------------------------------------
# Lexer

_KEYWORDS = {
    "def", "regime", "consfree", "lfpl", "let", "in", "if", "then", "else",
    "rec", "match", "reclist", "at", "zero", "succ", "nil", "cons", "dup",
    "fst", "snd", "refl", "true", "false", "dia",
    "Bool", "Nat", "I", "U", "List", "Id", "El", "R",
}

_PUNCT = ["^-1", "->", "=>", "<>", "(", ")", "{", "}", ",", ".", ":", "=",
          "|", "\\", "*", "^"]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | punctuation itself | "eof"
    text: str
    span: Span


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], span))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "ident"
            toks.append(Token(kind, word, span))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token(p, p, span))
                i += len(p)
                col += len(p)
                break
        else:
            raise _err(f"unexpected character {c!r}", span)
    toks.append(Token("eof", "", Span(line, col)))
    return toks


# ---------------------------------------------------------------------------
# Surface trees (tagged tuples, span carried on the node where useful)

@dataclass(frozen=True)
class SourceDecl:
    name: str
    sigma: int
    ty: tuple
    body: tuple
    span: Span


@dataclass(frozen=True)
class SourceModule:
    regime: Regime | None
    decls: tuple
    # names must be unique; forward references are rejected at resolution


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    # -- token helpers ------------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind and not (t.kind == "kw" and t.text == kind):
            raise _err(f"expected {what or kind}, found {t.text or 'end of input'}", t.span)
        return self.next()

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == word

    def eat_kw(self, word: str) -> bool:
        if self.at_kw(word):
            self.next()
            return True
        return False

    # -- module -------------------------------------------------------------
    def module(self) -> SourceModule:
        regime = None
        if self.eat_kw("regime"):
            t = self.next()
            if t.text == "consfree":
                regime = Regime.CONS_FREE
            elif t.text == "lfpl":
                regime = Regime.LFPL
            else:
                raise _err("regime must be consfree or lfpl", t.span)
        decls = []
        while not self.at_eof():
            decls.append(self.decl())
        return SourceModule(regime, tuple(decls))

    def at_eof(self) -> bool:
        return self.peek().kind == "eof"

    def decl(self) -> SourceDecl:
        start = self.expect("def").span
        name = self.expect("ident", "definition name").text
        self.expect("^", "fragment marker ^0 or ^1")
        sigma_tok = self.expect("int", "fragment 0 or 1")
        sigma = int(sigma_tok.text)
        if sigma not in (0, 1):
            raise _err("fragment marker must be 0 or 1", sigma_tok.span)
        self.expect(":")
        ty = self.type_expr()
        self.expect("=")
        body = self.term()
        return SourceDecl(name, sigma, ty, body, start)

    # -- types --------------------------------------------------------------
    def _binder_head(self) -> tuple | None:
        # '(' IDENT '^' INT ':'  introduces an annotated binder
        if (
            self.peek().kind == "("
            and self.peek(1).kind == "ident"
            and self.peek(2).kind == "^"
        ):
            self.next()
            name = self.next().text
            self.next()
            usage = int(self.expect("int", "usage").text)
            self.expect(":")
            dom = self.type_expr()
            self.expect(")")
            return name, usage, dom
        return None

    def type_expr(self) -> tuple:
        # arrows bind loosest and associate right; tensors bind tighter
        lhs = self.type_tensor_or_binder()
        if self.peek().kind == "->":
            self.next()
            return ("pi", 1, None, lhs, self.type_expr())
        return lhs

    def type_tensor_or_binder(self) -> tuple:
        head = self._binder_head()
        if head is not None:
            name, usage, dom = head
            arrow = self.next()
            if arrow.kind == "->":
                return ("pi", usage, name, dom, self.type_expr())
            if arrow.kind == "*":
                return ("tensor", usage, name, dom, self.type_tensor_or_binder())
            raise _err("expected -> or * after a binder", arrow.span)
        return self.type_tensor()

    def type_tensor(self) -> tuple:
        lhs = self.type_atom()
        if self.peek().kind == "*":
            self.next()
            return ("tensor", 1, None, lhs, self.type_tensor_or_binder())
        return lhs

    def type_atom(self) -> tuple:
        t = self.peek()
        if t.kind == "kw":
            if t.text == "Bool":
                self.next()
                return ("bool",)
            if t.text == "Nat":
                self.next()
                return ("nat",)
            if t.text == "I":
                self.next()
                return ("unit",)
            if t.text == "U":
                self.next()
                return ("universe",)
            if t.text == "List":
                self.next()
                return ("list", self.type_atom())
            if t.text == "Id":
                self.next()
                ty = self.type_atom()
                lhs = self.term_atom()
                rhs = self.term_atom()
                return ("id", ty, lhs, rhs)
            if t.text == "R":
                self.next()
                return ("reflectty", self.type_atom())
            if t.text == "El":
                self.next()
                return ("el", self.term_atom())
        if t.kind == "<>":
            self.next()
            return ("diamond",)
        if t.kind == "(":
            head = self._binder_head()
            if head is not None:
                name, usage, dom = head
                arrow = self.next()
                if arrow.kind == "->":
                    return ("pi", usage, name, dom, self.type_expr())
                if arrow.kind == "*":
                    return ("tensor", usage, name, dom, self.type_tensor_or_binder())
                raise _err("expected -> or * after a binder", arrow.span)
            self.next()
            inner = self.type_expr()
            self.expect(")")
            return inner
        # a term in type position embeds through El
        term = self.term_app()
        return ("el-implicit", term)

    # -- terms ----------------------------------------------------------
    def term(self) -> tuple:
        t = self.peek()
        if t.kind == "\\":
            self.next()
            binders = []
            while True:
                b = self.peek()
                if b.kind == "ident":
                    binders.append(self.next().text)
                elif b.kind == "(":
                    self.next()
                    a = self.expect("ident", "pattern name").text
                    self.expect(",")
                    c = self.expect("ident", "pattern name").text
                    self.expect(")")
                    binders.append((a, c))
                else:
                    break
            if not binders:
                raise _err("lambda needs at least one binder", t.span)
            self.expect(".")
            return ("lam", binders, self.term(), t.span)
        if self.at_kw("let"):
            return self.let_term()
        if self.at_kw("if"):
            self.next()
            scrut = self.term_app()
            motive = self.motive_clause()
            self.expect("then")
            then_b = self.term()
            self.expect("else")
            return ("if", scrut, motive, then_b, self.term(), t.span)
        if self.at_kw("rec"):
            return self.rec_term()
        if self.at_kw("match"):
            return self.match_term()
        if self.at_kw("reclist"):
            return self.reclist_term()
        return self.term_infix()

    def motive_clause(self) -> tuple | None:
        if self.eat_kw("at"):
            self.expect("(")
            name = self.expect("ident", "motive binder").text
            self.expect(".")
            ty = self.type_expr()
            self.expect(")")
            return (name, ty)
        return None

    def let_term(self) -> tuple:
        start = self.next().span  # 'let'
        if self.peek().kind == "*":
            self.next()
            self.expect("=")
            scrut = self.term()
            motive = self.motive_clause()
            self.expect("in")
            return ("letunit", scrut, motive, self.term(), start)
        self.expect("(")
        a = self.expect("ident", "pattern name").text
        self.expect(",")
        b = self.expect("ident", "pattern name").text
        self.expect(")")
        self.expect("=")
        scrut = self.term()
        motive = self.motive_clause()
        self.expect("in")
        return ("letpair", a, b, scrut, motive, self.term(), start)

    def rec_term(self) -> tuple:
        start = self.next().span
        scrut = self.term_app()
        motive = self.motive_clause()
        self.expect("{")
        self.expect("zero")
        if self.peek().kind == "(":  # payment-regime shape binds a diamond
            self.next()
            d0 = self.expect("ident", "diamond binder").text
            self.expect(")")
            self.expect("=>")
            zb = self.term()
            self.expect("|")
            self.expect("succ")
            self.expect("(")
            d1 = self.expect("ident").text
            self.expect(",")
            nn = self.expect("ident").text
            self.expect(",")
            pp = self.expect("ident").text
            self.expect(")")
            self.expect("=>")
            sb = self.term()
            self.expect("}")
            return ("rec_l", scrut, motive, (d0, zb), (d1, nn, pp, sb), start)
        self.expect("=>")
        zb = self.term()
        self.expect("|")
        self.expect("succ")
        self.expect("(")
        nn = self.expect("ident").text
        self.expect(",")
        pp = self.expect("ident").text
        self.expect(")")
        self.expect("=>")
        sb = self.term()
        self.expect("}")
        return ("rec_cf", scrut, motive, zb, (nn, pp, sb), start)

    def match_term(self) -> tuple:
        start = self.next().span
        scrut = self.term_app()
        motive = self.motive_clause()
        self.expect("{")
        self.expect("nil")
        self.expect("=>")
        nb = self.term()
        self.expect("|")
        self.expect("cons")
        self.expect("(")
        h = self.expect("ident").text
        self.expect(",")
        tl = self.expect("ident").text
        self.expect(")")
        self.expect("=>")
        cb = self.term()
        self.expect("}")
        return ("matchlist", scrut, motive, nb, (h, tl, cb), start)

    def reclist_term(self) -> tuple:
        start = self.next().span
        scrut = self.term_app()
        motive = self.motive_clause()
        self.expect("{")
        self.expect("nil")
        self.expect("=>")
        nb = self.term()
        self.expect("|")
        self.expect("cons")
        self.expect("(")
        h = self.expect("ident").text
        self.expect(",")
        tl = self.expect("ident").text
        self.expect(",")
        p = self.expect("ident").text
        self.expect(")")
        self.expect("=>")
        cb = self.term()
        self.expect("}")
        return ("reclist", scrut, motive, nb, (h, tl, p, cb), start)

    def term_infix(self) -> tuple:
        lhs = self.term_app()
        if self.peek().kind not in ("->", "*"):
            return lhs
        lhs_ty: tuple = ("el-implicit", lhs)
        if self.peek().kind == "*":
            self.next()
            lhs_ty = ("tensor", 1, None, lhs_ty, self.type_tensor_or_binder())
        if self.peek().kind == "->":
            self.next()
            lhs_ty = ("pi", 1, None, lhs_ty, self.type_expr())
        return ("code", lhs_ty)

    _BUILTIN_TYPE_HEADS = {"Bool", "Nat", "I", "U", "List", "Id", "<>"}

    def term_app(self) -> tuple:
        t = self.peek()
        # a type former in term position becomes a universe code
        if (t.kind == "kw" and t.text in ("Bool", "Nat", "I", "U", "List", "Id")) or (
            t.kind == "<>"
        ):
            return ("code", self.type_atom())
        if t.kind == "(" and self.peek(1).kind == "ident" and self.peek(2).kind == "^":
            return ("code", self.type_atom())
        head = self.head_atom()
        while self.starts_atom():
            head = ("app", head, self.term_atom())
        return head

    def head_atom(self) -> tuple:
        t = self.peek()
        if t.kind == "kw":
            if t.text == "zero":
                self.next()
                if self.starts_atom():
                    return ("zero_l", self.term_atom())
                return ("zero_cf",)
            if t.text == "succ":
                self.next()
                first = self.term_atom()
                if self.starts_atom():
                    return ("succ_l", first, self.term_atom())
                return ("succ_cf", first)
            if t.text == "cons":
                self.next()
                return ("cons", self.term_atom(), self.term_atom())
            if t.text == "dup":
                self.next()
                return ("dup", self.term_atom())
            if t.text == "fst":
                self.next()
                return ("fst", self.term_atom())
            if t.text == "snd":
                self.next()
                return ("snd", self.term_atom())
            if t.text == "refl":
                self.next()
                return ("refl", self.term_atom())
            if t.text == "El":
                self.next()
                return ("code", ("el", self.term_atom()))
            if t.text == "R":
                self.next()
                if self.peek().kind == "^-1":
                    self.next()
                    return ("relim", self.term_atom())
                return ("rintro", self.term_atom())
        return self.term_atom()

    def starts_atom(self) -> bool:
        t = self.peek()
        if t.kind in ("ident", "int", "(", "<>"):
            return True
        if t.kind == "kw" and t.text in (
            "true", "false", "nil", "zero", "succ", "cons", "dup", "fst",
            "snd", "refl", "dia", "R", "El",
            "Bool", "Nat", "I", "U", "List", "Id",
        ):
            return True
        return False

    def term_atom(self) -> tuple:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return ("var", t.text, t.span)
        if t.kind == "int":
            self.next()
            return ("lit", int(t.text), t.span)
        if t.kind == "*":
            self.next()
            return ("star",)
        if t.kind == "<>" or (
            t.kind == "kw" and t.text in ("Bool", "Nat", "I", "U", "List", "Id")
        ):
            # a type former used as a universe code
            return ("code", self.type_atom())
        if t.kind == "kw":
            if t.text == "true":
                self.next()
                return ("true",)
            if t.text == "false":
                self.next()
                return ("false",)
            if t.text == "nil":
                self.next()
                return ("nil",)
            if t.text == "dia":
                self.next()
                return ("dstar",)
            if t.text == "zero":
                self.next()
                return ("zero_cf",)
            if t.text in ("succ", "cons", "dup", "fst", "snd", "refl", "R", "El"):
                # builtins with arguments must head their own spine
                return self.head_atom()
        if t.kind == "(":
            self.next()
            if self.peek().kind == "*" and self.peek(1).kind == ")":
                self.next()
                self.next()
                return ("star",)
            inner = self.term()
            nxt = self.peek()
            if nxt.kind == ",":
                self.next()
                snd = self.term()
                self.expect(")")
                return ("pair", inner, snd)
            if nxt.kind == ":":
                self.next()
                ty = self.type_expr()
                self.expect(")")
                return ("ann", inner, ty)
            self.expect(")")
            return inner
        raise _err(f"expected a term, found {t.text or 'end of input'!r}", t.span)


def parse_module(text: str) -> SourceModule:
    return _Parser(tokenize(text)).module()


def parse_term(text: str) -> tuple:
    p = _Parser(tokenize(text))
    t = p.term()
    if not p.at_eof():
        raise _err(f"trailing input at {p.peek().text!r}", p.peek().span)
    return t


def parse_type(text: str) -> tuple:
    p = _Parser(tokenize(text))
    t = p.type_expr()
    if not p.at_eof():
        raise _err(f"trailing input at {p.peek().text!r}", p.peek().span)
    return t


# ---------------------------------------------------------------------------
# Resolution to kernel syntax

@dataclass(frozen=True)
class ResolvedDecl:
    name: str
    sigma: int
    ty: TypeExpr
    body: Term
    span: Span


@dataclass(frozen=True)
class ResolvedModule:
    regime: Regime
    decls: tuple


class _Resolver:
    def __init__(self, regime: Regime, globals_: dict):
        self.regime = regime
        self.globals = globals_  # name -> (TypeExpr, Term) closed kernel forms

    def term(self, node: tuple, scope: tuple) -> Term:
        tag = node[0]
        if tag == "var":
            name, span = node[1], node[2]
            # innermost binding wins: search from the right
            for i, bound in enumerate(reversed(scope)):
                if bound == name:
                    return Var(i)
            if name in self.globals:
                ty, body = self.globals[name]
                return Ann(body, ty)
            raise _err(f"unbound name {name!r}", span, rule="Resolve")
        if tag == "lit":
            n = node[1]
            if self.regime is Regime.CONS_FREE:
                t: Term = ZeroCF()
                for _ in range(n):
                    t = SuccCF(t)
                return t
            t = ZeroL(DiamondStar())
            for _ in range(n):
                t = SuccL(DiamondStar(), t)
            return t
        if tag == "lam":
            return self._pattern_body(node[1], list(scope), node[2])
        if tag == "app":
            return App(self.term(node[1], scope), self.term(node[2], scope))
        if tag == "pair":
            return Pair(self.term(node[1], scope), self.term(node[2], scope))
        if tag == "star":
            return Star()
        if tag == "dstar":
            return DiamondStar()
        if tag == "true":
            return TrueC()
        if tag == "false":
            return FalseC()
        if tag == "nil":
            return Nil()
        if tag == "cons":
            return Cons(self.term(node[1], scope), self.term(node[2], scope))
        if tag == "letpair":
            _, a, b, scrut, motive, body, _span = node
            return LetPair(
                self.term(scrut, scope),
                self.term(body, scope + (a, b)),
                self.motive(motive, scope),
            )
        if tag == "letunit":
            _, scrut, motive, body, _span = node
            return LetUnit(
                self.term(scrut, scope),
                self.term(body, scope),
                self.motive(motive, scope),
            )
        if tag == "if":
            _, scrut, motive, tb, eb, _span = node
            return If(
                self.term(scrut, scope),
                self.term(tb, scope),
                self.term(eb, scope),
                self.motive(motive, scope),
            )
        if tag == "rec_cf":
            _, scrut, motive, zb, (nn, pp, sb), _span = node
            return RecNatCF(
                self.term(scrut, scope),
                self.term(zb, scope),
                self.term(sb, scope + (nn, pp)),
                self.motive(motive, scope),
            )
        if tag == "rec_l":
            _, scrut, motive, (d0, zb), (d1, nn, pp, sb), _span = node
            return RecNatL(
                self.term(scrut, scope),
                self.term(zb, scope + (d0,)),
                self.term(sb, scope + (d1, nn, pp)),
                self.motive(motive, scope),
            )
        if tag == "matchlist":
            _, scrut, motive, nb, (h, tl, cb), _span = node
            return MatchList(
                self.term(scrut, scope),
                self.term(nb, scope),
                self.term(cb, scope + (h, tl)),
                self.motive(motive, scope),
            )
        if tag == "reclist":
            _, scrut, motive, nb, (h, tl, p, cb), _span = node
            return RecList(
                self.term(scrut, scope),
                self.term(nb, scope),
                self.term(cb, scope + (h, tl, p)),
                self.motive(motive, scope),
            )
        if tag == "zero_cf":
            return ZeroCF()
        if tag == "succ_cf":
            return SuccCF(self.term(node[1], scope))
        if tag == "zero_l":
            return ZeroL(self.term(node[1], scope))
        if tag == "succ_l":
            return SuccL(self.term(node[1], scope), self.term(node[2], scope))
        if tag == "dup":
            return DupNat(self.term(node[1], scope))
        if tag == "fst":
            return Fst(self.term(node[1], scope))
        if tag == "snd":
            return Snd(self.term(node[1], scope))
        if tag == "refl":
            return Refl(self.term(node[1], scope))
        if tag == "rintro":
            return ReflectIntro(self.term(node[1], scope))
        if tag == "relim":
            return ReflectElim(self.term(node[1], scope))
        if tag == "ann":
            return Ann(self.term(node[1], scope), self.type(node[2], scope))
        if tag == "code":
            return CodeTy(self.type(node[1], scope))
        raise ValueError(f"unknown surface node {tag}")

    def _pattern_body(self, binders, scope: list, body) -> Term:
        """Lambda chains; pair patterns split the argument first."""
        if not binders:
            return self.term(body, tuple(scope))
        b, rest = binders[0], binders[1:]
        if isinstance(b, tuple):
            a, c = b
            # \(a, c). M  ~~>  \w. let (a, c) = w in M  with w unnameable
            fresh = f"%w{len(scope)}"
            inner = self._pattern_body(rest, scope + [fresh, a, c], body)
            return Lam(LetPair(Var(0), inner, None))
        return Lam(self._pattern_body(rest, scope + [b], body))

    def motive(self, motive, scope: tuple) -> TypeExpr | None:
        if motive is None:
            return None
        name, ty = motive
        return self.type(ty, scope + (name,))

    def type(self, node: tuple, scope: tuple) -> TypeExpr:
        tag = node[0]
        if tag == "bool":
            return BOOL_TY
        if tag == "nat":
            return NAT_TY
        if tag == "unit":
            return UNIT_TY
        if tag == "universe":
            return UNIVERSE
        if tag == "diamond":
            return DIAMOND_TY
        if tag == "list":
            return ListTy(self.type(node[1], scope))
        if tag == "id":
            return IdTy(
                self.type(node[1], scope),
                self.term(node[2], scope),
                self.term(node[3], scope),
            )
        if tag == "reflectty":
            return Reflect(self.type(node[1], scope))
        if tag == "el":
            return El(self.term(node[1], scope))
        if tag == "el-implicit":
            inner = self.term(node[1], scope)
            if isinstance(inner, CodeTy):
                return inner.ty
            return El(inner)
        if tag == "pi":
            _, usage, name, dom, cod = node
            dom_k = self.type(dom, scope)
            if name is None:
                # non-dependent sugar: weaken the codomain under the binder
                cod_k = shift_type(self.type(cod, scope), 1)
            else:
                cod_k = self.type(cod, scope + (name,))
            return Pi(usage, dom_k, cod_k)
        if tag == "tensor":
            _, usage, name, fst, snd = node
            fst_k = self.type(fst, scope)
            if name is None:
                snd_k = shift_type(self.type(snd, scope), 1)
            else:
                snd_k = self.type(snd, scope + (name,))
            return Tensor(usage, fst_k, snd_k)
        raise ValueError(f"unknown surface type {tag}")


def resolve_module(
    mod: SourceModule, regime_override: Regime | None = None
) -> ResolvedModule:
    regime = regime_override or mod.regime
    if regime is None:
        raise FrontendError(
            Diagnostic(
                "error",
                "no regime pragma in the module and none supplied",
                Span(1, 1),
                "Resolve",
            )
        )
    globals_: dict = {}
    out = []
    for d in mod.decls:
        if d.name in globals_:
            raise _err(f"duplicate definition {d.name!r}", d.span, rule="Resolve")
        r = _Resolver(regime, globals_)
        ty = r.type(d.ty, ())
        body = r.term(d.body, ())
        globals_[d.name] = (ty, body)
        out.append(ResolvedDecl(d.name, d.sigma, ty, body, d.span))
    return ResolvedModule(regime, tuple(out))


def resolve_term(text: str, regime: Regime, scope: tuple = ()) -> Term:
    return _Resolver(regime, {}).term(parse_term(text), scope)


def resolve_type(text: str, regime: Regime, scope: tuple = ()) -> TypeExpr:
    return _Resolver(regime, {}).type(parse_type(text), scope)


# ---------------------------------------------------------------------------
# Pretty printing (deterministic fresh names by binder depth)

def _name(depth: int) -> str:
    return f"x{depth}"


def _nat_literal_cf(t: Term) -> int | None:
    n = 0
    while isinstance(t, SuccCF):
        t = t.pred
        n += 1
    return n if isinstance(t, ZeroCF) else None


def _nat_literal_lfpl(t: Term) -> int | None:
    n = 0
    while isinstance(t, SuccL) and isinstance(t.pay, DiamondStar):
        t = t.pred
        n += 1
    if isinstance(t, ZeroL) and isinstance(t.pay, DiamondStar):
        return n
    return None


def pretty_term(t: Term, depth: int = 0, prec: int = 0) -> str:
    """Render a kernel term; level 0 is outermost, 2 is argument position."""

    def wrap(s: str, need: bool) -> str:
        return f"({s})" if need else s

    cls = t.__class__
    if cls is Var:
        return _name(depth - 1 - t.index)
    if cls is Lam:
        body = pretty_term(t.body, depth + 1, 0)
        return wrap(f"\\{_name(depth)}. {body}", prec > 0)
    if cls is App:
        # successor heads take a flexible number of atoms, so an applied
        # successor must be parenthesised to keep its own argument
        fn_prec = 1
        if isinstance(t.fn, SuccCF) and _nat_literal_cf(t.fn) is None:
            fn_prec = 2
        if isinstance(t.fn, SuccL) and _nat_literal_lfpl(t.fn) is None:
            fn_prec = 2
        fn = pretty_term(t.fn, depth, fn_prec)
        arg = pretty_term(t.arg, depth, 2)
        return wrap(f"{fn} {arg}", prec > 1)
    if cls is Pair:
        return f"({pretty_term(t.fst, depth, 0)}, {pretty_term(t.snd, depth, 0)})"
    if cls is Star:
        return "*" if prec < 2 else "(*)"
    if cls is TrueC:
        return "true"
    if cls is FalseC:
        return "false"
    if cls is Nil:
        return "nil"
    if cls is Cons:
        s = f"cons {pretty_term(t.head, depth, 2)} {pretty_term(t.tail, depth, 2)}"
        return wrap(s, prec > 1)
    if cls is LetPair:
        a, b = _name(depth), _name(depth + 1)
        s = (
            f"let ({a}, {b}) = {pretty_term(t.scrut, depth, 0)}"
            f"{_pretty_motive(t.motive, depth)} in "
            f"{pretty_term(t.body, depth + 2, 0)}"
        )
        return wrap(s, prec > 0)
    if cls is LetUnit:
        s = (
            f"let * = {pretty_term(t.scrut, depth, 0)}"
            f"{_pretty_motive(t.motive, depth)} in {pretty_term(t.body, depth, 0)}"
        )
        return wrap(s, prec > 0)
    if cls is If:
        s = (
            f"if {pretty_term(t.scrut, depth, 1)}{_pretty_motive(t.motive, depth)} "
            f"then {pretty_term(t.then_branch, depth, 0)} "
            f"else {pretty_term(t.else_branch, depth, 0)}"
        )
        return wrap(s, prec > 0)
    if cls is MatchList:
        h, tl = _name(depth), _name(depth + 1)
        s = (
            f"match {pretty_term(t.scrut, depth, 1)}{_pretty_motive(t.motive, depth)} "
            f"{{ nil => {pretty_term(t.nil_branch, depth, 0)} "
            f"| cons({h}, {tl}) => {pretty_term(t.cons_branch, depth + 2, 0)} }}"
        )
        return wrap(s, prec > 0)
    if cls is RecList:
        h, tl, p = _name(depth), _name(depth + 1), _name(depth + 2)
        s = (
            f"reclist {pretty_term(t.scrut, depth, 1)}{_pretty_motive(t.motive, depth)} "
            f"{{ nil => {pretty_term(t.nil_branch, depth, 0)} "
            f"| cons({h}, {tl}, {p}) => {pretty_term(t.cons_branch, depth + 3, 0)} }}"
        )
        return wrap(s, prec > 0)
    if cls is ZeroCF:
        return "0"
    if cls is SuccCF:
        lit = _nat_literal_cf(t)
        if lit is not None:
            return str(lit)
        return wrap(f"succ {pretty_term(t.pred, depth, 2)}", prec > 1)
    if cls is DupNat:
        return wrap(f"dup {pretty_term(t.arg, depth, 2)}", prec > 1)
    if cls is RecNatCF:
        n, p = _name(depth), _name(depth + 1)
        s = (
            f"rec {pretty_term(t.scrut, depth, 1)}{_pretty_motive(t.motive, depth)} "
            f"{{ zero => {pretty_term(t.zero_branch, depth, 0)} "
            f"| succ({n}, {p}) => {pretty_term(t.succ_branch, depth + 2, 0)} }}"
        )
        return wrap(s, prec > 0)
    if cls is DiamondStar:
        return "dia"
    if cls is ZeroL:
        lit = _nat_literal_lfpl(t)
        if lit is not None:
            return str(lit)
        return wrap(f"zero {pretty_term(t.pay, depth, 2)}", prec > 1)
    if cls is SuccL:
        lit = _nat_literal_lfpl(t)
        if lit is not None:
            return str(lit)
        s = f"succ {pretty_term(t.pay, depth, 2)} {pretty_term(t.pred, depth, 2)}"
        return wrap(s, prec > 1)
    if cls is RecNatL:
        d0, d1 = _name(depth), _name(depth)
        n, p = _name(depth + 1), _name(depth + 2)
        s = (
            f"rec {pretty_term(t.scrut, depth, 1)}{_pretty_motive(t.motive, depth)} "
            f"{{ zero({d0}) => {pretty_term(t.zero_branch, depth + 1, 0)} "
            f"| succ({d1}, {n}, {p}) => {pretty_term(t.succ_branch, depth + 3, 0)} }}"
        )
        return wrap(s, prec > 0)
    if cls is Refl:
        return wrap(f"refl {pretty_term(t.body, depth, 2)}", prec > 1)
    if cls is ReflectIntro:
        return wrap(f"R {pretty_term(t.body, depth, 2)}", prec > 1)
    if cls is ReflectElim:
        return wrap(f"R^-1 {pretty_term(t.body, depth, 2)}", prec > 1)
    if cls is Fst:
        return wrap(f"fst {pretty_term(t.pair, depth, 2)}", prec > 1)
    if cls is Snd:
        return wrap(f"snd {pretty_term(t.pair, depth, 2)}", prec > 1)
    if cls is CodeTy:
        return wrap(pretty_type(t.ty, depth, 1), prec > 1)
    if cls is Ann:
        return f"({pretty_term(t.term, depth, 0)} : {pretty_type(t.ty, depth, 0)})"
    raise ValueError(f"unknown term {cls.__name__}")


def _pretty_motive(motive: TypeExpr | None, depth: int) -> str:
    if motive is None:
        return ""
    return f" at ({_name(depth)}. {pretty_type(motive, depth + 1, 0)})"


def pretty_type(ty: TypeExpr, depth: int = 0, prec: int = 0) -> str:
    """Render a kernel type.

    Precedence climbs from arrows (0) through tensors (1) to atoms (2);
    keyword-led formers behave like prefix operators at atom level.
    """

    def wrap(s: str, need: bool) -> str:
        return f"({s})" if need else s

    cls = ty.__class__
    if cls is BoolTyCls:
        return "Bool"
    if cls is NatTyCls:
        return "Nat"
    if cls is UnitTyCls:
        return "I"
    if cls is UniverseCls:
        return "U"
    if cls is DiamondTyCls:
        return "<>"
    if cls is Pi:
        if ty.usage == 1 and not has_free_var(ty.cod, 0):
            dom = pretty_type(ty.dom, depth, 1)
            cod = pretty_type(strengthen(ty.cod), depth, 0)
            return wrap(f"{dom} -> {cod}", prec >= 1)
        dom = pretty_type(ty.dom, depth, 0)
        cod = pretty_type(ty.cod, depth + 1, 0)
        return wrap(f"({_name(depth)} ^{ty.usage} : {dom}) -> {cod}", prec >= 1)
    if cls is Tensor:
        if ty.usage == 1 and not has_free_var(ty.snd, 0):
            fst = pretty_type(ty.fst, depth, 2)
            snd = pretty_type(strengthen(ty.snd), depth, 1)
            return wrap(f"{fst} * {snd}", prec >= 2)
        fst = pretty_type(ty.fst, depth, 0)
        snd = pretty_type(ty.snd, depth + 1, 1)
        return wrap(f"({_name(depth)} ^{ty.usage} : {fst}) * {snd}", prec >= 2)
    if cls is ListTy:
        return wrap(f"List {pretty_type(ty.elem, depth, 2)}", prec >= 2)
    if cls is IdTy:
        s = (
            f"Id {pretty_type(ty.ty, depth, 2)} "
            f"{pretty_term(ty.lhs, depth, 2)} {pretty_term(ty.rhs, depth, 2)}"
        )
        return wrap(s, prec >= 2)
    if cls is El:
        return wrap(f"El {pretty_term(ty.code, depth, 2)}", prec >= 2)
    if cls is Reflect:
        return wrap(f"R {pretty_type(ty.inner, depth, 2)}", prec >= 2)
    raise ValueError(f"unknown type {cls.__name__}")


# late imports for the singleton classes used in pretty_type dispatch
from .syntax import BoolTy as BoolTyCls  # noqa: E402
from .syntax import DiamondTy as DiamondTyCls  # noqa: E402
from .syntax import NatTy as NatTyCls  # noqa: E402
from .syntax import UnitTy as UnitTyCls  # noqa: E402
from .syntax import Universe as UniverseCls  # noqa: E402
