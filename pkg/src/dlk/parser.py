"""Surface syntax: lexer and recursive-descent parser for .dlp files.

ASCII mapping (documented in docs/surface-syntax.md): `not /\\ \\/ => <=>`
for connectives, `forall [x: T] ->` / `exists [x: T] ->` for quantifiers,
`|-` for the turnstile, `quote(...)` / `abstract(...)` for the two bridge
operations, `(b ? x : y)` for conditionals, and `in subset sqsubseteq
sqsubset :` for the remaining relations.  Comments run from `//` to end of
line.  Parsing is total and deterministic; all failures are E001 with a span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .diagnostics import E_SYNTAX, NO_SPAN, Span, fail, span_from_offsets
from .types import BASE_TYPES, Opaque, TypeExpr

KEYWORDS = {
    "not", "forall", "exists", "in", "subset", "sqsubseteq", "sqsubset",
    "quote", "abstract", "provable", "Let", "True", "False",
    "def", "proof", "constant", "use",
    "assume", "have", "obtain", "conclude", "by", "with",
}

# Longest-match-first operator table.
OPERATORS = [
    "<=>", ":=", "=>", "->", "/\\", "\\/", "|-", "<=", ">=",
    "(", ")", "[", "]", "{", "}", ",", ".", ":", "?", "=", "<", ">",
]

STEP_KINDS = ("assume", "have", "obtain", "conclude")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER STRING OP HOLE EOF
    text: str
    span: Span


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        start = i
        if c.isalpha():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], span_from_offsets(text, i, j)))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("NUMBER", text[i:j], span_from_offsets(text, i, j)))
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                fail(E_SYNTAX, "unterminated string literal", span_from_offsets(text, i, n))
            tokens.append(Token("STRING", text[i + 1 : j], span_from_offsets(text, i, j + 1)))
            i = j + 1
            continue
        if c == "?" and i + 1 < n and text[i + 1].isalpha():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("HOLE", text[i + 1 : j], span_from_offsets(text, i, j)))
            i = j
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("OP", op, span_from_offsets(text, i, i + len(op))))
                i += len(op)
                break
        else:
            fail(E_SYNTAX, f"unexpected character {c!r}", span_from_offsets(text, i, i + 1))
    tokens.append(Token("EOF", "", span_from_offsets(text, n, n)))
    return tokens


# --- declarations --------------------------------------------------------------


@dataclass(frozen=True)
class UseDecl:
    packs: tuple[str, ...]
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    type_: TypeExpr
    span: Span = field(default=NO_SPAN, compare=False)
    type_span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class DefDecl:
    name: str
    params: tuple[tuple[str, TypeExpr], ...]
    body: ast.Node
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class StepLine:
    number: int
    indent: int
    kind: str  # assume | have | obtain | conclude
    formula: ast.Node
    rule: str | None = None
    refs: tuple[int, ...] = ()
    payload_node: ast.Node | None = None
    payload_name: str | None = None
    span: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ProofDecl:
    name: str
    goal: ast.Node
    steps: tuple[StepLine, ...]
    span: Span = field(default=NO_SPAN, compare=False)


Declaration = UseDecl | ConstantDecl | DefDecl | ProofDecl


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str
    declarations: tuple[Declaration, ...]


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing --

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def at_op(self, op: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind == "OP" and t.text == op

    def at_word(self, word: str, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind == "IDENT" and t.text == word

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            t = self.peek()
            fail(E_SYNTAX, f"expected {op!r}, found {t.text or 'end of input'!r}", t.span)
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "IDENT" or t.text in KEYWORDS:
            fail(E_SYNTAX, f"expected {what}, found {t.text or 'end of input'!r}", t.span)
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            t = self.peek()
            fail(E_SYNTAX, f"expected {word!r}, found {t.text or 'end of input'!r}", t.span)
        return self.advance()

    def span_from(self, start: Token) -> Span:
        end = self.tokens[self.pos - 1].span if self.pos > 0 else start.span
        return Span(start.span.start, end.end, start.span.line, start.span.column)

    # -- types --

    def parse_type(self) -> TypeExpr:
        t = self.peek()
        if t.kind == "HOLE":
            self.advance()
            return Opaque("?" + t.text)
        name_tok = self.expect_ident("type name")
        name = name_tok.text
        if self.at_op("("):
            self.advance()
            args = [self.parse_type()]
            while self.at_op(","):
                self.advance()
                args.append(self.parse_type())
            self.expect_op(")")
            from .types import Fun, Pair, Proc, TermOf, Union

            builtin = {"Union": (Union, 2), "Pair": (Pair, 2), "Proc": (Proc, 2), "Fun": (Fun, 2), "Term": (TermOf, 1)}
            if name in builtin:
                ctor, arity = builtin[name]
                if len(args) != arity:
                    fail(E_SYNTAX, f"type {name} takes {arity} argument(s), got {len(args)}", name_tok.span)
                return ctor(*args)
            return Opaque(name, tuple(args))
        if name in BASE_TYPES:
            return BASE_TYPES[name]
        if name in ("Union", "Pair", "Proc", "Fun", "Term"):
            fail(E_SYNTAX, f"type {name} requires arguments", name_tok.span)
        return Opaque(name)

    # -- formulas (precedence: turnstile < iff < implies < or < and < not < relation) --

    def parse_formula(self) -> ast.Node:
        start = self.peek()
        if self.at_op("|-"):
            return self.parse_bare_turnstile()
        first = self.parse_iff()
        if self.at_op(",") or self.at_op("|-"):
            antecedents = [first]
            while self.at_op(","):
                self.advance()
                antecedents.append(self.parse_iff())
            if not self.at_op("|-"):
                fail(E_SYNTAX, "expected '|-' after antecedent list", self.peek().span)
            return self.finish_turnstile(antecedents, start)
        return first

    def parse_bare_turnstile(self) -> ast.Node:
        start = self.peek()
        return self.finish_turnstile([], start)

    def finish_turnstile(self, antecedents: list[ast.Node], start: Token) -> ast.Node:
        self.expect_op("|-")
        proof_term = None
        if self.at_op("[") and not self.is_binder_bracket():
            self.advance()
            proof_term = self.parse_term()
            self.expect_op("]")
        consequents = [self.parse_iff()]
        while self.at_op(","):
            self.advance()
            consequents.append(self.parse_iff())
        span = self.span_from(start)
        if proof_term is not None:
            if len(consequents) != 1 or antecedents:
                fail(E_SYNTAX, "a proof-annotated turnstile has exactly one consequent", span)
            return ast.ProofTurnstile(proof_term, consequents[0], span)
        return ast.Turnstile(tuple(antecedents), tuple(consequents), span)

    def is_binder_bracket(self) -> bool:
        """At '[': distinguish `[x: T] -> ...` binders from bracketed terms."""
        return self.peek(1).kind == "IDENT" and self.peek(2).kind == "OP" and self.peek(2).text == ":"

    def parse_iff(self) -> ast.Node:
        start = self.peek()
        node = self.parse_implies()
        while self.at_op("<=>"):
            self.advance()
            node = ast.Iff(node, self.parse_implies(), self.span_from(start))
        return node

    def parse_implies(self) -> ast.Node:
        start = self.peek()
        node = self.parse_or()
        if self.at_op("=>"):
            self.advance()
            return ast.Implies(node, self.parse_implies(), self.span_from(start))
        return node

    def parse_or(self) -> ast.Node:
        start = self.peek()
        node = self.parse_and()
        while self.at_op("\\/"):
            self.advance()
            node = ast.Or(node, self.parse_and(), self.span_from(start))
        return node

    def parse_and(self) -> ast.Node:
        start = self.peek()
        node = self.parse_unary()
        while self.at_op("/\\"):
            self.advance()
            node = ast.And(node, self.parse_unary(), self.span_from(start))
        return node

    def parse_unary(self, allow_colon: bool = True) -> ast.Node:
        start = self.peek()
        if self.at_word("not"):
            self.advance()
            return ast.Not(self.parse_unary(allow_colon), self.span_from(start))
        if self.at_word("forall") or self.at_word("exists"):
            ctor = ast.Forall if start.text == "forall" else ast.Exists
            self.advance()
            binders = self.parse_binder_list()
            self.expect_op("->")
            body = self.parse_iff()
            for name, type_ in reversed(binders):
                body = ctor(name, type_, body, self.span_from(start))
            return body
        if self.at_op("|-"):
            return self.parse_bare_turnstile()
        return self.parse_relation(allow_colon)

    def parse_binder_list(self) -> list[tuple[str, TypeExpr]]:
        self.expect_op("[")
        binders = []
        while True:
            name = self.expect_ident("binder variable").text
            self.expect_op(":")
            binders.append((name, self.parse_type()))
            if self.at_op(","):
                self.advance()
                continue
            break
        self.expect_op("]")
        return binders

    def parse_relation(self, allow_colon: bool = True) -> ast.Node:
        start = self.peek()
        left = self.parse_term()
        t = self.peek()
        if t.kind == "OP" and t.text in ("=", "<", ">", "<=", ">="):
            self.advance()
            right = self.parse_term()
            span = self.span_from(start)
            if t.text == "=":
                return ast.Relation("=", left, right, span)
            return ast.Apply(ast.ConstRef(t.text, t.span), ast.PairTerm(left, right, span), span)
        if t.kind == "IDENT" and t.text in ("in", "subset", "sqsubseteq", "sqsubset"):
            self.advance()
            return ast.Relation(t.text, left, self.parse_term(), self.span_from(start))
        if allow_colon and self.at_op(":"):
            self.advance()
            type_ = self.parse_type()
            return ast.TypeJudgment(left, type_, self.span_from(start))
        return left

    # -- terms --

    def parse_term(self) -> ast.Node:
        node = self.parse_primary()
        while True:
            if self.at_op("["):
                start = self.peek()
                self.advance()
                args = [self.parse_argument()]
                while self.at_op(","):
                    self.advance()
                    args.append(self.parse_argument())
                self.expect_op("]")
                arg = args[0]
                for extra in args[1:]:
                    arg = ast.PairTerm(arg, extra, self.span_from(start))
                node = ast.Apply(node, arg, Span(node.span.start, self.tokens[self.pos - 1].span.end, node.span.line, node.span.column))
            elif self.at_op(".") and self.at_op("[", 1):
                self.advance()
                self.advance()
                arg = self.parse_argument()
                self.expect_op("]")
                node = ast.ProcApply(node, arg, Span(node.span.start, self.tokens[self.pos - 1].span.end, node.span.line, node.span.column))
            else:
                return node

    def parse_argument(self) -> ast.Node:
        """An application argument: a term, or a parenthesis-free lambda."""
        if self.at_op("[") and self.is_binder_bracket():
            return self.parse_lambda()
        return self.parse_term()

    def parse_lambda(self) -> ast.Node:
        start = self.peek()
        binders = self.parse_binder_list()
        self.expect_op("->")
        body = self.parse_iff()
        for name, type_ in reversed(binders):
            body = ast.Lambda(name, type_, body, self.span_from(start))
        return body

    def parse_primary(self) -> ast.Node:
        t = self.peek()
        if t.kind == "NUMBER":
            self.advance()
            return ast.NatLit(int(t.text), t.span)
        if t.kind == "STRING":
            self.advance()
            return ast.StrLit(t.text, t.span)
        if self.at_word("True") or self.at_word("False"):
            self.advance()
            return ast.BoolLit(t.text == "True", t.span)
        if self.at_word("quote") and self.at_op("(", 1):
            self.advance()
            self.advance()
            inner = self.parse_formula()
            self.expect_op(")")
            return ast.Quote(inner, self.span_from(t))
        if self.at_word("abstract") and self.at_op("(", 1):
            self.advance()
            self.advance()
            inner = self.parse_formula()
            self.expect_op(")")
            return ast.Abstract(inner, self.span_from(t))
        if self.at_word("provable") and self.at_op("(", 1):
            self.advance()
            self.advance()
            inner = self.parse_formula()
            self.expect_op(")")
            return ast.Turnstile((), (inner,), self.span_from(t))
        if self.at_word("Let"):
            return self.parse_let()
        if t.kind == "IDENT":
            if t.text in KEYWORDS:
                fail(E_SYNTAX, f"unexpected keyword {t.text!r}", t.span)
            self.advance()
            return ast.ConstRef(t.text, t.span)
        if self.at_op("[") and self.is_binder_bracket():
            return self.parse_lambda()
        if self.at_op("{"):
            self.advance()
            if self.at_op("}"):
                close = self.advance()
                return ast.ConstRef("EmptySet", Span(t.span.start, close.span.end, t.span.line, t.span.column))
            element = self.parse_term()
            close = self.expect_op("}")
            span = Span(t.span.start, close.span.end, t.span.line, t.span.column)
            return ast.Apply(ast.ConstRef("Singleton", span), element, span)
        if self.at_op("("):
            return self.parse_parenthesized()
        fail(E_SYNTAX, f"unexpected token {t.text or 'end of input'!r}", t.span)

    def parse_parenthesized(self) -> ast.Node:
        open_tok = self.expect_op("(")
        if self.at_op("|-"):
            node = self.parse_bare_turnstile()
            self.expect_op(")")
            return node
        first = self.parse_iff()
        if self.at_op("?"):
            self.advance()
            then_branch = self.parse_conditional_branch()
            self.expect_op(":")
            else_branch = self.parse_conditional_branch()
            close = self.expect_op(")")
            return ast.Conditional(first, then_branch, else_branch, Span(open_tok.span.start, close.span.end, open_tok.span.line, open_tok.span.column))
        if self.at_op(",") or self.at_op("|-"):
            items = [first]
            while self.at_op(","):
                self.advance()
                items.append(self.parse_iff())
            if self.at_op("|-"):
                node = self.finish_turnstile(items, open_tok)
                self.expect_op(")")
                return node
            close = self.expect_op(")")
            if len(items) != 2:
                fail(E_SYNTAX, "a pair has exactly two components", Span(open_tok.span.start, close.span.end, open_tok.span.line, open_tok.span.column))
            return ast.PairTerm(items[0], items[1], Span(open_tok.span.start, close.span.end, open_tok.span.line, open_tok.span.column))
        self.expect_op(")")
        return first

    def parse_conditional_branch(self) -> ast.Node:
        """Conditional branches disallow the bare `:` type judgment (use parens)."""
        start = self.peek()
        node = self.parse_cond_and()
        while self.at_op("\\/"):
            self.advance()
            node = ast.Or(node, self.parse_cond_and(), self.span_from(start))
        if self.at_op("=>"):
            self.advance()
            return ast.Implies(node, self.parse_conditional_branch(), self.span_from(start))
        return node

    def parse_cond_and(self) -> ast.Node:
        start = self.peek()
        node = self.parse_unary(allow_colon=False)
        while self.at_op("/\\"):
            self.advance()
            node = ast.And(node, self.parse_unary(allow_colon=False), self.span_from(start))
        return node

    def parse_let(self) -> ast.Node:
        start = self.expect_word("Let")
        self.expect_op("{")
        bindings = []
        while True:
            name = self.expect_ident("Let-bound variable").text
            self.expect_op(":=")
            bindings.append((name, self.parse_argument()))
            if self.at_op(","):
                self.advance()
                continue
            break
        self.expect_op("}")
        self.expect_op(",")
        body = self.parse_argument()
        return ast.LetExpr(tuple(bindings), body, self.span_from(start))

    # -- declarations and proof scripts --

    def parse_file(self, path: str = "<input>") -> SourceFile:
        declarations: list[Declaration] = []
        while self.peek().kind != "EOF":
            declarations.append(self.parse_declaration())
        return SourceFile(path, self.text, tuple(declarations))

    def parse_declaration(self) -> Declaration:
        t = self.peek()
        if self.at_word("use"):
            self.advance()
            packs = [self.expect_ident("theory pack name").text]
            while self.at_op(","):
                self.advance()
                packs.append(self.expect_ident("theory pack name").text)
            return UseDecl(tuple(packs), self.span_from(t))
        if self.at_word("constant"):
            self.advance()
            name = self.expect_ident("constant name").text
            self.expect_op(":")
            type_start = self.peek()
            type_ = self.parse_type()
            return ConstantDecl(name, type_, self.span_from(t), self.span_from(type_start))
        if self.at_word("def"):
            self.advance()
            name = self.expect_ident("definition name").text
            params: list[tuple[str, TypeExpr]] = []
            if self.at_op("["):
                params = self.parse_binder_list()
            self.expect_op(":=")
            body = self.parse_formula()
            return DefDecl(name, tuple(params), body, self.span_from(t))
        if self.at_word("proof"):
            self.advance()
            name = self.expect_ident("proof name").text
            self.expect_op(":")
            goal = self.parse_formula()
            steps = self.parse_steps()
            if not steps:
                fail(E_SYNTAX, f"proof {name} has no steps", self.span_from(t))
            return ProofDecl(name, goal, tuple(steps), self.span_from(t))
        fail(E_SYNTAX, f"expected a declaration, found {t.text or 'end of input'!r}", t.span)

    def parse_steps(self) -> list[StepLine]:
        steps: list[StepLine] = []
        while self.peek().kind == "NUMBER" and self.at_op(".", 1):
            num_tok = self.advance()
            self.advance()  # '.'
            kind_tok = self.peek()
            if kind_tok.kind != "IDENT" or kind_tok.text not in STEP_KINDS:
                fail(E_SYNTAX, "expected one of assume/have/obtain/conclude", kind_tok.span)
            self.advance()
            formula = self.parse_formula()
            rule = None
            refs: tuple[int, ...] = ()
            payload_node = None
            payload_name = None
            if kind_tok.text == "assume":
                if self.at_word("by"):
                    fail(E_SYNTAX, "an assume step takes no justification", self.peek().span)
            else:
                self.expect_word("by")
                rule = self.expect_ident("rule name").text
                if self.at_op("("):
                    self.advance()
                    nums = []
                    if not self.at_op(")"):
                        while True:
                            ref_tok = self.peek()
                            if ref_tok.kind != "NUMBER":
                                fail(E_SYNTAX, "rule references are step numbers", ref_tok.span)
                            self.advance()
                            nums.append(int(ref_tok.text))
                            if self.at_op(","):
                                self.advance()
                                continue
                            break
                    self.expect_op(")")
                    refs = tuple(nums)
                if self.at_word("with"):
                    self.advance()
                    payload_node = self.parse_argument()
                    if isinstance(payload_node, ast.ConstRef):
                        payload_name = payload_node.name
            steps.append(
                StepLine(
                    int(num_tok.text),
                    num_tok.span.column,
                    kind_tok.text,
                    formula,
                    rule,
                    refs,
                    payload_node,
                    payload_name,
                    self.span_from(num_tok),
                )
            )
        return steps


def parse_file(text: str, path: str = "<input>") -> SourceFile:
    return Parser(text).parse_file(path)


def parse_formula(text: str) -> ast.Node:
    p = Parser(text)
    node = p.parse_formula()
    if p.peek().kind != "EOF":
        fail(E_SYNTAX, f"unexpected trailing input {p.peek().text!r}", p.peek().span)
    return node


def parse_term(text: str) -> ast.Node:
    p = Parser(text)
    node = p.parse_argument()
    if p.peek().kind != "EOF":
        fail(E_SYNTAX, f"unexpected trailing input {p.peek().text!r}", p.peek().span)
    return node


def parse_type(text: str) -> TypeExpr:
    p = Parser(text)
    t = p.parse_type()
    if p.peek().kind != "EOF":
        fail(E_SYNTAX, f"unexpected trailing input {p.peek().text!r}", p.peek().span)
    return t
