"""First-order formula ASTs with a TPTP-FOF subset parser and printer.

The grammar accepted here is deliberately small: `fof(name, role, formula).`
statements with `%` line comments, quantifiers `![X,Y]:` / `?[X]:`, the
connectives `~ & | => <=>`, infix `=` / `!=`, and `$true` / `$false` as
nullary atoms.  Precedence is `~` > `&` > `|` > `=>`/`<=>`, and the two
lowest operators are non-associative (chains need parentheses).

Printing is deterministic and fully parenthesizes every compound
subformula, so `parse(print(f))` is structurally identical to `f`.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass

__all__ = [
    "Term",
    "Formula",
    "AnnotatedFormula",
    "ParseError",
    "DuplicateNameError",
    "UnknownRoleError",
    "ROLES",
    "MAX_NESTING",
    "var",
    "const",
    "fn",
    "atom",
    "parse_file",
    "parse_formula",
    "print_formula",
    "print_term",
    "print_tptp",
]

ROLES = frozenset(
    {"axiom", "definition", "typing", "lemma", "theorem", "conjecture"}
)

# Formula node kinds.
FORALL = "forall"
EXISTS = "exists"
AND = "and"
OR = "or"
IMPLIES = "implies"
IFF = "iff"
NOT = "not"
ATOM = "atom"
EQ = "eq"

BINARY_KINDS = frozenset({AND, OR, IMPLIES, IFF})
QUANT_KINDS = frozenset({FORALL, EXISTS})

#: Maximum formula/term nesting accepted by the parser.
MAX_NESTING = 10_000

DOLLAR_ATOMS = frozenset({"$true", "$false"})


@dataclass(frozen=True)
class Term:
    """A first-order term: variable, constant, or function application."""

    head: str
    args: tuple["Term", ...] = ()
    is_var: bool = False

    def __post_init__(self):
        if self.is_var and self.args:
            raise ValueError(f"variable {self.head!r} cannot take arguments")


@dataclass(frozen=True)
class Formula:
    """Formula tree node; `kind` selects which payload fields are live."""

    kind: str
    children: tuple["Formula", ...] = ()
    bound: tuple[str, ...] = ()  # quantified variable names
    atom: Term | None = None  # payload for ATOM nodes
    left: Term | None = None  # payload for EQ nodes
    right: Term | None = None


@dataclass(frozen=True)
class AnnotatedFormula:
    name: str
    role: str
    body: Formula


def var(name: str) -> Term:
    return Term(name, (), True)


def const(name: str) -> Term:
    return Term(name)


def fn(head: str, *args: Term) -> Term:
    return Term(head, tuple(args))


def atom(head: str, *args: Term) -> Formula:
    return Formula(ATOM, atom=Term(head, tuple(args)))


class ParseError(Exception):
    """Positioned syntax error with the token set expected at the point."""

    def __init__(self, message, line=0, col=0, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        loc = f"line {line}, column {col}: {message}"
        if self.expected:
            loc += " (expected: " + ", ".join(self.expected) + ")"
        super().__init__(loc)


class DuplicateNameError(ParseError):
    pass


class UnknownRoleError(ParseError):
    pass


# ---------------------------------------------------------------------------
# Deep-recursion support.  CPython's C stack cannot absorb the ~6 frames per
# nesting level a 10k-deep formula costs, so inputs that might nest deeply
# are parsed inside a worker thread with a large stack.

_DEEP_STACK_BYTES = 512 << 20
_DEEP_RECURSION_LIMIT = 200_000
_DIRECT_NESTING_BUDGET = 800


def _run_with_deep_stack(fun):
    box, err = [], []

    def runner():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(_DEEP_RECURSION_LIMIT)
        try:
            box.append(fun())
        except BaseException as exc:  # re-raised in the caller
            err.append(exc)
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(_DEEP_STACK_BYTES)
    try:
        worker = threading.Thread(target=runner, name="fol-deep-parse")
        worker.start()
    finally:
        threading.stack_size(old_size)
    worker.join()
    if err:
        raise err[0]
    return box[0]


# ---------------------------------------------------------------------------
# Tokenizer


_PUNCT = {"(": "(", ")": ")", "[": "[", "]": "]", ",": ",", ":": ":",
          ".": ".", "~": "~", "&": "&", "|": "|"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch in _PUNCT:
            toks.append(_Token(_PUNCT[ch], ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "=":
            if text[i : i + 2] == "=>":
                toks.append(_Token("=>", "=>", start_line, start_col))
                i += 2
                col += 2
            else:
                toks.append(_Token("=", "=", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == "<":
            if text[i : i + 3] == "<=>":
                toks.append(_Token("<=>", "<=>", start_line, start_col))
                i += 3
                col += 3
                continue
            raise ParseError("unexpected character '<'", start_line, start_col,
                             expected=("<=>",))
        if ch == "!":
            if text[i : i + 2] == "!=":
                toks.append(_Token("!=", "!=", start_line, start_col))
                i += 2
                col += 2
            else:
                toks.append(_Token("!", "!", start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == "?":
            toks.append(_Token("?", "?", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            toks.append(_Token("dword", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "uword" if ch.isupper() else "lword"
            toks.append(_Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        raise ParseError(
            f"unexpected character {ch!r}", start_line, start_col,
            expected=("fof", "formula"),
        )
    toks.append(_Token("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.toks = tokens
        self.i = 0
        self.depth = 0
        self.arity: dict[str, int] = {}

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, *alternatives: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            what = tok.text or "end of input"
            raise ParseError(
                f"unexpected {what!r}", tok.line, tok.col,
                expected=(kind,) + alternatives,
            )
        return self.advance()

    def enter(self, tok: _Token):
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError(
                f"nesting exceeds the supported depth of {MAX_NESTING}",
                tok.line, tok.col,
            )

    def leave(self):
        self.depth -= 1

    def check_arity(self, head: str, count: int, tok: _Token):
        known = self.arity.get(head)
        if known is None:
            self.arity[head] = count
        elif known != count:
            raise ParseError(
                f"symbol {head!r} used with arity {count} but previously "
                f"with arity {known}", tok.line, tok.col,
            )

    # fof file ------------------------------------------------------------

    def parse_entries(self) -> list[AnnotatedFormula]:
        out: list[AnnotatedFormula] = []
        seen: dict[str, int] = {}
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind != "lword" or tok.text != "fof":
                raise ParseError(
                    f"unexpected {tok.text or 'end of input'!r}",
                    tok.line, tok.col, expected=("fof",),
                )
            self.advance()
            self.expect("(")
            name_tok = self.expect("lword")
            name = name_tok.text
            if name in seen:
                raise DuplicateNameError(
                    f"duplicate formula name {name!r}",
                    name_tok.line, name_tok.col,
                )
            seen[name] = 1
            self.expect(",")
            role_tok = self.expect("lword")
            if role_tok.text not in ROLES:
                raise UnknownRoleError(
                    f"unknown role {role_tok.text!r}",
                    role_tok.line, role_tok.col,
                    expected=tuple(sorted(ROLES)),
                )
            self.expect(",")
            self.arity = {}
            body = self.parse_formula()
            self.expect(")")
            self.expect(".")
            out.append(AnnotatedFormula(name, role_tok.text, body))
        return out

    # formulas ------------------------------------------------------------

    def parse_formula(self) -> Formula:
        left = self.parse_or()
        op = self.peek()
        if op.kind in ("=>", "<=>"):
            self.advance()
            right = self.parse_or()
            nxt = self.peek()
            if nxt.kind in ("=>", "<=>"):
                raise ParseError(
                    f"'{op.kind}' is non-associative; parenthesize the "
                    "chained occurrence", nxt.line, nxt.col,
                    expected=(")", "."),
                )
            kind = IMPLIES if op.kind == "=>" else IFF
            return Formula(kind, (left, right))
        return left

    def parse_or(self) -> Formula:
        node = self.parse_and()
        while self.peek().kind == "|":
            self.advance()
            node = Formula(OR, (node, self.parse_and()))
        return node

    def parse_and(self) -> Formula:
        node = self.parse_unary()
        while self.peek().kind == "&":
            self.advance()
            node = Formula(AND, (node, self.parse_unary()))
        return node

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.advance()
            self.enter(tok)
            try:
                return Formula(NOT, (self.parse_unary(),))
            finally:
                self.leave()
        if tok.kind in ("!", "?"):
            self.advance()
            self.expect("[")
            names = [self.expect("uword").text]
            while self.peek().kind == ",":
                self.advance()
                names.append(self.expect("uword").text)
            self.expect("]")
            self.expect(":")
            self.enter(tok)
            try:
                body = self.parse_unary()
            finally:
                self.leave()
            kind = FORALL if tok.kind == "!" else EXISTS
            return Formula(kind, (body,), bound=tuple(names))
        if tok.kind == "(":
            self.advance()
            self.enter(tok)
            try:
                inner = self.parse_formula()
            finally:
                self.leave()
            self.expect(")")
            return inner
        if tok.kind == "dword":
            if tok.text not in DOLLAR_ATOMS:
                raise ParseError(
                    f"unknown defined symbol {tok.text!r}",
                    tok.line, tok.col, expected=tuple(sorted(DOLLAR_ATOMS)),
                )
            self.advance()
            return Formula(ATOM, atom=Term(tok.text))
        if tok.kind in ("lword", "uword"):
            term = self.parse_term()
            nxt = self.peek()
            if nxt.kind == "=":
                self.advance()
                rhs = self.parse_term()
                return Formula(EQ, left=term, right=rhs)
            if nxt.kind == "!=":
                self.advance()
                rhs = self.parse_term()
                return Formula(NOT, (Formula(EQ, left=term, right=rhs),))
            if term.is_var:
                raise ParseError(
                    f"variable {term.head!r} is not a formula",
                    tok.line, tok.col, expected=("=", "!="),
                )
            return Formula(ATOM, atom=term)
        raise ParseError(
            f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col,
            expected=("~", "!", "?", "(", "atom"),
        )

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok.kind == "uword":
            self.advance()
            return Term(tok.text, (), True)
        head = self.expect("lword", "uword").text
        if self.peek().kind != "(":
            self.check_arity(head, 0, tok)
            return Term(head)
        self.advance()
        self.enter(tok)
        try:
            args = [self.parse_term()]
            while self.peek().kind == ",":
                self.advance()
                args.append(self.parse_term())
        finally:
            self.leave()
        self.expect(")")
        self.check_arity(head, len(args), tok)
        return Term(head, tuple(args))


def _nesting_estimate(text: str) -> int:
    return text.count("(") + text.count("~") + text.count("[")


def _parse(text: str, entry: str):
    def go():
        parser = _Parser(_tokenize(text))
        if entry == "file":
            result = parser.parse_entries()
        else:
            parser.arity = {}
            result = parser.parse_formula()
            parser.expect("EOF")
        return result

    try:
        if _nesting_estimate(text) <= _DIRECT_NESTING_BUDGET:
            old = sys.getrecursionlimit()
            sys.setrecursionlimit(max(old, 16_000))
            try:
                return go()
            finally:
                sys.setrecursionlimit(old)
        return _run_with_deep_stack(go)
    except RecursionError:
        raise ParseError(
            f"nesting exceeds the supported depth of {MAX_NESTING}", 0, 0
        ) from None


def parse_file(text: str) -> list[AnnotatedFormula]:
    """Parse a sequence of `fof(name, role, formula).` statements."""
    return _parse(text, "file")


def parse_formula(text: str) -> Formula:
    """Parse a bare formula body (no `fof` wrapper)."""
    return _parse(text, "formula")


# ---------------------------------------------------------------------------
# Printer


def print_term(t: Term) -> str:
    if not t.args:
        return t.head
    return f"{t.head}({','.join(print_term(a) for a in t.args)})"


_CONNECTIVE = {AND: "&", OR: "|", IMPLIES: "=>", IFF: "<=>"}


def _print_body(f: Formula) -> str:
    if f.kind == ATOM:
        return print_term(f.atom)
    if f.kind == EQ:
        return f"({print_term(f.left)} = {print_term(f.right)})"
    if f.kind == NOT:
        return f"(~ {_print_body(f.children[0])})"
    if f.kind in BINARY_KINDS:
        op = _CONNECTIVE[f.kind]
        left, right = f.children
        return f"({_print_body(left)} {op} {_print_body(right)})"
    if f.kind in QUANT_KINDS:
        sym = "!" if f.kind == FORALL else "?"
        return f"({sym}[{','.join(f.bound)}]: {_print_body(f.children[0])})"
    raise ValueError(f"unknown formula kind {f.kind!r}")


def print_formula(f: Formula) -> str:
    """Deterministic, fully parenthesized rendering of a formula body."""
    try:
        return _print_body(f)
    except RecursionError:
        return _run_with_deep_stack(lambda: _print_body(f))


def print_tptp(f: AnnotatedFormula) -> str:
    """Render one annotated formula as a `fof(...)` statement."""
    return f"fof({f.name}, {f.role}, {print_formula(f.body)})."
