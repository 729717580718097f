"""Concrete syntax for ``.pir`` files: a recursive-descent parser and printer.

Grammar (whitespace-insensitive, ``#`` starts a line comment)::

    file      := {assume} [storedecl] proc
    assume    := "assume" ident ":" type ";"
    storedecl := "store" "{" [NAME ":" state {"," NAME ":" state}] "}" "in"
    proc      := seq {"|" seq}
    seq       := prefix | "nil" | "(" proc ")"
    prefix    := ident "!" "(" [idents] ")" "." seq
               | ident "?" "(" [vars] ")" "." seq
               | "if" ident "=" ident "then" seq "else" seq
               | "rec" PVAR "." seq | PVAR
               | "new" NAME ":" state "." seq
               | "alloc" VAR "." seq | "free" ident "." seq
    type      := "ch" "(" [type {"," type}] ")" "@" attr | "proc"
    attr      := "aff" | "unr" | "unq" "(" NAT ")"

Identifiers bound by ``alloc`` or ``?`` are variables; everything else is a
channel name.  ``ν``, ``⊤`` and ``⊥`` are accepted for ``new``, ``alloc`` and
``dealloc``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from pir.syntax import (
    NIL,
    Alloc,
    Configuration,
    Free,
    Identifier,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    Process,
    ProcVar,
    PVarRef,
    Rec,
    Scope,
    State,
    Var,
    free_names,
)
from pir.typesys import AFF, PROC, UNR, Chan, ProcType, Type, TypeEnv, Unique

KEYWORDS = {
    "nil", "if", "then", "else", "rec", "new", "alloc", "dealloc", "free",
    "assume", "store", "in", "ch", "proc", "aff", "unr", "unq",
}
_ALIASES = {"ν": "new", "⊤": "alloc", "⊥": "dealloc"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<turnstile>\|-|⊢)
  | (?P<sym>[!?().,|:;=@{}\[\]]|[ν⊤⊥])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        exp = f" (expected {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{exp}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'num', 'kw', 'sym', 'eof'
    text: str
    offset: int
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            col = pos - line_start + 1
            if kind == "ident" and lexeme in KEYWORDS:
                tokens.append(Token("kw", lexeme, pos, line, col))
            elif kind == "sym" and lexeme in _ALIASES:
                tokens.append(Token("kw", _ALIASES[lexeme], pos, line, col))
            elif kind == "turnstile":
                tokens.append(Token("sym", "|-", pos, line, col))
            else:
                tokens.append(Token(kind, lexeme, pos, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", pos, line, col))
    return tokens


@dataclass
class SourceFile:
    assumptions: list[tuple[Identifier, Type]]
    store: dict[Name, State] | None
    body: Process

    def env(self) -> TypeEnv:
        return TypeEnv(self.assumptions)

    def configuration(self) -> Configuration:
        """The file as a configuration.

        Without a store declaration, every free name and every assumed name
        is allocated.
        """
        if self.store is not None:
            return Configuration(self.store, self.body)
        names = set(free_names(self.body)) | {u for u, _ in self.assumptions if isinstance(u, Name)}
        store = {n: State.ALLOC for n in names}
        return Configuration(store, self.body)


class _Parser:
    def __init__(self, text: str, vars_: Iterable[str] = ()):
        self.toks = tokenize(text)
        self.i = 0
        self.vars: list[str] = list(vars_)

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, expected: Iterable[str] = ()) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{message}, found {found}", t.line, t.column, expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}", [text])
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident_text(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected an identifier", ["identifier"])
        t = self.tok.text
        self.i += 1
        return t

    def ident(self) -> Identifier:
        text = self.ident_text()
        return Var(text) if text in self.vars else Name(text)

    def end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input", ["end of input"])

    # -- files ------------------------------------------------------------
    def file(self) -> SourceFile:
        assumptions: list[tuple[Identifier, Type]] = []
        seen: set[str] = set()
        while self.at("assume"):
            t0 = self.tok
            self.i += 1
            text = self.ident_text()
            if text in seen:
                raise ParseError(f"duplicate assumption for {text!r}", t0.line, t0.column)
            seen.add(text)
            self.expect(":")
            ty = self.type_()
            self.expect(";")
            assumptions.append((Name(text), ty))
        store = None
        if self.accept("store"):
            store = {}
            self.expect("{")
            if not self.at("}"):
                while True:
                    n = Name(self.ident_text())
                    self.expect(":")
                    store[n] = self.state()
                    if not self.accept(","):
                        break
            self.expect("}")
            self.expect("in")
        body = self.proc()
        self.end()
        return SourceFile(assumptions, store, body)

    def state(self) -> State:
        if self.accept("alloc"):
            return State.ALLOC
        if self.accept("dealloc"):
            return State.DEALLOC
        raise self.error("expected a channel state", ["alloc", "dealloc"])

    # -- processes --------------------------------------------------------
    def proc(self) -> Process:
        p = self.seq()
        while self.accept("|"):
            p = Par(p, self.seq())
        return p

    def seq(self) -> Process:
        t = self.tok
        if self.accept("nil"):
            return NIL
        if self.accept("("):
            p = self.proc()
            self.expect(")")
            return p
        if self.accept("if"):
            left = self.ident()
            self.expect("=")
            right = self.ident()
            self.expect("then")
            then = self.seq()
            self.expect("else")
            return Match(left, right, then, self.seq())
        if self.accept("rec"):
            x = ProcVar(self.ident_text())
            self.expect(".")
            return Rec(x, self.seq())
        if self.accept("new"):
            n = self.ident_text()
            self.expect(":")
            s = self.state()
            self.expect(".")
            return Scope(Name(n), s, self.bound(n, shadow=True))
        if self.accept("alloc"):
            x = self.ident_text()
            self.expect(".")
            return Alloc(Var(x), self.bound(x))
        if self.accept("free"):
            u = self.ident()
            self.expect(".")
            return Free(u, self.seq())
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "sym" and nxt.text == "!":
                u = self.ident()
                self.i += 1
                objs = self.paren_list(self.ident)
                self.expect(".")
                return Output(u, tuple(objs), self.seq())
            if nxt.kind == "sym" and nxt.text == "?":
                u = self.ident()
                self.i += 1
                start = self.tok
                params = self.paren_list(self.ident_text)
                if len(set(params)) != len(params):
                    raise ParseError("input parameters must be distinct", start.line, start.column)
                self.expect(".")
                return Input(u, tuple(Var(x) for x in params), self.bound(*params))
            self.i += 1
            return PVarRef(ProcVar(t.text))
        raise self.error("expected a process", ["nil", "(", "if", "rec", "new", "alloc", "free", "identifier"])

    def bound(self, *texts: str, shadow: bool = False) -> Process:
        saved = list(self.vars)
        if shadow:
            self.vars = [v for v in self.vars if v not in texts]
        else:
            self.vars.extend(texts)
        try:
            return self.seq()
        finally:
            self.vars = saved

    def paren_list(self, item):
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(item())
            while self.accept(","):
                out.append(item())
        self.expect(")")
        return out

    # -- types ------------------------------------------------------------
    def type_(self) -> Type:
        if self.accept("proc"):
            return PROC
        self.expect("ch")
        objs = self.paren_list(self.type_)
        self.expect("@")
        return Chan(tuple(objs), self.attr())

    def attr(self):
        if self.accept("aff"):
            return AFF
        if self.accept("unr"):
            return UNR
        if self.accept("unq"):
            self.expect("(")
            if self.tok.kind != "num":
                raise self.error("expected a natural number", ["number"])
            n = int(self.tok.text)
            self.i += 1
            self.expect(")")
            return Unique(n)
        raise self.error("expected an attribute", ["aff", "unr", "unq"])

    def env(self) -> TypeEnv:
        entries = []
        if self.at("|-") or self.tok.kind == "eof":
            return TypeEnv()
        while True:
            text = self.ident_text()
            self.expect(":")
            ty = self.type_()
            if isinstance(ty, ProcType):
                key = ProcVar(text)
            else:
                key = Var(text) if text in self.vars else Name(text)
            entries.append((key, ty))
            if not self.accept(","):
                break
        return TypeEnv(entries)


def parse(text: str) -> SourceFile:
    """Parse a ``.pir`` source file.  Raises ParseError."""
    return _Parser(text).file()


def parse_process(text: str, vars: Iterable[str] = ()) -> Process:
    """Parse a bare process; identifiers listed in ``vars`` are free variables."""
    p = _Parser(text, vars)
    proc = p.proc()
    p.end()
    return proc


def parse_type(text: str) -> Type:
    p = _Parser(text)
    ty = p.type_()
    p.end()
    return ty


def parse_env(text: str, vars: Iterable[str] = ()) -> TypeEnv:
    p = _Parser(text, vars)
    env = p.env()
    p.end()
    return env


def parse_judgment(text: str, vars: Iterable[str] = ()) -> tuple[TypeEnv, Process]:
    """Parse ``env |- process``."""
    p = _Parser(text, vars)
    env = p.env()
    p.expect("|-")
    proc = p.proc()
    p.end()
    return env, proc


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _ids(us) -> str:
    return ", ".join(u.text for u in us)


def _seq(p: Process) -> str:
    s = _proc(p)
    return f"({s})" if isinstance(p, Par) else s


def _proc(p: Process) -> str:
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, Output):
        return f"{p.subject.text}!({_ids(p.objects)}).{_seq(p.cont)}"
    if isinstance(p, Input):
        return f"{p.subject.text}?({_ids(p.params)}).{_seq(p.cont)}"
    if isinstance(p, Match):
        return f"if {p.left.text} = {p.right.text} then {_seq(p.then)} else {_seq(p.else_)}"
    if isinstance(p, Rec):
        return f"rec {p.binder.text}.{_seq(p.body)}"
    if isinstance(p, PVarRef):
        return p.var.text
    if isinstance(p, Par):
        right = _proc(p.right)
        if isinstance(p.right, Par):
            right = f"({right})"
        return f"{_proc(p.left)} | {right}"
    if isinstance(p, Scope):
        return f"new {p.name.text}:{p.state.value}.{_seq(p.body)}"
    if isinstance(p, Alloc):
        return f"alloc {p.var.text}.{_seq(p.body)}"
    if isinstance(p, Free):
        return f"free {p.subject.text}.{_seq(p.cont)}"
    raise TypeError(f"not a process: {p!r}")


def pretty_config(c: Configuration) -> str:
    store = ", ".join(f"{n.text}:{s.value}" for n, s in sorted(c.store.items()))
    return f"store {{{store}}} in {_proc(c.process)}"


def pretty(x) -> str:
    """Render a process, type, attribute, environment, configuration or file."""
    if isinstance(x, Process):
        return _proc(x)
    if isinstance(x, SourceFile):
        lines = [f"assume {u.text} : {t};" for u, t in x.assumptions]
        body = _proc(x.body)
        if x.store is not None:
            store = ", ".join(f"{n.text}:{s.value}" for n, s in x.store.items())
            body = f"store {{{store}}} in\n{body}"
        return "\n".join(lines + [body]) + "\n"
    if isinstance(x, Configuration):
        return pretty_config(x)
    return str(x)
