"""Text syntax for metric definitions.

Grammar (lowest precedence first)::

    metric         := term (("+" | "-") term)*
    term           := factor (("*" | "/") factor)*
    factor         := "count" "(" ("triples" | transformation) ")"
                    | "positive" "(" metric ")" | NUMBER | "-" NUMBER | "(" metric ")"
    transformation := tand (("OR" | "∪") tand)*
    tand           := tatom (("AND" | "∩") tatom)*
    tatom          := ["!"] RULE "(" filter ")" | "resTooLong" "(" "?s" "," "?p" "," "?o" ")"
                    | "(" transformation ")"
    filter         := fand (("||" | "or") fand)*
    fand           := fatom ("&&" fatom)*
    fatom          := "?s" | "?p" | "?o" | "getSubjects" | "getPredicates" | "getObjects"
                    | ("distinct" | "getDistinct") "(" filter ")" | "(" filter ")"

Metric files hold stanzas ``metric <name> "<description>" := <expr>``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .qap import ast as A
from .qap.context import EvaluationContext
from .qap.plan import plan_problems
from .qap.rules import RULES, canonical_rule_name

SourceSpan = A.SourceSpan


@dataclass(frozen=True)
class DslDiagnostic:
    severity: str
    message: str
    span: SourceSpan

    def format(self, src: str | None = None) -> str:
        head = f"{self.span.line}:{self.span.column}: {self.severity}: {self.message}"
        if src is None:
            return head
        line_text = src.splitlines()[self.span.line - 1] if src.splitlines() else ""
        caret = " " * (self.span.column - 1) + "^" * max(1, min(self.span.end - self.span.start, len(line_text)))
        return f"{head}\n    {line_text}\n    {caret}"


class DslError(ValueError):
    def __init__(self, diagnostics: list[DslDiagnostic], src: str | None = None):
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.format(src) for d in diagnostics))


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<var>\?[spo](?![A-Za-z0-9_]))
  | (?P<number>(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||:=|[()+\-*/!,∩∪])
  | (?P<string>"(?:[^"\\\n]|\\.)*")
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


class _Source:
    def __init__(self, text: str):
        self.text = text
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def span(self, start: int, end: int) -> SourceSpan:
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return SourceSpan(start, end, lo + 1, start - self._line_starts[lo] + 1)


class _Fail(Exception):
    def __init__(self, message: str, start: int, end: int):
        self.message, self.start, self.end = message, start, end


def tokenize(text: str, start: int = 0, end: int | None = None) -> list[Token]:
    end = len(text) if end is None else end
    pos = start
    out = []
    while pos < end:
        m = _TOKEN.match(text, pos, end)
        if m is None:
            raise _Fail(f"unexpected character {text[pos]!r}", pos, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Token("eof", "", end, end))
    return out


_FILTER_NAMES = {"getSubjects": "s", "getPredicates": "p", "getObjects": "o"}


class _Parser:
    def __init__(self, src: _Source, tokens: list[Token]):
        self.src = src
        self.toks = tokens
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "name") and t.text in texts

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def span(self, start: int) -> SourceSpan:
        end = self.toks[self.i - 1].end if self.i else start
        return self.src.span(start, max(start, end))

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise _Fail(message, tok.start, max(tok.end, tok.start))

    def expect(self, text: str, what: str | None = None) -> Token:
        if self.at(text):
            return self.advance()
        got = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
        self.fail(f"expected {what or repr(text)}, got {got}")

    def close(self, opener: Token) -> None:
        if self.at(")"):
            self.advance()
            return
        if self.tok.kind == "eof":
            raise _Fail("unbalanced parentheses: missing ')'", opener.start, opener.end)
        self.fail(f"expected ')', got {self.tok.text!r}")

    def finish(self) -> None:
        if self.tok.kind != "eof":
            if self.at(")"):
                self.fail("unbalanced parentheses: unexpected ')'")
            self.fail(f"unexpected {self.tok.text!r} after end of expression")

    # metric level
    def metric(self) -> A.Metric:
        start = self.tok.start
        left = self.term()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.term()
            left = A.Arith(op, left, right, span=self.span(start))
        return left

    def term(self) -> A.Metric:
        start = self.tok.start
        left = self.factor()
        while self.at("*", "/"):
            op = self.advance().text
            right = self.factor()
            left = A.Arith(op, left, right, span=self.span(start))
        return left

    def number(self, negative: bool, start: int) -> A.Const:
        text = self.advance().text
        value = float(text) if any(c in text for c in ".eE") else int(text)
        return A.Const(-value if negative else value, span=self.span(start))

    def factor(self) -> A.Metric:
        t = self.tok
        start = t.start
        if t.kind == "number":
            return self.number(False, start)
        if self.at("-") and self.toks[self.i + 1].kind == "number":
            self.advance()
            return self.number(True, start)
        if self.at("("):
            opener = self.advance()
            inner = self.metric()
            self.close(opener)
            return inner
        if self.at("count", "Count"):
            self.advance()
            opener = self.expect("(")
            if self.at("triples") and self.toks[self.i + 1].text == ")":
                self.advance()
                self.close(opener)
                return A.CountTriples(span=self.span(start))
            tr = self.transformation()
            self.close(opener)
            return A.Count(tr, span=self.span(start))
        if self.at("positive"):
            self.advance()
            opener = self.expect("(")
            inner = self.metric()
            self.close(opener)
            return A.Positive(inner, span=self.span(start))
        if t.kind == "eof":
            self.fail("unexpected end of input, expected a metric expression")
        if t.kind == "name" and canonical_rule_name(t.text):
            self.fail(f"rule {t.text!r} must appear inside count(...)")
        self.fail(f"unexpected {t.text!r}, expected count(...), positive(...), a number or '('")

    # transformation level
    def transformation(self) -> A.Transformation:
        start = self.tok.start
        left = self.tand()
        while self.at("OR", "∪"):
            self.advance()
            right = self.tand()
            left = A.Union(left, right, span=self.span(start))
        return left

    def tand(self) -> A.Transformation:
        start = self.tok.start
        left = self.tatom()
        while self.at("AND", "∩"):
            self.advance()
            right = self.tatom()
            left = A.Intersect(left, right, span=self.span(start))
        return left

    def tatom(self) -> A.Transformation:
        start = self.tok.start
        if self.at("("):
            opener = self.advance()
            inner = self.transformation()
            self.close(opener)
            return inner
        negated = False
        if self.at("!"):
            self.advance()
            negated = True
        t = self.tok
        if t.kind != "name":
            self.fail("expected a rule name" if t.kind != "eof" else "unexpected end of input, expected a rule")
        name = canonical_rule_name(t.text)
        if name is None:
            self.fail(f"unknown rule {t.text!r}")
        self.advance()
        info = RULES[name]
        if not self.at("("):
            if info.takes_filter:
                self.fail(f"{t.text} expects a filter argument in parentheses")
            rule = A.Rule(name, None, negated, span=self.span(start))
            return A.RuleNode(rule, span=rule.span)
        opener = self.advance()
        args = [self.filter()]
        while self.at(","):
            self.advance()
            args.append(self.filter())
        self.close(opener)
        if name == "resTooLong":
            if args != [A.S, A.P, A.O]:
                raise _Fail(
                    f"arity mismatch: resTooLong takes (?s, ?p, ?o), got {len(args)} argument(s)",
                    t.start,
                    self.toks[self.i - 1].end,
                )
            arg = A.FilterOr(A.FilterOr(A.S, A.P), A.O)
        elif len(args) != 1:
            raise _Fail(
                f"arity mismatch: {t.text} takes 1 filter argument, got {len(args)}",
                t.start,
                self.toks[self.i - 1].end,
            )
        else:
            arg = args[0]
        rule = A.Rule(name, arg, negated, span=self.span(start))
        return A.RuleNode(rule, span=rule.span)

    # filter level
    def filter(self) -> A.Filter:
        start = self.tok.start
        left = self.fand()
        while self.at("||", "or"):
            self.advance()
            right = self.fand()
            left = A.FilterOr(left, right, span=self.span(start))
        return left

    def fand(self) -> A.Filter:
        start = self.tok.start
        left = self.fatom()
        while self.at("&&"):
            self.advance()
            right = self.fatom()
            left = A.FilterAnd(left, right, span=self.span(start))
        return left

    def fatom(self) -> A.Filter:
        t = self.tok
        start = t.start
        if t.kind == "var":
            self.advance()
            return A.Pos(t.text[1], span=self.span(start))
        if t.kind == "name" and t.text in _FILTER_NAMES:
            self.advance()
            return A.Pos(_FILTER_NAMES[t.text], span=self.span(start))
        if self.at("distinct", "getDistinct"):
            self.advance()
            opener = self.expect("(")
            inner = self.filter()
            self.close(opener)
            return A.Distinct(inner, span=self.span(start))
        if self.at("("):
            opener = self.advance()
            inner = self.filter()
            self.close(opener)
            return inner
        self.fail("expected a filter (?s, ?p, ?o or distinct(...))" if t.kind != "eof" else "unexpected end of input, expected a filter")


def _parse(src: _Source, start: int, end: int) -> A.Metric:
    try:
        parser = _Parser(src, tokenize(src.text, start, end))
        m = parser.metric()
        parser.finish()
        return m
    except _Fail as f:
        raise DslError([DslDiagnostic("error", f.message, src.span(f.start, f.end))], src.text) from None


def parse_metric_text(src: str) -> A.Metric:
    """Parse one metric expression; raises :class:`DslError` with spans."""
    return _parse(_Source(src), 0, len(src))


def pretty_print(m: A.Node) -> str:
    return A.to_text(m)


def validate_plan(m: A.Metric, ctx: EvaluationContext | None = None, src: str | None = None) -> list[DslDiagnostic]:
    """Diagnostics that keep ``m`` from running (empty when plan-legal)."""
    whole = SourceSpan(0, len(src) if src else 0, 1, 1)
    out = []
    for p in plan_problems(m, ctx):
        span = getattr(p.node, "span", None) or whole
        prefix = "configuration error: " if p.kind == "config" else ""
        out.append(DslDiagnostic("error", prefix + p.message, span))
    return out


def compile_metric(src: str, ctx: EvaluationContext | None = None) -> A.Metric:
    """Parse and validate; raises :class:`DslError` on any error diagnostic."""
    m = parse_metric_text(src)
    diags = validate_plan(m, ctx, src)
    if diags:
        raise DslError(diags, src)
    return m


@dataclass(frozen=True)
class MetricSource:
    name: str
    description: str
    expr: A.Metric


_STANZA = re.compile(r'^[ \t]*metric[ \t]+([A-Za-z_][A-Za-z0-9_\-]*)[ \t]+"((?:[^"\\\n]|\\.)*)"[ \t]*:=', re.M)


def parse_metric_file(text: str) -> list[MetricSource]:
    """Parse every ``metric name "description" := expr`` stanza in ``text``."""
    src = _Source(text)
    heads = list(_STANZA.finditer(text))
    out = []
    errors = []
    first = heads[0].start() if heads else len(text)
    leading = re.sub(r"#[^\n]*", "", text[:first]).strip()
    if leading:
        pos = text.index(leading[0])
        errors.append(DslDiagnostic("error", "expected 'metric <name> \"<description>\" := <expr>'", src.span(pos, pos + 1)))
    seen = set()
    for i, h in enumerate(heads):
        end = heads[i + 1].start() if i + 1 < len(heads) else len(text)
        name = h.group(1)
        if name in seen:
            errors.append(DslDiagnostic("error", f"duplicate metric name {name!r}", src.span(h.start(1), h.end(1))))
            continue
        seen.add(name)
        try:
            expr = _parse(src, h.end(), end)
        except DslError as e:
            errors.extend(e.diagnostics)
            continue
        description = re.sub(r"\\(.)", r"\1", h.group(2))
        out.append(MetricSource(name, description, expr))
    if errors:
        raise DslError(errors, text)
    return out


def load_metric_file(path) -> list[MetricSource]:
    with open(path, encoding="utf-8") as fh:
        return parse_metric_file(fh.read())
