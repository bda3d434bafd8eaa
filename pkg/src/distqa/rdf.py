"""RDF terms, triples and a line-oriented N-Triples reader/writer."""
from __future__ import annotations

import io
import logging
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

logger = logging.getLogger(__name__)

IRI = "iri"
BNODE = "bnode"
LITERAL = "literal"

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_STRING = XSD + "string"
RDF_LANGSTRING = RDF + "langString"


class Term(NamedTuple):
    """An RDF node.

    ``value`` holds the IRI string, the blank node label or the literal's
    lexical form depending on ``kind``. ``datatype`` and ``lang`` are only
    set for literals.
    """

    kind: str
    value: str
    datatype: str | None = None
    lang: str | None = None

    @property
    def iri(self) -> str | None:
        return self.value if self.kind == IRI else None

    @property
    def label(self) -> str | None:
        return self.value if self.kind == BNODE else None

    @property
    def lexical(self) -> str | None:
        return self.value if self.kind == LITERAL else None

    def is_iri(self) -> bool:
        return self.kind == IRI

    def is_literal(self) -> bool:
        return self.kind == LITERAL

    def n3(self) -> str:
        return serialize_term(self)


class Triple(NamedTuple):
    subject: Term
    predicate: Term
    object: Term

    def n3(self) -> str:
        return serialize_triple(self)


# IRIREF may not contain these (after UCHAR decoding as well).
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_IRI_SCHEME = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
_LANG = re.compile(r"[a-zA-Z]+(?:-[a-zA-Z0-9]+)*\Z")


def iri(value: str) -> Term:
    if not value or _IRI_FORBIDDEN.search(value):
        raise ValueError(f"invalid IRI: {value!r}")
    if not _IRI_SCHEME.match(value):
        raise ValueError(f"IRI is not absolute: {value!r}")
    return Term(IRI, value)


def bnode(label: str) -> Term:
    if not _BNODE_LABEL_FULL.match(label):
        raise ValueError(f"invalid blank node label: {label!r}")
    return Term(BNODE, label)


def literal(lexical: str, datatype: str | None = None, lang: str | None = None) -> Term:
    if lang is not None:
        if not _LANG.match(lang):
            raise ValueError(f"invalid language tag: {lang!r}")
        if datatype not in (None, RDF_LANGSTRING):
            raise ValueError("a language-tagged literal must have datatype rdf:langString")
        return Term(LITERAL, lexical, RDF_LANGSTRING, lang)
    if datatype is None:
        datatype = XSD_STRING
    elif datatype == RDF_LANGSTRING:
        raise ValueError("rdf:langString requires a language tag")
    else:
        iri(datatype)
    return Term(LITERAL, lexical, datatype, None)


# --- N-Triples grammar -----------------------------------------------------

_PN_CHARS_BASE = (
    "A-Za-z\u00c0-\u00d6\u00d8-\u00f6\u00f8-\u02ff\u0370-\u037d\u037f-\u1fff"
    "\u200c-\u200d\u2070-\u218f\u2c00-\u2fef\u3001-\ud7ff\uf900-\ufdcf"
    "\ufdf0-\ufffd\U00010000-\U000effff"
)
_PN_CHARS_U = _PN_CHARS_BASE + "_:"
_PN_CHARS = _PN_CHARS_U + "\\-0-9\u00b7\u0300-\u036f\u203f-\u2040"
_BNODE_LABEL = rf"[{_PN_CHARS_U}0-9](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?"
_BNODE_LABEL_FULL = re.compile(_BNODE_LABEL + r"\Z")

_UCHAR = r"\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8}"
# unrolled loops: runs of plain characters between escapes
_IRI_CHARS = r'[^\x00-\x20<>"{}|^`\\]*'
_IRIREF = rf"<({_IRI_CHARS}(?:(?:{_UCHAR}){_IRI_CHARS})*)>"
_STR_CHARS = r'[^"\\\n\r]*'
_STRING = rf'"({_STR_CHARS}(?:(?:\\[tbnrf"\'\\]|{_UCHAR}){_STR_CHARS})*)"'
_LANGTAG = r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)"
_WS = r"[ \t]*"

_LINE = re.compile(
    rf"{_WS}(?:{_IRIREF}|_:({_BNODE_LABEL}))"
    rf"{_WS}{_IRIREF}"
    rf"{_WS}(?:{_IRIREF}|_:({_BNODE_LABEL})|{_STRING}(?:{_WS}\^\^{_WS}{_IRIREF}|{_LANGTAG})?)"
    rf"{_WS}\.{_WS}(?:#.*)?\Z"
)

_RE_IRIREF = re.compile(_IRIREF)
_RE_BNODE = re.compile(rf"_:({_BNODE_LABEL})")
_RE_STRING = re.compile(_STRING)
_RE_LANGTAG = re.compile(_LANGTAG)
_RE_WS = re.compile(_WS)
_RE_ESCAPE = re.compile(rf"{_UCHAR}|\\[tbnrf\"'\\]")

_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape_match(m: re.Match) -> str:
    s = m.group(0)
    if s[1] in "uU":
        return chr(int(s[2:], 16))
    return _ECHAR[s[1]]


def _unescape(s: str) -> str:
    if "\\" not in s:
        return s
    return _RE_ESCAPE.sub(_unescape_match, s)


class ParseError(ValueError):
    """A malformed N-Triples line.

    ``category`` is one of ``bad-iri``, ``bad-literal``, ``bad-blank-node``,
    ``bad-escape``, ``missing-terminal``, ``bad-structure`` or ``encoding``.
    """

    def __init__(self, line_no: int, offset: int, category: str, message: str):
        super().__init__(f"line {line_no}, offset {offset}: {category}: {message}")
        self.line_no = line_no
        self.offset = offset
        self.category = category
        self.message = message


def _iri_term(raw: str, line_no: int, offset: int) -> Term:
    value = _unescape(raw)
    if _IRI_FORBIDDEN.search(value):
        raise ParseError(line_no, offset, "bad-iri", f"IRI contains a forbidden character: <{raw}>")
    if not _IRI_SCHEME.match(value):
        raise ParseError(line_no, offset, "bad-iri", f"relative IRI not allowed: <{raw}>")
    return Term(IRI, value)


def _build(groups, line_no: int, cache: dict | None) -> Triple:
    s_iri, s_bn, p_iri, o_iri, o_bn, o_str, o_dt, o_lang = groups
    get = cache.get if cache is not None else None

    if s_iri is not None:
        s = get(s_iri) if get else None
        if s is None:
            s = _iri_term(s_iri, line_no, 0)
            if cache is not None:
                cache[s_iri] = s
    else:
        s = Term(BNODE, s_bn)

    p = get(p_iri) if get else None
    if p is None:
        p = _iri_term(p_iri, line_no, 0)
        if cache is not None:
            cache[p_iri] = p

    if o_iri is not None:
        o = get(o_iri) if get else None
        if o is None:
            o = _iri_term(o_iri, line_no, 0)
            if cache is not None:
                cache[o_iri] = o
    elif o_bn is not None:
        o = Term(BNODE, o_bn)
    else:
        lexical = _unescape(o_str)
        if o_lang is not None:
            o = Term(LITERAL, lexical, RDF_LANGSTRING, o_lang)
        elif o_dt is not None:
            dt = get(o_dt) if get else None
            if dt is None:
                dt = _iri_term(o_dt, line_no, 0)
                if cache is not None:
                    cache[o_dt] = dt
            o = Term(LITERAL, lexical, dt.value, None)
        else:
            o = Term(LITERAL, lexical, XSD_STRING, None)
    return Triple(s, p, o)


def _is_blank(line: str) -> bool:
    stripped = line.lstrip(" \t")
    return not stripped or stripped.startswith("#")


def parse_ntriples_line(line: str, line_no: int = 1, _cache: dict | None = None) -> Triple | None:
    """Parse one physical line.

    Returns ``None`` for blank and comment lines and raises
    :class:`ParseError` for anything malformed.
    """
    line = line.rstrip("\r\n")
    m = _LINE.match(line)
    if m is not None:
        return _build(m.groups(), line_no, _cache)
    if _is_blank(line):
        return None
    _diagnose(line, line_no)
    raise ParseError(line_no, 0, "bad-structure", "unparseable statement")  # pragma: no cover


def _diagnose(line: str, line_no: int) -> None:
    """Walk the line term by term and raise the first precise error."""
    pos = _RE_WS.match(line, 0).end()

    def term(pos: int, role: str) -> int:
        if pos >= len(line):
            raise ParseError(line_no, pos, "bad-structure", f"missing {role}")
        c = line[pos]
        if c == "<":
            m = _RE_IRIREF.match(line, pos)
            if m is None:
                end = line.find(">", pos)
                body = line[pos + 1 : end if end >= 0 else len(line)]
                cat = "bad-escape" if "\\" in body and re.search(r"\\(?!u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8})", body) else "bad-iri"
                raise ParseError(line_no, pos, cat, f"malformed IRI in {role}")
            _iri_term(m.group(1), line_no, pos)
            return m.end()
        if c == "_" and role != "predicate":
            m = _RE_BNODE.match(line, pos)
            if m is None:
                raise ParseError(line_no, pos, "bad-blank-node", f"malformed blank node in {role}")
            return m.end()
        if c == '"' and role == "object":
            m = _RE_STRING.match(line, pos)
            if m is None:
                body = line[pos + 1 :]
                bad_esc = re.search(r"\\(?![tbnrf\"'\\]|u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8})", body)
                close = re.search(r'(?<!\\)"', body)
                if bad_esc and (close is None or bad_esc.start() < close.start()):
                    raise ParseError(line_no, pos + 1 + bad_esc.start(), "bad-escape", "invalid escape in literal")
                raise ParseError(line_no, pos, "bad-literal", "unterminated or malformed string literal")
            end = m.end()
            after = _RE_WS.match(line, end).end()
            if line.startswith("^^", after):
                at = _RE_WS.match(line, after + 2).end()
                m2 = _RE_IRIREF.match(line, at)
                if m2 is None:
                    raise ParseError(line_no, at, "bad-literal", "datatype must be an IRI reference")
                _iri_term(m2.group(1), line_no, at)
                return m2.end()
            if line.startswith("@", end):
                m2 = _RE_LANGTAG.match(line, end)
                if m2 is None:
                    raise ParseError(line_no, end, "bad-literal", "malformed language tag")
                nxt = m2.end()
                if nxt < len(line) and line[nxt] not in " \t.":
                    raise ParseError(line_no, end, "bad-literal", "malformed language tag")
                return nxt
            return end
        if role == "object" and (c.isdigit() or c in "+-.'"):
            raise ParseError(line_no, pos, "bad-literal", f"{role} is not a valid N-Triples term")
        raise ParseError(line_no, pos, "bad-structure", f"unexpected {c!r} where {role} expected")

    pos = term(pos, "subject")
    pos = _RE_WS.match(line, pos).end()
    pos = term(pos, "predicate")
    pos = _RE_WS.match(line, pos).end()
    pos = term(pos, "object")
    pos = _RE_WS.match(line, pos).end()
    if pos >= len(line) or line[pos] != ".":
        raise ParseError(line_no, pos, "missing-terminal", "expected '.' after object")
    pos = _RE_WS.match(line, pos + 1).end()
    if pos < len(line) and line[pos] != "#":
        raise ParseError(line_no, pos, "bad-structure", "trailing content after '.'")


@dataclass
class ParseReport:
    lines_total: int = 0
    triples_ok: int = 0
    lines_skipped: int = 0
    lines_empty: int = 0
    errors: list[tuple[int, str, str]] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"{self.lines_total} lines, {self.triples_ok} triples, "
            f"{self.lines_skipped} skipped, {self.lines_empty} blank/comment"
        )


@dataclass
class Dataset:
    """An ordered bag of triples as loaded from one source."""

    triples: list[Triple]
    origin: str = ""
    report: ParseReport = field(default_factory=ParseReport)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __getitem__(self, i):
        return self.triples[i]

    @classmethod
    def from_triples(cls, triples: Iterable[Triple], origin: str = "") -> "Dataset":
        triples = list(triples)
        return cls(triples, origin, ParseReport(len(triples), len(triples)))

    def distinct_count(self) -> int:
        return len(set(self.triples))


STRICT = "strict"
SKIP = "skip"

# Bounded so huge dumps with mostly-unique IRIs don't grow it forever.
_CACHE_LIMIT = 1 << 20


def parse_dataset(source, policy: str = SKIP, origin: str = "") -> Dataset:
    """Read N-Triples from a binary stream, a path, or an iterable of lines.

    ``policy`` is ``"strict"`` (first error raises) or ``"skip"`` (malformed
    lines are counted in the report and dropped).
    """
    if policy not in (STRICT, SKIP):
        raise ValueError(f"unknown error policy {policy!r}")
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return parse_dataset(fh, policy, origin or str(source))
    if isinstance(source, bytes):
        source = io.BytesIO(source)

    report = ParseReport()
    triples: list[Triple] = []
    append = triples.append
    cache: dict = {}
    match = _LINE.match
    for line_no, raw in enumerate(source, 1):
        report.lines_total += 1
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                err = ParseError(line_no, e.start, "encoding", "invalid UTF-8")
                if policy == STRICT:
                    raise err from None
                report.lines_skipped += 1
                report.errors.append((line_no, err.category, err.message))
                continue
        else:
            line = raw
        line = line.rstrip("\r\n")
        m = match(line)
        try:
            if m is not None:
                append(_build(m.groups(), line_no, cache))
                report.triples_ok += 1
                if len(cache) > _CACHE_LIMIT:
                    cache.clear()
                continue
            if _is_blank(line):
                report.lines_empty += 1
                continue
            _diagnose(line, line_no)
            raise ParseError(line_no, 0, "bad-structure", "unparseable statement")
        except ParseError as err:
            if policy == STRICT:
                raise
            report.lines_skipped += 1
            report.errors.append((line_no, err.category, err.message))
    if report.lines_skipped:
        logger.warning("%s: skipped %d malformed line(s)", origin or "<stream>", report.lines_skipped)
    return Dataset(triples, origin, report)


# --- serialization ---------------------------------------------------------

_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}
_NEEDS_ESCAPE = re.compile(r'[\\"\x00-\x1f\x7f]')


def _escape_char(m: re.Match) -> str:
    c = m.group(0)
    return _STRING_ESCAPES.get(c) or f"\\u{ord(c):04X}"


def serialize_term(t: Term) -> str:
    kind = t.kind
    if kind == IRI:
        return f"<{t.value}>"
    if kind == BNODE:
        return f"_:{t.value}"
    lex = _NEEDS_ESCAPE.sub(_escape_char, t.value)
    if t.lang is not None:
        return f'"{lex}"@{t.lang}'
    if t.datatype is None or t.datatype == XSD_STRING:
        return f'"{lex}"'
    return f'"{lex}"^^<{t.datatype}>'


def serialize_triple(t: Triple) -> str:
    return f"{serialize_term(t.subject)} {serialize_term(t.predicate)} {serialize_term(t.object)} ."


def write_ntriples(triples: Iterable[Triple], fh) -> int:
    n = 0
    for t in triples:
        fh.write(serialize_triple(t))
        fh.write("\n")
        n += 1
    return n
