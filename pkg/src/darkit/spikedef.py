"""The SpikeDef model-definition dialect.

SpikeDef is a small, closed, indentation-structured language for declaring
spiking model architectures: each file holds one or more classes deriving
from ``Module``, whose ``__init__`` assigns submodules and whose ``forward``
wires them together. This module provides the tokenizer, the parser, and a
span-exact index of classes, methods, and submodule assignments so that
other layers can extract hierarchies, slice code segments, and splice edits
back in.

Dialect rules: 4-space indentation, LF line endings, no TABs, ASCII
identifiers, full-line comments only (``#`` after indentation).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ValidationError

# Builtin constructor table: name -> ordered (param name, param type) pairs.
BUILTINS: dict[str, tuple[tuple[str, str], ...]] = {
    "Embedding": (("vocab", "int"), ("dim", "int")),
    "Linear": (("in", "int"), ("out", "int")),
    "LIF": (("threshold", "float"), ("beta", "float")),
    "Attention": (("dim", "int"), ("heads", "int")),
    "LayerNorm": (("dim", "int"),),
}

STACK = "Stack"

INDENT_WIDTH = 4


@dataclass(frozen=True)
class Span:
    """Inclusive 1-based line range."""

    start_line: int
    end_line: int

    def __post_init__(self):
        if not (1 <= self.start_line <= self.end_line):
            raise ValueError(f"bad span {self.start_line}..{self.end_line}")

    def contains(self, other: "Span") -> bool:
        return self.start_line <= other.start_line and other.end_line <= self.end_line


@dataclass(frozen=True)
class SourceFile:
    """An in-memory SpikeDef source: LF-terminated, TAB-free UTF-8 text."""

    path: str
    text: str

    @property
    def lines(self) -> int:
        n = self.text.count("\n")
        if self.text and not self.text.endswith("\n"):
            n += 1
        return n

    @staticmethod
    def from_text(text: str, path: str = "<memory>") -> "SourceFile":
        if "\t" in text:
            raise ValidationError("bad-source", "TAB characters are not allowed; indent with spaces")
        if "\r" in text:
            raise ValidationError("bad-source", "line terminator must be LF only")
        return SourceFile(path=path, text=text)

    @staticmethod
    def from_path(path) -> "SourceFile":
        with open(path, encoding="utf-8") as fh:
            return SourceFile.from_text(fh.read(), path=str(path))


@dataclass(frozen=True)
class Assign:
    """One ``self.<attr> = Ctor(...)`` line inside ``__init__``."""

    attr: str
    ctor_name: str
    args: tuple
    stack_count: int | None
    span: Span


@dataclass(frozen=True)
class ClassDef:
    name: str
    span: Span
    init_span: Span
    forward_span: Span
    assigns: tuple[Assign, ...]


@dataclass(frozen=True)
class SourceIndex:
    file: SourceFile
    classes: tuple[ClassDef, ...]

    def class_named(self, name: str) -> ClassDef | None:
        for c in self.classes:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class ParseError:
    code: str  # E001..E006
    line: int
    col: int
    message: str
    hint: str = ""

    def to_doc(self) -> dict:
        return {
            "code": self.code,
            "line": self.line,
            "col": self.col,
            "message": self.message,
            "hint": self.hint,
        }


class SpikeDefError(ValidationError):
    """Raised when tokenizing or parsing rejects the input."""

    def __init__(self, error: ParseError):
        super().__init__(error.code, error.message)
        self.error = error


def _fail(code: str, line: int, col: int, message: str, hint: str = ""):
    raise SpikeDefError(ParseError(code, line, col, message, hint))


# ── Tokenizer ────────────────────────────────────────────────────────────

NAME, INT, FLOAT, STRING, OP, NEWLINE, INDENT, DEDENT = (
    "NAME", "INT", "FLOAT", "STRING", "OP", "NEWLINE", "INDENT", "DEDENT",
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<NAME>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<FLOAT>\d+\.\d+)"
    r"|(?P<INT>\d+)"
    r'|(?P<STRING>"[^"\n]*")'
    r"|(?P<OP>[().,=+:])"
    r"|(?P<WS> +)"
)


def tokenize(file: SourceFile) -> list[Token]:
    """Token stream with synthesized INDENT/DEDENT; comments and blanks skipped."""
    tokens: list[Token] = []
    level = 0
    raw_lines = file.text.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    for lineno, raw in enumerate(raw_lines, start=1):
        stripped = raw.strip(" ")
        if stripped == "" or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % INDENT_WIDTH != 0:
            _fail("E002", lineno, 1,
                  f"indentation of {indent} spaces is not a multiple of {INDENT_WIDTH}",
                  "use 4-space indentation")
        new_level = indent // INDENT_WIDTH
        if new_level > level + 1:
            _fail("E002", lineno, 1,
                  f"indentation jumps from level {level} to {new_level}",
                  "indent one level (4 spaces) at a time")
        if new_level == level + 1:
            tokens.append(Token(INDENT, "", lineno, 1))
        while new_level < level:
            tokens.append(Token(DEDENT, "", lineno, 1))
            level -= 1
        level = new_level
        pos = indent
        while pos < len(raw):
            m = _TOKEN_RE.match(raw, pos)
            if m is None:
                _fail("E001", lineno, pos + 1,
                      f"unexpected character {raw[pos]!r}",
                      "remove or replace this character")
            kind = m.lastgroup
            if kind != "WS":
                tokens.append(Token(kind, m.group(), lineno, pos + 1))
            pos = m.end()
        tokens.append(Token(NEWLINE, "", lineno, len(raw) + 1))
    last_line = len(raw_lines)
    while level > 0:
        tokens.append(Token(DEDENT, "", max(last_line, 1), 1))
        level -= 1
    return tokens


# ── Parser ───────────────────────────────────────────────────────────────


class _Parser:
    """Single-pass recursive descent; first error wins.

    Constructors are resolved inline against the builtin table and the
    classes parsed so far, so class definitions must precede their use.
    """

    def __init__(self, file: SourceFile, tokens: list[Token]):
        self.file = file
        self.tokens = tokens
        self.pos = 0
        self.classes: list[ClassDef] = []

    # token plumbing

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token(NEWLINE, "", 1, 1)
            _fail("E001", last.line, last.col, "unexpected end of input",
                  "the file ends in the middle of a definition")
        self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None, what: str = "") -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (value is not None and tok.value != value):
            want = what or (value if value is not None else kind)
            got = "end of input" if tok is None else (tok.value or tok.kind)
            line = tok.line if tok else (self.tokens[-1].line if self.tokens else 1)
            col = tok.col if tok else 1
            _fail("E001", line, col, f"expected {want!r}, found {got!r}",
                  f"write {want!r} here")
        return self.advance()

    # grammar

    def parse_file(self) -> SourceIndex:
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind == NAME and tok.value == "class":
                self.parse_class()
            else:
                _fail("E001", tok.line, tok.col,
                      f"expected a class definition, found {tok.value or tok.kind!r}",
                      "top-level statements must be 'class Name(Module):'")
        return SourceIndex(file=self.file, classes=tuple(self.classes))

    def parse_class(self):
        start = self.expect(NAME, "class")
        name_tok = self.expect(NAME, what="class name")
        if any(c.name == name_tok.value for c in self.classes):
            _fail("E004", name_tok.line, name_tok.col,
                  f"duplicate class name {name_tok.value!r}",
                  "class names must be unique within a file")
        self.expect(OP, "(")
        base = self.expect(NAME, what="base class")
        if base.value != "Module":
            _fail("E003", base.line, base.col,
                  f"unknown base class {base.value!r}",
                  "SpikeDef classes must derive from 'Module'")
        self.expect(OP, ")")
        self.expect(OP, ":")
        self.expect(NEWLINE)
        self.expect(INDENT, what="an indented class body")

        init_span, assigns = self.parse_init(name_tok.value)
        forward_span = self.parse_forward(name_tok.value)
        self.expect(DEDENT, what="end of class body")
        self.classes.append(ClassDef(
            name=name_tok.value,
            span=Span(start.line, forward_span.end_line),
            init_span=init_span,
            forward_span=forward_span,
            assigns=tuple(assigns),
        ))

    def _method_header(self, class_name: str, expected: str) -> Token:
        tok = self.peek()
        if tok is None or not (tok.kind == NAME and tok.value == "def"):
            line = tok.line if tok else 1
            col = tok.col if tok else 1
            _fail("E006", line, col,
                  f"class {class_name!r} is missing method {expected!r}",
                  f"define 'def {expected}(self, ...):'")
        def_tok = self.advance()
        meth = self.expect(NAME, what="method name")
        if meth.value != expected:
            _fail("E006", meth.line, meth.col,
                  f"class {class_name!r} is missing method {expected!r} "
                  f"(found {meth.value!r})",
                  f"define {expected!r} before any other method")
        self.expect(OP, "(")
        self.expect(NAME, "self")
        while self.peek() and self.peek().kind == OP and self.peek().value == ",":
            self.advance()
            self.expect(NAME, what="parameter name")
        self.expect(OP, ")")
        self.expect(OP, ":")
        self.expect(NEWLINE)
        self.expect(INDENT, what="an indented method body")
        return def_tok

    def parse_init(self, class_name: str) -> tuple[Span, list[Assign]]:
        def_tok = self._method_header(class_name, "__init__")
        assigns: list[Assign] = []
        seen: set[str] = set()
        last_line = def_tok.line
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == NAME and tok.value == "self":
                a = self.parse_assign(seen)
                assigns.append(a)
                last_line = a.span.end_line
            else:
                break
        self.expect(DEDENT, what="end of __init__ body")
        return Span(def_tok.line, last_line), assigns

    def parse_assign(self, seen: set[str]) -> Assign:
        self_tok = self.expect(NAME, "self")
        self.expect(OP, ".")
        attr = self.expect(NAME, what="attribute name")
        if attr.value in seen:
            _fail("E004", attr.line, attr.col,
                  f"duplicate attribute {attr.value!r}",
                  "attribute names must be unique within a class")
        seen.add(attr.value)
        self.expect(OP, "=")
        ctor_name, args, stack_count = self.parse_ctor(allow_stack=True)
        self.expect(NEWLINE)
        return Assign(attr=attr.value, ctor_name=ctor_name, args=tuple(args),
                      stack_count=stack_count, span=Span(self_tok.line, self_tok.line))

    def parse_ctor(self, allow_stack: bool) -> tuple[str, list, int | None]:
        name = self.expect(NAME, what="constructor name")
        self.expect(OP, "(")
        if name.value == STACK:
            if not allow_stack:
                _fail("E005", name.line, name.col,
                      "Stack cannot be nested",
                      "use a plain class constructor inside Stack")
            count = self.expect(INT, what="stack count")
            n = int(count.value)
            if n < 1:
                _fail("E005", count.line, count.col,
                      f"Stack count must be >= 1, got {n}",
                      "use a positive repeat count")
            self.expect(OP, ",")
            inner_name, inner_args, _ = self.parse_ctor(allow_stack=False)
            self.expect(OP, ")")
            return inner_name, inner_args, n

        args: list = []
        tok = self.peek()
        if not (tok and tok.kind == OP and tok.value == ")"):
            args.append(self.parse_arg())
            while self.peek() and self.peek().kind == OP and self.peek().value == ",":
                self.advance()
                args.append(self.parse_arg())
        self.expect(OP, ")")
        self.check_ctor(name, args)
        return name.value, args, None

    def parse_arg(self):
        tok = self.advance()
        if tok.kind == INT:
            return int(tok.value)
        if tok.kind == FLOAT:
            return float(tok.value)
        if tok.kind == STRING:
            return tok.value[1:-1]
        if tok.kind == NAME:
            return tok.value
        _fail("E001", tok.line, tok.col,
              f"expected an argument, found {tok.value or tok.kind!r}",
              "arguments are integers, floats, strings, or identifiers")

    def check_ctor(self, name: Token, args: list):
        """Resolve a constructor against builtins and previously parsed classes."""
        if name.value in BUILTINS:
            params = BUILTINS[name.value]
            if len(args) != len(params):
                _fail("E005", name.line, name.col,
                      f"wrong number of arguments for {name.value}",
                      f"{name.value} takes {len(params)} arguments")
            for i, (arg, (pname, ptype)) in enumerate(zip(args, params)):
                ok = isinstance(arg, int) and not isinstance(arg, bool) if ptype == "int" \
                    else isinstance(arg, (int, float)) and not isinstance(arg, bool)
                if not ok:
                    _fail("E005", name.line, name.col,
                          f"argument {i + 1} of {name.value} must be {ptype}",
                          f"{name.value}({', '.join(p for p, _ in params)}) "
                          f"expects {ptype} for {pname}")
        elif any(c.name == name.value for c in self.classes):
            if args:
                _fail("E005", name.line, name.col,
                      f"wrong number of arguments for {name.value}",
                      f"{name.value} takes 0 arguments")
        else:
            _fail("E005", name.line, name.col,
                  f"unknown constructor {name.value!r}",
                  "use a builtin (" + ", ".join(BUILTINS) + ") or a class defined above")

    def parse_forward(self, class_name: str) -> Span:
        def_tok = self._method_header(class_name, "forward")
        while True:
            tok = self.peek()
            if tok is None or tok.kind == DEDENT:
                line = tok.line if tok else def_tok.line
                col = tok.col if tok else 1
                _fail("E001", line, col, "forward body must end with a return statement",
                      "add 'return <expr>' as the last line")
            if tok.kind == NAME and tok.value == "return":
                self.advance()
                self.parse_expr()
                end = self.expect(NEWLINE)
                self.expect(DEDENT, what="end of forward body")
                return Span(def_tok.line, end.line)
            self.expect(NAME, what="variable name")
            self.expect(OP, "=")
            self.parse_expr()
            self.expect(NEWLINE)

    def parse_expr(self):
        self.parse_term()
        while self.peek() and self.peek().kind == OP and self.peek().value == "+":
            self.advance()
            self.parse_term()

    def parse_term(self):
        tok = self.expect(NAME, what="a name or self.<attr>(...) call")
        if tok.value == "self":
            self.expect(OP, ".")
            self.expect(NAME, what="attribute name")
            self.expect(OP, "(")
            self.parse_expr()
            while self.peek() and self.peek().kind == OP and self.peek().value == ",":
                self.advance()
                self.parse_expr()
            self.expect(OP, ")")


def parse(file: SourceFile) -> SourceIndex:
    """Parse a SpikeDef source into a span-exact index; raises SpikeDefError."""
    return _Parser(file, tokenize(file)).parse_file()


def parse_text(text: str, path: str = "<memory>") -> SourceIndex:
    return parse(SourceFile.from_text(text, path=path))


# ── Span utilities ───────────────────────────────────────────────────────


def slice_lines(file: SourceFile, span: Span) -> str:
    """Exact text of span's lines, LF-joined, trailing LF included."""
    if span.end_line > file.lines:
        raise ValidationError(
            "range", f"span {span.start_line}..{span.end_line} exceeds "
                     f"{file.lines}-line file")
    lines = file.text.split("\n")
    return "".join(line + "\n" for line in lines[span.start_line - 1:span.end_line])


def splice(text: str, span: Span, new_text: str) -> str:
    """Replace span's lines with new_text (which must be LF-terminated)."""
    if new_text and not new_text.endswith("\n"):
        new_text += "\n"
    lines = text.split("\n")
    if lines and lines[-1] == "":  # artifact of splitting LF-terminated text
        lines.pop()
    before = "".join(line + "\n" for line in lines[:span.start_line - 1])
    after = "".join(line + "\n" for line in lines[span.end_line:])
    return before + new_text + after
