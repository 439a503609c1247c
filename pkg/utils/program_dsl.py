import ast
import dataclasses
import logging
import re
from collections.abc import Mapping
from pathlib import Path

from core.algebra import (
    Formula,
    FunctionalDependency,
    JoinNode,
    ProjectionNode,
    RenameNode,
    SelectionNode,
    SpannerProgram,
    UnionNode,
)
from core.alphabet import resolve_alphabet
from core.errors import AlphabetError, ProgramError, RegexSyntaxError
from core.regex_cv import parse_regex_cv

logger = logging.getLogger(__name__)

# Текстовый формат программ:
#   alphabet printable;             или alphabet "abc";
#   let gamma_d = ⟦[0-9]⟧;          регулярное выражение без захватов ($gamma_d)
#   let E1 = ⟦Σ* D{$gamma_d*} Σ*⟧;  формула извлечения
#   let E = E1 ∪ E2;                выражение алгебры
#   update-vars {D};
#   fd E5: {R} -> {D1, T1};
#   output E_date = E1 ∪ E2;

REGEX_OPEN = "⟦"
REGEX_CLOSE = "⟧"

NAME = r"[A-Za-z_][A-Za-z0-9_′']*"
LET_RE = re.compile(rf"let\s+(?P<name>{NAME})\s*=\s*(?P<body>.*)\Z", re.S)
OUTPUT_RE = re.compile(rf"output\s+(?:(?P<name>{NAME})\s*=(?!=))?\s*(?P<body>.*)\Z", re.S)
FD_RE = re.compile(rf"fd\s+(?P<scope>{NAME})\s*:\s*\{{(?P<left>[^}}]*)\}}\s*(?:->|→)\s*\{{(?P<right>[^}}]*)\}}\s*\Z")
UPDATE_VARS_RE = re.compile(r"update-vars\s*\{(?P<names>[^}]*)\}\s*\Z")
ALPHABET_RE = re.compile(r"alphabet\s+(?P<spec>.+?)\s*\Z", re.S)
TOKEN_RE = re.compile(rf"\s*(?:(?P<name>{NAME})|(?P<arrow>->|→)|(?P<sym>[∪⋈πζρ(){{}},]))")

KEYWORD_OPERATORS = {
    "union": "∪",
    "join": "⋈",
    "project": "π",
    "select": "ζ",
    "rename": "ρ",
}


def split_statements(source):
    """Делит текст на операторы по ';' вне ⟦…⟧, убирая комментарии"""
    statements = []
    current = []
    line = 1
    start_line = None
    in_regex = False
    i = 0
    while i < len(source):
        ch = source[i]
        if ch == "\n":
            line += 1
        if in_regex:
            current.append(ch)
            if ch == REGEX_CLOSE:
                in_regex = False
        elif ch == "#":
            while i < len(source) and source[i] != "\n":
                i += 1
            continue
        elif ch == ";":
            text = "".join(current).strip()
            if text:
                statements.append((text, start_line))
            current = []
            start_line = None
        else:
            if ch == REGEX_OPEN:
                in_regex = True
            if start_line is None and not ch.isspace():
                start_line = line
            current.append(ch)
        i += 1
    if in_regex:
        raise ProgramError("syntax", f"unterminated {REGEX_OPEN}", start_line)
    text = "".join(current).strip()
    if text:
        raise ProgramError("syntax", f"missing ';' after {text[:30]!r}", start_line)
    return statements


def _names(text, line):
    names = [part.strip() for part in text.split(",") if part.strip()]
    for name in names:
        if not re.fullmatch(NAME, name):
            raise ProgramError("syntax", f"bad variable name {name!r}", line)
    return names


class _LazyMacros(Mapping):
    """Ссылки $name внутри ⟦…⟧ разрешаются по требованию"""

    def __init__(self, builder):
        self.builder = builder

    def __getitem__(self, name):
        return self.builder.macro(name)

    def __contains__(self, name):
        definition = self.builder.definitions.get(name)
        return definition is not None and definition[0] == "regex"

    def __iter__(self):
        return (n for n, d in self.builder.definitions.items() if d[0] == "regex")

    def __len__(self):
        return sum(1 for _ in self)


class _ProgramBuilder:
    def __init__(self):
        self.definitions = {}
        self.regexes = {}
        self.nodes = {}
        self.resolving = []

    def define(self, name, kind, body, line):
        if name in self.definitions:
            raise ProgramError("syntax", f"{name} is defined twice", line)
        self.definitions[name] = (kind, body, line)

    def _enter(self, name):
        if name in self.resolving:
            chain = " -> ".join(self.resolving[self.resolving.index(name):] + [name])
            raise ProgramError("cycle", f"circular definition {chain}", self.definitions[name][2])
        self.resolving.append(name)

    def regex(self, name):
        if name not in self.regexes:
            _, body, line = self.definitions[name]
            self._enter(name)
            try:
                self.regexes[name] = parse_regex_cv_at(body, _LazyMacros(self), name, line)
            finally:
                self.resolving.pop()
        return self.regexes[name]

    def macro(self, name):
        node = self.regex(name)
        if node.contains_capture():
            raise ProgramError(
                "syntax", f"formula {name} cannot be referenced with $", self.definitions[name][2]
            )
        return node

    def node(self, name, line=None):
        if name in self.nodes:
            return self.nodes[name]
        if name not in self.definitions:
            raise ProgramError("unknown-formula", f"{name} is not defined", line)
        kind, body, def_line = self.definitions[name]
        if kind == "regex":
            regex = self.regex(name)
            if not regex.contains_capture():
                raise ProgramError("no-exposed-variable", f"{name} has no capture variables", def_line)
            node = Formula(name, regex, def_line)
        else:
            self._enter(name)
            try:
                node = _ExpressionParser(body, self, def_line).parse()
            finally:
                self.resolving.pop()
            if not isinstance(node, Formula) and node.name is None:
                node = dataclasses.replace(node, name=name)
        self.nodes[name] = node
        return node


def parse_regex_cv_at(body, macros, name, line):
    try:
        return parse_regex_cv(body, macros)
    except RegexSyntaxError as e:
        raise ProgramError("syntax", f"in {name}: {e}", line) from e


class _ExpressionParser:
    """Выражение алгебры: ∪ связывает слабее ⋈, префиксные операторы сильнее всех"""

    def __init__(self, text, builder, line):
        self.text = text
        self.builder = builder
        self.line = line
        self.tokens = self.tokenize(text)
        self.pos = 0

    def tokenize(self, text):
        tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            match = TOKEN_RE.match(text, pos)
            if not match or match.end() == pos:
                raise ProgramError("syntax", f"unexpected {text[pos:].strip()[:20]!r}", self.line)
            if match.group("name"):
                word = match.group("name")
                tokens.append(KEYWORD_OPERATORS.get(word, word))
            elif match.group("arrow"):
                tokens.append("->")
            else:
                tokens.append(match.group("sym"))
            pos = match.end()
        return tokens

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected=None):
        token = self.peek()
        if token is None or (expected is not None and token != expected):
            wanted = expected or "an expression"
            raise ProgramError("syntax", f"expected {wanted} in {self.text!r}", self.line)
        self.pos += 1
        return token

    def parse(self):
        node = self.union()
        if self.peek() is not None:
            raise ProgramError("syntax", f"unexpected {self.peek()!r} in {self.text!r}", self.line)
        return node

    def union(self):
        node = self.join()
        while self.peek() == "∪":
            self.take()
            node = UnionNode(node, self.join())
        return node

    def join(self):
        node = self.prefix()
        while self.peek() == "⋈":
            self.take()
            node = JoinNode(node, self.prefix())
        return node

    def braces(self):
        self.take("{")
        items = []
        while self.peek() != "}":
            items.append(self.take())
        self.take("}")
        return items

    def names_in_braces(self):
        items = [t for t in self.braces() if t != ","]
        for item in items:
            if not re.fullmatch(NAME, item):
                raise ProgramError("syntax", f"bad variable name {item!r}", self.line)
        return items

    def prefix(self):
        token = self.peek()
        if token == "π":
            self.take()
            return ProjectionNode(tuple(self.names_in_braces()), self.prefix())
        if token == "ζ":
            self.take()
            names = self.names_in_braces()
            if len(names) != 2:
                raise ProgramError("syntax", "string selection takes two variables", self.line)
            return SelectionNode(names[0], names[1], self.prefix())
        if token == "ρ":
            self.take()
            return RenameNode(self.rename_pairs(), self.prefix())
        if token == "(":
            self.take()
            node = self.union()
            self.take(")")
            return node
        name = self.take()
        if not re.fullmatch(NAME, name):
            raise ProgramError("syntax", f"unexpected {name!r} in {self.text!r}", self.line)
        return self.builder.node(name, self.line)

    def rename_pairs(self):
        items = self.braces()
        pairs = []
        groups = " ".join(items).split(",")
        for group in groups:
            parts = group.split()
            if len(parts) != 3 or parts[1] != "->":
                raise ProgramError("syntax", f"bad rename {group.strip()!r}", self.line)
            pairs.append((parts[0], parts[2]))
        return tuple(pairs)


def _parse_alphabet(spec, line):
    if spec[:1] in "\"'":
        try:
            spec = ast.literal_eval(spec)
        except (ValueError, SyntaxError):
            raise ProgramError("syntax", f"bad alphabet literal {spec}", line) from None
    try:
        return resolve_alphabet(spec)
    except AlphabetError as e:
        raise ProgramError("syntax", str(e), line) from e


def parse_program(source, name="program", alphabet=None, source_path=None):
    """Разбор текста программы в SpannerProgram"""
    builder = _ProgramBuilder()
    declared_alphabet = None
    update_vars = None
    fds = []
    output = None
    for text, line in split_statements(source):
        keyword = text.split(None, 1)[0]
        if keyword == "alphabet":
            match = ALPHABET_RE.match(text)
            if not match:
                raise ProgramError("syntax", "expected an alphabet name or literal", line)
            declared_alphabet = _parse_alphabet(match.group("spec"), line)
        elif keyword == "let":
            match = LET_RE.match(text)
            if not match:
                raise ProgramError("syntax", f"malformed definition {text[:30]!r}", line)
            _define(builder, match.group("name"), match.group("body"), line)
        elif keyword == "update-vars":
            match = UPDATE_VARS_RE.match(text)
            if not match:
                raise ProgramError("syntax", "expected update-vars {A, B}", line)
            update_vars = frozenset(_names(match.group("names"), line))
        elif keyword == "fd":
            match = FD_RE.match(text)
            if not match:
                raise ProgramError("syntax", "expected fd NODE: {A} -> {B, C}", line)
            fds.append(FunctionalDependency(
                frozenset(_names(match.group("left"), line)),
                frozenset(_names(match.group("right"), line)),
                match.group("scope"),
                line,
            ))
        elif keyword == "output":
            if output is not None:
                raise ProgramError("syntax", "more than one output statement", line)
            match = OUTPUT_RE.match(text)
            output_name = match.group("name") or name
            if match.group("name"):
                _define(builder, output_name, match.group("body"), line)
            else:
                builder.define(output_name, "expr", match.group("body"), line)
            output = (output_name, line)
        else:
            raise ProgramError("syntax", f"unknown statement {keyword!r}", line)
    if output is None:
        raise ProgramError("syntax", "program has no output statement")

    if declared_alphabet is not None and alphabet is not None:
        requested = resolve_alphabet(alphabet)
        if requested != declared_alphabet:
            raise ProgramError(
                "alphabet-conflict",
                f"program declares alphabet {declared_alphabet.name}, requested {requested.name}",
            )
    final_alphabet = declared_alphabet or resolve_alphabet(alphabet)

    output_name, output_line = output
    root = builder.node(output_name, output_line)
    program = SpannerProgram(
        output=root,
        name=output_name,
        declared_update_vars=update_vars,
        fds=tuple(fds),
        alphabet=final_alphabet,
        source_path=source_path,
    )
    logger.info("program %s: %d formulas, schema %s", program.name, len(program.formulas), program.schema())
    return program


def _define(builder, name, body, line):
    body = body.strip()
    if body.startswith(REGEX_OPEN):
        if not body.endswith(REGEX_CLOSE):
            raise ProgramError("syntax", f"text after {REGEX_CLOSE} in {name}", line)
        builder.define(name, "regex", body[1:-1], line)
    else:
        builder.define(name, "expr", body, line)


def load_program(path, alphabet=None):
    """Читает программу из файла; имя по умолчанию берётся из имени файла"""
    path = Path(path)
    try:
        source = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProgramError("syntax", f"cannot read {path}: {e}") from e
    return parse_program(source, name=path.stem, alphabet=alphabet, source_path=str(path))
