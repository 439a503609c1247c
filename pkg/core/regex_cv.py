import enum
import logging
import re
from dataclasses import dataclass
from functools import cached_property

from core.alphabet import DEFAULT_ALPHABET
from core.base_node import (
    IDENT_CHARS,
    PREC_CONCAT,
    PREC_DISJUNCTION,
    PREC_STAR,
    RegexNode,
)
from core.errors import RegexSyntaxError, VariableError

logger = logging.getLogger(__name__)

# Дерево регулярного выражения с переменными захвата:
# ∅ | ε | σ | [σ,σ] | Σ | δ−σ | γ∨γ | γ•γ | γ* | x{γ}

DISJUNCTION_SIGNS = ("∨", "|")
SUBTRACT_SIGN = "−"
CONCAT_SIGN = "•"
BLANK_SIGN = "␣"
CAPTURE_HEAD = re.compile(r"[A-Za-z0-9_]+\{")

ESCAPES = {"n": "\n", "t": "\t", "s": " "}
SPECIAL_CHARS = frozenset("(){}[]|*\\$∨•−Σε∅␣⟦⟧")


def _escape(ch, in_brackets=False):
    if ch == " ":
        return "\\s"
    if ch == "\n":
        return "\\n"
    if ch == "\t":
        return "\\t"
    if ch in SPECIAL_CHARS or (in_brackets and ch in "-,"):
        return "\\" + ch
    return ch


@dataclass(frozen=True)
class EmptySet(RegexNode):
    def render(self):
        return "∅"


@dataclass(frozen=True)
class Epsilon(RegexNode):
    def render(self):
        return "ε"


@dataclass(frozen=True)
class Char(RegexNode):
    char: str

    def render(self):
        return _escape(self.char)


@dataclass(frozen=True)
class CharRange(RegexNode):
    low: str
    high: str

    def render(self):
        return f"[{_escape(self.low, True)}-{_escape(self.high, True)}]"


@dataclass(frozen=True)
class AnyChar(RegexNode):
    def render(self):
        return "Σ"


@dataclass(frozen=True)
class Subtract(RegexNode):
    base: RegexNode
    char: str

    def children(self):
        return (self.base,)

    def rebuild(self, children):
        return Subtract(children[0], self.char)

    def render(self):
        return f"{self.base.render()}{SUBTRACT_SIGN}{_escape(self.char)}"


@dataclass(frozen=True)
class Disjunction(RegexNode):
    left: RegexNode
    right: RegexNode
    precedence = PREC_DISJUNCTION

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        return Disjunction(*children)

    def render(self):
        left = self.render_child(self.left, PREC_DISJUNCTION)
        right = self.render_child(self.right, PREC_DISJUNCTION + 1)
        return f"{left} ∨ {right}"


@dataclass(frozen=True)
class Concat(RegexNode):
    left: RegexNode
    right: RegexNode
    precedence = PREC_CONCAT

    def children(self):
        return (self.left, self.right)

    def rebuild(self, children):
        return Concat(*children)

    def render(self):
        left = self.render_child(self.left, PREC_CONCAT)
        right = self.render_child(self.right, PREC_CONCAT + 1)
        # имя захвата не должно склеиться с предыдущим литералом
        if left and left[-1] in IDENT_CHARS and CAPTURE_HEAD.match(right):
            return f"{left} {right}"
        return left + right


@dataclass(frozen=True)
class Star(RegexNode):
    body: RegexNode
    precedence = PREC_STAR

    def children(self):
        return (self.body,)

    def rebuild(self, children):
        return Star(children[0])

    def render(self):
        return self.render_child(self.body, PREC_STAR) + "*"


@dataclass(frozen=True)
class Capture(RegexNode):
    name: str
    body: RegexNode

    def children(self):
        return (self.body,)

    def rebuild(self, children):
        return Capture(self.name, children[0])

    @cached_property
    def variables(self):
        return self.body.variables | {self.name}

    def render(self):
        return f"{self.name}{{{self.body.render()}}}"


RegexCV = RegexNode


class Exposure(enum.Enum):
    EXPOSED = "exposed"
    NESTED = "nested"


@dataclass(frozen=True)
class VariableInfo:
    name: str
    exposure: Exposure
    occurrence_paths: tuple


def concat_all(items):
    if not items:
        return Epsilon()
    node = items[0]
    for item in items[1:]:
        node = Concat(node, item)
    return node


def literal(text):
    return concat_all([Char(ch) for ch in text])


class _Parser:
    """Разбор текстового синтаксиса; пробелы незначимы, пробел пишется как \\s или ␣"""

    def __init__(self, source, macros):
        self.source = source
        self.macros = macros or {}
        self.pos = 0

    def error(self, message, position=None):
        return RegexSyntaxError(message, self.pos if position is None else position, self.source)

    def peek(self):
        self.skip_blank()
        if self.pos < len(self.source):
            return self.source[self.pos]
        return None

    def skip_blank(self):
        while self.pos < len(self.source) and self.source[self.pos] in " \t\r\n":
            self.pos += 1

    def expect(self, ch):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        node = self.disjunction()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.source[self.pos]!r}")
        return node

    def disjunction(self):
        node = self.concatenation()
        while self.peek() in DISJUNCTION_SIGNS:
            self.pos += 1
            node = Disjunction(node, self.concatenation())
        return node

    def concatenation(self):
        items = []
        start = self.pos
        while True:
            ch = self.peek()
            if ch is None or ch in ")}" or ch in DISJUNCTION_SIGNS:
                break
            if ch == CONCAT_SIGN:
                self.pos += 1
                continue
            atoms = self.atoms()
            atoms[-1] = self.postfix(atoms[-1])
            items.extend(atoms)
        if not items:
            raise self.error("empty expression", start if start < len(self.source) else None)
        return concat_all(items)

    def postfix(self, node):
        while self.peek() == SUBTRACT_SIGN:
            if not isinstance(node, (AnyChar, Subtract)):
                raise self.error("subtraction applies only to Σ")
            self.pos += 1
            self.skip_blank()
            node = Subtract(node, self.single_char())
        while self.peek() == "*":
            self.pos += 1
            node = Star(node)
        return node

    def single_char(self):
        if self.pos >= len(self.source):
            raise self.error("expected a character")
        ch = self.source[self.pos]
        if ch == "\\":
            return self.escape()
        if ch == BLANK_SIGN:
            self.pos += 1
            return " "
        if ch in SPECIAL_CHARS:
            raise self.error(f"unexpected {ch!r}")
        self.pos += 1
        return ch

    def escape(self):
        backslash = self.pos
        if self.pos + 1 >= len(self.source):
            raise self.error("dangling escape", backslash)
        ch = self.source[self.pos + 1]
        self.pos += 2
        if ch in ESCAPES:
            return ESCAPES[ch]
        if ch in SPECIAL_CHARS or ch in "-,":
            return ch
        raise self.error(f"unknown escape \\{ch}", backslash)

    def identifier(self):
        start = self.pos
        while self.pos < len(self.source) and self.source[self.pos] in IDENT_CHARS:
            self.pos += 1
        return self.source[start:self.pos]

    def atoms(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.disjunction()
            self.expect(")")
            return [node]
        if ch == "[":
            return [self.char_range()]
        if ch == "Σ":
            self.pos += 1
            return [AnyChar()]
        if ch == "ε":
            self.pos += 1
            return [Epsilon()]
        if ch == "∅":
            self.pos += 1
            return [EmptySet()]
        if ch == "$":
            start = self.pos
            self.pos += 1
            name = self.identifier()
            if not name:
                raise self.error("empty reference name", start)
            if name not in self.macros:
                raise self.error(f"unknown reference ${name}", start)
            return [self.macros[name]]
        if ch == "{":
            raise self.error("empty capture name")
        if ch in IDENT_CHARS:
            run = self.identifier()
            if self.pos < len(self.source) and self.source[self.pos] == "{":
                self.pos += 1
                body = self.disjunction()
                self.expect("}")
                return [Capture(run, body)]
            return [Char(c) for c in run]
        return [Char(self.single_char())]

    def char_range(self):
        start = self.pos
        self.pos += 1
        low = self.single_char()
        if self.pos < len(self.source) and self.source[self.pos] in "-,":
            self.pos += 1
        else:
            raise self.error("expected '-' or ',' in range")
        high = self.single_char()
        if self.pos >= len(self.source) or self.source[self.pos] != "]":
            raise self.error("expected ']'")
        self.pos += 1
        if low > high:
            raise self.error(f"empty range {low!r}-{high!r}", start)
        return CharRange(low, high)


def parse_regex_cv(source, macros=None):
    """Разбирает текст формулы в дерево RegexCV"""
    return _Parser(source, macros).parse()


def to_source(r):
    return r.render()


def svars(r):
    return set(r.variables)


def classify_variables(r):
    """Для каждой переменной: открыта ли она и пути к её узлам захвата"""
    paths = {}
    nested = set()

    def visit(node, path, depth):
        if isinstance(node, Capture):
            paths.setdefault(node.name, []).append(path)
            if depth > 0:
                nested.add(node.name)
            depth += 1
        for i, child in enumerate(node.children()):
            visit(child, path + (i,), depth)

    visit(r, (), 0)
    return {
        name: VariableInfo(
            name,
            Exposure.NESTED if name in nested else Exposure.EXPOSED,
            tuple(found),
        )
        for name, found in paths.items()
    }


def _require_exposed(r, v):
    info = classify_variables(r).get(v)
    if info is None:
        raise VariableError(f"variable {v} does not occur in the formula")
    if info.exposure is Exposure.NESTED:
        raise VariableError(f"variable {v} is nested in another capture")


def disjunctive_form(r, v):
    """Δ(E,v): дизъюнкции, содержащие v, поднимаются над конкатенациями"""
    _require_exposed(r, v)
    return _pull_up(r, v)


def _pull_up(node, v):
    if v not in node.variables or isinstance(node, Capture):
        return [node]
    if isinstance(node, Disjunction):
        return _pull_up(node.left, v) + _pull_up(node.right, v)
    if isinstance(node, Concat):
        return [
            Concat(left, right)
            for left in _pull_up(node.left, v)
            for right in _pull_up(node.right, v)
        ]
    if isinstance(node, Star):
        raise VariableError(f"variable {v} occurs under a star")
    raise VariableError(f"cannot pull disjunctions out of {type(node).__name__}")


def erase_captures(r):
    return project_regex(r, frozenset())


def project_regex(r, keep):
    """Стирает захваты переменных вне keep, оставляя их тела"""
    if not r.contains_capture():
        return r
    if isinstance(r, Capture) and r.name not in keep:
        return project_regex(r.body, keep)
    return r.rebuild([project_regex(child, keep) for child in r.children()])


def find_capture(r, v):
    for _, node in r.walk():
        if isinstance(node, Capture) and node.name == v:
            return node
    return None


def enclosed_regex(r, v):
    """Тело захвата v без внутренних захватов"""
    node = find_capture(r, v)
    if node is None:
        raise VariableError(f"variable {v} does not occur in the formula")
    return erase_captures(node.body)


def is_unigram_body(node):
    if isinstance(node, (Char, CharRange, AnyChar, Subtract)):
        return True
    if isinstance(node, Disjunction):
        return is_unigram_body(node.left) and is_unigram_body(node.right)
    return False


def is_unigram_star(node):
    return isinstance(node, Star) and is_unigram_body(node.body)


def unigram_chars(node, alphabet=DEFAULT_ALPHABET):
    if isinstance(node, Char):
        return frozenset({node.char}) & frozenset(alphabet.chars)
    if isinstance(node, CharRange):
        return frozenset(ch for ch in alphabet.chars if node.low <= ch <= node.high)
    if isinstance(node, AnyChar):
        return frozenset(alphabet.chars)
    if isinstance(node, Subtract):
        return unigram_chars(node.base, alphabet) - {node.char}
    if isinstance(node, Disjunction):
        return unigram_chars(node.left, alphabet) | unigram_chars(node.right, alphabet)
    raise ValueError(f"not a unigram body: {node}")


def _concat_items(node, path):
    if isinstance(node, Concat):
        yield from _concat_items(node.left, path + (0,))
        yield from _concat_items(node.right, path + (1,))
    else:
        yield path, node


def contextualize(r, v):
    """C_v(E): максимальные контекстные участки оборачиваются новыми переменными c1..ck"""
    _require_exposed(r, v)
    taken = set(r.variables)
    counter = [0]

    def next_name():
        while True:
            counter[0] += 1
            name = f"c{counter[0]}"
            if name not in taken:
                taken.add(name)
                return name

    return _contextualize(r, next_name)


def _is_kept_item(node):
    return isinstance(node, Capture) or is_unigram_star(node) or node.contains_capture()


def _contextualize(node, next_name):
    if isinstance(node, Disjunction) and node.contains_capture():
        return Disjunction(_contextualize(node.left, next_name), _contextualize(node.right, next_name))
    result = []
    pending = []

    def flush():
        # участок из одних ε ничего не потребляет
        if pending and not all(isinstance(item, Epsilon) for item in pending):
            result.append(Capture(next_name(), concat_all(pending)))
        else:
            result.extend(pending)
        pending.clear()

    for _, item in _concat_items(node, ()):
        if isinstance(item, Disjunction) and item.contains_capture():
            flush()
            result.append(_contextualize(item, next_name))
        elif _is_kept_item(item):
            flush()
            result.append(item)
        else:
            pending.append(item)
    flush()
    return concat_all(result)


def uncovered_unigrams(r, alphabet=DEFAULT_ALPHABET):
    """Звёздочки-униграммы, которые контекстуализация оставляет непокрытыми"""
    found = []

    def visit(node, path):
        if isinstance(node, Disjunction) and node.contains_capture():
            visit(node.left, path + (0,))
            visit(node.right, path + (1,))
            return
        for item_path, item in _concat_items(node, path):
            if isinstance(item, Disjunction) and item.contains_capture():
                visit(item, item_path)
            elif is_unigram_star(item):
                found.append((item_path, unigram_chars(item.body, alphabet)))

    visit(r, ())
    return found


def char_set(r, alphabet=DEFAULT_ALPHABET):
    """Все символы, встречающиеся в словах L(r)"""
    from core.automata import compile_regex

    automaton = compile_regex(erase_captures(r), alphabet)
    return automaton.used_chars()
