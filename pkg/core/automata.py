import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from core.alphabet import DEFAULT_ALPHABET
from core.errors import AlphabetError, AutomatonError
from core.regex_cv import (
    AnyChar,
    Capture,
    Char,
    CharRange,
    Concat,
    Disjunction,
    EmptySet,
    Epsilon,
    Star,
    Subtract,
)

logger = logging.getLogger(__name__)

# Операции над переменными: (имя, OPEN) и (имя, CLOSE)
OPEN = 0
CLOSE = 1

# Состояния статуса переменной при анализе прогонов
UNOPENED = 0
OPENED = 1
CLOSED = 2

# Повторное появление одной операции на ε-пути уже делает прогон некорректным
MAX_OP_REPEATS = 2


@dataclass(frozen=True, order=True)
class Span:
    """Полуинтервал [start, end⟩, позиции с единицы"""
    start: int
    end: int

    def __post_init__(self):
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start},{self.end}⟩")

    @property
    def is_empty(self):
        return self.start == self.end

    @property
    def length(self):
        return self.end - self.start

    def text(self, document_text):
        return document_text[self.start - 1:self.end - 1]

    def __str__(self):
        return f"[{self.start},{self.end}⟩"


@dataclass(frozen=True)
class Document:
    id: str
    text: str

    def substring(self, span):
        if span.end > len(self.text) + 1:
            raise ValueError(f"span {span} is outside document {self.id} of length {len(self.text)}")
        return span.text(self.text)


@dataclass(frozen=True)
class SpanRelation:
    """Отношение над спанами: упорядоченные столбцы и множество строк"""
    columns: tuple
    rows: frozenset = frozenset()

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(sorted(self.rows))

    def __contains__(self, row):
        return row in self.rows

    def index(self, column):
        return self.columns.index(column)

    def reorder(self, columns):
        columns = tuple(columns)
        if set(columns) != set(self.columns) or len(columns) != len(self.columns):
            raise AutomatonError(f"cannot reorder {self.columns} as {columns}")
        if columns == self.columns:
            return self
        idx = [self.columns.index(c) for c in columns]
        return SpanRelation(columns, frozenset(tuple(row[i] for i in idx) for row in self.rows))

    def project(self, keep):
        keep = tuple(keep)
        missing = set(keep) - set(self.columns)
        if missing:
            raise AutomatonError(f"cannot project on unknown columns {sorted(missing)}")
        idx = [self.columns.index(c) for c in keep]
        return SpanRelation(keep, frozenset(tuple(row[i] for i in idx) for row in self.rows))

    def rename(self, mapping):
        columns = tuple(mapping.get(c, c) for c in self.columns)
        if len(set(columns)) != len(columns):
            raise AutomatonError(f"renaming {mapping} collides in {self.columns}")
        return SpanRelation(columns, self.rows)

    def union(self, other):
        other = other.reorder(self.columns)
        return SpanRelation(self.columns, self.rows | other.rows)

    def join(self, other):
        shared = [c for c in self.columns if c in other.columns]
        extra = [c for c in other.columns if c not in self.columns]
        left_key = [self.columns.index(c) for c in shared]
        right_key = [other.columns.index(c) for c in shared]
        right_extra = [other.columns.index(c) for c in extra]
        buckets = {}
        for row in other.rows:
            buckets.setdefault(tuple(row[i] for i in right_key), []).append(row)
        rows = set()
        for row in self.rows:
            for match in buckets.get(tuple(row[i] for i in left_key), ()):
                rows.add(row + tuple(match[i] for i in right_extra))
        return SpanRelation(self.columns + tuple(extra), frozenset(rows))

    def select_equal(self, x, y, text):
        ix, iy = self.columns.index(x), self.columns.index(y)
        return SpanRelation(
            self.columns,
            frozenset(row for row in self.rows if row[ix].text(text) == row[iy].text(text)),
        )

    def strings(self, text):
        return {tuple(span.text(text) for span in row) for row in self.rows}


def canonical_ops(ops):
    # сортировка устойчива: порядок операций одной переменной сохраняется
    return tuple(sorted(ops, key=lambda op: op[0]))


def _advance_status(status, ops, slots):
    if not ops:
        return status
    values = list(status)
    for var, kind in ops:
        j = slots[var]
        if kind == OPEN:
            if values[j] != UNOPENED:
                return None
            values[j] = OPENED
        else:
            if values[j] != OPENED:
                return None
            values[j] = CLOSED
    return tuple(values)


def _apply_ops(assignment, ops, slots, position):
    if not ops:
        return assignment
    values = list(assignment)
    for var, kind in ops:
        j = 2 * slots[var]
        if kind == OPEN:
            if values[j] != -1:
                return None
            values[j] = position
        else:
            if values[j] == -1 or values[j + 1] != -1:
                return None
            values[j + 1] = position
    return tuple(values)


@dataclass(frozen=True)
class VSetAutomaton:
    """vset-автомат в операционно-замкнутой форме.

    Состояния двух фаз чередуются: из состояния фазы операций выходят рёбра
    с полной последовательностью операций над переменными в данной позиции
    (возможно пустой), из состояния символьной фазы выходят рёбра с классом
    символов (битовая маска по алфавиту). Начальное состояние в фазе
    операций, заключительные в символьной фазе.
    """
    alphabet: object
    variables: frozenset
    initial: int
    finals: frozenset
    op_edges: tuple
    char_edges: tuple

    @property
    def num_states(self):
        return len(self.op_edges)

    @cached_property
    def ordered_variables(self):
        return tuple(sorted(self.variables))

    @cached_property
    def slots(self):
        return {v: i for i, v in enumerate(self.ordered_variables)}

    @cached_property
    def functional(self):
        return is_functional(self)

    @cached_property
    def reverse_edges(self):
        rev_op = [[] for _ in range(self.num_states)]
        rev_char = [[] for _ in range(self.num_states)]
        for src, edges in enumerate(self.op_edges):
            for _, dst in edges:
                rev_op[dst].append(src)
        for src, edges in enumerate(self.char_edges):
            for mask, dst in edges:
                rev_char[dst].append((src, mask))
        return rev_op, rev_char

    @property
    def is_empty_shell(self):
        return not self.finals

    def used_chars(self):
        mask = 0
        for edges in self.char_edges:
            for edge_mask, _ in edges:
                mask |= edge_mask
        return self.alphabet.chars_of(mask)

    def describe(self):
        edges = sum(len(e) for e in self.op_edges) + sum(len(e) for e in self.char_edges)
        return f"{self.num_states} states, {edges} edges, variables {sorted(self.variables)}"


class _Builder:
    def __init__(self):
        self.op_edges = []
        self.char_edges = []

    def state(self):
        self.op_edges.append(set())
        self.char_edges.append(set())
        return len(self.op_edges) - 1

    def add_op(self, src, ops, dst):
        self.op_edges[src].add((ops, dst))

    def add_char(self, src, mask, dst):
        if mask:
            self.char_edges[src].add((mask, dst))

    def build(self, alphabet, variables, initial, finals):
        """Обрезка недостижимых и тупиковых состояний с перенумерацией"""
        count = len(self.op_edges)
        forward = {initial}
        queue = deque([initial])
        while queue:
            s = queue.popleft()
            for _, t in self.op_edges[s]:
                if t not in forward:
                    forward.add(t)
                    queue.append(t)
            for _, t in self.char_edges[s]:
                if t not in forward:
                    forward.add(t)
                    queue.append(t)
        reverse = [[] for _ in range(count)]
        for s in forward:
            for _, t in self.op_edges[s]:
                reverse[t].append(s)
            for _, t in self.char_edges[s]:
                reverse[t].append(s)
        useful = {f for f in finals if f in forward}
        queue = deque(useful)
        while queue:
            t = queue.popleft()
            for s in reverse[t]:
                if s not in useful:
                    useful.add(s)
                    queue.append(s)
        if initial not in useful:
            return empty_automaton(alphabet, variables)

        numbering = {initial: 0}
        order = [initial]
        queue = deque([initial])
        while queue:
            s = queue.popleft()
            targets = [t for _, t in sorted(self.op_edges[s])]
            targets += [t for _, t in sorted(self.char_edges[s])]
            for t in targets:
                if t in useful and t not in numbering:
                    numbering[t] = len(order)
                    order.append(t)
                    queue.append(t)
        op_edges = tuple(
            tuple(sorted((ops, numbering[t]) for ops, t in self.op_edges[s] if t in numbering))
            for s in order
        )
        char_edges = tuple(
            tuple(sorted((mask, numbering[t]) for mask, t in self.char_edges[s] if t in numbering))
            for s in order
        )
        return VSetAutomaton(
            alphabet=alphabet,
            variables=frozenset(variables),
            initial=0,
            finals=frozenset(numbering[f] for f in finals if f in numbering),
            op_edges=op_edges,
            char_edges=char_edges,
        )


def empty_automaton(alphabet=DEFAULT_ALPHABET, variables=()):
    return VSetAutomaton(
        alphabet=alphabet,
        variables=frozenset(variables),
        initial=0,
        finals=frozenset(),
        op_edges=((),),
        char_edges=((),),
    )


class _Thompson:
    """Автомат Томпсона с ε-рёбрами и рёбрами операций"""

    def __init__(self, alphabet):
        self.alphabet = alphabet
        self.eps = []
        self.ops = []
        self.chars = []

    def state(self):
        self.eps.append([])
        self.ops.append([])
        self.chars.append([])
        return len(self.eps) - 1

    def mask(self, node):
        if isinstance(node, Char):
            return self.alphabet.bit(node.char)
        if isinstance(node, CharRange):
            return self.alphabet.range_mask(node.low, node.high)
        if isinstance(node, AnyChar):
            return self.alphabet.full_mask
        if isinstance(node, Subtract):
            base = self.mask(node.base)
            if node.char in self.alphabet:
                base &= ~self.alphabet.bit(node.char)
            return base
        raise TypeError(node)

    def fragment(self, node):
        start, end = self.state(), self.state()
        if isinstance(node, EmptySet):
            pass
        elif isinstance(node, Epsilon):
            self.eps[start].append(end)
        elif isinstance(node, (Char, CharRange, AnyChar, Subtract)):
            mask = self.mask(node)
            if mask:
                self.chars[start].append((mask, end))
        elif isinstance(node, Disjunction):
            for child in (node.left, node.right):
                s, e = self.fragment(child)
                self.eps[start].append(s)
                self.eps[e].append(end)
        elif isinstance(node, Concat):
            ls, le = self.fragment(node.left)
            rs, re_ = self.fragment(node.right)
            self.eps[start].append(ls)
            self.eps[le].append(rs)
            self.eps[re_].append(end)
        elif isinstance(node, Star):
            s, e = self.fragment(node.body)
            self.eps[start].append(s)
            self.eps[start].append(end)
            self.eps[e].append(s)
            self.eps[e].append(end)
        elif isinstance(node, Capture):
            s, e = self.fragment(node.body)
            self.ops[start].append(((node.name, OPEN), s))
            self.ops[e].append(((node.name, CLOSE), end))
        else:
            raise TypeError(f"unknown regex node {node!r}")
        return start, end

    def closure_paths(self, source, final):
        """Все ε/операционные пути из source до состояний с символьными рёбрами или final"""
        found = set()
        seen = set()
        stack = [(source, ())]
        while stack:
            state, ops = stack.pop()
            if (state, ops) in seen:
                continue
            seen.add((state, ops))
            if self.chars[state] or state == final:
                found.add((canonical_ops(ops), state))
            for target in self.eps[state]:
                stack.append((target, ops))
            for op, target in self.ops[state]:
                if ops.count(op) < MAX_OP_REPEATS:
                    stack.append((target, ops + (op,)))
        return found


def compile_regex(r, alphabet=DEFAULT_ALPHABET):
    """Компилирует RegexCV в vset-автомат в нормальной форме"""
    thompson = _Thompson(alphabet)
    start, final = thompson.fragment(r)

    builder = _Builder()
    op_state = {}
    char_state = {}

    def op_node(s):
        if s not in op_state:
            op_state[s] = builder.state()
            pending.append(s)
        return op_state[s]

    def char_node(s):
        if s not in char_state:
            char_state[s] = builder.state()
            for mask, target in thompson.chars[s]:
                builder.add_char(char_state[s], mask, op_node(target))
        return char_state[s]

    pending = []
    initial = op_node(start)
    while pending:
        s = pending.pop()
        for ops, anchor in thompson.closure_paths(s, final):
            builder.add_op(op_state[s], ops, char_node(anchor))
    finals = [char_state[final]] if final in char_state else []
    automaton = builder.build(alphabet, r.variables, initial, finals)
    logger.debug("compiled %s: %s", r.render()[:60], automaton.describe())
    return automaton


def is_functional(a):
    """Каждый принимающий прогон открывает и закрывает каждую переменную ровно один раз"""
    slots = a.slots
    done = tuple(CLOSED for _ in slots)
    start = (a.initial, tuple(UNOPENED for _ in slots), True)
    seen = {start}
    queue = deque([start])
    while queue:
        state, status, op_phase = queue.popleft()
        if op_phase:
            for ops, target in a.op_edges[state]:
                advanced = _advance_status(status, ops, slots)
                if advanced is None:
                    # все состояния после обрезки достижимы до заключительных
                    return False
                node = (target, advanced, False)
                if node not in seen:
                    seen.add(node)
                    queue.append(node)
        else:
            if state in a.finals and status != done:
                return False
            for _, target in a.char_edges[state]:
                node = (target, status, True)
                if node not in seen:
                    seen.add(node)
                    queue.append(node)
    return True


def _text_of(d):
    return d.text if isinstance(d, Document) else d


def match_all(a, d):
    """Все присваивания спанов по принимающим прогонам на документе"""
    if not a.functional:
        raise AutomatonError("match_all requires a functional automaton")
    text = _text_of(d)
    codes = a.alphabet.codes(text)
    n = len(codes)
    columns = a.ordered_variables
    if not a.finals:
        return SpanRelation(columns)

    # обратный проход: состояния, из которых остаток документа принимается
    rev_op, rev_char = a.reverse_edges
    live_char = [None] * (n + 1)
    live_op = [None] * (n + 1)
    live_char[n] = set(a.finals)
    for i in range(n, -1, -1):
        if i < n:
            bit = 1 << codes[i]
            live = set()
            for t in live_op[i + 1]:
                for q, mask in rev_char[t]:
                    if mask & bit:
                        live.add(q)
            live_char[i] = live
        ops_live = set()
        for q in live_char[i]:
            ops_live.update(rev_op[q])
        live_op[i] = ops_live
    if a.initial not in live_op[0]:
        return SpanRelation(columns)

    slots = a.slots
    configs = {(a.initial, (-1,) * (2 * len(columns)))}
    rows = set()
    for i in range(n + 1):
        position = i + 1
        reachable = live_char[i]
        after = set()
        for state, assignment in configs:
            for ops, target in a.op_edges[state]:
                if target in reachable:
                    updated = _apply_ops(assignment, ops, slots, position)
                    if updated is not None:
                        after.add((target, updated))
        if i == n:
            for state, assignment in after:
                if state in a.finals and -1 not in assignment:
                    rows.add(tuple(
                        Span(assignment[2 * j], assignment[2 * j + 1]) for j in range(len(columns))
                    ))
            break
        bit = 1 << codes[i]
        next_live = live_op[i + 1]
        configs = {
            (target, assignment)
            for state, assignment in after
            for mask, target in a.char_edges[state]
            if mask & bit and target in next_live
        }
        if not configs:
            break
    return SpanRelation(columns, frozenset(rows))


def accepts(a, text):
    """Принадлежность слова языку автомата без переменных"""
    try:
        return bool(match_all(a, text))
    except AlphabetError:
        return False


@dataclass(frozen=True)
class EmptinessResult:
    empty: bool
    witness: Document = None
    row: tuple = field(default=())

    @property
    def assignment(self):
        return dict(self.row)

    def describe(self):
        if self.empty:
            return "empty"
        spans = ", ".join(f"{v}={s}" for v, s in self.row)
        return f"witness {self.witness.text!r} with {spans}"


def emptiness(a):
    """Проверка пустоты; при непустоте свидетель, наименьший по длине, затем лексикографически"""
    slots = a.slots
    done = tuple(CLOSED for _ in slots)
    start = (a.initial, tuple(UNOPENED for _ in slots), True)
    best = {start: (0, "")}
    parent = {start: None}
    settled = set()
    heap = [(0, "", start)]
    while heap:
        depth, text, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        state, status, op_phase = node
        if op_phase:
            steps = []
            for ops, target in a.op_edges[state]:
                advanced = _advance_status(status, ops, slots)
                if advanced is not None:
                    steps.append(((target, advanced, False), (depth, text), ops))
        else:
            if state in a.finals and status == done:
                return _witness(a, node, parent)
            steps = []
            for mask, target in a.char_edges[state]:
                # наименьший символ класса даёт наименьшее продолжение
                ch = a.alphabet.first_char(mask)
                steps.append(((target, status, True), (depth + 1, text + ch), ch))
        for nxt, key, label in steps:
            if nxt not in settled and (nxt not in best or key < best[nxt]):
                best[nxt] = key
                parent[nxt] = (node, label)
                heapq.heappush(heap, (*key, nxt))
    return EmptinessResult(empty=True)


def _witness(a, node, parent):
    labels = []
    while parent[node] is not None:
        node, label = parent[node]
        labels.append(label)
    labels.reverse()
    text = []
    starts, ends = {}, {}
    for label in labels:
        if isinstance(label, str):
            text.append(label)
            continue
        position = len(text) + 1
        for var, kind in label:
            (starts if kind == OPEN else ends)[var] = position
    row = tuple((v, Span(starts[v], ends[v])) for v in a.ordered_variables)
    return EmptinessResult(empty=False, witness=Document("witness", "".join(text)), row=row)


def _require_same_alphabet(a, b):
    if a.alphabet != b.alphabet:
        raise AutomatonError("automata are defined over different alphabets")


def union_a(a, b):
    """Объединение совместимых по переменным автоматов"""
    _require_same_alphabet(a, b)
    if a.variables != b.variables:
        raise AutomatonError(
            f"union of incompatible automata: {sorted(a.variables)} vs {sorted(b.variables)}"
        )
    builder = _Builder()
    offsets = []
    for part in (a, b):
        offset = len(builder.op_edges)
        offsets.append(offset)
        for _ in range(part.num_states):
            builder.state()
        for s in range(part.num_states):
            for ops, t in part.op_edges[s]:
                builder.add_op(offset + s, ops, offset + t)
            for mask, t in part.char_edges[s]:
                builder.add_char(offset + s, mask, offset + t)
    initial = builder.state()
    for part, offset in zip((a, b), offsets):
        for ops, t in part.op_edges[part.initial]:
            builder.add_op(initial, ops, offset + t)
    finals = [offsets[0] + f for f in a.finals] + [offsets[1] + f for f in b.finals]
    return builder.build(a.alphabet, a.variables, initial, finals)


def project_a(a, keep):
    keep = frozenset(keep)
    unknown = keep - a.variables
    if unknown:
        raise AutomatonError(f"cannot project on unknown variables {sorted(unknown)}")
    builder = _Builder()
    for _ in range(a.num_states):
        builder.state()
    for s in range(a.num_states):
        for ops, t in a.op_edges[s]:
            builder.add_op(s, tuple(op for op in ops if op[0] in keep), t)
        for mask, t in a.char_edges[s]:
            builder.add_char(s, mask, t)
    return builder.build(a.alphabet, keep, a.initial, a.finals)


def rename_a(a, mapping):
    unknown = set(mapping) - a.variables
    if unknown:
        raise AutomatonError(f"cannot rename unknown variables {sorted(unknown)}")
    renamed = [mapping.get(v, v) for v in a.variables]
    if len(set(renamed)) != len(renamed):
        raise AutomatonError(f"renaming {mapping} collides with existing variables")
    builder = _Builder()
    for _ in range(a.num_states):
        builder.state()
    for s in range(a.num_states):
        for ops, t in a.op_edges[s]:
            builder.add_op(s, canonical_ops((mapping.get(v, v), k) for v, k in ops), t)
        for mask, t in a.char_edges[s]:
            builder.add_char(s, mask, t)
    return builder.build(a.alphabet, renamed, a.initial, a.finals)


def join_a(a, b):
    """Естественное соединение: синхронные символы, согласованные операции общих переменных"""
    _require_same_alphabet(a, b)
    shared = a.variables & b.variables
    builder = _Builder()
    ids = {}
    queue = deque()

    def node(pair):
        if pair not in ids:
            ids[pair] = builder.state()
            queue.append(pair)
        return ids[pair]

    initial = node((a.initial, b.initial, True))
    finals = []
    while queue:
        pair = queue.popleft()
        p, q, op_phase = pair
        src = ids[pair]
        if op_phase:
            right_index = {}
            for ops, t in b.op_edges[q]:
                key = tuple(op for op in ops if op[0] in shared)
                right_index.setdefault(key, []).append((ops, t))
            for left_ops, s in a.op_edges[p]:
                key = tuple(op for op in left_ops if op[0] in shared)
                for right_ops, t in right_index.get(key, ()):
                    merged = canonical_ops(left_ops + tuple(op for op in right_ops if op[0] not in shared))
                    builder.add_op(src, merged, node((s, t, False)))
        else:
            if p in a.finals and q in b.finals:
                finals.append(src)
            for left_mask, s in a.char_edges[p]:
                for right_mask, t in b.char_edges[q]:
                    mask = left_mask & right_mask
                    if mask:
                        builder.add_char(src, mask, node((s, t, True)))
    joined = builder.build(a.alphabet, a.variables | b.variables, initial, finals)
    logger.debug("join of %d x %d states: %s", a.num_states, b.num_states, joined.describe())
    return joined


def _closure(a, states):
    return frozenset(t for s in states for _, t in a.op_edges[s])


def _step(a, states, bit):
    return _closure(a, {t for s in states for mask, t in a.char_edges[s] if mask & bit})


def language_difference(a, b):
    """Кратчайшее слово из L(a) \\ L(b) или None; автоматы без переменных"""
    _require_same_alphabet(a, b)
    if a.variables or b.variables:
        raise AutomatonError("language difference is defined for variable-free automata")
    start = (_closure(a, {a.initial}), _closure(b, {b.initial}))
    parent = {start: None}
    queue = deque([start])
    bits = [1 << i for i in range(len(a.alphabet))]
    while queue:
        pair = queue.popleft()
        left, right = pair
        if left & a.finals and not right & b.finals:
            chars = []
            while parent[pair] is not None:
                pair, ch = parent[pair]
                chars.append(ch)
            return "".join(reversed(chars))
        for i, bit in enumerate(bits):
            nxt_left = _step(a, left, bit)
            if not nxt_left:
                continue
            nxt = (nxt_left, _step(b, right, bit))
            if nxt not in parent:
                parent[nxt] = (pair, a.alphabet.chars[i])
                queue.append(nxt)
    return None


def equivalent(a, b):
    return language_difference(a, b) is None and language_difference(b, a) is None


def _distances(a):
    """Сколько ещё символов нужно прочитать до приёма, по фазам"""
    inf = float("inf")
    to_final_char = [inf] * a.num_states
    to_final_op = [inf] * a.num_states
    for f in a.finals:
        to_final_char[f] = 0
    changed = True
    while changed:
        changed = False
        for s in range(a.num_states):
            for _, t in a.op_edges[s]:
                if to_final_char[t] < to_final_op[s]:
                    to_final_op[s] = to_final_char[t]
                    changed = True
            for _, t in a.char_edges[s]:
                if to_final_op[t] + 1 < to_final_char[s]:
                    to_final_char[s] = to_final_op[t] + 1
                    changed = True
    return to_final_op, to_final_char


def sample_member(a, rng, max_len=16):
    """Случайное слово языка автомата без переменных"""
    if a.is_empty_shell:
        raise AutomatonError("cannot sample from an empty language")
    to_final_op, to_final_char = _distances(a)
    state = a.initial
    text = []
    while True:
        edges = a.op_edges[state]
        if len(text) >= max_len:
            edges = [min(edges, key=lambda e: to_final_char[e[1]])]
        state = edges[int(rng.integers(len(edges)))][1]
        options = list(a.char_edges[state])
        can_stop = state in a.finals
        if len(text) >= max_len:
            if can_stop:
                return "".join(text)
            options = [min(options, key=lambda e: to_final_op[e[1]])]
            choice = 0
        else:
            choice = int(rng.integers(len(options) + (1 if can_stop else 0)))
            if choice == len(options):
                return "".join(text)
        mask, state = options[choice]
        chars = sorted(a.alphabet.chars_of(mask))
        text.append(chars[int(rng.integers(len(chars)))])


def _label(alphabet, mask):
    chars = sorted(alphabet.chars_of(mask))
    if len(chars) == len(alphabet):
        return "Σ"
    if len(chars) > 12:
        return f"Σ−{{{''.join(sorted(set(alphabet.chars) - set(chars)))!r}}}"
    return "".join(chars).replace("\n", "\\n")


def to_dot(a):
    """Текстовое описание графа автомата для отладки"""
    lines = ["digraph vset {", "  rankdir=LR;"]
    for s in range(a.num_states):
        shape = "doublecircle" if s in a.finals else "circle"
        lines.append(f"  {s} [shape={shape}];")
    for s in range(a.num_states):
        for ops, t in a.op_edges[s]:
            text = " ".join(f"{v}⊢" if k == OPEN else f"⊣{v}" for v, k in ops) or "·"
            lines.append(f'  {s} -> {t} [label="{text}"];')
        for mask, t in a.char_edges[s]:
            label = _label(a.alphabet, mask).replace('"', '\\"')
            lines.append(f'  {s} -> {t} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines)
