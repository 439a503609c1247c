import enum
import itertools
import logging
from functools import lru_cache

from core.alphabet import DEFAULT_ALPHABET
from core.automata import CLOSE, OPEN, _Builder, canonical_ops
from core.errors import AutomatonError

logger = logging.getLogger(__name__)


def _overlap(a, b, c, d):
    # пустой спан пересекается со спаном, если лежит в его замыкании
    return (a < d and c < b) or (a == b and c <= a <= d) or (c == d and a <= c <= b)


def _nonempty(a, b, c, d):
    return a < b and c < d


_PREDICATES = {
    "precedes": lambda a, b, c, d: b < c,
    "preceded-by": lambda a, b, c, d: d < a,
    "meets": lambda a, b, c, d: b == c and _nonempty(a, b, c, d),
    "met-by": lambda a, b, c, d: d == a and _nonempty(a, b, c, d),
    "overhangs": lambda a, b, c, d: a < c < b < d,
    "overhung-by": lambda a, b, c, d: c < a < d < b,
    "during": lambda a, b, c, d: c < a and b < d,
    "contains": lambda a, b, c, d: a < c and d < b,
    "starts": lambda a, b, c, d: a == c and b < d,
    "started-by": lambda a, b, c, d: a == c and b > d,
    "finishes": lambda a, b, c, d: b == d and a > c,
    "finished-by": lambda a, b, c, d: b == d and a < c,
    "equals": lambda a, b, c, d: a == c and b == d,
}


class AllenRelation(enum.Enum):
    PRECEDES = "precedes"
    PRECEDED_BY = "preceded-by"
    MEETS = "meets"
    MET_BY = "met-by"
    OVERHANGS = "overhangs"
    OVERHUNG_BY = "overhung-by"
    DURING = "during"
    CONTAINS = "contains"
    STARTS = "starts"
    STARTED_BY = "started-by"
    FINISHES = "finishes"
    FINISHED_BY = "finished-by"
    EQUALS = "equals"
    OVERLAP = "overlap"
    OVERLAP_NOT_EQUAL = "overlap-not-equal"
    NOT_EQUAL = "not-equal"

    @property
    def is_basic(self):
        return self.value in _PREDICATES

    @property
    def basics(self):
        """Базовые отношения, из которых состоит дизъюнкция"""
        if self.is_basic:
            return (self,)
        if self is AllenRelation.OVERLAP:
            return BASIC_RELATIONS[4:]
        if self is AllenRelation.OVERLAP_NOT_EQUAL:
            return BASIC_RELATIONS[4:12]
        return BASIC_RELATIONS[:12]

    def holds_at(self, a, b, c, d):
        return any(_PREDICATES[rel.value](a, b, c, d) for rel in self.basics)

    def holds(self, x, y):
        return self.holds_at(x.start, x.end, y.start, y.end)


BASIC_RELATIONS = tuple(rel for rel in AllenRelation if rel.is_basic)

SYMBOLS = {
    "⋂": AllenRelation.OVERLAP,
    "⋒": AllenRelation.OVERLAP_NOT_EQUAL,
    "≠": AllenRelation.NOT_EQUAL,
}


def parse_relation(name):
    if name in SYMBOLS:
        return SYMBOLS[name]
    try:
        return AllenRelation(name)
    except ValueError:
        raise AutomatonError(f"unknown span relation {name!r}") from None


def spans_overlap(x, y):
    return _overlap(x.start, x.end, y.start, y.end)


def classify(x, y):
    """Единственное базовое отношение, которому удовлетворяет пара спанов"""
    found = [rel for rel in BASIC_RELATIONS if rel.holds(x, y)]
    if len(found) != 1:
        raise AssertionError(f"{x} and {y} satisfy {found}")
    return found[0]


_EVENTS = ("xo", "xc", "yo", "yc")


def _ops_for(events, x, y):
    ops = []
    for var, opened, closed in ((x, "xo", "xc"), (y, "yo", "yc")):
        if opened in events:
            ops.append((var, OPEN))
        if closed in events:
            ops.append((var, CLOSE))
    return canonical_ops(ops)


def _valid_step(done, step):
    # закрытие не раньше открытия
    for opened, closed in (("xo", "xc"), ("yo", "yc")):
        if closed in step and opened not in done and opened not in step:
            return False
    return True


def _ranks(groups):
    return {event: rank for rank, group in enumerate(groups) for event in group}


@lru_cache(maxsize=None)
def relation_spanner(rel, x, y, alphabet=DEFAULT_ALPHABET):
    """Универсальный спаннер над переменными x, y для отношения rel.

    Состояние помнит упорядоченные группы событий (открытие и закрытие
    переменных), произошедших в одной позиции; между группами читается
    хотя бы один символ. Итоговая проверка идёт по рангам групп.
    """
    if x == y:
        raise AutomatonError(f"span relation needs two distinct variables, got {x!r} twice")
    rel = parse_relation(rel) if isinstance(rel, str) else rel
    builder = _Builder()
    op_ids, char_ids = {}, {}
    finals = []
    pending = []

    def op_node(groups):
        if groups not in op_ids:
            op_ids[groups] = builder.state()
            pending.append(groups)
        return op_ids[groups]

    def char_node(groups):
        if groups not in char_ids:
            char_ids[groups] = builder.state()
            ranks = _ranks(groups)
            if len(ranks) == len(_EVENTS) and rel.holds_at(*(ranks[e] for e in _EVENTS)):
                finals.append(char_ids[groups])
            builder.add_char(char_ids[groups], alphabet.full_mask, op_node(groups))
        return char_ids[groups]

    initial = op_node(())
    while pending:
        groups = pending.pop()
        done = set(itertools.chain.from_iterable(groups))
        remaining = [e for e in _EVENTS if e not in done]
        for size in range(len(remaining) + 1):
            for step in itertools.combinations(remaining, size):
                if not _valid_step(done, step):
                    continue
                target = groups + (frozenset(step),) if step else groups
                builder.add_op(op_ids[groups], _ops_for(step, x, y), char_node(target))
    automaton = builder.build(alphabet, (x, y), initial, finals)
    logger.debug("span relation %s(%s, %s): %s", rel.value, x, y, automaton.describe())
    return automaton
