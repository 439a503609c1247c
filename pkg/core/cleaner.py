import datetime
import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from core.algebra import evaluate
from core.allen import spans_overlap
from core.alphabet import DEFAULT_ALPHABET
from core.automata import Document, Span, accepts, sample_member
from core.errors import (
    AlphabetError,
    CorpusError,
    DomainError,
    StaleUpdateError,
    UnverifiedProgramError,
    UpdateConflictError,
)

logger = logging.getLogger(__name__)


def doc_sort_key(doc_id):
    # числовые идентификаторы записей сортируются как числа
    return (0, int(doc_id), "") if doc_id.isdigit() else (1, 0, doc_id)


@dataclass(frozen=True)
class DocumentStore:
    """Неизменяемая версия коллекции документов"""
    documents: dict = field(default_factory=dict)
    origin: str = None
    version: int = 0

    @classmethod
    def from_documents(cls, documents, origin=None):
        store = {}
        for document in documents:
            if document.id in store:
                raise CorpusError(f"duplicate document id {document.id}", origin)
            store[document.id] = document
        return cls(store, origin)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        for doc_id in self.ids:
            yield self.documents[doc_id]

    def __contains__(self, doc_id):
        return doc_id in self.documents

    def __getitem__(self, doc_id):
        return self.documents[doc_id]

    @property
    def ids(self):
        return sorted(self.documents, key=doc_sort_key)

    @property
    def digest(self):
        sha = hashlib.sha1()
        for document in self:
            sha.update(document.id.encode("utf-8"))
            sha.update(b"\0")
            sha.update(document.text.encode("utf-8"))
            sha.update(b"\0")
        return sha.hexdigest()

    def subset(self, ids):
        return DocumentStore({i: self.documents[i] for i in ids}, self.origin, self.version)

    def with_documents(self, changed=None):
        documents = dict(self.documents)
        for document in (changed or {}).values():
            documents[document.id] = document
        return DocumentStore(documents, self.origin, self.version + 1)


def check_alphabet(documents, alphabet=DEFAULT_ALPHABET):
    """Документы с символами вне Σ пропускаются с предупреждением"""
    accepted = []
    for document in documents:
        position = alphabet.first_foreign(document.text)
        if position is not None:
            logger.warning(
                "document %s skipped: character %r at offset %d is not in alphabet %s",
                document.id, document.text[position], position + 1, alphabet.name,
            )
            continue
        accepted.append(document)
    return accepted


@dataclass(frozen=True, order=True)
class TableRow:
    doc_id: str
    spans: tuple
    values: tuple


@dataclass(frozen=True)
class ExtractedTable:
    """Извлечённое представление: Doc_id и по спану со значением на переменную"""
    program: str
    columns: tuple
    rows: tuple = ()

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def index(self, column):
        try:
            return self.columns.index(column)
        except ValueError:
            raise DomainError(f"{column} is not a column of {self.program}") from None

    def rows_for(self, doc_id):
        return [row for row in self.rows if row.doc_id == doc_id]

    @property
    def doc_ids(self):
        return sorted({row.doc_id for row in self.rows}, key=doc_sort_key)

    def string_relation(self):
        """Вид без спанов: (doc_id, значения...)"""
        return sorted({(row.doc_id,) + row.values for row in self.rows})

    def subset(self, doc_ids):
        doc_ids = set(doc_ids)
        return ExtractedTable(self.program, self.columns, tuple(r for r in self.rows if r.doc_id in doc_ids))


def extract_table(p, store):
    """Документ за документом: evaluate и материализация значений"""
    columns = tuple(p.schema())
    rows = []
    for document in store:
        for spans in evaluate(p, document):
            values = tuple(span.text(document.text) for span in spans)
            rows.append(TableRow(document.id, spans, values))
    logger.info("%s: %d rows from %d documents", p.name, len(rows), len(store))
    return ExtractedTable(p.name, columns, tuple(rows))


@dataclass(frozen=True)
class CellUpdate:
    doc_id: str
    row: TableRow
    column: str
    span: Span
    old_value: str
    new_value: str


# Нормализаторы: функция значения и алфавит возможных вставок

DATE_PATTERNS = (
    re.compile(r"(?P<y>\d{4})(?P<m>\d{2})(?P<d>\d{2})"),
    re.compile(r"(?P<m>\d{2})/(?P<d>\d{2})/(?P<y>\d{4})"),
    re.compile(r"(?P<y>\d{4})/(?P<m>\d{2})/(?P<d>\d{2})"),
    re.compile(r"(?P<m>\d{2})-(?P<d>\d{2})-(?P<y>\d{4})"),
)

LIST_SEPARATOR = re.compile(r" [,;] ")
UNIT_PREFIX = re.compile(r" (mg|ml|mcg|g)(?=[ .]|$)")
DEFAULT_UNIT = " mg"


def normalize_date(value):
    for pattern in DATE_PATTERNS:
        match = pattern.fullmatch(value)
        if match is None:
            continue
        try:
            date = datetime.date(int(match["y"]), int(match["m"]), int(match["d"]))
        except ValueError:
            return value
        return date.isoformat()
    return value


def normalize_list(value):
    return LIST_SEPARATOR.sub("\n", value)


def default_unit(value):
    if UNIT_PREFIX.match(value):
        return value
    return DEFAULT_UNIT + value


@dataclass(frozen=True)
class Normalizer:
    name: str
    function: object
    output_chars: frozenset


NORMALIZERS = {
    "date-iso": Normalizer("date-iso", normalize_date, frozenset("0123456789-")),
    "list-newline": Normalizer("list-newline", normalize_list, frozenset("\n")),
    "unit-default": Normalizer("unit-default", default_unit, frozenset(DEFAULT_UNIT)),
}


@dataclass(frozen=True)
class CleaningRule:
    """Правило очистки: конечное отображение или встроенный нормализатор"""
    name: str
    target: str
    mapping: dict = field(default=None, hash=False)
    normalizer: str = None
    source: str = None

    def __post_init__(self):
        if (self.mapping is None) == (self.normalizer is None):
            raise DomainError(f"rule {self.name} needs exactly one of mapping and normalizer")
        if self.normalizer is not None and self.normalizer not in NORMALIZERS:
            raise DomainError(f"rule {self.name}: unknown normalizer {self.normalizer!r}")

    @property
    def output_chars(self):
        if self.normalizer is None:
            return None
        return NORMALIZERS[self.normalizer].output_chars

    def propose(self, value):
        if self.mapping is not None:
            return self.mapping.get(value, value)
        return NORMALIZERS[self.normalizer].function(value)


def apply_rule(table, rule, model=None, alphabet=DEFAULT_ALPHABET):
    """Предлагаемые изменения ячеек; каждое новое значение проверяется на принадлежность области"""
    index = table.index(rule.target)
    domain = model.domain_automaton(rule.target, alphabet) if model is not None else None
    updates = []
    for row in table:
        old = row.values[index]
        new = rule.propose(old)
        if new == old:
            continue
        if domain is not None and not accepts(domain, new):
            raise DomainError(
                f"rule {rule.name} rewrites {old!r} to {new!r}, outside the domain of {rule.target}"
            )
        updates.append(CellUpdate(row.doc_id, row, rule.target, row.spans[index], old, new))
    if updates:
        logger.info("rule %s proposes %d updates", rule.name, len(updates))
    else:
        logger.warning("rule %s produced no updates on %s", rule.name, table.program)
    return updates


def dsyn(d, span, new_value, alphabet=None):
    """D[1,a⟩ • новое значение • D[b,|D|+1⟩"""
    if span.end > len(d.text) + 1:
        raise ValueError(f"span {span} is outside document {d.id} of length {len(d.text)}")
    if alphabet is not None:
        position = alphabet.first_foreign(new_value)
        if position is not None:
            raise AlphabetError(f"{new_value!r} has {new_value[position]!r} outside alphabet {alphabet.name}")
    text = d.text[:span.start - 1] + new_value + d.text[span.end - 1:]
    return Document(d.id, text)


def collect_edits(updates):
    """Правки по документам: {doc_id: {span: новое значение}}; разные значения одного спана недопустимы"""
    edits = {}
    for update in updates:
        per_doc = edits.setdefault(update.doc_id, {})
        known = per_doc.get(update.span)
        if known is not None and known != update.new_value:
            raise UpdateConflictError(
                f"document {update.doc_id}: span {update.span} updated to both {known!r} and {update.new_value!r}"
            )
        per_doc[update.span] = update.new_value
    return edits


def _check_document(document, per_doc, updates):
    for update in updates:
        if document.substring(update.span) != update.old_value:
            raise StaleUpdateError(
                f"document {document.id}: {update.span} now holds "
                f"{document.substring(update.span)!r}, expected {update.old_value!r}"
            )
    spans = sorted(per_doc)
    for i, first in enumerate(spans):
        for second in spans[i + 1:]:
            if second.start > first.end:
                break
            if spans_overlap(first, second):
                raise UpdateConflictError(f"document {document.id}: updates at {first} and {second} overlap")


def translate_updates(store, table, updates, verified=False, force=False, alphabet=None):
    """Перенос изменений представления в документы; всё или ничего"""
    if not verified and not force:
        raise UnverifiedProgramError(
            f"{table.program} is not verified stable; translation needs a passing verification or force"
        )
    live = set(table.rows)
    for update in updates:
        if update.row not in live:
            raise StaleUpdateError(f"document {update.doc_id}: update of {update.column} targets a row not in the table")
        if update.doc_id not in store:
            raise StaleUpdateError(f"document {update.doc_id} is not in the store")
    edits = collect_edits(updates)
    by_doc = {}
    for update in updates:
        by_doc.setdefault(update.doc_id, []).append(update)
    for doc_id, per_doc in edits.items():
        _check_document(store[doc_id], per_doc, by_doc[doc_id])

    changed = {}
    for doc_id, per_doc in edits.items():
        document = store[doc_id]
        # с конца документа, чтобы ещё не применённые спаны оставались верными
        for span in sorted(per_doc, key=lambda s: s.start, reverse=True):
            document = dsyn(document, span, per_doc[span], alphabet)
        changed[doc_id] = document
    result = store.with_documents(changed)
    logger.info(
        "%d updates in %d documents translated, store version %d", len(updates), len(changed), result.version
    )
    return result


def _shift_start(position, edits):
    return position + sum(len(new) - span.length for span, new in edits.items() if span.end <= position)


def _shift_end(position, edits):
    return position + sum(
        len(new) - span.length for span, new in edits.items()
        if span.end < position or (span.end == position and span.start < position)
    )


def expected_row(row, columns, edits, updated_cells):
    """Строка F(r): спаны сдвигаются правками, новые значения получают только обновлённые ячейки"""
    spans, values = [], []
    for column, span, value in zip(columns, row.spans, row.values):
        start = _shift_start(span.start, edits)
        if (row, column) in updated_cells:
            value = edits[span]
            spans.append(Span(start, start + len(value)))
        else:
            spans.append(Span(start, max(start, _shift_end(span.end, edits))))
        values.append(value)
    return TableRow(row.doc_id, tuple(spans), tuple(values))


@dataclass
class DocumentDiff:
    gained: list = field(default_factory=list)
    lost: list = field(default_factory=list)
    mismatched: list = field(default_factory=list)

    @property
    def exact(self):
        return not (self.gained or self.lost or self.mismatched)

    def to_dict(self, columns):
        def cells(row):
            return {c: {"span": [s.start, s.end], "value": v} for c, s, v in zip(columns, row.spans, row.values)}

        return {
            "gained": [cells(r) for r in self.gained],
            "lost": [cells(r) for r in self.lost],
            "mismatched": [{"expected": cells(e), "actual": cells(a)} for e, a in self.mismatched],
        }


@dataclass
class RoundTripReport:
    program: str
    columns: tuple
    documents: dict = field(default_factory=dict)
    string_gained: Counter = field(default_factory=Counter)
    string_lost: Counter = field(default_factory=Counter)
    updates: int = 0

    @property
    def exact(self):
        return all(diff.exact for diff in self.documents.values())

    @property
    def verdict(self):
        return "exact match" if self.exact else "mismatch"

    def to_dict(self):
        return {
            "program": self.program,
            "columns": ["Doc_id", *self.columns],
            "updates": self.updates,
            "result": self.verdict,
            "documents": {
                doc_id: diff.to_dict(self.columns)
                for doc_id, diff in self.documents.items() if not diff.exact
            },
            "strings": {
                "gained": [list(k) + [n] for k, n in sorted(self.string_gained.items())],
                "lost": [list(k) + [n] for k, n in sorted(self.string_lost.items())],
            },
        }


def _diff(expected, actual):
    diff = DocumentDiff()
    missing = sorted(set(expected) - set(actual))
    extra = sorted(set(actual) - set(expected))
    extra_by_spans = {row.spans: row for row in extra}
    for row in missing:
        other = extra_by_spans.pop(row.spans, None)
        if other is None:
            diff.lost.append(row)
        else:
            diff.mismatched.append((row, other))
    diff.gained = sorted(extra_by_spans.values())
    return diff


def round_trip_check(p, before, after_store, updates):
    """Повторное извлечение из очищенных документов против F, применённой к исходной таблице"""
    edits = collect_edits(updates)
    updated_cells = {(u.row, u.column) for u in updates}
    after = extract_table(p, after_store)
    report = RoundTripReport(p.name, before.columns, updates=len(updates))
    doc_ids = sorted(set(before.doc_ids) | set(after.doc_ids) | set(edits), key=doc_sort_key)
    expected_strings, actual_strings = Counter(), Counter()
    for doc_id in doc_ids:
        per_doc = edits.get(doc_id, {})
        expected = [expected_row(row, before.columns, per_doc, updated_cells) for row in before.rows_for(doc_id)]
        actual = after.rows_for(doc_id)
        report.documents[doc_id] = _diff(expected, actual)
        expected_strings.update((doc_id,) + row.values for row in expected)
        actual_strings.update((doc_id,) + row.values for row in actual)
    report.string_gained = actual_strings - expected_strings
    report.string_lost = expected_strings - actual_strings
    logger.info("round trip for %s: %s", p.name, report.verdict)
    return report


@dataclass(frozen=True)
class FuzzViolation:
    doc_id: str
    column: str
    span: Span
    old_value: str
    new_value: str
    report: RoundTripReport = field(compare=False)

    def to_dict(self):
        return {
            "document": self.doc_id,
            "column": self.column,
            "span": [self.span.start, self.span.end],
            "old": self.old_value,
            "new": self.new_value,
            "diff": self.report.to_dict()["documents"],
        }


@dataclass
class FuzzResult:
    program: str
    trials: int
    seed: int
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {
            "program": self.program,
            "trials": self.trials,
            "seed": self.seed,
            "violations": [v.to_dict() for v in self.violations],
        }


def fuzz_stability(p, model, store, trials, seed=0, max_len=16):
    """Случайные одноклеточные обновления из области значений и проверка кругового обхода"""
    rng = np.random.default_rng(seed)
    table = extract_table(p, store)
    columns = [v for v in sorted(model.variables) if v in table.columns]
    result = FuzzResult(p.name, 0, seed)
    if not table.rows or not columns:
        logger.warning("%s: nothing to fuzz, %d rows and update columns %s", p.name, len(table), columns)
        return result
    automata = {v: model.domain_automaton(v, p.alphabet) for v in columns}
    for _ in range(trials):
        row = table.rows[int(rng.integers(len(table.rows)))]
        column = columns[int(rng.integers(len(columns)))]
        index = table.index(column)
        new_value = sample_member(automata[column], rng, max_len)
        update = CellUpdate(row.doc_id, row, column, row.spans[index], row.values[index], new_value)
        local = store.subset([row.doc_id])
        before = table.subset([row.doc_id])
        after = translate_updates(local, before, [update], force=True)
        report = round_trip_check(p, before, after, [update])
        result.trials += 1
        if not report.exact:
            result.violations.append(
                FuzzViolation(row.doc_id, column, update.span, update.old_value, new_value, report)
            )
    logger.info("%s: %d fuzz trials, %d violations", p.name, result.trials, len(result.violations))
    return result
