import json
import logging
import os
import re

import yaml

from core.alphabet import DEFAULT_ALPHABET
from core.automata import Document, Span
from core.cleaner import CleaningRule, DocumentStore, ExtractedTable, TableRow, check_alphabet
from core.errors import CorpusError, DomainError

logger = logging.getLogger(__name__)

FORMATS = ("xml-records", "plain-dir")

RECORD_OPEN = re.compile(r"<RECORD\b([^>]*)>")
RECORD_ID = re.compile(r'\s+ID="([^"\s]+)"\s*')
RECORD_CLOSE = "</RECORD>"
TARGET_COMMENT = re.compile(r"#\s*target:\s*(\S+)")


def _read_text(filename):
    try:
        with open(filename, "r", encoding="utf-8", newline="") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusError(f"cannot read file: {e}", filename) from e


def _write_text(filename, text):
    try:
        with open(filename, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise CorpusError(f"cannot write file: {e}", filename) from e


def split_records(content, filename=None):
    """
    Split a discharge-summary dump into one document per <RECORD ID="N"> block.

    Args:
        content: Text of the dump
        filename: Source path, used in diagnostics

    Returns:
        List of documents; each text runs from <RECORD to </RECORD> inclusive
    """
    documents = []
    position = 0
    while True:
        match = RECORD_OPEN.search(content, position)
        if match is None:
            break
        line = content.count("\n", 0, match.start()) + 1
        header = RECORD_ID.fullmatch(match.group(1))
        if header is None:
            raise CorpusError(f"line {line}: malformed record header {match.group(0)!r}", filename)
        end = content.find(RECORD_CLOSE, match.end())
        if end < 0:
            raise CorpusError(f"line {line}: record {header.group(1)} is not closed", filename)
        end += len(RECORD_CLOSE)
        documents.append(Document(header.group(1), content[match.start():end]))
        position = end
    return documents


def _corpus_files(path, suffix=None):
    try:
        names = sorted(os.listdir(path))
    except OSError as e:
        raise CorpusError(f"cannot list directory: {e}", path) from e
    return [
        os.path.join(path, name) for name in names
        if os.path.isfile(os.path.join(path, name)) and (suffix is None or name.endswith(suffix))
    ]


def ingest_corpus(path, fmt="xml-records", alphabet=DEFAULT_ALPHABET):
    """
    Load a corpus into a document store.

    Args:
        path: A records dump file, or a directory of N.xml files or plain files
        fmt: 'xml-records' splits on record tags, 'plain-dir' takes one document per file
        alphabet: Documents with characters outside it are skipped with a warning

    Returns:
        DocumentStore at version 0

    Raises:
        CorpusError: unreadable path, malformed record header or duplicate ids
    """
    if fmt not in FORMATS:
        raise CorpusError(f"unknown corpus format {fmt!r}, expected one of {', '.join(FORMATS)}", path)
    if not os.path.exists(path):
        raise CorpusError("no such file or directory", path)

    documents = []
    if fmt == "xml-records":
        files = _corpus_files(path, ".xml") if os.path.isdir(path) else [path]
        for filename in files:
            documents.extend(split_records(_read_text(filename), filename))
    else:
        if not os.path.isdir(path):
            raise CorpusError("plain-dir corpus must be a directory", path)
        for filename in _corpus_files(path):
            doc_id = os.path.splitext(os.path.basename(filename))[0]
            documents.append(Document(doc_id, _read_text(filename)))

    store = DocumentStore.from_documents(check_alphabet(documents, alphabet), origin=path)
    logger.info("ingested %d documents from %s (%d skipped)", len(store), path, len(documents) - len(store))
    return store


def write_corpus(store, path):
    """
    Write every document of the store to its own N.xml file.

    Args:
        store: DocumentStore to write
        path: Output directory, created when missing
    """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise CorpusError(f"cannot create directory: {e}", path) from e
    for document in store:
        _write_text(os.path.join(path, f"{document.id}.xml"), document.text)
    logger.info("wrote %d documents of version %d to %s", len(store), store.version, path)


def _encode_cell(span, value):
    # JSON-строка экранирует табуляции и переводы строк
    return f"{span.start},{span.end},{json.dumps(value, ensure_ascii=False)}"


def _decode_cell(cell, filename, line):
    try:
        start, end, value = cell.split(",", 2)
        return Span(int(start), int(end)), json.loads(value)
    except (ValueError, json.JSONDecodeError) as e:
        raise CorpusError(f"line {line}: malformed cell {cell!r}", filename) from e


def save_table(table, filename):
    """
    Save an extracted table: a header, then per row the doc id and start,end,"value" cells.

    Args:
        table: ExtractedTable to save
        filename: Path of the .tsv file
    """
    lines = ["\t".join(("Doc_id",) + table.columns)]
    for row in table:
        lines.append("\t".join([row.doc_id] + [_encode_cell(s, v) for s, v in zip(row.spans, row.values)]))
    _write_text(filename, "\n".join(lines) + "\n")


def read_table(filename, program=None):
    """
    Read a table written by save_table.

    Args:
        filename: Path of the .tsv file
        program: Program name to attach, the file stem by default

    Returns:
        ExtractedTable
    """
    lines = _read_text(filename).splitlines()
    if not lines or not lines[0].startswith("Doc_id"):
        raise CorpusError("missing Doc_id header", filename)
    columns = tuple(lines[0].split("\t")[1:])
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(columns) + 1:
            raise CorpusError(f"line {number}: expected {len(columns) + 1} fields, got {len(fields)}", filename)
        cells = [_decode_cell(cell, filename, number) for cell in fields[1:]]
        rows.append(TableRow(fields[0], tuple(s for s, _ in cells), tuple(v for _, v in cells)))
    name = program or os.path.splitext(os.path.basename(filename))[0]
    return ExtractedTable(name, columns, tuple(rows))


def save_string_relation(table, filename):
    """
    Save the string view of a table, spans hidden, one distinct row per line.

    Args:
        table: ExtractedTable to save
        filename: Path of the .tsv file
    """
    lines = ["\t".join(("Doc_id",) + table.columns)]
    for row in table.string_relation():
        lines.append("\t".join([row[0]] + [json.dumps(v, ensure_ascii=False) for v in row[1:]]))
    _write_text(filename, "\n".join(lines) + "\n")


def save_updates(updates, filename):
    """
    Save proposed cell updates as doc id, column, span, old and new value.

    Args:
        updates: List of CellUpdate
        filename: Path of the .tsv file
    """
    lines = ["Doc_id\tcolumn\tspan\told\tnew"]
    for u in updates:
        lines.append("\t".join((
            u.doc_id, u.column, f"{u.span.start},{u.span.end}",
            json.dumps(u.old_value, ensure_ascii=False), json.dumps(u.new_value, ensure_ascii=False),
        )))
    _write_text(filename, "\n".join(lines) + "\n")


def save_json(data, filename):
    _write_text(filename, json.dumps(data, indent=2, ensure_ascii=False) + "\n")


def read_mapping(filename):
    """
    Read a two-column tab-separated old -> new mapping.

    Lines starting with '#' are comments; '# target: VAR' names the column the mapping applies to.

    Args:
        filename: Path of the .tsv file

    Returns:
        Tuple (mapping dict, target variable or None)
    """
    mapping = {}
    target = None
    for number, line in enumerate(_read_text(filename).splitlines(), start=1):
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            found = TARGET_COMMENT.match(line.strip())
            if found:
                target = found.group(1)
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise CorpusError(f"line {number}: expected two tab-separated fields", filename)
        old, new = fields
        if old in mapping and mapping[old] != new:
            raise CorpusError(f"line {number}: {old!r} is mapped twice", filename)
        mapping[old] = new
    return mapping, target


def _rule_from_entry(entry, base, filename, number):
    if not isinstance(entry, dict):
        raise CorpusError(f"rule {number} is not a mapping", filename)
    name = entry.get("name", f"rule-{number}")
    target = entry.get("target")
    if not target:
        raise CorpusError(f"rule {name} has no target", filename)
    mapping = entry.get("mapping")
    if isinstance(mapping, str):
        mapping, _ = read_mapping(os.path.join(base, mapping))
    elif mapping is not None:
        mapping = {str(k): str(v) for k, v in mapping.items()}
    try:
        return CleaningRule(name, target, mapping=mapping, normalizer=entry.get("normalizer"), source=filename)
    except DomainError as e:
        raise CorpusError(str(e), filename) from e


def load_rules(filenames):
    """
    Load cleaning rules from YAML rule files or direct .tsv mappings.

    Args:
        filenames: Paths; a .tsv path must carry a '# target: VAR' comment

    Returns:
        List of CleaningRule
    """
    rules = []
    for filename in filenames:
        if filename.endswith(".tsv"):
            mapping, target = read_mapping(filename)
            if target is None:
                raise CorpusError("mapping file has no '# target: VAR' line", filename)
            name = os.path.splitext(os.path.basename(filename))[0]
            rules.append(CleaningRule(name, target, mapping=mapping, source=filename))
            continue
        try:
            config = yaml.safe_load(_read_text(filename)) or {}
        except yaml.YAMLError as e:
            raise CorpusError(f"invalid YAML: {e}", filename) from e
        entries = config.get("rules") if isinstance(config, dict) else None
        if not isinstance(entries, list):
            raise CorpusError("expected a top-level 'rules' list", filename)
        base = os.path.dirname(filename)
        for number, entry in enumerate(entries, start=1):
            rules.append(_rule_from_entry(entry, base, filename, number))
    logger.info("loaded %d cleaning rules", len(rules))
    return rules
