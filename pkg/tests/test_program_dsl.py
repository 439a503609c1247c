import pytest

from core.alphabet import Alphabet
from core.errors import ProgramError
from utils.program_dsl import load_program, parse_program, split_statements

PROGRAMS = {
    "movie": ("movie", ("A", "M")),
    "date": ("E_date", ("D",)),
    "age": ("E_age", ("A",)),
    "value_consistency": ("E_valCon", ("R", "T1", "D1", "T2", "D2")),
    "order": ("E_order", ("R", "S", "D2", "A", "D1")),
    "order_union": ("E_prime", ("R", "A", "D1")),
    "med_list": ("E_list", ("S",)),
    "unit": ("E_unit", ("M", "G", "U")),
    "unit_fallback": ("E_unit_fallback", ("M", "G", "U")),
    "abbreviation": ("E_unify", ("U",)),
}


@pytest.mark.parametrize("stem", sorted(PROGRAMS))
def test_bundled_programs_load(load, stem):
    name, schema = PROGRAMS[stem]
    p = load(stem)
    assert p.name == name
    assert p.schema() == schema
    assert p.alphabet.name == "printable"


def test_split_statements_keeps_regex_intact():
    source = "# комментарий\nlet a = ⟦x ; # y⟧; # хвост\n\noutput P = ⟦A{a}⟧;\n"
    statements = split_statements(source)
    assert statements == [("let a = ⟦x ; # y⟧", 2), ("output P = ⟦A{a}⟧", 4)]


@pytest.mark.parametrize("source, kind, line", [
    ("let a = ⟦x;\n", "syntax", 1),
    ("output P = ⟦A{a}⟧", "syntax", 1),
    ("\nprint P;", "syntax", 2),
    ("let a = ⟦A{a}⟧;\nlet a = ⟦A{b}⟧;\noutput P = a;", "syntax", 2),
    ("let a = ⟦$b⟧;\nlet b = ⟦$a A{x}⟧;\noutput P = b;", "cycle", 2),
    ("let f = ⟦A{a}⟧;\nlet g = ⟦$f B{b}⟧;\noutput P = g;", "syntax", 1),
    ("let E1 = ⟦A{a}⟧;\noutput P = E1 ∪;", "syntax", 2),
    ("let r = ⟦abc⟧;\noutput P = r;", "no-exposed-variable", 1),
    ("let E1 = ⟦A{a ∨⟧;\noutput P = E1;", "syntax", 1),
])
def test_program_syntax_errors(source, kind, line):
    with pytest.raises(ProgramError) as error:
        parse_program(source)
    assert error.value.kind == kind
    assert error.value.line == line


def test_output_without_name_uses_program_name():
    p = parse_program("let E1 = ⟦Σ* A{a} Σ*⟧;\noutput E1;", name="stem")
    assert p.name == "stem"
    assert p.schema() == ("A",)


def test_missing_output():
    with pytest.raises(ProgramError, match="no output"):
        parse_program("let E1 = ⟦A{a}⟧;")


def test_alphabet_literal_and_conflict():
    p = parse_program('alphabet "ab";\noutput P = ⟦Σ* A{a} Σ*⟧;')
    assert p.alphabet == Alphabet.from_text("ab")
    with pytest.raises(ProgramError) as error:
        parse_program('alphabet "ab";\noutput P = ⟦A{a}⟧;', alphabet="printable")
    assert error.value.kind == "alphabet-conflict"


def test_functional_dependencies_and_update_vars(load):
    p = load("value_consistency")
    assert p.declared_update_vars == {"D1", "D2"}
    assert sorted(str(fd) for fd in p.fds) == ["E5: {R} -> {D1, T1}", "E6: {R} -> {D2, T2}"]


def test_load_program_names_after_file(tmp_path):
    path = tmp_path / "pairs.spanner"
    path.write_text("let E1 = ⟦Σ* A{[a-z]} Σ*⟧;\noutput E1;\n", encoding="utf-8")
    p = load_program(path)
    assert p.name == "pairs"
    assert p.source_path == str(path)


def test_load_program_missing_file(tmp_path):
    with pytest.raises(ProgramError):
        load_program(tmp_path / "absent.spanner")
