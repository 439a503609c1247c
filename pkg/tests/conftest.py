from pathlib import Path

import pytest

from core.alphabet import Alphabet, DEFAULT_ALPHABET
from core.automata import Document
from core.regex_cv import parse_regex_cv
from utils.program_dsl import load_program, parse_program
from utils.synthetic import gen_synthetic_corpus

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS_DIR = ROOT / "programs"
RULES_DIR = ROOT / "rules"
DATA_DIR = ROOT / "tests" / "data"

MOVIE_TEXT = (
    "On 03/24, we rented and watched `MIB'. "
    "I highly recommend it as an inspiring and humorous film to enjoy."
)

UPPER = "[A-Z]"
ABBREVIATION = f"{UPPER}{UPPER}* (␣{UPPER}{UPPER}*)* [0-9]*"
BOUNDARY = "(␣ ∨ ,)"
NO_STOP = "(Σ − ? − .)"

# Формулы, заведомо нарушающие отсутствие конфликтов
GAMMA_ABBR = f"Σ* {BOUNDARY} A{{{ABBREVIATION}}} {BOUNDARY} Σ*"
GAMMA_MED_DOSES = f"Σ* ␣ M{{{ABBREVIATION}}} {BOUNDARY} {NO_STOP}* D{{[0-9][0-9]*}} ␣(ml ∨ mg)␣ Σ*"
GAMMA_MED_STRENGTH = (
    f"Σ* ␣ M{{{ABBREVIATION}}} {BOUNDARY}* D{{[0-9][0-9]*}} ␣(ml ∨ mg) {BOUNDARY}* "
    f"S{{{UPPER}{UPPER} ∨ diluted ∨ half-strength ∨ ε}} {BOUNDARY} "
    f"F{{{UPPER}{UPPER}(␣({UPPER}{UPPER} ∨ with␣food ∨ bedtime))*}} Σ*"
)


@pytest.fixture
def printable():
    return DEFAULT_ALPHABET


@pytest.fixture
def ab():
    return Alphabet.from_text("ab", name="ab")


@pytest.fixture
def movie_document():
    return Document("movie", MOVIE_TEXT)


@pytest.fixture
def load():
    def _load(name, alphabet=None):
        return load_program(PROGRAMS_DIR / f"{name}.spanner", alphabet)

    return _load


@pytest.fixture
def formula_program():
    def _build(regex_source, name="E", update_vars=None):
        lines = []
        if update_vars:
            lines.append(f"update-vars {{{', '.join(update_vars)}}};")
        lines.append(f"output {name} = ⟦{regex_source}⟧;")
        return parse_program("\n".join(lines), name=name)

    return _build


@pytest.fixture
def gamma_abbr():
    return parse_regex_cv(GAMMA_ABBR)


@pytest.fixture
def gamma_med_doses():
    return parse_regex_cv(GAMMA_MED_DOSES)


@pytest.fixture
def gamma_med_strength():
    return parse_regex_cv(GAMMA_MED_STRENGTH)


@pytest.fixture(scope="session")
def small_store():
    return gen_synthetic_corpus(7, 5)
