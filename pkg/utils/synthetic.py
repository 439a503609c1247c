import datetime
import logging

import numpy as np

from core.automata import Document
from core.cleaner import DocumentStore

logger = logging.getLogger(__name__)

# Синтетические выписки в формате записей <RECORD ID="N"> с типичными дефектами:
# разные форматы дат, расхождение DD и даты выписки, пропущенные единицы доз,
# списки лекарств через запятую, сокращения вперемешку с полными формами.

BASE_DATE = datetime.date(1995, 1, 1)
DATE_RANGE_DAYS = 15 * 365

DATE_FORMATS = ("8d", "iso", "us", "ymd-slash")

MEDICATIONS = (
    ("Lisinopril", (5, 10, 20, 40), "mg"),
    ("Aspirin", (81, 325), "mg"),
    ("Metoprolol", (25, 50, 100), "mg"),
    ("Simvastatin", (10, 20, 40), "mg"),
    ("Lasix", (20, 40, 80), "mg"),
    ("Coumadin", (1, 2, 5), "mg"),
    ("Colace", (100,), "mg"),
    ("Insulin", (10, 15, 20), "ml"),
    ("Digoxin", (125, 250), "mcg"),
    ("Potassium", (20, 40), "mg"),
)
FREQUENCIES = ("daily", "twice daily", "q.d.", "b.i.d.", "at bedtime", "every morning")

PROCEDURES = (
    ("had", "CT", "Computed Tomography", "scan of the chest"),
    ("had", "MRI", "Magnetic Resonance Imaging", "of the brain"),
    ("received", "DVT", "Deep Vein Thrombosis", "prophylaxis"),
)
COMPLAINTS = ("chest pain", "shortness of breath", "abdominal pain", "syncope", "fever")
SEXES = ("man", "woman")


def format_date(date, fmt):
    if fmt == "8d":
        return f"{date.year:04d}{date.month:02d}{date.day:02d}"
    if fmt == "iso":
        return f"{date.year:04d}-{date.month:02d}-{date.day:02d}"
    if fmt == "us":
        return f"{date.month:02d}/{date.day:02d}/{date.year:04d}"
    if fmt == "ymd-slash":
        return f"{date.year:04d}/{date.month:02d}/{date.day:02d}"
    raise ValueError(f"unknown date format {fmt!r}")


def _pick(rng, items):
    return items[int(rng.integers(len(items)))]


def _medication_lines(rng):
    count = int(rng.integers(3, 7))
    chosen = rng.choice(len(MEDICATIONS), size=count, replace=False)
    entries = []
    for index in chosen:
        name, doses, unit = MEDICATIONS[int(index)]
        dose = _pick(rng, doses)
        frequency = _pick(rng, FREQUENCIES)
        # пропущенная единица дозы
        if rng.random() < 0.2:
            entries.append(f"{name} {dose} {frequency}")
        else:
            entries.append(f"{name} {dose} {unit} {frequency}")
    lines = [entries[0]]
    for entry in entries[1:]:
        # часть списка записана через запятую или точку с запятой
        roll = rng.random()
        if roll < 0.2:
            lines[-1] += f" , {entry}"
        elif roll < 0.3:
            lines[-1] += f" ; {entry}"
        else:
            lines.append(entry)
    return lines


def synthetic_record(rng, record_id):
    """Текст одной записи от <RECORD до </RECORD>"""
    admitted = BASE_DATE + datetime.timedelta(days=int(rng.integers(DATE_RANGE_DAYS)))
    discharged = admitted + datetime.timedelta(days=int(rng.integers(1, 15)))
    dictated = discharged
    if rng.random() < 0.25:
        # DD расходится с датой выписки
        dictated = discharged + datetime.timedelta(days=int(rng.integers(1, 4)))
    age = int(rng.integers(18, 96))
    verb, abbreviation, full_form, tail = _pick(rng, PROCEDURES)
    mention = abbreviation if rng.random() < 0.6 else full_form
    if rng.random() < 0.5:
        admission_phrase = f"She was admitted {format_date(admitted, '8d')} with {_pick(rng, COMPLAINTS)} ."
    else:
        admission_phrase = f"Admitted on {format_date(admitted, '8d')} , {_pick(rng, COMPLAINTS)} was noted ."

    lines = [
        f'<RECORD ID="{record_id}">',
        "<TEXT>",
        f"{int(rng.integers(100000000, 999999999))} | RWH | {int(rng.integers(1000000, 9999999))}",
        "Discharge Summary",
        "ADMISSION DATE :",
        format_date(admitted, _pick(rng, DATE_FORMATS)),
        "DISCHARGE DATE :",
        format_date(discharged, _pick(rng, DATE_FORMATS)),
        "HISTORY OF PRESENT ILLNESS :",
        f"The patient is a {age} year old {_pick(rng, SEXES)} with a history of hypertension . "
        f"{admission_phrase} The patient {verb} {mention} {tail} without complications .",
        "MEDICATIONS ON DISCHARGE :",
        *_medication_lines(rng),
        "DD :",
        format_date(dictated, "us"),
        "TD :",
        f"{format_date(dictated + datetime.timedelta(days=1), 'us')} 10:15 AM",
        "[report_end]",
        "</TEXT>",
        "</RECORD>",
    ]
    return "\n".join(lines)


def gen_synthetic_corpus(seed, n):
    """Детерминированный по seed корпус из n записей с идентификаторами 1..n"""
    if n < 0:
        raise ValueError("record count must not be negative")
    rng = np.random.default_rng(seed)
    documents = [Document(str(i), synthetic_record(rng, i)) for i in range(1, n + 1)]
    store = DocumentStore.from_documents(documents, origin=f"synthetic:seed={seed}")
    logger.info("generated %d synthetic records with seed %d", n, seed)
    return store
