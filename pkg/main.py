import argparse
import logging
import os
import sys
from dataclasses import dataclass

from core.cleaner import apply_rule, extract_table, fuzz_stability, round_trip_check, translate_updates
from core.errors import (
    AlphabetError,
    CorpusError,
    DomainError,
    ProgramError,
    RegexSyntaxError,
    StaleUpdateError,
    UnverifiedProgramError,
    UpdateConflictError,
)
from core.verifier import UpdateModel, verify_stability
from corpus_handler import (
    FORMATS,
    ingest_corpus,
    load_rules,
    read_table,
    save_json,
    save_string_relation,
    save_table,
    save_updates,
    write_corpus,
)
from utils.program_dsl import load_program
from utils.synthetic import gen_synthetic_corpus

logger = logging.getLogger("spanclean")

# Коды возврата
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMANDS = {
    'verify': 'Проверка стабильности программы',
    'extract': 'Извлечение таблицы из корпуса',
    'clean': 'Очистка: правила, перенос в документы, проверка повторным извлечением',
    'gen-corpus': 'Синтетический корпус выписок',
    'fuzz': 'Случайные обновления и проверка кругового обхода',
}

REPORT_FORMATS = {'text': 'report.txt', 'json': 'report.json'}
LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class RunConfig:
    command: str
    program: str = None
    corpus: str = None
    fmt: str = "xml-records"
    rules: tuple = ()
    out: str = "out"
    alphabet: str = None
    seed: int = 0
    count: int = 200
    force: bool = False
    report: str = "text"
    trials: int = 300
    table: str = None

    @classmethod
    def from_args(cls, args):
        return cls(
            command=args.command,
            program=getattr(args, "program", None),
            corpus=getattr(args, "corpus", None),
            fmt=getattr(args, "format", "xml-records"),
            rules=tuple(getattr(args, "rules", None) or ()),
            out=args.out,
            alphabet=getattr(args, "alphabet", None),
            seed=getattr(args, "seed", 0),
            count=getattr(args, "count", 200),
            force=getattr(args, "force", False),
            report=getattr(args, "report", "text"),
            trials=getattr(args, "trials", 300),
            table=getattr(args, "table", None),
        )

    def output(self, name):
        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, name)


def build_parser():
    parser = argparse.ArgumentParser(prog="spanclean", description="Очистка документов через стабильные спаннеры")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v: INFO, -vv: DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, program=True, corpus=False, rules=False):
        p = sub.add_parser(name, help=COMMANDS[name])
        p.add_argument("--out", default="out", help="каталог результатов")
        if program:
            p.add_argument("--program", required=True, help="файл программы .spanner")
            p.add_argument("--alphabet", default=None, help="printable, printable-tab или перечень символов")
        if corpus:
            p.add_argument("--corpus", required=corpus == "required", help="файл записей или каталог")
            p.add_argument("--format", choices=FORMATS, default="xml-records")
        if rules:
            p.add_argument("--rules", action="append", default=[], help="правила .yaml или отображение .tsv")
        return p

    verify = command("verify", rules=True)
    verify.add_argument("--report", choices=sorted(REPORT_FORMATS), default="text")

    command("extract", corpus="required")

    clean = command("clean", corpus="required", rules=True)
    clean.add_argument("--force", action="store_true", help="переносить изменения без успешной проверки")
    clean.add_argument("--report", choices=sorted(REPORT_FORMATS), default="text")
    clean.add_argument("--table", default=None, help="таблица table.tsv из extract вместо нового извлечения")

    gen = command("gen-corpus", program=False)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=200)

    fuzz = command("fuzz", corpus="optional", rules=True)
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--count", type=int, default=20, help="размер синтетического корпуса без --corpus")
    fuzz.add_argument("--trials", type=int, default=300)
    return parser


def _load(config):
    program = load_program(config.program, config.alphabet)
    model = UpdateModel.from_program(program, load_rules(config.rules))
    return program, model


def _write_report(config, report):
    if config.report == "json":
        save_json(report.to_dict(), config.output(REPORT_FORMATS["json"]))
    else:
        with open(config.output(REPORT_FORMATS["text"]), "w", encoding="utf-8") as f:
            f.write(report.to_text() + "\n")


def cmd_verify(config):
    program, model = _load(config)
    report = verify_stability(program, model)
    _write_report(config, report)
    print(f"{program.name}: {report.overall}")
    for name, result in report.conditions.items():
        if not result.passed:
            print(f"  {name}: {result.status.value}")
    return EXIT_OK if report.stable else EXIT_FAILED


def cmd_extract(config):
    program = load_program(config.program, config.alphabet)
    store = ingest_corpus(config.corpus, config.fmt, program.alphabet)
    table = extract_table(program, store)
    save_table(table, config.output("table.tsv"))
    save_string_relation(table, config.output("strings.tsv"))
    print(f"{program.name}: {len(table)} rows from {len(store)} documents")
    return EXIT_OK


def _saved_table(config, program):
    table = read_table(config.table, program=program.name)
    if table.columns != tuple(program.schema()):
        raise CorpusError(f"columns {', '.join(table.columns)} do not match {program.name}", config.table)
    return table


def cmd_clean(config):
    program, model = _load(config)
    report = verify_stability(program, model)
    _write_report(config, report)
    if not report.stable and not config.force:
        raise UnverifiedProgramError(
            f"{program.name} is {report.overall}; refusing to translate updates (use --force to override)"
        )
    store = ingest_corpus(config.corpus, config.fmt, program.alphabet)
    table = _saved_table(config, program) if config.table else extract_table(program, store)
    updates = []
    for variable in sorted(model.variables):
        for rule in model.variables[variable].rules:
            updates.extend(apply_rule(table, rule, model, program.alphabet))
    save_updates(updates, config.output("updates.tsv"))

    cleaned = translate_updates(store, table, updates, verified=report.stable, force=config.force,
                                alphabet=program.alphabet)
    write_corpus(cleaned, config.output(f"corpus-v{cleaned.version}"))
    round_trip = round_trip_check(program, table, cleaned, updates)
    save_json(round_trip.to_dict(), config.output("roundtrip.json"))
    print(f"{program.name}: {len(updates)} updates, round trip: {round_trip.verdict}")
    return EXIT_OK if round_trip.exact else EXIT_FAILED


def cmd_gen_corpus(config):
    store = gen_synthetic_corpus(config.seed, config.count)
    write_corpus(store, config.out)
    print(f"{len(store)} records written to {config.out}")
    return EXIT_OK


def cmd_fuzz(config):
    program, model = _load(config)
    if config.corpus:
        store = ingest_corpus(config.corpus, config.fmt, program.alphabet)
    else:
        store = gen_synthetic_corpus(config.seed, config.count)
    result = fuzz_stability(program, model, store, config.trials, config.seed)
    save_json(result.to_dict(), config.output("fuzz.json"))
    print(f"{program.name}: {result.trials} trials, {len(result.violations)} violations")
    return EXIT_OK if result.passed else EXIT_FAILED


HANDLERS = {
    'verify': cmd_verify,
    'extract': cmd_extract,
    'clean': cmd_clean,
    'gen-corpus': cmd_gen_corpus,
    'fuzz': cmd_fuzz,
}


def _location(config, error):
    where = config.program or "-"
    line = getattr(error, "line", None)
    return f"{where}:{line}" if line is not None else where


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=LOG_LEVELS.get(args.verbose, logging.DEBUG), format=LOG_FORMAT)
    config = RunConfig.from_args(args)
    logger.debug("run config %s", config)
    try:
        return HANDLERS[config.command](config)
    except ProgramError as e:
        print(f"{_location(config, e)}: {e.kind}: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except RegexSyntaxError as e:
        print(f"{_location(config, e)}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, DomainError, AlphabetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UnverifiedProgramError, UpdateConflictError, StaleUpdateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
