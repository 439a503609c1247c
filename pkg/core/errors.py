# Исключения spanclean. Все наследуются от SpancleanError,
# CLI переводит их в коды возврата.


class SpancleanError(Exception):
    """Базовое исключение проекта"""


class RegexSyntaxError(SpancleanError):
    def __init__(self, message, position, source=None):
        super().__init__(f"{message} at offset {position}")
        self.message = message
        self.position = position
        self.source = source


class AlphabetError(SpancleanError):
    pass


class AutomatonError(SpancleanError):
    pass


class VariableError(SpancleanError):
    pass


class ProgramError(SpancleanError):
    KINDS = (
        "syntax",
        "schema-mismatch",
        "unknown-formula",
        "non-functional-formula",
        "cycle",
        "no-exposed-variable",
        "unknown-variable",
        "alphabet-conflict",
    )

    def __init__(self, kind, message, line=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown program error kind: {kind}")
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{kind}: {message}")
        self.kind = kind
        self.message = message
        self.line = line


class DomainError(SpancleanError):
    pass


class UpdateConflictError(SpancleanError):
    pass


class StaleUpdateError(SpancleanError):
    pass


class UnverifiedProgramError(SpancleanError):
    pass


class CorpusError(SpancleanError):
    def __init__(self, message, path=None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
