import enum
import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache

from core.algebra import (
    Formula,
    fd_closure,
    formula_columns,
    operand_fds,
    prov_occurrences,
    updatable_variables,
)
from core.allen import AllenRelation, relation_spanner
from core.alphabet import DEFAULT_ALPHABET
from core.automata import (
    Document,
    accepts,
    compile_regex,
    emptiness,
    join_a,
    language_difference,
    project_a,
    rename_a,
)
from core.errors import DomainError, VariableError
from core.regex_cv import (
    Capture,
    Concat,
    Disjunction,
    Epsilon,
    Exposure,
    Star,
    char_set,
    classify_variables,
    contextualize,
    disjunctive_form,
    enclosed_regex,
    find_capture,
    project_regex,
    uncovered_unigrams,
)

logger = logging.getLogger(__name__)

# Служебные имена переменных в конструкциях; в программах такие имена невозможны
X = "%X"
Y = "%Y"

DOMAIN_CONSISTENT = "domain-consistent"
CONFLICT_FREE = "conflict-free"
RESPECTS_CHARACTERS = "respects-characters"
NON_EXPANDING = "non-expanding"
RESTRICTED_SELECTION = "restricted-string-selection"

CONDITIONS = (DOMAIN_CONSISTENT, CONFLICT_FREE, RESPECTS_CHARACTERS, NON_EXPANDING, RESTRICTED_SELECTION)


class Status(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Witness:
    document: object
    row: tuple

    def to_dict(self):
        return {
            "document": self.document.text,
            "row": {_public_name(v): [s.start, s.end] for v, s in self.row},
        }

    def describe(self):
        spans = ", ".join(f"{_public_name(v)}={s}" for v, s in self.row)
        return f"{self.document.text!r} with {spans}" if spans else repr(self.document.text)


def _public_name(v):
    return v.lstrip("%")


@dataclass
class SubCheck:
    check: str
    formula: str
    variable: str
    other: str = None
    passed: bool = True
    witness: Witness = None
    note: str = None

    @property
    def label(self):
        parts = [self.formula, self.variable] + ([self.other] if self.other else [])
        return f"{self.check}({', '.join(parts)})"

    def to_dict(self):
        result = {"check": self.label, "result": "pass" if self.passed else "fail"}
        if self.witness is not None:
            result["witness"] = self.witness.to_dict()
        if self.note:
            result["note"] = self.note
        return result


@dataclass
class ConditionResult:
    name: str
    status: Status
    details: list = field(default_factory=list)
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status is Status.PASS

    @property
    def failures(self):
        return [d for d in self.details if not d.passed]

    def to_dict(self):
        result = {"result": self.status.value}
        if self.message:
            result["message"] = self.message
        if self.details:
            result["checks"] = [d.to_dict() for d in self.details]
        result.update(self.extra)
        return result


def _result(name, details, message="", extra=None):
    status = Status.PASS if all(d.passed for d in details) else Status.FAIL
    return ConditionResult(name, status, list(details), message, extra or {})


@dataclass
class VerificationReport:
    program: str
    update_variables: tuple
    conditions: dict

    @property
    def stable(self):
        return all(self.conditions[name].passed for name in CONDITIONS)

    @property
    def overall(self):
        return "stable" if self.stable else "not-verified"

    def condition(self, name):
        return self.conditions[name]

    def to_dict(self):
        return {
            "program": self.program,
            "update_variables": list(self.update_variables),
            "overall": self.overall,
            "conditions": {name: self.conditions[name].to_dict() for name in CONDITIONS},
        }

    def to_text(self):
        lines = [
            f"program: {self.program}",
            f"update variables: {', '.join(self.update_variables) or '-'}",
        ]
        for name in CONDITIONS:
            result = self.conditions[name]
            head = f"{name}: {result.status.value}"
            if result.message:
                head += f" ({result.message})"
            lines.append(head)
            for detail in result.failures:
                lines.append(f"  FAIL {detail.label}")
                if detail.note:
                    lines.append(f"    {detail.note}")
                if detail.witness is not None:
                    lines.append(f"    witness: {detail.witness.describe()}")
        lines.append(f"overall: {self.overall}")
        return "\n".join(lines)


@dataclass(frozen=True)
class VariableUpdate:
    """Область значений переменной обновления и допустимые функции"""
    variable: str
    domain: object
    rules: tuple = ()


@dataclass
class UpdateModel:
    variables: dict

    @classmethod
    def from_program(cls, p, rules=()):
        """Области значений берутся из первого вхождения в Prov(v); правила проверяются на сохранение области"""
        variables = {}
        for v in sorted(updatable_variables(p)):
            occurrences = prov_occurrences(p, v)
            if not occurrences:
                continue
            formula_name, leaf_var = occurrences[0]
            domain = enclosed_regex(p.formulas[formula_name].regex, leaf_var)
            matching = tuple(rule for rule in rules if rule.target == v)
            for rule in matching:
                _check_rule_domain(rule, v, domain, p.alphabet)
            variables[v] = VariableUpdate(v, domain, matching)
        unknown = [rule.name for rule in rules if rule.target not in variables]
        if unknown:
            raise DomainError(f"rules {unknown} target variables that are not updatable in {p.name}")
        return cls(variables)

    def domain(self, v):
        return self.variables[v].domain

    def domain_automaton(self, v, alphabet=DEFAULT_ALPHABET):
        return _compiled(self.domain(v), alphabet)


def _check_rule_domain(rule, v, domain, alphabet):
    automaton = _compiled(domain, alphabet)
    mapping = getattr(rule, "mapping", None) or {}
    for old, new in mapping.items():
        if not accepts(automaton, new):
            raise DomainError(f"rule {rule.name} maps {old!r} to {new!r}, outside the domain of {v}")
    output_chars = getattr(rule, "output_chars", None)
    if output_chars is not None:
        outside = set(output_chars) - set(char_set(domain, alphabet))
        if outside:
            raise DomainError(
                f"rule {rule.name} may produce {sorted(outside)} which never occur in the domain of {v}"
            )


@lru_cache(maxsize=None)
def _compiled(regex, alphabet):
    return compile_regex(regex, alphabet)


def _regex_of(e):
    return e.regex if isinstance(e, Formula) else e


def _name_of(e):
    return e.name if isinstance(e, Formula) else "E"


def nullable(r):
    if isinstance(r, Epsilon) or isinstance(r, Star):
        return True
    if isinstance(r, Capture):
        return nullable(r.body)
    if isinstance(r, Concat):
        return nullable(r.left) and nullable(r.right)
    if isinstance(r, Disjunction):
        return nullable(r.left) or nullable(r.right)
    return False


@lru_cache(maxsize=None)
def _side(regex, v, var, keep_extra, alphabet):
    """π_{var, keep_extra}(ρ_{v→var}⟦regex⟧)"""
    a = _compiled(regex, alphabet)
    return project_a(rename_a(a, {v: var}), {var, *keep_extra})


@lru_cache(maxsize=None)
def _left_with_relation(regex, v, relation, alphabet):
    return join_a(_side(regex, v, X, (), alphabet), relation_spanner(relation, X, Y, alphabet))


def case1_construction(r, v, alphabet=DEFAULT_ALPHABET):
    left = _left_with_relation(r, v, AllenRelation.OVERLAP_NOT_EQUAL, alphabet)
    return join_a(left, _side(r, v, Y, (), alphabet))


def case2_construction(r, v, z, alphabet=DEFAULT_ALPHABET):
    left = join_a(_side(r, z, X, (v,), alphabet), relation_spanner(AllenRelation.NOT_EQUAL, X, Y, alphabet))
    return join_a(left, _side(r, z, Y, (v,), alphabet))


def case3_construction(r, v, z, alphabet=DEFAULT_ALPHABET):
    left = _left_with_relation(r, v, AllenRelation.OVERLAP, alphabet)
    return join_a(left, _side(r, z, Y, (), alphabet))


def exposed_ancestor(r, v):
    """Открытая переменная, внутри захвата которой находится v"""
    info = classify_variables(r)
    if v not in info:
        raise VariableError(f"variable {v} does not occur in the formula")
    if info[v].exposure is Exposure.EXPOSED:
        return v
    for name, item in info.items():
        if item.exposure is Exposure.EXPOSED and v in find_capture(r, name).body.variables:
            return name
    raise VariableError(f"variable {v} has no exposed ancestor")


def case4_contexts(r, v):
    contextualized = contextualize(r, exposed_ancestor(r, v))
    return contextualized, sorted(contextualized.variables - {v})


def case4_construction(r, v, z, alphabet=DEFAULT_ALPHABET, contextualized=None):
    if contextualized is None:
        contextualized, _ = case4_contexts(r, v)
    left = _left_with_relation(r, v, AllenRelation.OVERLAP, alphabet)
    return join_a(left, _side(contextualized, z, Y, (), alphabet))


def first_exposed_variable(r):
    info = classify_variables(r)
    for name in formula_columns(r):
        if info[name].exposure is Exposure.EXPOSED:
            return name
    raise VariableError("formula has no exposed variable")


def inter_overlap_constructions(r, r2, v, alphabet=DEFAULT_ALPHABET):
    """Конструкции для каждой переменной v'' из C_{v'}(E2); v' первая открытая переменная E2"""
    chosen = first_exposed_variable(r2)
    contextualized = contextualize(r2, chosen)
    left = _left_with_relation(r, v, AllenRelation.OVERLAP, alphabet)
    constructions = [
        (z, join_a(left, _side(contextualized, z, Y, (), alphabet)))
        for z in formula_columns(contextualized)
    ]
    return chosen, constructions


def _disjoint_domains(r, v, r2, z, alphabet):
    """Непустые спаны с непересекающимися наборами символов не могут перекрываться"""
    left, right = enclosed_regex(r, v), enclosed_regex(r2, z)
    if nullable(left) or nullable(right):
        return False
    if set(char_set(left, alphabet)) & set(char_set(right, alphabet)):
        return False
    logger.debug("%s and %s have disjoint non-empty domains, overlap check skipped", v, z)
    return True


def _run_check(check, formula, v, other, construction, note=None):
    result = emptiness(construction)
    if result.empty:
        return SubCheck(check, formula, v, other, True, note=note)
    return SubCheck(check, formula, v, other, False, Witness(result.witness, result.row), note)


def check_case1(e, v, alphabet=DEFAULT_ALPHABET):
    r, name = _regex_of(e), _name_of(e)
    return _result("CaseI", [_run_check("CaseI", name, v, None, case1_construction(r, v, alphabet))])


def check_case2(e, v, alphabet=DEFAULT_ALPHABET):
    r, name = _regex_of(e), _name_of(e)
    details = [
        _run_check("CaseII", name, v, z, case2_construction(r, v, z, alphabet))
        for z in formula_columns(r) if z != v
    ]
    return _result("CaseII", details)


def check_case3(e, v, alphabet=DEFAULT_ALPHABET):
    r, name = _regex_of(e), _name_of(e)
    details = []
    for z in formula_columns(r):
        if z == v:
            continue
        if _disjoint_domains(r, v, r, z, alphabet):
            details.append(SubCheck("CaseIII", name, v, z, True, note="disjoint domains"))
            continue
        details.append(_run_check("CaseIII", name, v, z, case3_construction(r, v, z, alphabet)))
    return _result("CaseIII", details)


def check_case4(e, v, alphabet=DEFAULT_ALPHABET):
    r, name = _regex_of(e), _name_of(e)
    contextualized, others = case4_contexts(r, v)
    details = []
    for z in others:
        if _disjoint_domains(r, v, contextualized, z, alphabet):
            details.append(SubCheck("CaseIV", name, v, z, True, note="disjoint domains"))
            continue
        construction = case4_construction(r, v, z, alphabet, contextualized)
        details.append(_run_check("CaseIV", name, v, z, construction))
    return _result("CaseIV", details)


def check_inter_overlap(e, e2, v, alphabet=DEFAULT_ALPHABET):
    r, r2 = _regex_of(e), _regex_of(e2)
    chosen, constructions = inter_overlap_constructions(r, r2, v, alphabet)
    contextualized = contextualize(r2, chosen)
    pair = f"{_name_of(e)}/{_name_of(e2)}"
    note = f"contextualized by {chosen}"
    details = []
    for z, construction in constructions:
        if _disjoint_domains(r, v, contextualized, z, alphabet):
            details.append(SubCheck("InterOverlap", pair, v, z, True, note="disjoint domains"))
            continue
        details.append(_run_check("InterOverlap", pair, v, z, construction, note))
    return _result("InterOverlap", details)


def _domains_of(p, v):
    """Все замкнутые выражения v по дизъюнктам формул из Prov(v)"""
    found = []
    for formula_name, leaf_var in prov_occurrences(p, v):
        regex = project_regex(p.formulas[formula_name].regex, {leaf_var})
        try:
            disjuncts = disjunctive_form(regex, leaf_var)
        except VariableError:
            disjuncts = [regex]
        for disjunct in disjuncts:
            if leaf_var in disjunct.variables:
                found.append((formula_name, enclosed_regex(disjunct, leaf_var)))
    return found


def check_domain_consistency(p):
    details = []
    for v in sorted(updatable_variables(p)):
        domains = _domains_of(p, v)
        unique = []
        for name, domain in domains:
            if all(domain != seen for _, seen in unique):
                unique.append((name, domain))
        consistent = True
        for (name1, d1), (name2, d2) in itertools.combinations(unique, 2):
            a1, a2 = _compiled(d1, p.alphabet), _compiled(d2, p.alphabet)
            for left, right, a, b in ((name1, name2, a1, a2), (name2, name1, a2, a1)):
                word = language_difference(a, b)
                if word is not None:
                    consistent = False
                    details.append(SubCheck(
                        "DomainEquality", f"{left}/{right}", v, None, False,
                        Witness(_doc(word), ()),
                        note=f"{word!r} is in the domain of {v} in {left} but not in {right}",
                    ))
                    break
        if consistent:
            details.append(SubCheck("DomainEquality", ", ".join(sorted({n for n, _ in domains})), v))
    return _result(DOMAIN_CONSISTENT, details)


def _doc(text):
    return Document("witness", text)


def check_conflict_free(p):
    alphabet = p.alphabet
    formulas = p.formulas
    details = []
    for v in sorted(updatable_variables(p)):
        for formula_name, leaf_var in prov_occurrences(p, v):
            formula = formulas[formula_name]
            for check in (check_case1, check_case2, check_case3, check_case4):
                details.extend(check(formula, leaf_var, alphabet).details)
            for other_name, other in formulas.items():
                if other_name != formula_name:
                    details.extend(check_inter_overlap(formula, other, leaf_var, alphabet).details)
    failed = [d for d in details if not d.passed]
    logger.info("conflict checks: %d run, %d failed", len(details), len(failed))
    return _result(CONFLICT_FREE, details)


def restricted_characters(p):
    restricted = set()
    for formula in p.formulas.values():
        for _, chars in uncovered_unigrams(formula.regex, p.alphabet):
            restricted |= set(p.alphabet.chars) - set(chars)
    return frozenset(restricted)


def check_respects_characters(p, u):
    """Символы, которые могут изменить обновления, не должны быть ограничены униграммами"""
    restricted = restricted_characters(p)
    touched = set()
    for v in u.variables:
        touched |= set(char_set(u.domain(v), p.alphabet))
    clash = sorted(restricted & touched)
    extra = {"restricted": "".join(sorted(restricted)), "intersection": "".join(clash)}
    if clash:
        detail = SubCheck("RespectsCharacters", p.name, ", ".join(sorted(u.variables)), None, False,
                          note=f"update domains use restricted characters {clash!r}")
        return _result(RESPECTS_CHARACTERS, [detail], extra=extra)
    return _result(RESPECTS_CHARACTERS, [], extra=extra)


def check_non_expanding(p):
    details = []
    for join in p.joins:
        left, right = p.schema(join.left), p.schema(join.right)
        key = set(left) & set(right)
        label = join.describe()
        if not key:
            details.append(SubCheck("OneToOneJoin", label, "-", None, False, note="join without shared variables"))
            continue
        for operand in (join.left, join.right):
            schema = set(p.schema(operand))
            closure = fd_closure(key, operand_fds(p, operand))
            missing = sorted(schema - closure)
            if missing:
                details.append(SubCheck(
                    "OneToOneJoin", label, ",".join(sorted(key)), operand.describe(), False,
                    note=f"{sorted(missing)} not functionally determined by {sorted(key)}",
                ))
            else:
                details.append(SubCheck("OneToOneJoin", label, ",".join(sorted(key)), operand.describe()))
    return _result(NON_EXPANDING, details)


def check_restricted_selection(p):
    update_vars = updatable_variables(p)
    details = []
    for selection in p.selections:
        used = sorted({selection.x, selection.y} & update_vars)
        details.append(SubCheck(
            "RestrictedSelection", selection.describe(), f"{selection.x},{selection.y}", None, not used,
            note=f"selection compares update variables {used}" if used else None,
        ))
    return _result(RESTRICTED_SELECTION, details)


def verify_stability(p, u=None):
    """Пять достаточных условий стабильности; ограничение символов проверяется после конфликтов"""
    if u is None:
        u = UpdateModel.from_program(p)
    conditions = {
        DOMAIN_CONSISTENT: check_domain_consistency(p),
        CONFLICT_FREE: check_conflict_free(p),
    }
    if conditions[CONFLICT_FREE].passed:
        conditions[RESPECTS_CHARACTERS] = check_respects_characters(p, u)
    else:
        conditions[RESPECTS_CHARACTERS] = ConditionResult(
            RESPECTS_CHARACTERS, Status.SKIPPED, message="requires a conflict-free program"
        )
    conditions[NON_EXPANDING] = check_non_expanding(p)
    conditions[RESTRICTED_SELECTION] = check_restricted_selection(p)
    report = VerificationReport(p.name, tuple(sorted(updatable_variables(p))), conditions)
    for name in CONDITIONS:
        logger.info("%s %s: %s", p.name, name, conditions[name].status.value)
    return report
