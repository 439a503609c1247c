import logging
from dataclasses import dataclass, field

from core.alphabet import DEFAULT_ALPHABET
from core.automata import Document, compile_regex, match_all
from core.errors import ProgramError
from core.regex_cv import Exposure, classify_variables

logger = logging.getLogger(__name__)


# Узлы дерева программы. Имя узла (если задано через let) служит областью
# действия для объявленных функциональных зависимостей.

@dataclass(frozen=True, eq=False)
class ProgramNode:
    def children(self):
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()


@dataclass(frozen=True, eq=False)
class Formula(ProgramNode):
    name: str
    regex: object
    line: int = None

    def describe(self):
        return self.name


@dataclass(frozen=True, eq=False)
class UnionNode(ProgramNode):
    left: ProgramNode
    right: ProgramNode
    name: str = None

    def children(self):
        return (self.left, self.right)

    def describe(self):
        return self.name or f"({self.left.describe()} ∪ {self.right.describe()})"


@dataclass(frozen=True, eq=False)
class JoinNode(ProgramNode):
    left: ProgramNode
    right: ProgramNode
    name: str = None

    def children(self):
        return (self.left, self.right)

    def describe(self):
        return self.name or f"({self.left.describe()} ⋈ {self.right.describe()})"


@dataclass(frozen=True, eq=False)
class ProjectionNode(ProgramNode):
    keep: tuple
    child: ProgramNode
    name: str = None

    def children(self):
        return (self.child,)

    def describe(self):
        return self.name or f"π{{{', '.join(self.keep)}}}({self.child.describe()})"


@dataclass(frozen=True, eq=False)
class SelectionNode(ProgramNode):
    x: str
    y: str
    child: ProgramNode
    name: str = None

    def children(self):
        return (self.child,)

    def describe(self):
        return self.name or f"ζ{{{self.x}, {self.y}}}({self.child.describe()})"


@dataclass(frozen=True, eq=False)
class RenameNode(ProgramNode):
    mapping: tuple
    child: ProgramNode
    name: str = None

    def children(self):
        return (self.child,)

    @property
    def mapping_dict(self):
        return dict(self.mapping)

    def describe(self):
        pairs = ", ".join(f"{a}->{b}" for a, b in self.mapping)
        return self.name or f"ρ{{{pairs}}}({self.child.describe()})"


def node_name(node):
    return getattr(node, "name", None)


@dataclass(frozen=True)
class FunctionalDependency:
    determinant: frozenset
    dependents: frozenset
    scope: str
    line: int = None

    def __str__(self):
        return f"{self.scope}: {{{', '.join(sorted(self.determinant))}}} -> {{{', '.join(sorted(self.dependents))}}}"


@dataclass(frozen=True)
class ProvenanceSet:
    variable: str
    formulas: frozenset


@dataclass
class SpannerProgram:
    """Программа спаннер-алгебры: дерево операторов над формулами"""
    output: ProgramNode
    name: str = "program"
    declared_update_vars: frozenset = None
    fds: tuple = ()
    alphabet: object = DEFAULT_ALPHABET
    source_path: str = None
    _schemas: dict = field(default_factory=dict, init=False, repr=False)
    _automata: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.validate()

    def nodes(self):
        """Узлы без повторов, общие поддеревья учитываются один раз"""
        seen = set()
        for node in self.output.walk():
            if id(node) not in seen:
                seen.add(id(node))
                yield node

    @property
    def formulas(self):
        found = {}
        for node in self.nodes():
            if isinstance(node, Formula):
                found.setdefault(node.name, node)
        return found

    @property
    def joins(self):
        return [node for node in self.nodes() if isinstance(node, JoinNode)]

    @property
    def selections(self):
        return [node for node in self.nodes() if isinstance(node, SelectionNode)]

    def automaton(self, formula):
        if formula.name not in self._automata:
            self._automata[formula.name] = compile_regex(formula.regex, self.alphabet)
        return self._automata[formula.name]

    def schema(self, node=None):
        node = self.output if node is None else node
        if id(node) not in self._schemas:
            self._schemas[id(node)] = self._infer_schema(node)
        return self._schemas[id(node)]

    def _infer_schema(self, node):
        if isinstance(node, Formula):
            return formula_columns(node.regex)
        if isinstance(node, UnionNode):
            left, right = self.schema(node.left), self.schema(node.right)
            if set(left) != set(right):
                raise ProgramError(
                    "schema-mismatch",
                    f"union of {node.left.describe()} {list(left)} and {node.right.describe()} {list(right)}",
                )
            return left
        if isinstance(node, JoinNode):
            left, right = self.schema(node.left), self.schema(node.right)
            return left + tuple(v for v in right if v not in left)
        if isinstance(node, ProjectionNode):
            child = self.schema(node.child)
            missing = [v for v in node.keep if v not in child]
            if missing:
                raise ProgramError(
                    "schema-mismatch", f"projection on {missing} absent from {node.child.describe()}"
                )
            return tuple(node.keep)
        if isinstance(node, SelectionNode):
            child = self.schema(node.child)
            for v in (node.x, node.y):
                if v not in child:
                    raise ProgramError(
                        "schema-mismatch", f"selection variable {v} absent from {node.child.describe()}"
                    )
            return child
        if isinstance(node, RenameNode):
            child = self.schema(node.child)
            mapping = node.mapping_dict
            missing = [v for v in mapping if v not in child]
            if missing:
                raise ProgramError("schema-mismatch", f"rename of {missing} absent from {node.child.describe()}")
            renamed = tuple(mapping.get(v, v) for v in child)
            if len(set(renamed)) != len(renamed):
                raise ProgramError("schema-mismatch", f"rename {mapping} collides in {node.child.describe()}")
            return renamed
        raise TypeError(f"unknown program node {node!r}")

    def validate(self):
        for formula in self.formulas.values():
            info = classify_variables(formula.regex)
            if not any(i.exposure is Exposure.EXPOSED for i in info.values()):
                raise ProgramError(
                    "no-exposed-variable", f"formula {formula.name} has no exposed variable", formula.line
                )
            if not self.automaton(formula).functional:
                raise ProgramError(
                    "non-functional-formula", f"formula {formula.name} is not functional", formula.line
                )
        schema = self.schema()
        scoped = {node_name(node): node for node in self.nodes() if node_name(node)}
        for fd in self.fds:
            if fd.scope not in scoped:
                raise ProgramError("unknown-formula", f"functional dependency on unknown node {fd.scope}", fd.line)
            node_schema = self.schema(scoped[fd.scope])
            unknown = (fd.determinant | fd.dependents) - set(node_schema)
            if unknown:
                raise ProgramError(
                    "unknown-variable", f"{sorted(unknown)} not in the schema of {fd.scope}", fd.line
                )
        if self.declared_update_vars is not None:
            unknown = self.declared_update_vars - set(schema)
            if unknown:
                raise ProgramError("unknown-variable", f"update variables {sorted(unknown)} not in the output")
        logger.debug("program %s validated, output schema %s", self.name, schema)


def formula_columns(regex):
    """Переменные формулы в порядке первого появления"""
    order = []
    for _, node in regex.walk():
        name = getattr(node, "name", None)
        if name is not None and name not in order:
            order.append(name)
    return tuple(order)


def _provenance(node, variable):
    if isinstance(node, Formula):
        return {(node.name, variable)} if variable in node.regex.variables else set()
    if isinstance(node, (UnionNode, JoinNode)):
        return _provenance(node.left, variable) | _provenance(node.right, variable)
    if isinstance(node, ProjectionNode):
        return _provenance(node.child, variable) if variable in node.keep else set()
    if isinstance(node, SelectionNode):
        return _provenance(node.child, variable)
    if isinstance(node, RenameNode):
        inverse = {b: a for a, b in node.mapping}
        if variable in inverse:
            return _provenance(node.child, inverse[variable])
        if variable in node.mapping_dict:
            return set()
        return _provenance(node.child, variable)
    raise TypeError(f"unknown program node {node!r}")


def prov_occurrences(p, v):
    """Пары (формула, имя переменной в формуле), откуда приходит v"""
    if v not in p.schema():
        raise ProgramError("unknown-variable", f"{v} is not in the output schema of {p.name}")
    return sorted(_provenance(p.output, v))


def prov(p, v):
    return ProvenanceSet(v, frozenset(name for name, _ in prov_occurrences(p, v)))


def updatable_variables(p):
    if p.declared_update_vars is not None:
        return frozenset(p.declared_update_vars)
    return frozenset(v for v in p.schema() if _provenance(p.output, v))


def evaluate(p, d):
    """Снизу вверх: match_all в листьях, реляционные операции в узлах"""
    text = d.text if isinstance(d, Document) else d
    memo = {}

    def visit(node):
        if id(node) in memo:
            return memo[id(node)]
        if isinstance(node, Formula):
            result = match_all(p.automaton(node), text).reorder(p.schema(node))
        elif isinstance(node, UnionNode):
            result = visit(node.left).union(visit(node.right))
        elif isinstance(node, JoinNode):
            result = visit(node.left).join(visit(node.right))
        elif isinstance(node, ProjectionNode):
            result = visit(node.child).project(node.keep)
        elif isinstance(node, SelectionNode):
            result = visit(node.child).select_equal(node.x, node.y, text)
        elif isinstance(node, RenameNode):
            result = visit(node.child).rename(node.mapping_dict)
        else:
            raise TypeError(f"unknown program node {node!r}")
        memo[id(node)] = result
        return result

    return visit(p.output).reorder(p.schema())


def fd_closure(attributes, fds):
    closure = set(attributes)
    changed = True
    while changed:
        changed = False
        for fd in fds:
            if fd.determinant <= closure and not fd.dependents <= closure:
                closure |= fd.dependents
                changed = True
    return closure


def operand_fds(p, operand):
    """Зависимости, объявленные на именованных узлах внутри операнда"""
    names = {node_name(node) for node in operand.walk() if node_name(node)}
    schema = set(p.schema(operand))
    return [fd for fd in p.fds if fd.scope in names and (fd.determinant | fd.dependents) <= schema]


def build_program(source, name="program", alphabet=None, source_path=None):
    from utils.program_dsl import parse_program

    return parse_program(source, name=name, alphabet=alphabet, source_path=source_path)
