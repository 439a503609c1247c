from functools import cached_property

# Базовый класс для всех узлов дерева регулярного выражения

# Приоритеты при печати: ∨ < • < * < атом
PREC_DISJUNCTION = 0
PREC_CONCAT = 1
PREC_STAR = 2
PREC_ATOM = 3

IDENT_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


class RegexNode:
    precedence = PREC_ATOM

    def children(self):
        return ()

    def rebuild(self, children):
        """Копия узла с новыми потомками"""
        return self

    def walk(self, path=()):
        """Обход в глубину: пары (путь, узел)"""
        yield path, self
        for i, child in enumerate(self.children()):
            yield from child.walk(path + (i,))

    @cached_property
    def variables(self):
        names = set()
        for child in self.children():
            names |= child.variables
        return frozenset(names)

    def contains_capture(self):
        return bool(self.variables)

    def render(self):
        raise NotImplementedError

    def render_child(self, child, min_precedence):
        text = child.render()
        if child.precedence < min_precedence:
            return f"({text})"
        return text

    def to_source(self):
        return self.render()

    def __str__(self):
        return self.render()
