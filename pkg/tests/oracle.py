import itertools

from core.automata import Span
from core.regex_cv import (
    AnyChar,
    Capture,
    Char,
    CharRange,
    Concat,
    Disjunction,
    EmptySet,
    Epsilon,
    Star,
    Subtract,
)

# Независимый перебор с возвратом по дереву выражения, без автоматов


def _char_ok(node, ch, chars):
    if isinstance(node, Char):
        return ch == node.char
    if isinstance(node, CharRange):
        return node.low <= ch <= node.high
    if isinstance(node, AnyChar):
        return ch in chars
    if isinstance(node, Subtract):
        return ch != node.char and _char_ok(node.base, ch, chars)
    raise TypeError(node)


def _match(node, text, i, env, chars):
    if isinstance(node, EmptySet):
        return
    if isinstance(node, Epsilon):
        yield i, env
    elif isinstance(node, (Char, CharRange, AnyChar, Subtract)):
        if i < len(text) and _char_ok(node, text[i], chars):
            yield i + 1, env
    elif isinstance(node, Disjunction):
        yield from _match(node.left, text, i, env, chars)
        yield from _match(node.right, text, i, env, chars)
    elif isinstance(node, Concat):
        for j, inner in _match(node.left, text, i, env, chars):
            yield from _match(node.right, text, j, inner, chars)
    elif isinstance(node, Star):
        yield i, env
        for j, inner in _match(node.body, text, i, env, chars):
            if j > i:
                yield from _match(node, text, j, inner, chars)
    elif isinstance(node, Capture):
        for j, inner in _match(node.body, text, i, env, chars):
            if node.name not in inner:
                yield j, {**inner, node.name: Span(i + 1, j + 1)}
    else:
        raise TypeError(node)


def oracle_match_all(r, text, alphabet):
    """Строки в порядке отсортированных имён переменных"""
    names = sorted(r.variables)
    rows = set()
    for end, env in _match(r, text, 0, {}, frozenset(alphabet.chars)):
        if end == len(text) and set(env) == set(names):
            rows.add(tuple(env[name] for name in names))
    return rows


def documents(chars, max_len):
    for n in range(max_len + 1):
        for letters in itertools.product(chars, repeat=n):
            yield "".join(letters)


def oracle_nonempty(r, alphabet, max_len):
    for text in documents(alphabet.chars, max_len):
        if oracle_match_all(r, text, alphabet):
            return text
    return None


def all_spans(n):
    return [Span(a, b) for a in range(1, n + 2) for b in range(a, n + 2)]
