"""Minimal S-expression reader for SMT-LIB2 scripts and solver responses."""
from __future__ import annotations


class SexprError(Exception):
    pass


def tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield ch
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SexprError("unterminated string literal")
            yield text[i:j + 1]
            i = j + 1
            continue
        if ch == "|":
            j = i + 1
            while j < n and text[j] != "|":
                j += 1
            yield text[i + 1:j]
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in '();"':
            j += 1
        yield text[i:j]
        i = j


def parse_all(text: str) -> list:
    """Parse every top-level form; atoms are strings, lists are lists."""
    stack: list[list] = []
    out: list = []
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(tok)
    if stack:
        raise SexprError("unbalanced '('")
    return out


def balanced(text: str) -> bool:
    """True when the text holds at least one complete top-level form."""
    depth = 0
    seen = False
    for tok in tokenize(text):
        if tok == "(":
            depth += 1
            seen = True
        elif tok == ")":
            depth -= 1
            if depth < 0:
                return True  # malformed; let the parser report it
        else:
            seen = seen or depth == 0
        if depth == 0 and seen:
            return True
    return depth == 0 and seen


def atom_to_float(node) -> float:
    """Evaluate a numeric model term: decimals, rationals, negation, sums."""
    if isinstance(node, str):
        return float(node)
    if not node:
        raise SexprError("empty numeric term")
    head = node[0]
    if head == "-" and len(node) == 2:
        return -atom_to_float(node[1])
    if head == "-":
        return atom_to_float(node[1]) - sum(atom_to_float(x) for x in node[2:])
    if head == "/":
        return atom_to_float(node[1]) / atom_to_float(node[2])
    if head == "+":
        return sum(atom_to_float(x) for x in node[1:])
    if head == "*":
        out = 1.0
        for x in node[1:]:
            out *= atom_to_float(x)
        return out
    raise SexprError(f"cannot evaluate numeric term {node!r}")
