"""Parser for the STRIPS subset of PDDL.

Supported: ``:strips`` and ``:typing``. Anything else (negative
preconditions, conditional effects, quantifiers, numeric fluents,
equality) is rejected with an error naming the construct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PddlParseError, UnsupportedFeatureError

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing"})

ROOT_TYPE = "object"


class Sym(str):
    """Atom token that remembers its source position."""

    line: int
    col: int

    def __new__(cls, value: str, line: int, col: int) -> "Sym":
        obj = super().__new__(cls, value)
        obj.line = line
        obj.col = col
        return obj


def _tokenize(text: str) -> list[Sym]:
    tokens: list[Sym] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "()":
            tokens.append(Sym(ch, line, col))
            col += 1
            i += 1
            continue
        start = i
        start_col = col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        tokens.append(Sym(text[start:i].lower(), line, start_col))
    return tokens


def _read_tree(tokens: list[Sym], pos: int) -> tuple[object, int]:
    if pos >= len(tokens):
        raise PddlParseError("unexpected end of input")
    tok = tokens[pos]
    if tok == "(":
        items: list[object] = []
        pos += 1
        while True:
            if pos >= len(tokens):
                raise PddlParseError("unbalanced parenthesis", tok.line, tok.col)
            if tokens[pos] == ")":
                return items, pos + 1
            item, pos = _read_tree(tokens, pos)
            items.append(item)
    if tok == ")":
        raise PddlParseError("unexpected ')'", tok.line, tok.col)
    return tok, pos + 1


def parse_sexpr(text: str) -> list[object]:
    """Parse one top-level s-expression ``(define ...)``."""
    tokens = _tokenize(text)
    if not tokens:
        raise PddlParseError("empty input")
    tree, pos = _read_tree(tokens, 0)
    if pos != len(tokens):
        extra = tokens[pos]
        raise PddlParseError("trailing content after top-level form", extra.line, extra.col)
    if not isinstance(tree, list):
        raise PddlParseError("expected a parenthesized form", tree.line, tree.col)
    return tree


def _pos(node: object) -> tuple[int | None, int | None]:
    if isinstance(node, Sym):
        return node.line, node.col
    if isinstance(node, list) and node:
        return _pos(node[0])
    return None, None


def _parse_typed_list(items: list[object], what: str) -> list[tuple[str, str]]:
    """Parse ``a b - t c - t2 d`` into [(a,t),(b,t2-style),...]; untyped -> object."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        tok = items[i]
        if not isinstance(tok, Sym):
            line, col = _pos(tok)
            raise PddlParseError(f"nested form in {what} list", line, col)
        if tok == "-":
            if i + 1 >= len(items) or not isinstance(items[i + 1], Sym):
                raise PddlParseError(f"missing type after '-' in {what} list", tok.line, tok.col)
            typ = str(items[i + 1])
            for name in pending:
                out.append((name, typ))
            pending = []
            i += 2
            continue
        pending.append(str(tok))
        i += 1
    for name in pending:
        out.append((name, ROOT_TYPE))
    return out


@dataclass(frozen=True)
class OperatorSchema:
    """Lifted STRIPS operator: typed parameters, positive preconditions,
    add and delete lists."""

    name: str
    params: tuple[tuple[str, str], ...]
    pre: tuple[tuple[str, ...], ...]
    add: tuple[tuple[str, ...], ...]
    delete: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class DomainDef:
    name: str
    types: dict[str, str] = field(default_factory=dict)  # child -> parent
    predicates: dict[str, tuple[str, ...]] = field(default_factory=dict)
    operators: tuple[OperatorSchema, ...] = ()
    constants: tuple[tuple[str, str], ...] = ()
    requirements: tuple[str, ...] = ()

    def is_subtype(self, typ: str, ancestor: str) -> bool:
        if ancestor == ROOT_TYPE:
            return True
        cur: str | None = typ
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self.types.get(cur)
        return False


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[tuple[str, ...], ...] = ()
    goal: tuple[tuple[str, ...], ...] = ()


def atom_text(literal: tuple[str, ...]) -> str:
    return "(" + " ".join(literal) + ")"


def _check_atom(node: object, what: str) -> tuple[str, ...]:
    if not isinstance(node, list) or not node or not all(isinstance(x, Sym) for x in node):
        line, col = _pos(node)
        raise PddlParseError(f"malformed atom in {what}", line, col)
    return tuple(str(x) for x in node)


_COMPOUND_PRE = {
    "or": "disjunctive preconditions",
    "imply": "implication preconditions",
    "exists": "existential quantifiers",
    "forall": "universal quantifiers",
    "when": "conditional effects",
}


def _flatten_conjunction(node: object) -> list[object]:
    if isinstance(node, list) and node and node[0] == "and":
        return list(node[1:])
    if isinstance(node, list) and not node:
        return []
    return [node]


def _parse_precondition(node: object, name: str) -> list[tuple[str, ...]]:
    atoms: list[tuple[str, ...]] = []
    for part in _flatten_conjunction(node):
        if isinstance(part, list) and part:
            head = part[0]
            if head == "not":
                line, col = _pos(part)
                raise UnsupportedFeatureError(
                    f"negative precondition in action '{name}' (:negative-preconditions)", line, col)
            if head == "=":
                line, col = _pos(part)
                raise UnsupportedFeatureError(f"equality in action '{name}' (:equality)", line, col)
            if head in _COMPOUND_PRE:
                line, col = _pos(part)
                raise UnsupportedFeatureError(
                    f"{_COMPOUND_PRE[str(head)]} in action '{name}'", line, col)
        atoms.append(_check_atom(part, f"precondition of '{name}'"))
    return atoms


def _parse_effect(node: object, name: str) -> tuple[list[tuple[str, ...]], list[tuple[str, ...]]]:
    adds: list[tuple[str, ...]] = []
    dels: list[tuple[str, ...]] = []
    for part in _flatten_conjunction(node):
        if isinstance(part, list) and part:
            head = part[0]
            if head == "not":
                if len(part) != 2:
                    line, col = _pos(part)
                    raise PddlParseError(f"malformed delete effect in '{name}'", line, col)
                dels.append(_check_atom(part[1], f"effect of '{name}'"))
                continue
            if head == "when" or head == "forall":
                line, col = _pos(part)
                raise UnsupportedFeatureError(
                    f"conditional/quantified effect in action '{name}'", line, col)
            if head in ("increase", "decrease", "assign", "scale-up", "scale-down"):
                line, col = _pos(part)
                raise UnsupportedFeatureError(
                    f"numeric fluent effect in action '{name}'", line, col)
        adds.append(_check_atom(part, f"effect of '{name}'"))
    return adds, dels


def _validate_literals(literals: list[tuple[str, ...]], predicates: dict[str, tuple[str, ...]],
                       known_terms: set[str], where: str) -> None:
    for lit in literals:
        pred, args = lit[0], lit[1:]
        if pred not in predicates:
            raise PddlParseError(f"undeclared predicate '{pred}' in {where}")
        if len(args) != len(predicates[pred]):
            raise PddlParseError(
                f"arity mismatch for '{pred}' in {where}: "
                f"expected {len(predicates[pred])}, got {len(args)}")
        for a in args:
            if a not in known_terms:
                raise PddlParseError(f"unknown term '{a}' in {where}")


def parse_domain(text: str) -> DomainDef:
    tree = parse_sexpr(text)
    if not tree or tree[0] != "define":
        raise PddlParseError("domain file must start with (define ...)")
    if len(tree) < 2 or not isinstance(tree[1], list) or len(tree[1]) != 2 or tree[1][0] != "domain":
        raise PddlParseError("missing (domain <name>) declaration")
    name = str(tree[1][1])

    requirements: tuple[str, ...] = ()
    types: dict[str, str] = {}
    predicates: dict[str, tuple[str, ...]] = {}
    constants: list[tuple[str, str]] = []
    operators: list[OperatorSchema] = []

    for section in tree[2:]:
        if not isinstance(section, list) or not section or not isinstance(section[0], Sym):
            line, col = _pos(section)
            raise PddlParseError("malformed domain section", line, col)
        head = str(section[0])
        if head == ":requirements":
            reqs = tuple(str(r) for r in section[1:])
            for r in reqs:
                if r not in SUPPORTED_REQUIREMENTS:
                    line, col = _pos(section)
                    raise UnsupportedFeatureError(f"requirement '{r}' is not supported", line, col)
            requirements = reqs
        elif head == ":types":
            for child, parent in _parse_typed_list(section[1:], "types"):
                types[child] = parent
                types.setdefault(parent, ROOT_TYPE)
            types.pop(ROOT_TYPE, None)
        elif head == ":constants":
            constants.extend(_parse_typed_list(section[1:], "constants"))
        elif head == ":predicates":
            for p in section[1:]:
                if not isinstance(p, list) or not p or not isinstance(p[0], Sym):
                    line, col = _pos(p)
                    raise PddlParseError("malformed predicate declaration", line, col)
                pname = str(p[0])
                if pname in predicates:
                    line, col = _pos(p)
                    raise PddlParseError(f"duplicate predicate '{pname}'", line, col)
                params = _parse_typed_list(p[1:], f"predicate '{pname}'")
                predicates[pname] = tuple(t for _, t in params)
        elif head == ":action":
            operators.append(_parse_action(section, predicates, constants))
        else:
            line, col = _pos(section)
            raise UnsupportedFeatureError(f"domain section '{head}' is not supported", line, col)

    known_types = set(types) | {ROOT_TYPE}
    for child, parent in types.items():
        if parent not in known_types:
            raise PddlParseError(f"type '{child}' has undeclared parent '{parent}'")
    for schema in operators:
        for _, typ in schema.params:
            if typ not in known_types:
                raise PddlParseError(
                    f"parameter of action '{schema.name}' has undeclared type '{typ}'")
    for cname, ctype in constants:
        if ctype not in known_types:
            raise PddlParseError(f"constant '{cname}' has undeclared type '{ctype}'")

    return DomainDef(name=name, types=types, predicates=predicates,
                     operators=tuple(operators), constants=tuple(constants),
                     requirements=requirements)


def _parse_action(section: list[object], predicates: dict[str, tuple[str, ...]],
                  constants: list[tuple[str, str]]) -> OperatorSchema:
    if len(section) < 2 or not isinstance(section[1], Sym):
        line, col = _pos(section)
        raise PddlParseError("action without a name", line, col)
    name = str(section[1])
    params: tuple[tuple[str, str], ...] = ()
    pre: list[tuple[str, ...]] = []
    adds: list[tuple[str, ...]] = []
    dels: list[tuple[str, ...]] = []
    i = 2
    seen: set[str] = set()
    while i < len(section):
        key = section[i]
        if not isinstance(key, Sym) or not str(key).startswith(":"):
            line, col = _pos(key)
            raise PddlParseError(f"expected keyword in action '{name}'", line, col)
        if i + 1 >= len(section):
            raise PddlParseError(f"missing value for '{key}' in action '{name}'", key.line, key.col)
        value = section[i + 1]
        k = str(key)
        if k in seen:
            raise PddlParseError(f"duplicate '{k}' in action '{name}'", key.line, key.col)
        seen.add(k)
        if k == ":parameters":
            if not isinstance(value, list):
                raise PddlParseError(f"malformed parameters of '{name}'", key.line, key.col)
            params = tuple(_parse_typed_list(value, f"parameters of '{name}'"))
            names = [v for v, _ in params]
            if len(names) != len(set(names)):
                raise PddlParseError(f"duplicate parameter name in action '{name}'")
            for v, _ in params:
                if not v.startswith("?"):
                    raise PddlParseError(f"parameter '{v}' of '{name}' must start with '?'")
        elif k == ":precondition":
            pre = _parse_precondition(value, name)
        elif k == ":effect":
            adds, dels = _parse_effect(value, name)
        else:
            raise UnsupportedFeatureError(f"action keyword '{k}' is not supported", key.line, key.col)
        i += 2

    known_terms = {v for v, _ in params} | {c for c, _ in constants}
    _validate_literals(pre, predicates, known_terms, f"precondition of '{name}'")
    _validate_literals(adds, predicates, known_terms, f"effect of '{name}'")
    _validate_literals(dels, predicates, known_terms, f"effect of '{name}'")
    return OperatorSchema(name=name, params=params, pre=tuple(pre),
                          add=tuple(adds), delete=tuple(dels))


def parse_problem(text: str, dom: DomainDef) -> ProblemDef:
    tree = parse_sexpr(text)
    if not tree or tree[0] != "define":
        raise PddlParseError("problem file must start with (define ...)")
    if len(tree) < 2 or not isinstance(tree[1], list) or len(tree[1]) != 2 or tree[1][0] != "problem":
        raise PddlParseError("missing (problem <name>) declaration")
    name = str(tree[1][1])

    domain_name = ""
    objects: list[tuple[str, str]] = []
    init: list[tuple[str, ...]] = []
    goal: list[tuple[str, ...]] = []

    known_types = set(dom.types) | {ROOT_TYPE}

    for section in tree[2:]:
        if not isinstance(section, list) or not section or not isinstance(section[0], Sym):
            line, col = _pos(section)
            raise PddlParseError("malformed problem section", line, col)
        head = str(section[0])
        if head == ":domain":
            domain_name = str(section[1]) if len(section) > 1 else ""
        elif head == ":objects":
            for oname, otype in _parse_typed_list(section[1:], "objects"):
                if otype not in known_types:
                    line, col = _pos(section)
                    raise PddlParseError(f"object '{oname}' has undeclared type '{otype}'", line, col)
                objects.append((oname, otype))
        elif head == ":init":
            for part in section[1:]:
                if isinstance(part, list) and part and part[0] == "not":
                    line, col = _pos(part)
                    raise PddlParseError("negated atom in :init is not allowed", line, col)
                if isinstance(part, list) and part and part[0] == "=":
                    line, col = _pos(part)
                    raise UnsupportedFeatureError("numeric fluent in :init", line, col)
                init.append(_check_atom(part, ":init"))
        elif head == ":goal":
            if len(section) != 2:
                line, col = _pos(section)
                raise PddlParseError("malformed :goal section", line, col)
            for part in _flatten_conjunction(section[1]):
                if isinstance(part, list) and part and part[0] == "not":
                    line, col = _pos(part)
                    raise UnsupportedFeatureError(
                        "negative goal literal (:negative-preconditions)", line, col)
                goal.append(_check_atom(part, ":goal"))
        else:
            line, col = _pos(section)
            raise UnsupportedFeatureError(f"problem section '{head}' is not supported", line, col)

    known_objects = {o for o, _ in objects} | {c for c, _ in dom.constants}
    _validate_literals(init, dom.predicates, known_objects, ":init")
    _validate_literals(goal, dom.predicates, known_objects, ":goal")
    return ProblemDef(name=name, domain_name=domain_name, objects=tuple(objects),
                      init=tuple(init), goal=tuple(goal))
