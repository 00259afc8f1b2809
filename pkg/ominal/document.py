# document.py - Declaration documents
"""
Named declarations read from S-expression text.

Contains:
- Document: formulas, families, topologies, types, curves and batteries in one namespace
- parse_document: text -> resolved Document (position-annotated errors)
- read_formula_arg / read_type_arg: names or inline expressions given on the command line

Grammar (one declaration per top-level list):
    (formula NAME FORMULA)
    (family NAME (index u...) (object v...) (member FORMULA) [(domain FORMULA)])
    (topology NAME (carrier FORMULA) (basis FAMILY))
    (topology NAME (euclidean (v...) FORMULA))
    (topology NAME a-topology)
    (type NAME TYPE)
    (curve NAME (param t) (object v...) (graph FORMULA) | (map TERM...) [(interval LO HI)] [(index u...)] [(domain FORMULA)])
    (battery NAME ITEM...)
    (battery NAME (dd-closed FAMILY...) (types TYPE...) (closed (FAMILY m n)...) (curves CURVE...))

    TYPE     := plus-inf | minus-inf | NAME | (realized c...) | (cut+ c) | (cut- c)
              | (graph FUNC TYPE) | (above FUNC TYPE) | (below FUNC TYPE)
              | (limit-below FAMREF FORMULA TYPE)
    FUNC     := +inf | -inf | c | TERM | (const c) | (affine TERM [FORMULA]) | (function (v...) w FORMULA)
    FAMREF   := FAMILY | (sup (index u...) (object v... w) (member FORMULA) [(domain FORMULA)])
              | (fn (index u...) (args v...) (result w) (graph FORMULA) [(domain FORMULA)])
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ominal.cells import MINUS_INF, PLUS_INF, AffineFunc
from ominal.exceptions import OminalError, ParseError, ResolutionError
from ominal.families import DefinableFamily
from ominal.logic import TRUE, Mode, Term, as_mode, check_mode
from ominal.sexpr import (
    SList,
    fail,
    read_formula,
    read_name,
    read_names,
    read_one,
    read_rational,
    read_sexprs,
    read_term,
    where,
)
from ominal.topology import DefinableCurve, DefinableTopology, ProbeBattery, a_topology, euclidean_topology
from ominal.types import (
    Above,
    Below,
    CutMinus,
    CutPlus,
    FunctionFamily,
    Graph,
    GraphFunction,
    LimitBelow,
    MinusInf,
    PlusInf,
    Realized,
    SupremumFamily,
)

logger = logging.getLogger(__name__)

KINDS = ("formula", "family", "topology", "type", "curve", "battery")
PROBE_SECTIONS = ("dd-closed", "types", "closed", "curves")


@dataclass
class Document:
    """Declarations by kind; names are unique across kinds."""

    mode: Mode = Mode.ODAG
    formulas: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    topologies: dict = field(default_factory=dict)
    types: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    batteries: dict = field(default_factory=dict)

    def _table(self, kind: str) -> dict:
        return {
            "formula": self.formulas,
            "family": self.families,
            "topology": self.topologies,
            "type": self.types,
            "curve": self.curves,
            "battery": self.batteries,
        }[kind]

    def kind_of(self, name: str) -> str | None:
        for kind in KINDS:
            if name in self._table(kind):
                return kind
        return None

    def add(self, kind: str, name: str, value):
        if self.kind_of(name) is not None:
            raise ResolutionError(f"duplicate name {name!r}")
        self._table(kind)[name] = value

    def get(self, name: str, kind: str | None = None):
        """Declared object by name; kind restricts the lookup."""
        found = self.kind_of(name)
        if found is None:
            raise ResolutionError(f"unknown identifier {name!r}")
        if kind is not None and found != kind:
            raise ResolutionError(f"{name!r} is a {found}, expected a {kind}")
        return self._table(found)[name]

    def names(self) -> list[str]:
        return [name for kind in KINDS for name in self._table(kind)]


# ===================== READERS =====================


def _clauses(node, allowed, required=()) -> dict:
    """(head rest...) sub-lists of a declaration body, keyed by head."""
    out = {}
    for item in node:
        if not isinstance(item, SList) or not item or isinstance(item[0], SList):
            fail(item, f"expected one of ({' '.join(allowed)} ...)")
        head = str(item[0])
        if head not in allowed:
            fail(item, f"unknown clause {head!r}, expected one of {', '.join(allowed)}")
        if head in out:
            fail(item, f"repeated clause {head!r}")
        out[head] = item
    for head in required:
        if head not in out:
            fail(node, f"missing clause ({head} ...)")
    return out


def _one(clause):
    if len(clause) != 2:
        fail(clause, f"'{clause[0]}' takes exactly one argument")
    return clause[1]


def _names(clause) -> tuple[str, ...]:
    return tuple(read_name(n) for n in clause[1:])


class _Reader:
    """Reads declarations into a Document, resolving names against earlier ones."""

    def __init__(self, doc: Document):
        self.doc = doc

    def formula(self, node):
        f = read_formula(node, self._resolve_formula)
        try:
            return check_mode(f, self.doc.mode)
        except OminalError as exc:
            fail(node, str(exc))

    def _resolve_formula(self, name):
        return self.doc.get(name, "formula")

    def _lookup(self, node, kind):
        try:
            return self.doc.get(read_name(node), kind)
        except ResolutionError as exc:
            fail(node, str(exc))

    def _build(self, node, build):
        try:
            return build()
        except ParseError:
            raise
        except OminalError as exc:
            fail(node, str(exc))

    # ----- families -----

    def family(self, node, name=""):
        clauses = _clauses(node, ("index", "object", "member", "domain"), ("object", "member"))
        index = _names(clauses["index"]) if "index" in clauses else ()
        objects = _names(clauses["object"])
        member = self.formula(_one(clauses["member"]))
        domain = self.formula(_one(clauses["domain"])) if "domain" in clauses else TRUE
        return self._build(node, lambda: DefinableFamily(member, index, objects, domain, name=name, mode=self.doc.mode))

    def family_ref(self, node):
        if isinstance(node, SList):
            fail(node, "expected a family name")
        return self._lookup(node, "family")

    # ----- types -----

    def function(self, node):
        if not isinstance(node, SList):
            text = str(node)
            if text == "+inf":
                return PLUS_INF
            if text == "-inf":
                return MINUS_INF
            return AffineFunc(read_term(node))
        head, args = str(node[0]), node[1:]
        if head == "const":
            if len(args) not in (1, 2):
                fail(node, "'const' takes a rational and an optional domain")
            domain = self.formula(args[1]) if len(args) == 2 else TRUE
            return AffineFunc(Term.constant(read_rational(args[0])), domain)
        if head == "affine":
            if len(args) not in (1, 2):
                fail(node, "'affine' takes a term and an optional domain")
            domain = self.formula(args[1]) if len(args) == 2 else TRUE
            return AffineFunc(read_term(args[0]), domain)
        if head == "function":
            if len(args) != 3:
                fail(node, "'function' takes (args) result graph")
            return GraphFunction(self.formula(args[2]), read_names(args[0]), read_name(args[1]))
        return AffineFunc(read_term(node))

    def function_family(self, node):
        if not isinstance(node, SList):
            F = self.family_ref(node)
            return SupremumFamily(F.member, F.index_vars, F.object_vars[:-1], F.object_vars[-1], F.domain)
        head = str(node[0])
        if head == "sup":
            clauses = _clauses(node[1:], ("index", "object", "member", "domain"), ("object", "member"))
            objects = _names(clauses["object"])
            if not objects:
                fail(node, "'sup' needs at least the value variable")
            index = _names(clauses["index"]) if "index" in clauses else ()
            domain = self.formula(_one(clauses["domain"])) if "domain" in clauses else TRUE
            return SupremumFamily(self.formula(_one(clauses["member"])), index, objects[:-1], objects[-1], domain)
        if head == "fn":
            clauses = _clauses(node[1:], ("index", "args", "result", "graph", "domain"), ("result", "graph"))
            index = _names(clauses["index"]) if "index" in clauses else ()
            args = _names(clauses["args"]) if "args" in clauses else ()
            domain = self.formula(_one(clauses["domain"])) if "domain" in clauses else TRUE
            graph = self.formula(_one(clauses["graph"]))
            return FunctionFamily(graph, index, args, read_name(_one(clauses["result"])), domain)
        fail(node, f"expected a family name, (sup ...) or (fn ...), got {head!r}")

    def type(self, node):
        if not isinstance(node, SList):
            text = str(node)
            if text == "plus-inf":
                return PlusInf()
            if text == "minus-inf":
                return MinusInf()
            return self._lookup(node, "type")
        if not node:
            fail(node, "empty type")
        head, args = str(node[0]), node[1:]
        if head == "realized":
            if not args:
                fail(node, "'realized' needs at least one coordinate")
            return Realized(tuple(read_rational(a) for a in args))
        if head in ("cut+", "cut-"):
            if len(args) != 1:
                fail(node, f"'{head}' takes one rational")
            c = read_rational(args[0])
            return CutPlus(c) if head == "cut+" else CutMinus(c)
        if head in ("graph", "above", "below"):
            if len(args) != 2:
                fail(node, f"'{head}' takes a function and a base type")
            f, base = self.function(args[0]), self.type(args[1])
            constructor = {"graph": Graph, "above": Above, "below": Below}[head]
            return self._build(node, lambda: constructor(f, base))
        if head == "limit-below":
            if len(args) != 3:
                fail(node, "'limit-below' takes a family, a subindex formula and a base type")
            family = self.function_family(args[0])
            return self._build(node, lambda: LimitBelow(family, self.formula(args[1]), self.type(args[2])))
        fail(node, f"unknown type constructor {head!r}")

    # ----- spaces and curves -----

    def topology(self, node, name):
        if len(node) == 1 and not isinstance(node[0], SList):
            if str(node[0]) != "a-topology":
                fail(node[0], f"unknown topology {str(node[0])!r}")
            space, _ = a_topology(self.doc.mode)
            return space
        if len(node) == 1 and isinstance(node[0], SList) and node[0] and str(node[0][0]) == "euclidean":
            euclid = node[0]
            if len(euclid) != 3:
                fail(euclid, "'euclidean' takes (variables) and a carrier formula")
            variables = read_names(euclid[1])
            carrier = self.formula(euclid[2])
            return self._build(euclid, lambda: euclidean_topology(carrier, variables, self.doc.mode))
        clauses = _clauses(node, ("carrier", "basis"), ("carrier", "basis"))
        basis = self.family_ref(_one(clauses["basis"]))
        carrier = self.formula(_one(clauses["carrier"]))
        return self._build(node, lambda: DefinableTopology(carrier, basis, name=name))

    def _bound(self, node):
        if not isinstance(node, SList) and str(node) in ("-inf", "+inf"):
            return MINUS_INF if str(node) == "-inf" else PLUS_INF
        return read_term(node)

    def curve(self, node, name):
        clauses = _clauses(node, ("param", "object", "graph", "map", "interval", "index", "domain"), ("param", "object"))
        t = read_name(_one(clauses["param"]))
        xs = _names(clauses["object"])
        index = _names(clauses["index"]) if "index" in clauses else ()
        domain = self.formula(_one(clauses["domain"])) if "domain" in clauses else TRUE
        lower, upper = MINUS_INF, PLUS_INF
        if "interval" in clauses:
            interval = clauses["interval"]
            if len(interval) != 3:
                fail(interval, "'interval' takes a lower and an upper bound")
            lower, upper = self._bound(interval[1]), self._bound(interval[2])
        common = dict(index_vars=index, domain=domain, name=name, mode=self.doc.mode)
        if ("graph" in clauses) == ("map" in clauses):
            fail(node, "a curve takes exactly one of (graph ...) or (map ...)")
        if "map" in clauses:
            terms = [read_term(a) for a in clauses["map"][1:]]
            if len(terms) != len(xs):
                fail(clauses["map"], f"{len(terms)} components for {len(xs)} object variables")
            return self._build(node, lambda: DefinableCurve.from_terms(t, terms, xs, lower, upper, **common))
        graph = self.formula(_one(clauses["graph"]))
        return self._build(node, lambda: DefinableCurve(graph, t, xs, lower, upper, **common))

    # ----- batteries -----

    def battery(self, node):
        if node and all(isinstance(i, SList) and i and str(i[0]) in PROBE_SECTIONS for i in node):
            return self._probe_battery(node)
        items = []
        for item in node:
            if isinstance(item, SList):
                items.append(self.formula(item))
                continue
            try:
                items.append(self.doc.get(read_name(item)))
            except ResolutionError as exc:
                fail(item, str(exc))
        return items

    def _probe_battery(self, node):
        clauses = _clauses(node, PROBE_SECTIONS)
        battery = ProbeBattery()
        for item in clauses.get("dd-closed", [None])[1:]:
            battery.dd_closed.append(self.family_ref(item))
        for item in clauses.get("types", [None])[1:]:
            battery.types.append(self.type(item))
        for item in clauses.get("closed", [None])[1:]:
            if not isinstance(item, SList) or len(item) != 3:
                fail(item, "closed entries are (FAMILY m n)")
            m, n = read_rational(item[1]), read_rational(item[2])
            if m.denominator != 1 or n.denominator != 1:
                fail(item, "m and n must be integers")
            battery.closed_families.append((self.family_ref(item[0]), int(m), int(n)))
        for item in clauses.get("curves", [None])[1:]:
            battery.curves.append(self._lookup(item, "curve"))
        return battery

    # ----- declarations -----

    def declaration(self, node):
        if not isinstance(node, SList) or len(node) < 2:
            fail(node, "expected a declaration (KIND NAME ...)")
        kind = str(node[0])
        if kind not in KINDS:
            fail(node, f"unknown declaration {kind!r}, expected one of {', '.join(KINDS)}")
        name = read_name(node[1])
        body = node[2:]
        if kind == "formula":
            if len(body) != 1:
                fail(node, "'formula' takes a name and one formula")
            value = self.formula(body[0])
        elif kind == "family":
            value = self.family(body, name)
        elif kind == "topology":
            value = self.topology(body, name)
        elif kind == "type":
            if len(body) != 1:
                fail(node, "'type' takes a name and one type expression")
            value = self.type(body[0])
        elif kind == "curve":
            value = self.curve(body, name)
        else:
            value = self.battery(body)
        try:
            self.doc.add(kind, name, value)
        except ResolutionError as exc:
            fail(node[1], str(exc))
        logger.debug("declared %s %s at line %d", kind, name, where(node)[0])


def parse_document(text: str, mode=Mode.ODAG) -> Document:
    """
    Parse and resolve a declaration document.

    Raises:
        ParseError: syntax errors, unknown identifiers, duplicate names, and
            schema, arity or mode errors of a declaration, with its position
    """
    doc = Document(mode=as_mode(mode))
    reader = _Reader(doc)
    for node in read_sexprs(text):
        reader.declaration(node)
    return doc


# ===================== COMMAND-LINE ARGUMENTS =====================


def read_formula_arg(doc: Document, text: str):
    """A declared formula name or an inline formula over the document's names."""
    return _Reader(doc).formula(read_one(text))


def read_type_arg(doc: Document, text: str):
    """A declared type name or an inline type expression."""
    return _Reader(doc).type(read_one(text))
