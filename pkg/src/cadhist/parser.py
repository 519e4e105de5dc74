"""Recursive-descent parser producing typed programs.

Parsing is schema-driven: the expected parameter type decides how a value
position is read (scalar, vector, query, entity list).  Bare numbers take
the canonical unit of their slot's dimension, so ``depth = 10`` means
10 mm and ``angle = 45`` means 45 degrees.  Structural problems that the
grammar cannot express (missing required parameters, degenerate entities,
bad references) are left to ``validate_structure``.
"""

from __future__ import annotations

from decimal import Decimal

from . import schema
from .lexer import Dialect, ParseError, Token, TokenKind, UNIT_SPELLINGS, tokenize
from .model import (
    IMPLICIT_ENTITY_TYPES,
    BoolValue,
    EntityType,
    ExprBinary,
    ExprNeg,
    ExprNode,
    ExprNum,
    Feature,
    OpKind,
    is_canonical_identifier,
    OriginalSet,
    ParamValue,
    Program,
    Query,
    RawExpr,
    Scalar,
    SketchBody,
    SketchEntity,
    TextValue,
    Topology,
    Unit,
    ValueList,
    Vec,
)
from .schema import Dimension, EntityFieldSpec, ParamSpec, ParamType

__all__ = ["parse_program", "ParseError", "Dialect"]

_KIND_BY_NAME = {kind.value: kind for kind in OpKind}
_ENTITY_TYPE_NAMES = {e.value for e in EntityType}


def parse_program(
    text: str,
    dialect: Dialect | str = Dialect.CANONICAL,
    source_name: str = "",
) -> Program:
    """Parse source text into a program, raising ParseError with location."""
    if isinstance(dialect, str):
        dialect = Dialect(dialect)
    tokens = tokenize(text, dialect)
    return _Parser(tokens, dialect).program(source_name)


class _Parser:
    def __init__(self, tokens: list[Token], dialect: Dialect):
        self.tokens = tokens
        self.dialect = dialect
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind is not TokenKind.EOF:
            self.pos += 1
        return tok

    def error(self, message: str, token: Token | None = None) -> ParseError:
        tok = token or self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect_punct(self, lexeme: str) -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.PUNCT or tok.lexeme != lexeme:
            raise self.error(f"expected {lexeme!r}", tok)
        return self.advance()

    def expect_ident(self, what: str = "a name") -> Token:
        tok = self.peek()
        if tok.kind is not TokenKind.IDENT:
            raise self.error(f"expected {what}", tok)
        return self.advance()

    def at_punct(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.PUNCT and tok.lexeme == lexeme

    def at_ident(self, lexeme: str) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.IDENT and tok.lexeme == lexeme

    # -- grammar -----------------------------------------------------------

    def program(self, source_name: str) -> Program:
        features = []
        while self.peek().kind is not TokenKind.EOF:
            features.append(self.statement())
        return Program(tuple(features), source_name)

    def statement(self) -> Feature:
        fid = self.expect_ident("a feature identifier")
        if self.dialect is Dialect.CANONICAL and not is_canonical_identifier(fid.lexeme):
            raise self.error(
                f"identifier {fid.lexeme!r} not allowed in canonical programs", fid
            )
        self.expect_punct("=")
        kind_tok = self.expect_ident("an operation name")
        kind = _KIND_BY_NAME.get(kind_tok.lexeme)
        if kind is None:
            raise self.error(f"unknown operation {kind_tok.lexeme!r}", kind_tok)
        self.expect_punct("(")
        params = self.param_list(kind)
        self.expect_punct(")")
        self.expect_punct(";")
        return Feature(fid.lexeme, kind, params)

    def param_list(self, kind: OpKind) -> dict[str, ParamValue]:
        params: dict[str, ParamValue] = {}
        if self.at_punct(")"):
            return params
        while True:
            name_tok = self.expect_ident("a parameter name")
            name = name_tok.lexeme
            if name in params:
                raise self.error(f"duplicate parameter {name!r}", name_tok)
            self.expect_punct("=")
            spec = schema.spec_for(kind, name)
            params[name] = self.value_for(spec)
            if self.at_punct(","):
                self.advance()
                continue
            return params

    def value_for(self, spec: ParamSpec | None) -> ParamValue:
        if spec is None:
            return self.generic_value()
        t = spec.type
        if t is ParamType.SCALAR:
            return self.scalar_position(schema.default_unit(spec.dimension))
        if t in (ParamType.VEC2, ParamType.VEC3):
            want = 2 if t is ParamType.VEC2 else 3
            return self.vector(want, schema.default_unit(spec.dimension))
        if t is ParamType.BOOL:
            return self.bool_value()
        if t is ParamType.ENUM:
            return self.enum_value()
        if t is ParamType.QUERY:
            return self.query()
        if t is ParamType.QUERY_LIST:
            return self.query_list(schema.default_unit(spec.dimension))
        if t is ParamType.PLANE_REF:
            return self.plane_ref()
        if t is ParamType.SKETCH_BODY:
            return self.sketch_body()
        raise AssertionError(t)

    def generic_value(self) -> ParamValue:
        """Best-effort value for parameters that no schema slot describes."""
        tok = self.peek()
        if tok.kind is TokenKind.STRING:
            self.advance()
            return TextValue(tok.lexeme)
        if tok.kind is TokenKind.IDENT:
            if tok.lexeme == "query":
                return self.query()
            if tok.lexeme in ("true", "false"):
                return self.bool_value()
            self.advance()
            return TextValue(tok.lexeme)
        if self.at_punct("["):
            self.advance()
            items = []
            while not self.at_punct("]"):
                items.append(self.generic_value())
                if self.at_punct(","):
                    self.advance()
            self.advance()
            return ValueList(tuple(items))
        if self.at_punct("(") and self.dialect is Dialect.CANONICAL:
            return self.vector(None, Unit.NONE)
        return self.scalar_position(Unit.NONE)

    # -- scalar positions --------------------------------------------------

    def scalar_position(self, bare_unit: Unit) -> Scalar | RawExpr:
        """A number in canonical form, or an expression in the raw dialect.

        Single literals (optionally signed, optionally unit-suffixed)
        collapse to plain scalars; anything else is kept as an expression
        tree for the folding pass.
        """
        if self.dialect is Dialect.CANONICAL:
            return self.signed_number(bare_unit)
        node = self.expr()
        collapsed = _collapse_literal(node, bare_unit)
        if collapsed is not None:
            return collapsed
        return RawExpr(node)

    def signed_number(self, bare_unit: Unit) -> Scalar:
        negative = False
        tok = self.peek()
        if tok.kind is TokenKind.OP and tok.lexeme == "-":
            self.advance()
            negative = True
        num = self.peek()
        if num.kind is not TokenKind.NUMBER:
            raise self.error("expected a number", num)
        self.advance()
        value = Decimal(num.lexeme)
        if negative:
            value = -value
        return Scalar(value, bare_unit)

    def expr(self) -> ExprNode:
        node = self.term()
        while self.peek().kind is TokenKind.OP and self.peek().lexeme in "+-":
            op = self.advance().lexeme
            node = ExprBinary(op, node, self.term())
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while self.peek().kind is TokenKind.OP and self.peek().lexeme in "*/":
            op = self.advance().lexeme
            node = ExprBinary(op, node, self.factor())
        return node

    def factor(self) -> ExprNode:
        tok = self.peek()
        if tok.kind is TokenKind.OP and tok.lexeme == "-":
            self.advance()
            return ExprNeg(self.factor())
        if tok.kind is TokenKind.NUMBER:
            self.advance()
            unit = Unit.NONE
            nxt = self.peek()
            if nxt.kind is TokenKind.UNIT:
                self.advance()
                unit = UNIT_SPELLINGS[nxt.lexeme]
            return ExprNum(Decimal(tok.lexeme), unit)
        if tok.kind is TokenKind.UNIT:
            # A bare unit word acts as a conversion constant: 0.5 * in.
            self.advance()
            return ExprNum(Decimal(1), UNIT_SPELLINGS[tok.lexeme])
        if self.at_punct("("):
            self.advance()
            node = self.expr()
            self.expect_punct(")")
            # Postfix unit on a grouped expression: (5 + 3) mm.
            nxt = self.peek()
            if nxt.kind is TokenKind.UNIT:
                self.advance()
                node = ExprBinary("*", node, ExprNum(Decimal(1), UNIT_SPELLINGS[nxt.lexeme]))
            return node
        raise self.error("expected a number or expression", tok)

    # -- composite values --------------------------------------------------

    def vector(self, want: int | None, bare_unit: Unit) -> Vec:
        open_tok = self.expect_punct("(")
        components = [self.scalar_position(bare_unit)]
        while self.at_punct(","):
            self.advance()
            components.append(self.scalar_position(bare_unit))
        self.expect_punct(")")
        if want is not None and len(components) != want:
            raise self.error(f"expected a {want}-component vector", open_tok)
        if len(components) not in (2, 3):
            raise self.error("expected a 2- or 3-component vector", open_tok)
        return Vec(tuple(components))

    def bool_value(self) -> BoolValue:
        tok = self.expect_ident("true or false")
        if tok.lexeme not in ("true", "false"):
            raise self.error("expected true or false", tok)
        return BoolValue(tok.lexeme == "true")

    def enum_value(self) -> TextValue:
        tok = self.peek()
        if tok.kind is TokenKind.STRING:
            self.advance()
            return TextValue(tok.lexeme)
        return TextValue(self.expect_ident("a name").lexeme)

    def plane_ref(self) -> TextValue | Query:
        if self.at_ident("query"):
            return self.query()
        tok = self.expect_ident("a plane name or query")
        return TextValue(tok.lexeme)

    def query(self) -> Query:
        kw = self.expect_ident("query")
        if kw.lexeme != "query":
            raise self.error("expected query(...)", kw)
        self.expect_punct("(")
        op_tok = self.expect_ident("an identifier")
        if self.dialect is Dialect.CANONICAL and not is_canonical_identifier(op_tok.lexeme):
            raise self.error(
                f"identifier {op_tok.lexeme!r} not allowed in canonical programs", op_tok
            )
        op_id = op_tok.lexeme
        self.expect_punct(",")
        query_type = self.expect_ident("a query type").lexeme
        self.expect_punct(",")
        etype_tok = self.expect_ident("an entity type")
        if etype_tok.lexeme not in _ENTITY_TYPE_NAMES:
            raise self.error(
                f"expected one of {', '.join(sorted(_ENTITY_TYPE_NAMES))}", etype_tok
            )
        entity_type = EntityType(etype_tok.lexeme)
        disambiguation = []
        while self.at_punct(","):
            self.advance()
            name_tok = self.expect_ident("originals or adjacent")
            self.expect_punct("=")
            queries = self.bracketed_queries()
            if name_tok.lexeme == "originals":
                disambiguation.append(OriginalSet(queries))
            elif name_tok.lexeme == "adjacent":
                disambiguation.append(Topology(queries))
            else:
                raise self.error("expected originals or adjacent", name_tok)
        self.expect_punct(")")
        return Query(op_id, query_type, entity_type, tuple(disambiguation))

    def bracketed_queries(self) -> tuple[Query, ...]:
        self.expect_punct("[")
        queries = []
        while not self.at_punct("]"):
            queries.append(self.query())
            if self.at_punct(","):
                self.advance()
        self.advance()
        return tuple(queries)

    def query_list(self, bare_unit: Unit) -> ValueList:
        self.expect_punct("[")
        items: list[ParamValue] = []
        while not self.at_punct("]"):
            if self.at_punct("("):
                items.append(self.vector(None, bare_unit))
            else:
                items.append(self.query())
            if self.at_punct(","):
                self.advance()
        self.advance()
        return ValueList(tuple(items))

    # -- sketch bodies -----------------------------------------------------

    def sketch_body(self) -> SketchBody:
        self.expect_punct("[")
        entities = []
        while not self.at_punct("]"):
            entities.append(self.sketch_entity())
            if self.at_punct(","):
                self.advance()
        self.advance()
        return SketchBody(tuple(entities))

    def sketch_entity(self) -> SketchEntity:
        eid = self.expect_ident("a sketch entity identifier")
        if self.dialect is Dialect.CANONICAL and not is_canonical_identifier(eid.lexeme):
            raise self.error(
                f"identifier {eid.lexeme!r} not allowed in canonical programs", eid
            )
        self.expect_punct(":")
        kind_tok = self.expect_ident("a sketch entity kind")
        cls = schema.ENTITY_KEYWORDS.get(kind_tok.lexeme)
        if cls is None:
            raise self.error(f"unknown sketch entity {kind_tok.lexeme!r}", kind_tok)
        if self.dialect is Dialect.CANONICAL and cls in IMPLICIT_ENTITY_TYPES:
            raise self.error(
                f"{kind_tok.lexeme} requires explicit points; only raw programs may use it",
                kind_tok,
            )
        specs = {s.name: s for s in schema.ENTITY_SCHEMAS[cls]}
        self.expect_punct("(")
        fields: dict[str, ParamValue] = {}
        if not self.at_punct(")"):
            while True:
                name_tok = self.expect_ident("a field name")
                name = name_tok.lexeme
                if name not in specs:
                    raise self.error(
                        f"unknown field {name!r} for {kind_tok.lexeme}", name_tok
                    )
                if name in fields:
                    raise self.error(f"duplicate field {name!r}", name_tok)
                self.expect_punct("=")
                fields[name] = self.entity_field(specs[name])
                if self.at_punct(","):
                    self.advance()
                    continue
                break
        self.expect_punct(")")
        for spec in specs.values():
            if spec.name in fields:
                continue
            default = schema.ENTITY_FIELD_DEFAULTS.get((cls, spec.name))
            if default is None:
                raise self.error(
                    f"missing field {spec.name!r} for {kind_tok.lexeme}", kind_tok
                )
            fields[spec.name] = default
        return cls(id=eid.lexeme, **fields)

    def entity_field(self, spec: EntityFieldSpec) -> ParamValue:
        unit = schema.default_unit(spec.dimension)
        if spec.type is ParamType.SCALAR:
            return self.scalar_position(unit)
        if spec.type is ParamType.VEC2:
            return self.vector(2, unit)
        if spec.type is ParamType.QUERY_LIST:
            return self.point_list(unit)
        if spec.type is ParamType.ENUM:
            tok = self.peek()
            if tok.kind is TokenKind.STRING:
                self.advance()
                return TextValue(tok.lexeme)
            return TextValue(self.expect_ident("a value").lexeme)
        raise AssertionError(spec.type)

    def point_list(self, bare_unit: Unit) -> ValueList:
        self.expect_punct("[")
        points = []
        while not self.at_punct("]"):
            points.append(self.vector(2, bare_unit))
            if self.at_punct(","):
                self.advance()
        self.advance()
        return ValueList(tuple(points))


def _collapse_literal(node: ExprNode, bare_unit: Unit) -> Scalar | None:
    """Fold NUMBER / -NUMBER expression roots into plain scalars."""
    negative = False
    if isinstance(node, ExprNeg) and isinstance(node.operand, ExprNum):
        negative = True
        node = node.operand
    if not isinstance(node, ExprNum):
        return None
    value = -node.value if negative else node.value
    unit = node.unit if node.unit is not Unit.NONE else bare_unit
    return Scalar(value, unit)
