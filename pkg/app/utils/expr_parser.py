"""Reader for the s-expression text forms of points, almost-sets, descriptors and set expressions.

Printing lives on the node classes themselves (``str(expr)``); parsing a
printed canonical expression gives back an equal expression.
"""
import logging
import re
from typing import FrozenSet, List, Optional, Tuple

from app.services.almost_set import AlmostSet, InvalidAlmostSetError
from app.services.descriptors import FcZero, InvalidDescriptorError, IsolatedPoint, OpenDescriptor, UpMinus, Whole
from app.services.semilattice import ConfigError, EngineError, InvalidPointError, Point, UniverseConfig
from app.services.set_algebra import And, Cyl, FinitePoints, LevelLE, Not, Open, Or, SetExpr, UpSet

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"(?P<int>\d+)|(?P<word>[A-Za-z_]\w*)|(?P<sym>[(){}\[\]+\-,])")


class ExprParseError(EngineError):
    """Raised for malformed text; ``position`` is the offending character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN.match(text, pos)
        if not match:
            raise ExprParseError(f"Unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), pos))
        pos = match.end()
    return tokens


class _Reader:
    def __init__(self, text: str, universe: Optional[UniverseConfig]):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.universe = universe

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _position(self) -> int:
        token = self._peek()
        return token[2] if token else len(self.text)

    def _next(self) -> Tuple[str, str, int]:
        token = self._peek()
        if token is None:
            raise ExprParseError("Unexpected end of input", len(self.text))
        self.index += 1
        return token

    def _expect(self, value: str) -> None:
        token = self._next()
        if token[1] != value:
            raise ExprParseError(f"Expected {value!r}, found {token[1]!r}", token[2])

    def _at(self, value: str) -> bool:
        token = self._peek()
        return token is not None and token[1] == value

    def _int(self) -> int:
        token = self._next()
        if token[0] != "int":
            raise ExprParseError(f"Expected an integer, found {token[1]!r}", token[2])
        return int(token[1])

    def _word(self) -> Tuple[str, int]:
        token = self._next()
        if token[0] != "word":
            raise ExprParseError(f"Expected a keyword, found {token[1]!r}", token[2])
        return token[1], token[2]

    def finish(self) -> None:
        token = self._peek()
        if token is not None:
            raise ExprParseError(f"Trailing input {token[1]!r}", token[2])

    def point(self) -> Point:
        start = self._position()
        self._expect("{")
        codes = []
        while not self._at("}"):
            if self._at(","):
                self._next()
                continue
            codes.append(self._int())
        self._expect("}")
        if len(set(codes)) != len(codes):
            raise ExprParseError("Duplicate code in point", start)
        p = Point(tuple(codes))
        if self.universe is not None and p.rank > self.universe.n:
            raise ExprParseError(f"Point {p} exceeds rank {self.universe.n}", start)
        return p

    def _code_list(self) -> FrozenSet[int]:
        self._expect("[")
        codes = set()
        while not self._at("]"):
            if self._at(","):
                self._next()
                continue
            codes.add(self._int())
        self._expect("]")
        return frozenset(codes)

    def almost(self) -> AlmostSet:
        start = self._position()
        self._expect("(")
        word, pos = self._word()
        if word != "almost":
            raise ExprParseError(f"Expected 'almost', found {word!r}", pos)
        base, pos = self._word()
        added, removed = frozenset(), frozenset()
        if self._at("+"):
            self._next()
            added = self._code_list()
        if self._at("-"):
            self._next()
            removed = self._code_list()
        self._expect(")")
        try:
            result = AlmostSet(base, added, removed)
        except InvalidAlmostSetError as e:
            raise ExprParseError(str(e), start)
        return result.normalized(self.universe) if self.universe is not None else result

    def descriptor(self) -> OpenDescriptor:
        start = self._position()
        self._expect("(")
        word, pos = self._word()
        try:
            if word == "whole":
                result = Whole()
            elif word == "iso":
                result = IsolatedPoint(self.point())
            elif word == "upminus":
                anchor = self.point()
                self._expect("[")
                exclusions = []
                while not self._at("]"):
                    exclusions.append(self.point())
                self._expect("]")
                result = UpMinus(anchor, tuple(exclusions))
            elif word == "fczero":
                base = self.descriptor()
                result = FcZero(base, self.almost())
            else:
                raise ExprParseError(f"Unknown descriptor {word!r}", pos)
        except InvalidDescriptorError as e:
            raise ExprParseError(str(e), start)
        self._expect(")")
        return result

    def expr(self) -> SetExpr:
        self._expect("(")
        word, pos = self._word()
        if word == "up":
            result = UpSet(self.point())
        elif word == "pts":
            points = []
            while not self._at(")"):
                points.append(self.point())
            result = FinitePoints(tuple(points))
        elif word == "lev":
            result = LevelLE(self._int())
        elif word == "cyl":
            result = Cyl(self.point(), self.almost())
        elif word == "open":
            result = Open(self.descriptor())
        elif word == "not":
            result = Not(self.expr())
        elif word in ("and", "or"):
            args = []
            while not self._at(")"):
                args.append(self.expr())
            result = And(tuple(args)) if word == "and" else Or(tuple(args))
        else:
            raise ExprParseError(f"Unknown expression head {word!r}", pos)
        self._expect(")")
        return result


def parse_expr(text: str, universe: Optional[UniverseConfig] = None) -> SetExpr:
    reader = _Reader(text, universe)
    result = reader.expr()
    reader.finish()
    return result


def parse_point(text: str, universe: Optional[UniverseConfig] = None) -> Point:
    reader = _Reader(text, universe)
    try:
        result = reader.point()
    except InvalidPointError as e:
        raise ExprParseError(str(e), 0)
    reader.finish()
    return result


def parse_descriptor(text: str, universe: Optional[UniverseConfig] = None) -> OpenDescriptor:
    reader = _Reader(text, universe)
    result = reader.descriptor()
    reader.finish()
    return result


def parse_almost(text: str, universe: Optional[UniverseConfig] = None) -> AlmostSet:
    reader = _Reader(text, universe)
    result = reader.almost()
    reader.finish()
    return result


def parse_a_spec(text: str) -> Tuple[int, FrozenSet[int], FrozenSet[int]]:
    """Read ``even``, ``odd`` or an almost-set over A/CoA into (parity, added, removed)."""
    spec = text.strip()
    if spec == "even":
        return 0, frozenset(), frozenset()
    if spec == "odd":
        return 1, frozenset(), frozenset()
    try:
        almost = parse_almost(spec)
    except ExprParseError as e:
        raise ConfigError(f"Invalid A specification {text!r}: {e}")
    if almost.base not in ("A", "CoA"):
        raise ConfigError(f"A must be infinite and co-infinite; base {almost.base} is not allowed")
    parity = 0 if almost.base == "A" else 1
    return parity, almost.added, almost.removed
