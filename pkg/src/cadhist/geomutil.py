"""Unit conversion and exact numeric predicates shared across passes.

Values stay in Decimal until geometry evaluation so that unit conversion
and rounding behave identically on every platform.  Converting radians to
degrees is the one lossy step; it round-trips through float and re-enters
Decimal via repr.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext

from .model import Arc, LENGTH_TO_MM, RawExpr, Scalar, Unit, Vec

# Plenty of headroom over the folding precision so conversions never round.
_CONVERT_PRECISION = 50


class UnitError(ValueError):
    pass


def to_canonical(scalar: Scalar) -> Scalar:
    """Convert to the canonical unit of its dimension (mm, deg, or none)."""
    unit = scalar.unit
    if unit in (Unit.MM, Unit.DEG, Unit.NONE):
        return scalar
    if unit in LENGTH_TO_MM:
        with localcontext() as ctx:
            ctx.prec = _CONVERT_PRECISION
            return Scalar(scalar.value * LENGTH_TO_MM[unit], Unit.MM)
    if unit is Unit.RAD:
        radians = float(scalar.value)
        if not math.isfinite(radians):
            raise UnitError("angle magnitude overflows")
        return Scalar(Decimal(repr(math.degrees(radians))), Unit.DEG)
    raise UnitError(f"no canonical form for unit {unit.value!r}")


def scalar_float(scalar: Scalar) -> float:
    """Canonical magnitude as a float (mm for lengths, deg for angles)."""
    return float(to_canonical(scalar).value)


def vec_floats(vec: Vec) -> tuple[float, ...]:
    out = []
    for comp in vec.components:
        if isinstance(comp, RawExpr):
            raise UnitError("unresolved expression in vector")
        out.append(scalar_float(comp))
    return tuple(out)


def _vec2_decimals(vec: Vec) -> tuple[Decimal, Decimal] | None:
    if len(vec.components) != 2:
        return None
    out = []
    for comp in vec.components:
        if not isinstance(comp, Scalar):
            return None
        try:
            out.append(to_canonical(comp).value)
        except UnitError:
            return None
    return out[0], out[1]


def arc_is_collinear(arc: Arc) -> bool:
    """True when the three arc points fail to define a circle.

    Exact Decimal cross product, so a point a hair off the chord still
    counts as a valid (huge-radius) arc rather than tripping a tolerance.
    """
    pts = [_vec2_decimals(v) for v in (arc.start, arc.mid, arc.end)]
    if any(p is None for p in pts):
        return False  # unresolved expressions; checked again after folding
    (ax, ay), (bx, by), (cx, cy) = pts
    if (ax, ay) == (bx, by) or (bx, by) == (cx, cy) or (ax, ay) == (cx, cy):
        return True
    with localcontext() as ctx:
        ctx.prec = _CONVERT_PRECISION
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return cross == 0
