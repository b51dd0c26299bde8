"""Exact isospectrality decisions for rolled-up periodic lattices.

A band edge of the rolled-up operator coincides with the full-lattice edge
exactly when some extremum point k = r*pi of the edge's level set satisfies
T r in 2Z^{d_o}. Everything here runs in rational arithmetic: there is no
tolerance parameter anywhere in this module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence

from .errors import (
    EmptyLevelSet,
    NotPrimitive,
    ParseError,
    ValidationError,
    WrongShape,
)
from .intlat import IntMatrix, as_chiral_matrix, is_primitive_set

COMPONENT_LIMIT = 2**63  # numerators and denominators must fit 64-bit storage

_SIDES = ("lower", "upper")


def _as_fraction(value: object) -> Fraction:
    if isinstance(value, bool):
        raise ValidationError(f"expected an exact rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad rational literal {value!r}: {exc}") from exc
    # floats are rejected: 0.1 is not the rational 1/10
    raise ValidationError(f"expected an exact rational, got {value!r}")


@dataclass(frozen=True)
class RationalQuasimomentum:
    """Exact quasimomentum: component r_i stands for the angle r_i * pi.

    Components are reduced modulo 2 into (-1, 1], in lowest terms.
    """

    components: tuple[Fraction, ...]

    def __init__(self, components: Iterable[object]):
        comps = []
        for raw in components:
            f = _as_fraction(raw) % 2
            if f > 1:
                f -= 2
            if abs(f.numerator) >= COMPONENT_LIMIT or f.denominator >= COMPONENT_LIMIT:
                raise ValidationError(f"rational component {f} exceeds 64-bit storage")
            comps.append(f)
        if not comps:
            raise ValidationError("quasimomentum needs at least one component")
        object.__setattr__(self, "components", tuple(comps))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def angles(self) -> tuple[float, ...]:
        """Float values r_i * pi, for handing to numeric samplers."""
        return tuple(math.pi * c.numerator / c.denominator for c in self.components)

    def __repr__(self) -> str:
        body = ", ".join(str(c) for c in self.components)
        return f"RationalQuasimomentum(({body}))"


def edge_coincidence(k_o: RationalQuasimomentum | Iterable[object], chiral: object) -> bool:
    """Exact test whether T applied to k_o = r*pi lands in 2*pi*Z^{d_o}."""
    point = k_o if isinstance(k_o, RationalQuasimomentum) else RationalQuasimomentum(k_o)
    t = chiral if isinstance(chiral, IntMatrix) else as_chiral_matrix(chiral)
    if t.cols != point.dimension:
        raise WrongShape(
            f"chiral matrix has {t.cols} columns, quasimomentum has {point.dimension}"
        )
    for row in t.entries:
        total = sum(c * r for c, r in zip(row, point.components))
        if total % 2 != 0:
            return False
    return True


@dataclass(frozen=True)
class LevelSet:
    """Extremum points of one band edge, as exact rational quasimomenta.

    complete=True asserts the listed points decide the coincidence criterion
    for this edge: either they exhaust the level set, or a separate argument
    shows no unlisted point can pass when all listed ones fail. Leave it
    False for hand-picked samples of a larger set.
    """

    band: int
    side: Literal["lower", "upper"]
    points: tuple[RationalQuasimomentum, ...]
    complete: bool = True

    def __init__(
        self,
        band: int,
        side: str,
        points: Iterable[RationalQuasimomentum | Iterable[object]],
        complete: bool = True,
    ):
        if isinstance(band, bool) or not isinstance(band, int) or band < 1:
            raise ValidationError(f"band index must be a positive integer, got {band!r}")
        if side not in _SIDES:
            raise ValidationError(f"side must be 'lower' or 'upper', got {side!r}")
        pts = tuple(
            p if isinstance(p, RationalQuasimomentum) else RationalQuasimomentum(p)
            for p in points
        )
        if pts:
            dim = pts[0].dimension
            if any(p.dimension != dim for p in pts):
                raise ValidationError("level-set points must share one dimension")
        object.__setattr__(self, "band", band)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "complete", bool(complete))


@dataclass(frozen=True)
class IsospectralVerdict:
    """Outcome of the per-edge coincidence criterion.

    conclusive is False when the verdict is negative but some failing edge
    drew on an avowedly partial point list; such a "false" is advisory.
    """

    isospectral: bool
    failing: tuple[tuple[int, str], ...]
    conclusive: bool
    detail: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.isospectral


def isospectral_verdict(
    level_sets: Iterable[LevelSet],
    chiral: object,
    expected_bands: int | None = None,
) -> IsospectralVerdict:
    """Decide whether the rolled-up operator keeps every band edge.

    True requires, for every band in scope, a passing point on both the
    lower and the upper list. The scope is 1..expected_bands when given,
    otherwise every band mentioned in level_sets.
    """
    t = as_chiral_matrix(chiral)
    if not is_primitive_set(t):
        raise NotPrimitive(f"{t} is not a primitive set of lattice vectors")

    table: dict[tuple[int, str], LevelSet] = {}
    for ls in level_sets:
        key = (ls.band, ls.side)
        if key in table:
            raise ValidationError(f"duplicate level set for band {key[0]} {key[1]} edge")
        table[key] = ls
    if not table:
        raise EmptyLevelSet("no level sets supplied")

    bands = range(1, expected_bands + 1) if expected_bands else sorted(
        {band for band, _ in table}
    )
    for band in bands:
        for side in _SIDES:
            ls = table.get((band, side))
            if ls is None or not ls.points:
                raise EmptyLevelSet(
                    f"no extremum points supplied for band {band} {side} edge"
                )

    failing = []
    detail = []
    conclusive = True
    for band in bands:
        for side in _SIDES:
            ls = table[(band, side)]
            if any(edge_coincidence(p, t) for p in ls.points):
                continue
            failing.append((band, side))
            detail.append(
                f"band {band} {side} edge: no listed extremum satisfies the congruence"
            )
            if not ls.complete:
                conclusive = False

    ok = not failing
    return IsospectralVerdict(
        isospectral=ok,
        failing=tuple(failing),
        conclusive=True if ok else conclusive,
        detail=tuple(detail),
    )


def diamond_parity_rule(chiral: object) -> bool:
    """Closed-form version of the criterion for the diamond lattice.

    One chiral vector always passes. A pair passes exactly when some index
    pair i != j has t_{si} + t_{sj} even in both rows. Assumes a primitive
    set; the rule does not re-check primitivity.
    """
    t = as_chiral_matrix(chiral)
    if t.cols != 3:
        raise WrongShape(f"diamond chiral vectors live in 3 dimensions, got {t.cols}")
    if t.rows == 1:
        return True
    return any(
        all((row[i] + row[j]) % 2 == 0 for row in t.entries)
        for i in range(3)
        for j in range(i + 1, 3)
    )


def hexagonal_level_sets() -> tuple[LevelSet, ...]:
    """Both hexagonal bands: extrema at 0 and at the two conical points."""
    zero = RationalQuasimomentum((0, 0))
    cone = (
        RationalQuasimomentum((Fraction(2, 3), Fraction(-2, 3))),
        RationalQuasimomentum((Fraction(-2, 3), Fraction(2, 3))),
    )
    return (
        LevelSet(1, "lower", (zero,)),
        LevelSet(1, "upper", cone),
        LevelSet(2, "lower", cone),
        LevelSet(2, "upper", (zero,)),
    )


def hypercubic_level_sets(d: int) -> tuple[LevelSet, ...]:
    """Single band of the integer lattice: minimum at 0, maximum at pi*1."""
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}")
    return (
        LevelSet(1, "lower", (RationalQuasimomentum((0,) * d),)),
        LevelSet(1, "upper", (RationalQuasimomentum((1,) * d),)),
    )


def diamond_level_sets() -> tuple[LevelSet, ...]:
    """Both diamond bands.

    The inner edges' level set is a curve; the three half-lattice points on
    it are decisive anyway: the parity classification shows a chiral set
    failing all three also fails every other point of the curve, so the
    lists are marked complete.
    """
    zero = RationalQuasimomentum((0, 0, 0))
    curve = (
        RationalQuasimomentum((1, 1, 0)),
        RationalQuasimomentum((1, 0, 1)),
        RationalQuasimomentum((0, 1, 1)),
    )
    return (
        LevelSet(1, "lower", (zero,)),
        LevelSet(1, "upper", curve),
        LevelSet(2, "lower", curve),
        LevelSet(2, "upper", (zero,)),
    )


def level_sets_from_records(records: Iterable[Mapping[str, object]]) -> tuple[LevelSet, ...]:
    """Build level sets from parsed JSON records.

    Each record: {"band": j, "side": "lower"|"upper", "points": [[..], ..]}
    with rational components written as integers or "p/q" strings. A record
    missing the optional "complete" key is treated as a partial sample.
    """
    out = []
    for pos, rec in enumerate(records):
        if not isinstance(rec, Mapping):
            raise ParseError(f"level-set record {pos} is not an object")
        try:
            band = rec["band"]
            side = rec["side"]
            points = rec["points"]
        except KeyError as exc:
            raise ParseError(f"level-set record {pos} lacks key {exc}") from exc
        if not isinstance(points, Sequence) or isinstance(points, (str, bytes)):
            raise ParseError(f"level-set record {pos}: points must be an array")
        complete = rec.get("complete", False)
        if not isinstance(complete, bool):
            raise ParseError(f"level-set record {pos}: complete must be a boolean")
        try:
            out.append(LevelSet(band, side, points, complete=complete))
        except (ValidationError, ParseError) as exc:
            raise ParseError(f"level-set record {pos}: {exc}") from exc
    return tuple(out)


def parse_level_set_file(text: str) -> tuple[LevelSet, ...]:
    """Parse the JSON level-set interchange format."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"level-set file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("level-set file must hold a JSON array")
    return level_sets_from_records(data)
