"""Single-string property parsing and physical quantities.

Property values are entered as one whitespace-separated string per field
("100 MVA 3-ph" -> 100, MVA, 3-ph). Units come from a fixed, case-insensitive
table; magnitudes are decimal numbers; the optional phase qualifier is 3-ph or
1-ph (only three-phase semantics are implemented).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityMismatch, MalformedMagnitude, UnknownQualifier, UnknownUnit

# canonical unit -> scale to SI (pu is dimensionless, scale 1)
UNIT_SCALE: dict[str, float] = {
    "V": 1.0,
    "kV": 1e3,
    "VA": 1.0,
    "kVA": 1e3,
    "MVA": 1e6,
    "W": 1.0,
    "MW": 1e6,
    "VAr": 1.0,
    "MVAr": 1e6,
    "ohm": 1.0,
    "pu": 1.0,
}

_UNIT_BY_LOWER = {u.lower(): u for u in UNIT_SCALE}

VOLTAGE_UNITS = ("V", "kV")
APPARENT_POWER_UNITS = ("VA", "kVA", "MVA")
ACTIVE_POWER_UNITS = ("W", "MW")
REACTIVE_POWER_UNITS = ("VAr", "MVAr")

QUALIFIERS = ("3-ph", "1-ph")

# slot kinds accepted by property schemas
MAGNITUDE = "magnitude"
UNIT = "unit"
QUALIFIER = "qualifier"
WORD = "word"
_SLOT_KINDS = (MAGNITUDE, UNIT, QUALIFIER, WORD)


def canonical_unit(token: str) -> str:
    unit = _UNIT_BY_LOWER.get(token.lower())
    if unit is None:
        raise UnknownUnit(f"unknown unit {token!r}")
    return unit


@dataclass(frozen=True)
class Quantity:
    """A magnitude with a unit from the fixed table and an optional qualifier."""

    magnitude: float
    unit: str
    qualifier: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "magnitude", float(self.magnitude))
        object.__setattr__(self, "unit", canonical_unit(self.unit))
        if self.qualifier is not None and self.qualifier not in QUALIFIERS:
            raise UnknownQualifier(f"unknown qualifier {self.qualifier!r}")

    @property
    def si(self) -> float:
        """Value in base SI units (== magnitude for pu)."""
        return self.magnitude * UNIT_SCALE[self.unit]

    @property
    def is_per_unit(self) -> bool:
        return self.unit == "pu"

    def render(self) -> str:
        parts = [repr(self.magnitude) if self.magnitude != int(self.magnitude)
                 else str(int(self.magnitude)), self.unit]
        if self.qualifier:
            parts.append(self.qualifier)
        return " ".join(parts)


def parse_property_string(raw: str, schema: tuple[str, ...]) -> tuple:
    """Split ``raw`` on whitespace and coerce tokens into the schema's slots.

    Schema slots are magnitude / unit / qualifier / word; a trailing ``?``
    marks a slot optional. Returns one parsed value per slot (None for absent
    optional slots): floats for magnitudes, canonical unit names, validated
    qualifiers, lower-cased words.
    """
    slots = [(s.rstrip("?"), s.endswith("?")) for s in schema]
    for kind, _ in slots:
        if kind not in _SLOT_KINDS:
            raise ValueError(f"bad schema slot {kind!r}")
    tokens = raw.split()
    required = sum(1 for _, opt in slots if not opt)
    if not required <= len(tokens) <= len(slots):
        raise ArityMismatch(
            f"expected {required}..{len(slots)} tokens, got {len(tokens)}: {raw!r}")

    out: list = []
    ti = 0
    remaining = len(tokens)
    for kind, optional in slots:
        needed_after = sum(1 for k, o in slots[len(out) + 1:] if not o)
        if optional and remaining - 1 < needed_after:
            out.append(None)
            continue
        if ti >= len(tokens):
            if optional:
                out.append(None)
                continue
            raise ArityMismatch(f"missing token for {kind} slot: {raw!r}")
        token = tokens[ti]
        ti += 1
        remaining -= 1
        if kind == MAGNITUDE:
            try:
                value = float(token)
            except ValueError:
                raise MalformedMagnitude(f"not a number: {token!r}") from None
            if value != value or value in (float("inf"), float("-inf")):
                raise MalformedMagnitude(f"not a finite number: {token!r}")
            out.append(value)
        elif kind == UNIT:
            out.append(canonical_unit(token))
        elif kind == QUALIFIER:
            low = token.lower()
            if low not in QUALIFIERS:
                raise UnknownQualifier(f"unknown qualifier {token!r}")
            out.append(low)
        else:
            out.append(token.lower())
    if ti != len(tokens):
        raise ArityMismatch(f"unconsumed tokens in {raw!r}")
    return tuple(out)


def render_property_string(tokens: tuple) -> str:
    """Inverse of parse_property_string for valid token tuples (None skipped)."""
    parts = []
    for tok in tokens:
        if tok is None:
            continue
        if isinstance(tok, float):
            parts.append(repr(tok))
        else:
            parts.append(str(tok))
    return " ".join(parts)
