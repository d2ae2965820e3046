"""Component catalog: typed parameter specs per kind, mode availability,
connection-port geometry and the single-string property schemas that feed the
properties window."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidSpec
from .geometry import Point
from .units import (
    ACTIVE_POWER_UNITS,
    APPARENT_POWER_UNITS,
    MAGNITUDE,
    QUALIFIER,
    REACTIVE_POWER_UNITS,
    UNIT,
    VOLTAGE_UNITS,
    WORD,
    Quantity,
    parse_property_string,
)

# operation modes
PER_UNIT = "per-unit"
POWER_FLOW = "power-flow"
STATE_ESTIMATION = "state-estimation"
MODES = (PER_UNIT, POWER_FLOW, STATE_ESTIMATION)

# component kinds
GENERATOR = "generator"
TRANSFORMER = "transformer"
LOAD = "load"
BUSBAR = "busbar"
LINE = "line"
METER = "meter"
PU_BASE = "pu_base"

KINDS = (GENERATOR, TRANSFORMER, LOAD, BUSBAR, LINE, METER, PU_BASE)

AVAILABILITY: dict[str, tuple[str, ...]] = {
    GENERATOR: (PER_UNIT,),
    TRANSFORMER: MODES,
    LOAD: MODES,
    BUSBAR: MODES,
    LINE: MODES,
    METER: (STATE_ESTIMATION,),
    PU_BASE: (PER_UNIT,),
}

# local connection-port offsets at rotation 0 (canvas units, y grows down)
PORT_OFFSETS: dict[str, tuple[Point, ...]] = {
    GENERATOR: ((0.0, 24.0),),
    TRANSFORMER: ((0.0, -24.0), (0.0, 24.0)),  # port 0 = primary winding
    LOAD: ((0.0, -24.0),),
    BUSBAR: (),   # every enclosed point of the bar is a port
    METER: (),    # non-connectable
    PU_BASE: (),  # non-connectable marker
}

BUSBAR_HALF_WIDTH = 3.0  # attachment tolerance around the bar axis

MEASURED_QUANTITIES = ("P", "Q", "Vmag")
DEFAULT_SIGMA = {"P": 0.01, "Q": 0.01, "Vmag": 0.004}

WINDING_CONNECTIONS = ("wye", "delta")

RATED_FREQUENCY_HZ = 60.0  # for RLC-form load impedance


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidSpec(message)


def _positive_quantity(q: Quantity, units: tuple[str, ...], what: str) -> None:
    _require(isinstance(q, Quantity), f"{what} must be a quantity")
    _require(q.unit in units, f"{what} must use one of {units}, got {q.unit}")
    _require(q.magnitude > 0, f"{what} must be positive")


@dataclass(frozen=True)
class GeneratorSpec:
    rated_power: Quantity
    rated_voltage: Quantity
    impedance: complex | None = None  # pu on the machine's own base

    def __post_init__(self):
        _positive_quantity(self.rated_power, APPARENT_POWER_UNITS, "rated power")
        _positive_quantity(self.rated_voltage, VOLTAGE_UNITS, "rated voltage")


@dataclass(frozen=True)
class TransformerSpec:
    rated_power: Quantity
    primary_voltage: Quantity
    secondary_voltage: Quantity
    primary_connection: str = "wye"
    secondary_connection: str = "wye"
    impedance: complex | None = None  # pu on the transformer's own base

    def __post_init__(self):
        _positive_quantity(self.rated_power, APPARENT_POWER_UNITS, "rated power")
        _positive_quantity(self.primary_voltage, VOLTAGE_UNITS, "primary voltage")
        _positive_quantity(self.secondary_voltage, VOLTAGE_UNITS, "secondary voltage")
        _require(self.primary_connection in WINDING_CONNECTIONS,
                 f"winding connection must be wye or delta, got {self.primary_connection}")
        _require(self.secondary_connection in WINDING_CONNECTIONS,
                 f"winding connection must be wye or delta, got {self.secondary_connection}")

    @property
    def ratio(self) -> float:
        """Secondary over primary rated voltage (line-to-line, SI)."""
        return self.secondary_voltage.si / self.primary_voltage.si


@dataclass(frozen=True)
class LoadSpec:
    form: str  # "power" | "rlc"
    p: Quantity | None = None
    q: Quantity | None = None
    r: float = 0.0
    l: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "l", float(self.l))
        object.__setattr__(self, "c", float(self.c))
        if self.form == "power":
            _require(self.p is not None and self.q is not None,
                     "power-form load needs P and Q")
            _require(self.p.unit in ACTIVE_POWER_UNITS + ("pu",),
                     f"P must be W, MW or pu, got {self.p.unit}")
            _require(self.q.unit in REACTIVE_POWER_UNITS + ("pu",),
                     f"Q must be VAr, MVAr or pu, got {self.q.unit}")
            _require(self.r == 0.0 and self.l == 0.0 and self.c == 0.0,
                     "power-form load may not carry R/L/C values")
        elif self.form == "rlc":
            _require(self.p is None and self.q is None,
                     "RLC-form load may not carry P/Q values")
            _require(self.r >= 0 and self.l >= 0 and self.c >= 0,
                     "R, L, C must be non-negative")
            _require(self.r > 0 or self.l > 0 or self.c > 0,
                     "RLC-form load needs at least one element")
        else:
            raise InvalidSpec(f"load form must be power or rlc, got {self.form!r}")

    @staticmethod
    def power(p: Quantity, q: Quantity) -> "LoadSpec":
        return LoadSpec(form="power", p=p, q=q)

    @staticmethod
    def rlc(r: float = 0.0, l: float = 0.0, c: float = 0.0) -> "LoadSpec":
        return LoadSpec(form="rlc", r=r, l=l, c=c)

    def impedance_ohm(self) -> complex:
        """Series R-L-C impedance at rated frequency (RLC form only)."""
        _require(self.form == "rlc", "impedance_ohm applies to RLC-form loads")
        omega = 2.0 * 3.141592653589793 * RATED_FREQUENCY_HZ
        x = omega * self.l - (1.0 / (omega * self.c) if self.c > 0 else 0.0)
        return complex(self.r, x)


@dataclass(frozen=True)
class BusBarSpec:
    """Passive bar; carries drawing length only, no electrical parameters."""

    length: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "length", float(self.length))
        _require(self.length > 0, "bus-bar length must be positive")


@dataclass(frozen=True)
class BusSourceSpec:
    """Optional power-flow scheduling attached to a bus component entry:
    a slack designation or a PV/PQ generation setpoint."""

    slack: bool = False
    v_set: float | None = None       # pu
    theta_set_deg: float = 0.0       # slack only
    p_gen: Quantity | None = None
    q_gen: Quantity | None = None

    def __post_init__(self):
        if self.v_set is not None:
            object.__setattr__(self, "v_set", float(self.v_set))
            _require(self.v_set > 0, "voltage setpoint must be positive")
        object.__setattr__(self, "theta_set_deg", float(self.theta_set_deg))
        if self.slack:
            _require(self.v_set is not None, "slack designation needs a voltage setpoint")
        if self.p_gen is not None:
            _require(self.p_gen.unit in ACTIVE_POWER_UNITS + ("pu",),
                     "P generation must be W, MW or pu")
        if self.q_gen is not None:
            _require(self.q_gen.unit in REACTIVE_POWER_UNITS + ("pu",),
                     "Q generation must be VAr, MVAr or pu")


@dataclass(frozen=True)
class LineSpec:
    """Series impedance R + jX with optional total line-charging susceptance.
    Zero impedance and zero shunt makes the drawn line a connecting line."""

    r: float = 0.0
    x: float = 0.0
    unit: str = "pu"  # "pu" on the system base or "ohm"
    shunt_b: float = 0.0  # total line charging, same unit system

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "shunt_b", float(self.shunt_b))
        _require(self.r >= 0, "line resistance must be non-negative")
        _require(self.unit in ("pu", "ohm"), f"impedance unit must be pu or ohm, got {self.unit}")

    @property
    def is_connecting(self) -> bool:
        return self.r == 0.0 and self.x == 0.0 and self.shunt_b == 0.0

    @property
    def impedance(self) -> complex:
        return complex(self.r, self.x)


@dataclass(frozen=True)
class MeterSpec:
    """Non-connectable reading device; attaches to the closest line or bus.

    values holds the readings in pu, keyed like quantities; sigmas may be
    omitted and fall back to conventional defaults.
    """

    quantities: tuple[str, ...]
    values: dict[str, float] = field(default_factory=dict)
    sigmas: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "quantities", tuple(self.quantities))
        object.__setattr__(self, "values",
                           {k: float(v) for k, v in self.values.items()})
        object.__setattr__(self, "sigmas",
                           {k: float(v) for k, v in self.sigmas.items()})
        _require(len(self.quantities) >= 1, "meter needs at least one quantity")
        for q in self.quantities:
            _require(q in MEASURED_QUANTITIES,
                     f"measurable quantities are {MEASURED_QUANTITIES}, got {q!r}")
        _require(len(set(self.quantities)) == len(self.quantities),
                 "duplicate measured quantity")
        for q, s in self.sigmas.items():
            _require(q in MEASURED_QUANTITIES, f"sigma for unknown quantity {q!r}")
            _require(s > 0, "standard deviation must be positive")

    def sigma(self, quantity: str) -> float:
        return self.sigmas.get(quantity, DEFAULT_SIGMA[quantity])


@dataclass(frozen=True)
class PUBaseSpec:
    """System base power plus the anchor base voltage for one network part."""

    base_power: Quantity
    base_voltage: Quantity

    def __post_init__(self):
        _positive_quantity(self.base_power, APPARENT_POWER_UNITS, "base power")
        _positive_quantity(self.base_voltage, VOLTAGE_UNITS, "base voltage")


SPEC_TYPES = {
    GENERATOR: GeneratorSpec,
    TRANSFORMER: TransformerSpec,
    LOAD: LoadSpec,
    BUSBAR: BusBarSpec,
    LINE: LineSpec,
    METER: MeterSpec,
    PU_BASE: PUBaseSpec,
}


def default_spec(kind: str):
    """Catalog defaults used when the UI drops a fresh component on the canvas."""
    if kind == GENERATOR:
        return GeneratorSpec(Quantity(100, "MVA", "3-ph"), Quantity(13.8, "kV"))
    if kind == TRANSFORMER:
        return TransformerSpec(Quantity(100, "MVA", "3-ph"), Quantity(13.8, "kV"),
                               Quantity(138, "kV"), impedance=0.08j)
    if kind == LOAD:
        return LoadSpec.power(Quantity(50, "MW"), Quantity(30, "MVAr"))
    if kind == BUSBAR:
        return BusBarSpec()
    if kind == LINE:
        return LineSpec(r=0.0, x=0.0)
    if kind == METER:
        return MeterSpec(quantities=("P", "Q"))
    if kind == PU_BASE:
        return PUBaseSpec(Quantity(100, "MVA"), Quantity(138, "kV"))
    raise InvalidSpec(f"unknown component kind {kind!r}")


# property-window schemas: field name -> slot tuple for parse_property_string
PROPERTY_SCHEMAS: dict[str, dict[str, tuple[str, ...]]] = {
    GENERATOR: {
        "rated_power": (MAGNITUDE, UNIT, QUALIFIER + "?"),
        "rated_voltage": (MAGNITUDE, UNIT),
        "impedance": (MAGNITUDE, MAGNITUDE, UNIT + "?"),
    },
    TRANSFORMER: {
        "rated_power": (MAGNITUDE, UNIT, QUALIFIER + "?"),
        "primary_voltage": (MAGNITUDE, UNIT),
        "secondary_voltage": (MAGNITUDE, UNIT),
        "connection": (WORD, WORD),
        "impedance": (MAGNITUDE, MAGNITUDE, UNIT + "?"),
    },
    LOAD: {
        "p": (MAGNITUDE, UNIT),
        "q": (MAGNITUDE, UNIT),
        "r": (MAGNITUDE,),
        "l": (MAGNITUDE,),
        "c": (MAGNITUDE,),
    },
    BUSBAR: {
        "length": (MAGNITUDE,),
        "slack": (WORD,),
        "v_set": (MAGNITUDE, UNIT + "?"),
        "theta_set": (MAGNITUDE,),
        "p_gen": (MAGNITUDE, UNIT + "?"),
        "q_gen": (MAGNITUDE, UNIT + "?"),
    },
    LINE: {
        "impedance": (MAGNITUDE, MAGNITUDE, UNIT + "?"),
        "shunt": (MAGNITUDE, UNIT + "?"),
    },
    METER: {
        "quantities": (WORD, WORD + "?", WORD + "?"),
        "p_value": (MAGNITUDE, UNIT + "?"),
        "q_value": (MAGNITUDE, UNIT + "?"),
        "v_value": (MAGNITUDE, UNIT + "?"),
        "p_sigma": (MAGNITUDE, UNIT + "?"),
        "q_sigma": (MAGNITUDE, UNIT + "?"),
        "v_sigma": (MAGNITUDE, UNIT + "?"),
    },
    PU_BASE: {
        "base_power": (MAGNITUDE, UNIT),
        "base_voltage": (MAGNITUDE, UNIT),
    },
}

_METER_QUANTITY_WORDS = {"p": "P", "q": "Q", "vmag": "Vmag"}


def _parse_all(kind: str, raw: dict[str, str]) -> dict[str, tuple]:
    schemas = PROPERTY_SCHEMAS[kind]
    parsed = {}
    for name, text in raw.items():
        if name not in schemas:
            raise InvalidSpec(f"{kind} has no property {name!r}")
        parsed[name] = parse_property_string(text, schemas[name])
    return parsed


def _quantity(tokens: tuple, default_unit: str | None = None) -> Quantity:
    mag = tokens[0]
    unit = tokens[1] if len(tokens) > 1 and tokens[1] else default_unit
    qualifier = tokens[2] if len(tokens) > 2 else None
    if unit is None:
        raise InvalidSpec("missing unit")
    return Quantity(mag, unit, qualifier)


def spec_from_properties(kind: str, raw: dict[str, str], current=None):
    """Build (spec, source) for ``kind`` from raw property strings, merging
    over ``current`` (a (spec, source) pair) so partial edits work."""
    parsed = _parse_all(kind, raw)
    cur_spec, cur_source = (current or (None, None))
    if cur_spec is None:
        cur_spec = default_spec(kind)

    def q_of(name, default_unit=None, fallback=None):
        if name in parsed:
            return _quantity(parsed[name], default_unit)
        return fallback

    if kind == GENERATOR:
        imp = cur_spec.impedance
        if "impedance" in parsed:
            r, x = parsed["impedance"][0], parsed["impedance"][1]
            imp = complex(r, x)
        return GeneratorSpec(
            rated_power=q_of("rated_power", fallback=cur_spec.rated_power),
            rated_voltage=q_of("rated_voltage", fallback=cur_spec.rated_voltage),
            impedance=imp,
        ), None

    if kind == TRANSFORMER:
        imp = cur_spec.impedance
        if "impedance" in parsed:
            imp = complex(parsed["impedance"][0], parsed["impedance"][1])
        pri_conn, sec_conn = cur_spec.primary_connection, cur_spec.secondary_connection
        if "connection" in parsed:
            pri_conn, sec_conn = parsed["connection"]
        return TransformerSpec(
            rated_power=q_of("rated_power", fallback=cur_spec.rated_power),
            primary_voltage=q_of("primary_voltage", fallback=cur_spec.primary_voltage),
            secondary_voltage=q_of("secondary_voltage", fallback=cur_spec.secondary_voltage),
            primary_connection=pri_conn,
            secondary_connection=sec_conn,
            impedance=imp,
        ), None

    if kind == LOAD:
        rlc_edit = any(k in parsed for k in ("r", "l", "c"))
        pq_edit = any(k in parsed for k in ("p", "q"))
        if rlc_edit and pq_edit:
            raise InvalidSpec("load takes either P/Q or R/L/C, not both")
        if rlc_edit:
            base = cur_spec if cur_spec.form == "rlc" else LoadSpec.rlc(r=1.0)
            return LoadSpec.rlc(
                r=parsed["r"][0] if "r" in parsed else base.r,
                l=parsed["l"][0] if "l" in parsed else base.l,
                c=parsed["c"][0] if "c" in parsed else base.c,
            ), None
        base_p = cur_spec.p if cur_spec.form == "power" else Quantity(0.0, "MW")
        base_q = cur_spec.q if cur_spec.form == "power" else Quantity(0.0, "MVAr")
        return LoadSpec.power(
            p=q_of("p", fallback=base_p), q=q_of("q", fallback=base_q)), None

    if kind == BUSBAR:
        spec = cur_spec
        if "length" in parsed:
            spec = BusBarSpec(length=parsed["length"][0])
        source = cur_source
        source_edits = {k: v for k, v in parsed.items() if k != "length"}
        if source_edits:
            base = source or BusSourceSpec()
            slack = base.slack
            if "slack" in source_edits:
                word = source_edits["slack"][0]
                if word not in ("true", "false", "yes", "no"):
                    raise InvalidSpec(f"slack must be true/false, got {word!r}")
                slack = word in ("true", "yes")
            v_set = source_edits["v_set"][0] if "v_set" in source_edits else base.v_set
            theta = source_edits["theta_set"][0] if "theta_set" in source_edits else base.theta_set_deg
            p_gen = _quantity(source_edits["p_gen"], "pu") if "p_gen" in source_edits else base.p_gen
            q_gen = _quantity(source_edits["q_gen"], "pu") if "q_gen" in source_edits else base.q_gen
            source = BusSourceSpec(slack=slack, v_set=v_set, theta_set_deg=theta,
                                   p_gen=p_gen, q_gen=q_gen)
        return spec, source

    if kind == LINE:
        r, x, unit, shunt = cur_spec.r, cur_spec.x, cur_spec.unit, cur_spec.shunt_b
        if "impedance" in parsed:
            r, x = parsed["impedance"][0], parsed["impedance"][1]
            unit = parsed["impedance"][2] or "pu"
            if unit not in ("pu", "ohm"):
                raise InvalidSpec(f"line impedance must be pu or ohm, got {unit}")
        if "shunt" in parsed:
            shunt = parsed["shunt"][0]
        return LineSpec(r=r, x=x, unit=unit, shunt_b=shunt), None

    if kind == METER:
        quantities = cur_spec.quantities
        if "quantities" in parsed:
            words = [w for w in parsed["quantities"] if w]
            try:
                quantities = tuple(_METER_QUANTITY_WORDS[w] for w in words)
            except KeyError as exc:
                raise InvalidSpec(f"unknown measured quantity {exc.args[0]!r}") from None
        values = dict(cur_spec.values)
        sigmas = dict(cur_spec.sigmas)
        for prop, key in (("p_value", "P"), ("q_value", "Q"), ("v_value", "Vmag")):
            if prop in parsed:
                values[key] = parsed[prop][0]
        for prop, key in (("p_sigma", "P"), ("q_sigma", "Q"), ("v_sigma", "Vmag")):
            if prop in parsed:
                sigmas[key] = parsed[prop][0]
        return MeterSpec(quantities=quantities, values=values, sigmas=sigmas), None

    if kind == PU_BASE:
        return PUBaseSpec(
            base_power=q_of("base_power", fallback=cur_spec.base_power),
            base_voltage=q_of("base_voltage", fallback=cur_spec.base_voltage),
        ), None

    raise InvalidSpec(f"unknown component kind {kind!r}")


def properties_from_spec(kind: str, spec, source=None) -> dict[str, str]:
    """Render a spec back into single-string properties (the Fig-2 style view)."""
    def num(v: float) -> str:
        return repr(float(v))

    if kind == GENERATOR:
        props = {"rated_power": spec.rated_power.render(),
                 "rated_voltage": spec.rated_voltage.render()}
        if spec.impedance is not None:
            props["impedance"] = f"{num(spec.impedance.real)} {num(spec.impedance.imag)} pu"
        return props
    if kind == TRANSFORMER:
        props = {"rated_power": spec.rated_power.render(),
                 "primary_voltage": spec.primary_voltage.render(),
                 "secondary_voltage": spec.secondary_voltage.render(),
                 "connection": f"{spec.primary_connection} {spec.secondary_connection}"}
        if spec.impedance is not None:
            props["impedance"] = f"{num(spec.impedance.real)} {num(spec.impedance.imag)} pu"
        return props
    if kind == LOAD:
        if spec.form == "power":
            return {"p": spec.p.render(), "q": spec.q.render()}
        return {"r": num(spec.r), "l": num(spec.l), "c": num(spec.c)}
    if kind == BUSBAR:
        props = {"length": num(spec.length)}
        if source is not None:
            props["slack"] = "true" if source.slack else "false"
            if source.v_set is not None:
                props["v_set"] = f"{num(source.v_set)} pu"
            props["theta_set"] = num(source.theta_set_deg)
            if source.p_gen is not None:
                props["p_gen"] = source.p_gen.render()
            if source.q_gen is not None:
                props["q_gen"] = source.q_gen.render()
        return props
    if kind == LINE:
        props = {"impedance": f"{num(spec.r)} {num(spec.x)} {spec.unit}"}
        if spec.shunt_b:
            props["shunt"] = f"{num(spec.shunt_b)} {spec.unit}"
        return props
    if kind == METER:
        props = {"quantities": " ".join(q.lower() for q in spec.quantities)}
        for key, prop in (("P", "p_value"), ("Q", "q_value"), ("Vmag", "v_value")):
            if key in spec.values:
                props[prop] = f"{num(spec.values[key])} pu"
        for key, prop in (("P", "p_sigma"), ("Q", "q_sigma"), ("Vmag", "v_sigma")):
            if key in spec.sigmas:
                props[prop] = f"{num(spec.sigmas[key])} pu"
        return props
    if kind == PU_BASE:
        return {"base_power": spec.base_power.render(),
                "base_voltage": spec.base_voltage.render()}
    raise InvalidSpec(f"unknown component kind {kind!r}")
