"""Run configuration: a small ``key = value`` format with ``[section]`` headers.

Example::

    # reference scenario with broken dark mode
    [system]
    v_hop = 0.01
    phi = pi/2

    [grid]
    start = 0.95
    stop = 1.05
    points = 501

    [sweep]
    parameter = g_eff
    start = 1e-3
    stop = 1e-2
    points = 19

Numbers may be written as plain floats or as multiples of ``pi``
(``pi``, ``3*pi/4``, ``pi/2``).  Lines starting with ``#`` or ``;`` are
comments, as is anything after whitespace followed by ``#`` or ``;``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closed_form import ALL_VARIANTS, ClosedFormVariant
from .model import REF_OMEGA_M, REF_TEMPERATURE, InvalidParameterError, SystemParams
from .sweeps import SWEEPABLE, FrequencyGrid


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


_PI_EXPR = re.compile(r"^\s*(?:([-+]?[0-9.]+(?:[eE][-+]?\d+)?)\s*\*\s*)?([-+]?)pi(?:\s*/\s*([0-9.]+(?:[eE][-+]?\d+)?))?\s*$")
_INLINE_COMMENT = re.compile(r"\s[#;]")


def parse_number(text: str) -> float:
    """Float, or ``[a*]pi[/b]``."""
    text = text.strip()
    m = _PI_EXPR.match(text)
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        if m.group(2) == "-":
            factor = -factor
        div = float(m.group(3)) if m.group(3) else 1.0
        return factor * math.pi / div
    return float(text)


def _int(text):
    value = parse_number(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _number_list(text):
    return [parse_number(t) for t in text.split(",") if t.strip()]


def _str(text):
    if not text.strip():
        raise ValueError("empty value")
    return text.strip()


SCHEMA = {
    "system": {
        "kappa": parse_number,
        "gamma": parse_number,
        "delta_eff": parse_number,
        "g_eff": parse_number,
        "v_hop": parse_number,
        "phi": parse_number,
        "theta": parse_number,
        "n_bar": parse_number,
        "temperature": parse_number,
        "omega_m_phys": parse_number,
    },
    "grid": {"start": parse_number, "stop": parse_number, "points": _int},
    "sweep": {
        "parameter": _str,
        "start": parse_number,
        "stop": parse_number,
        "points": _int,
        "values": _number_list,
    },
    "analysis": {
        "s_fex": parse_number,
        "threshold": parse_number,
        "variants": _str,
        "validate_points": _int,
        "modes_points": _int,
        "overlay_phi": _number_list,
        "quantity": _str,
    },
    "output": {"csv": _str, "figure": _str, "plot_script": _str, "records": _str},
}

DEFAULTS = {
    ("system", "kappa"): 0.1,
    ("system", "gamma"): 1e-5,
    ("system", "delta_eff"): 0.0,
    ("system", "g_eff"): 4.5e-3,
    ("system", "v_hop"): 0.01,
    ("system", "phi"): 0.0,
    ("system", "theta"): math.pi / 2,
    ("grid", "start"): 0.95,
    ("grid", "stop"): 1.05,
    ("grid", "points"): 501,
    ("sweep", "points"): 19,
    ("analysis", "s_fex"): 0.0,
    ("analysis", "threshold"): 0.5,
    ("analysis", "variants"): "all",
    ("analysis", "validate_points"): 201,
    ("analysis", "modes_points"): 9,
    ("analysis", "quantity"): "n_add",
}

QUANTITIES = ("n_add", "r_m", "s_th", "s_total", "sql_margin")


@dataclass
class RunConfig:
    params: SystemParams
    grid: FrequencyGrid
    sweep_parameter: Optional[str] = None
    sweep_values: Optional[list] = None
    s_fex: float = 0.0
    threshold: float = 0.5
    variants: tuple = ALL_VARIANTS
    validate_points: int = 201
    modes_points: int = 9
    overlay_phi: list = field(default_factory=list)
    quantity: str = "n_add"
    csv: Optional[str] = None
    figure: Optional[str] = None
    plot_script: Optional[str] = None
    records: Optional[str] = None
    provenance: dict = field(default_factory=dict)


def _lookup_key(key, line):
    if "." in key:
        section, name = key.split(".", 1)
        if section not in SCHEMA or name not in SCHEMA[section]:
            raise ConfigError("unknown key", key, line)
        return section, name
    owners = [s for s, keys in SCHEMA.items() if key in keys]
    if not owners:
        raise ConfigError("unknown key", key, line)
    if len(owners) > 1:
        raise ConfigError(f"ambiguous key, qualify it as one of "
                          f"{', '.join(o + '.' + key for o in owners)}", key, line)
    return owners[0], key


def _convert(section, name, raw, line, label):
    try:
        return SCHEMA[section][name](raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"type mismatch: {exc}", label, line) from None


def parse_config(text: str = "", overrides=()) -> RunConfig:
    """Parse config text, apply ``key=value`` overrides and validate.

    ``overrides`` use bare keys (``kappa=0.2``) or qualified ones
    (``sweep.points=40``).
    """
    values = {}
    where = {}  # (section, key) -> provenance string
    lines = {}  # (section, key) -> line number, for error reporting
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"malformed section header {stripped!r}", line=lineno)
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key = value, got {stripped!r}", line=lineno)
        key, _, raw_value = stripped.partition("=")
        key = key.strip()
        raw_value = _INLINE_COMMENT.split(raw_value, 1)[0]
        if section is None:
            sec, name = _lookup_key(key, lineno)
        else:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key in [{section}]", key, lineno)
            sec, name = section, key
        if (sec, name) in values:
            raise ConfigError("duplicate key", key, lineno)
        values[(sec, name)] = _convert(sec, name, raw_value, lineno, key)
        where[(sec, name)] = f"config line {lineno}"
        lines[(sec, name)] = lineno

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, raw_value = item.partition("=")
        key = key.strip()
        sec, name = _lookup_key(key, None)
        values[(sec, name)] = _convert(sec, name, raw_value, None, key)
        where[(sec, name)] = "override"
        lines.pop((sec, name), None)

    return _build(values, where, lines)


def _build(values, where, lines):
    provenance = dict(where)

    def get(sec, name):
        if (sec, name) in values:
            return values[(sec, name)]
        if (sec, name) in DEFAULTS:
            provenance[(sec, name)] = "default"
            return DEFAULTS[(sec, name)]
        return None

    def fail(sec, name, message):
        raise ConfigError(message, name, lines.get((sec, name)))

    rates = {name: get("system", name)
             for name in ("kappa", "gamma", "delta_eff", "g_eff", "v_hop", "phi", "theta")}
    n_bar = values.get(("system", "n_bar"))
    temperature = values.get(("system", "temperature"))
    omega_phys = values.get(("system", "omega_m_phys"))
    if n_bar is not None and (temperature is not None or omega_phys is not None):
        key = "temperature" if temperature is not None else "omega_m_phys"
        fail("system", key, "give either n_bar or (temperature, omega_m_phys), not both")
    if n_bar is None:
        if temperature is None:
            temperature = REF_TEMPERATURE
            provenance[("system", "temperature")] = "default"
        if omega_phys is None:
            omega_phys = REF_OMEGA_M
            provenance[("system", "omega_m_phys")] = "default"
        provenance[("system", "n_bar")] = "from temperature"
    try:
        if n_bar is None:
            params = SystemParams.from_temperature(temperature, omega_phys, **rates)
        else:
            params = SystemParams(n_bar=n_bar, **rates)
    except InvalidParameterError as exc:
        fail("system", exc.name, str(exc).split(": ", 1)[-1])

    try:
        grid = FrequencyGrid(get("grid", "start"), get("grid", "stop"), get("grid", "points"))
    except ValueError as exc:
        bad = next((k for k in ("start", "stop", "points") if ("grid", k) in values), "points")
        fail("grid", bad, str(exc))

    sweep_parameter = get("sweep", "parameter")
    sweep_values = None
    if sweep_parameter is not None and sweep_parameter not in SWEEPABLE:
        fail("sweep", "parameter", f"must be one of {', '.join(SWEEPABLE)}")
    if ("sweep", "values") in values:
        if ("sweep", "start") in values or ("sweep", "stop") in values:
            fail("sweep", "values", "give either values or start/stop, not both")
        sweep_values = values[("sweep", "values")]
    elif ("sweep", "start") in values or ("sweep", "stop") in values:
        start, stop = values.get(("sweep", "start")), values.get(("sweep", "stop"))
        if start is None or stop is None:
            fail("sweep", "start" if start is None else "stop", "sweep needs both start and stop")
        points = get("sweep", "points")
        if points < 1:
            fail("sweep", "points", "must be >= 1")
        sweep_values = [float(v) for v in np.linspace(start, stop, points)]
    if sweep_values is not None:
        if not sweep_values:
            fail("sweep", "values", "empty list")
        if any(b <= a for a, b in zip(sweep_values, sweep_values[1:])):
            fail("sweep", "values", "must be strictly increasing")

    s_fex = get("analysis", "s_fex")
    if not s_fex >= 0:
        fail("analysis", "s_fex", "must be >= 0")
    threshold = get("analysis", "threshold")
    if not threshold > 0:
        fail("analysis", "threshold", "must be > 0")
    spec = get("analysis", "variants")
    if spec == "all":
        variants = ALL_VARIANTS
    else:
        try:
            variants = tuple(ClosedFormVariant.from_name(s.strip()) for s in spec.split(",") if s.strip())
        except ValueError as exc:
            fail("analysis", "variants", str(exc))
    for key in ("validate_points", "modes_points"):
        if get("analysis", key) < 2:
            fail("analysis", key, "must be >= 2")
    quantity = get("analysis", "quantity")
    if quantity not in QUANTITIES:
        fail("analysis", "quantity", f"must be one of {', '.join(QUANTITIES)}")

    return RunConfig(
        params=params,
        grid=grid,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        s_fex=s_fex,
        threshold=threshold,
        variants=variants,
        validate_points=get("analysis", "validate_points"),
        modes_points=get("analysis", "modes_points"),
        overlay_phi=list(values.get(("analysis", "overlay_phi"), [])),
        quantity=quantity,
        csv=values.get(("output", "csv")),
        figure=values.get(("output", "figure")),
        plot_script=values.get(("output", "plot_script")),
        records=values.get(("output", "records")),
        provenance={f"{s}.{k}": v for (s, k), v in provenance.items()},
    )
