"""Conteos de coincidencias -> reporte de violación: término de compensación,
desigualdad en intensidades, propagación de errores de Poisson y significancia."""
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

from config import PUBLISHED_P_MAX, PUBLISHED_P_MIN, PUBLISHED_SIGMA, PUBLISHED_VIOLATION
from wigner.quantum_functions import AngleTriple, SlitWheelConfig, slitwheel_extremes
from wigner.utils import ValidationError, require_label

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONVENTIONS = ("scaled", "unscaled")
COUNT_FIELDS = ("i13", "i12", "i23", "i_min", "i_max")
ANGLE_FIELDS = ("phi1", "phi2", "phi3")


@dataclass(frozen=True)
class CountSet:
    i13: int
    i12: int
    i23: int
    i_min: int
    i_max: int

    def __post_init__(self):
        for name in COUNT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"el conteo debe ser entero: {value!r}", field=f"counts.{name}")
            if value < 0:
                raise ValidationError(f"conteo negativo: {value}", field=f"counts.{name}")
        if self.i_min > self.i_max:
            raise ValidationError(f"i_min ({self.i_min}) > i_max ({self.i_max})", field="counts.i_min")

    def is_zero(self):
        return not any(getattr(self, name) for name in COUNT_FIELDS)


@dataclass(frozen=True)
class ViolationReport:
    compensated_min: float
    lhs: float
    rhs: float
    violation: float
    sigma: float
    significance: float
    convention: str
    p_min: float
    p_max: float
    degenerate: bool = False
    negative_compensated_min: bool = False

    def to_dict(self):
        return asdict(self)


class AnalysisInput(NamedTuple):
    counts: CountSet
    wheel: SlitWheelConfig
    angles: AngleTriple
    overrides: tuple | None = None  # (p_min, p_max)
    integration_time_s: float | None = None
    convention: str | None = None

    def echo(self):
        """Eco de la entrada; `ingest_counts` sobre un reporte lo vuelve a leer."""
        data = {
            "counts": {name: getattr(self.counts, name) for name in COUNT_FIELDS},
            "wheel": {"l": self.wheel.l, "slit_width_fraction": self.wheel.slit_width_fraction},
            "angles": {"phi1": self.angles.theta1, "phi2": self.angles.theta2, "phi3": self.angles.theta3},
        }
        if self.overrides is not None:
            data["overrides"] = {"p_min": self.overrides[0], "p_max": self.overrides[1]}
        if self.integration_time_s is not None:
            data["meta"] = {"integration_time_s": self.integration_time_s}
        if self.convention is not None:
            data["options"] = {"convention": self.convention}
        return data


def poisson_sigma(n):
    if n < 0:
        raise ValidationError(f"conteo negativo: {n}", field="n")
    return math.sqrt(n)


def compensated_minimum(i_min, i_max, p_min, p_max):
    """I_min -> I_max(I_min/I_max - P_min/P_max); puede ser negativo (no se recorta)."""
    if p_max <= 0:
        raise ValidationError(f"p_max debe ser > 0: {p_max}", field="p_max")
    if i_max <= 0:
        raise ValidationError(f"i_max debe ser > 0: {i_max}", field="i_max")
    return i_min - i_max * (p_min / p_max)


def propagate_sigma(c, p_min, p_max, convention="scaled"):
    require_label("convention", convention, CONVENTIONS)
    if p_max <= 0:
        raise ValidationError(f"p_max debe ser > 0: {p_max}", field="p_max")
    variance = c.i13 + c.i12 + c.i23 + c.i_min
    if convention == "scaled":
        variance += (p_min / p_max) ** 2 * c.i_max
    else:
        variance += c.i_max
    return math.sqrt(variance)


def significance(report):
    if report.sigma <= 0:
        raise ValidationError("sigma = 0: significancia indefinida", field="sigma")
    return report.violation / report.sigma


def _validate_probabilities(p_min, p_max):
    if not 0.0 < p_max <= 1.0:
        raise ValidationError(f"p_max fuera de (0,1]: {p_max}", field="p_max")
    if not 0.0 <= p_min <= p_max:
        raise ValidationError(f"p_min fuera de [0, p_max]: {p_min}", field="p_min")


def evaluate_violation(c, p_min, p_max, convention="scaled"):
    require_label("convention", convention, CONVENTIONS)
    _validate_probabilities(p_min, p_max)
    degenerate = c.i_max == 0
    # Sin máximo medido no hay compensación posible (i_min <= i_max = 0)
    compensated = float(c.i_min) if degenerate else compensated_minimum(c.i_min, c.i_max, p_min, p_max)
    lhs = c.i13 - compensated
    rhs = float(c.i12 + c.i23)
    violation = lhs - rhs
    sigma = propagate_sigma(c, p_min, p_max, convention)
    return ViolationReport(
        compensated_min=compensated,
        lhs=lhs,
        rhs=rhs,
        violation=violation,
        sigma=sigma,
        significance=violation / sigma if sigma > 0 else 0.0,
        convention=convention,
        p_min=p_min,
        p_max=p_max,
        degenerate=degenerate or c.is_zero() or sigma == 0,
        negative_compensated_min=compensated < 0,
    )


def _number(value, field, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"se esperaba un número: {value!r}", field=field, line=line)
    return value


def _csv_value(text):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _read_csv(path):
    """Filas `campo,valor` con nombres con punto (counts.i13, wheel.l, ...)."""
    data, lines = {}, {}
    with open(path, newline="", encoding="utf-8") as f:
        for line_no, row in enumerate(csv.reader(f), 1):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            if line_no == 1 and row[0].strip() == "field":
                continue
            if len(row) != 2:
                raise ValidationError(f"se esperaban 2 columnas, hay {len(row)}", line=line_no)
            name = row[0].strip()
            node = data
            *parents, leaf = name.split(".")
            for part in parents:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ValidationError("campo definido dos veces", field=name, line=line_no)
            node[leaf] = _csv_value(row[1])
            lines[name] = line_no
    return data, lines


def _read_file(path):
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"no existe el archivo: {path}", field="input")
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return _read_csv(path)
    if suffix == ".toml":
        try:
            with open(path, "rb") as f:
                return tomllib.load(f), {}
        except tomllib.TOMLDecodeError as e:
            raise ValidationError(f"TOML mal formado: {e}", field="input") from e
    if suffix == ".json":
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"JSON mal formado: {e.msg}", field="input", line=e.lineno) from e
        if isinstance(data, dict) and "input" in data:
            data = data["input"]
        if not isinstance(data, dict):
            raise ValidationError("se esperaba un objeto JSON", field="input")
        return data, {}
    raise ValidationError(f"formato no soportado: {suffix or path.name}", field="input")


def _section(data, name):
    section = data.get(name)
    if not isinstance(section, dict):
        raise ValidationError("falta la sección", field=name)
    return section


def _optional_section(data, name):
    if name not in data:
        return {}
    if not isinstance(data[name], dict):
        raise ValidationError("la sección debe ser una tabla", field=name)
    return data[name]


def _require(section, prefix, name, lines):
    field = f"{prefix}.{name}"
    if name not in section:
        raise ValidationError("falta el campo", field=field)
    return _number(section[name], field, lines.get(field))


def _integration_time(meta, lines):
    """Un único tiempo; si hay uno por entrada deben ser iguales (no se reescala)."""
    value = meta.get("integration_time_s")
    if value is None:
        return None
    if isinstance(value, dict):
        times = {k: _number(v, f"meta.integration_time_s.{k}", lines.get(f"meta.integration_time_s.{k}"))
                 for k, v in value.items()}
        if len(set(times.values())) > 1:
            raise ValidationError(f"tiempos de integración distintos: {times}", field="meta.integration_time_s")
        value = next(iter(times.values()))
    value = _number(value, "meta.integration_time_s", lines.get("meta.integration_time_s"))
    if value <= 0:
        raise ValidationError(f"tiempo de integración no positivo: {value}", field="meta.integration_time_s")
    return value


def ingest_counts(path):
    data, lines = _read_file(path)
    counts_section = _section(data, "counts")
    values = {}
    for name in COUNT_FIELDS:
        value = _require(counts_section, "counts", name, lines)
        if isinstance(value, float):
            raise ValidationError(f"el conteo debe ser entero: {value!r}",
                                  field=f"counts.{name}", line=lines.get(f"counts.{name}"))
        if value < 0:
            raise ValidationError(f"conteo negativo: {value}", field=f"counts.{name}",
                                  line=lines.get(f"counts.{name}"))
        values[name] = value
    counts = CountSet(**values)

    wheel_section = _section(data, "wheel")
    l = _require(wheel_section, "wheel", "l", lines)
    if isinstance(l, float):
        raise ValidationError(f"l debe ser entero: {l!r}", field="wheel.l", line=lines.get("wheel.l"))
    wheel = SlitWheelConfig(l=l, slit_width_fraction=float(
        _require(wheel_section, "wheel", "slit_width_fraction", lines)))

    angles_section = _section(data, "angles")
    angles = AngleTriple(*(float(_require(angles_section, "angles", name, lines)) for name in ANGLE_FIELDS))

    overrides = None
    if "overrides" in data:
        section = _section(data, "overrides")
        overrides = (float(_require(section, "overrides", "p_min", lines)),
                     float(_require(section, "overrides", "p_max", lines)))
        _validate_probabilities(*overrides)

    integration_time = _integration_time(_optional_section(data, "meta"), lines)
    convention = _optional_section(data, "options").get("convention")
    if convention is not None:
        require_label("convention", convention, CONVENTIONS)
    return AnalysisInput(counts, wheel, angles, overrides, integration_time, convention)


def with_options(analysis_input, p_min=None, p_max=None, convention=None):
    """Aplica las banderas del CLI (overrides y convención) sobre la entrada leída."""
    if (p_min is None) != (p_max is None):
        raise ValidationError("--p-min y --p-max van juntos", field="overrides")
    changes = {}
    if p_min is not None:
        _validate_probabilities(p_min, p_max)
        changes["overrides"] = (p_min, p_max)
    if convention is not None:
        changes["convention"] = require_label("convention", convention, CONVENTIONS)
    return analysis_input._replace(**changes)


def is_published_rounding(overrides):
    return overrides == (PUBLISHED_P_MIN, PUBLISHED_P_MAX)


def run_analysis(analysis_input):
    """Ingreso -> P extremos (calculados u override) -> reporte completo como dict."""
    convention = analysis_input.convention or "scaled"
    if analysis_input.overrides is not None:
        p_min, p_max = analysis_input.overrides
        source = "override"
    else:
        p_min, p_max = slitwheel_extremes(analysis_input.wheel.slit_width_fraction)
        source = "computed"
    report = evaluate_violation(analysis_input.counts, p_min, p_max, convention)
    result = {
        "input": analysis_input.echo(),
        "p_source": source,
        "report": report.to_dict(),
    }
    if source == "override" and is_published_rounding(analysis_input.overrides):
        result["reproduction"] = {
            "published_violation": PUBLISHED_VIOLATION,
            "published_sigma": PUBLISHED_SIGMA,
            "note": "las cifras publicadas no se reproducen exactamente desde los valores citados; "
                    "se reporta el recálculo sin ajustar",
        }
    elif source == "computed":
        rounded = evaluate_violation(analysis_input.counts, PUBLISHED_P_MIN, PUBLISHED_P_MAX, convention)
        result["sensitivity"] = {
            "rounded_p_min": PUBLISHED_P_MIN,
            "rounded_p_max": PUBLISHED_P_MAX,
            "violation_with_rounded": rounded.violation,
            "note": "el redondeo de P_min/P_max a 3 decimales cambia la violación",
        }
    return result
