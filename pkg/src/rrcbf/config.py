"""Scenario configuration: a sectioned ``key = value`` text format.

Example::

    [scenario]
    name = linear_rrcbf
    dt = 0.001
    horizon = 20
    initial_state = 0.5 0

    [plant]
    kind = linear2d

    [variant]
    name = rrcbf
    alpha = linear 1
    beta = linear 2

Every key is typed and validated; unknown sections or keys are rejected
with the offending line number.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from .barrier_core import ClassKFn
from .cbf_constraints import CbfVariantConfig, ErrorBoundPolicy, Variant
from .exceptions import ConfigError, DomainError
from .plants import AccBenchmark, DisturbanceSignal, LinearBenchmark, PlantModel

PLANT_KINDS = {"linear2d": LinearBenchmark, "acc": AccBenchmark}

_DEFAULT_HORIZON = {"linear2d": 20.0, "acc": 50.0}
_DEFAULT_INITIAL = {"acc": (15.0, 15.0, 100.0)}


@dataclass(frozen=True)
class ObserverConfig:
    enabled: bool = False
    gain: float = 10.0
    d_hat0: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plant: PlantModel
    variant: Optional[CbfVariantConfig]
    disturbance: DisturbanceSignal
    initial_state: Tuple[float, ...]
    dt: float = 1e-3
    horizon: float = 20.0
    input_bounds: Optional[Tuple[float, float]] = None
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    output_path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if len(self.initial_state) != self.plant.state_dim:
            raise ConfigError(
                f"initial_state has {len(self.initial_state)} entries, plant needs {self.plant.state_dim}")
        if self.input_bounds is not None and self.input_bounds[0] > self.input_bounds[1]:
            raise ConfigError(f"input bounds are inverted: {self.input_bounds}")
        if self.variant is not None and self.variant.order != self.plant.relative_degree:
            raise ConfigError(
                f"alpha has {self.variant.order} entries, the safety function has relative degree "
                f"{self.plant.relative_degree}")
        if self.variant is not None and self.variant.variant.uses_estimate and not self.observer.enabled:
            raise ConfigError(f"variant {self.variant.variant.value} needs the observer enabled")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def plant_kind(self) -> str:
        return next(k for k, cls in PLANT_KINDS.items() if isinstance(self.plant, cls))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


# --- schema -----------------------------------------------------------------

def _float(text):
    return float(text)


def _int(text):
    return int(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    return tuple(float(p) for p in text.replace(",", " ").split())


def _str(text):
    return text.strip()


_SCHEMA: Dict[str, Dict[str, object]] = {
    "scenario": {"name": _str, "dt": _float, "horizon": _float, "seed": _int,
                 "initial_state": _floats, "output_path": _str, "input_bounds": _str},
    "plant": {"kind": _str, "setpoint": _float, "box": _float, "mass": _float, "f0": _float,
              "f1": _float, "f2": _float, "gravity": _float, "d0": _float, "v_desired": _float,
              "k": _float, "leader_accel": _float, "force_fraction": _float},
    "variant": {"name": _str, "alpha": _str, "beta": _str, "sigma": _float,
                "disturbance_bound": _float, "error_bound": _str},
    "disturbance": {"kind": _str, "value": _float, "terms": _str, "amplitude": _float,
                    "hold_dt": _float},
    "observer": {"enabled": _bool, "gain": _float, "d_hat0": _float},
}

_PLANT_KEYS = {
    "linear2d": {"setpoint", "box"},
    "acc": {"mass", "f0", "f1", "f2", "gravity", "d0", "v_desired", "k", "leader_accel", "force_fraction"},
}


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None and re.match(rf"^{re.escape(key)}\s*[=:]", line, re.I):
            return i
    return None


def parse_config(text: str, source: Optional[str] = None,
                 overrides: Optional[Mapping[str, str]] = None) -> ScenarioConfig:
    """Parse config text into a validated :class:`ScenarioConfig`.

    ``overrides`` maps ``"section.key"`` to replacement raw values; they are
    applied before typing, so they obey the same schema.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       default_section="__defaults__")
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line, source) from exc

    for name in parser.sections():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]", _line_of(text, name), source)
        for key in parser[name]:
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]", _line_of(text, name, key), source)

    for path, raw in (overrides or {}).items():
        section, _, key = path.partition(".")
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown parameter {path!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][key] = str(raw)

    values: Dict[str, Dict[str, object]] = {}
    for name, schema in _SCHEMA.items():
        values[name] = {}
        if not parser.has_section(name):
            continue
        for key, raw in parser[name].items():
            try:
                values[name][key] = schema[key](raw)
            except (ValueError, DomainError) as exc:
                raise ConfigError(f"[{name}] {key}: {exc}", _line_of(text, name, key), source) from exc

    def fail(msg, section, key=None):
        raise ConfigError(msg, _line_of(text, section, key), source)

    try:
        return _build(values, fail)
    except ConfigError as exc:
        if exc.line is None and exc.source is None and source is not None:
            raise ConfigError(str(exc), None, source) from exc
        raise
    except DomainError as exc:
        raise ConfigError(str(exc), None, source) from exc


def _build(values, fail) -> ScenarioConfig:
    sc, pl, va, di, ob = (values[s] for s in ("scenario", "plant", "variant", "disturbance", "observer"))

    kind = pl.pop("kind", None)
    if kind is None:
        fail("[plant] kind is required", "plant")
    if kind not in PLANT_KINDS:
        fail(f"unknown plant kind {kind!r}", "plant", "kind")
    for key in pl:
        if key not in _PLANT_KEYS[kind]:
            fail(f"key {key!r} does not apply to plant {kind!r}", "plant", key)
    plant = PLANT_KINDS[kind](**pl)

    variant = None
    vname = va.get("name", "none")
    if vname != "none":
        try:
            v = Variant(vname)
        except ValueError:
            fail(f"unknown variant {vname!r}", "variant", "name")
        if "alpha" not in va:
            fail("[variant] alpha is required", "variant")
        alphas = tuple(ClassKFn.parse(p) for p in va["alpha"].split(","))
        beta = ClassKFn.parse(va["beta"]) if "beta" in va else None
        err = ErrorBoundPolicy.parse(va["error_bound"]) if "error_bound" in va else ErrorBoundPolicy()
        variant = CbfVariantConfig(v, alphas, beta=beta, sigma=va.get("sigma", 0.0),
                                   disturbance_bound=va.get("disturbance_bound"), error_bound=err)

    seed = sc.get("seed", 0)
    dkind = di.pop("kind", "zero")
    if dkind in ("sine", "sum_of_sines"):
        if "terms" not in di:
            fail(f"a {dkind} disturbance needs terms", "disturbance")
        try:
            terms = tuple(tuple(float(p) for p in chunk.split()) for chunk in di["terms"].split(","))
        except ValueError:
            fail("terms must be 'amplitude frequency phase' triples", "disturbance", "terms")
        if any(len(t) != 3 for t in terms):
            fail("terms must be 'amplitude frequency phase' triples", "disturbance", "terms")
        dist = DisturbanceSignal(dkind, terms=terms)
    elif dkind == "constant":
        dist = DisturbanceSignal.constant(di.get("value", 0.0))
    elif dkind == "uniform_random_hold":
        dist = DisturbanceSignal.uniform_random_hold(di.get("amplitude", 0.0), di.get("hold_dt", 0.1), seed)
    elif dkind == "zero":
        dist = DisturbanceSignal()
    else:
        fail(f"unknown disturbance kind {dkind!r}", "disturbance", "kind")

    if "initial_state" in sc:
        x0 = sc["initial_state"]
    elif kind in _DEFAULT_INITIAL:
        x0 = _DEFAULT_INITIAL[kind]
    else:
        fail("[scenario] initial_state is required for this plant", "scenario")

    bounds_text = sc.get("input_bounds", "default")
    if bounds_text == "default":
        bounds = plant.default_input_bounds()
    elif bounds_text == "none":
        bounds = None
    else:
        try:
            bounds = _floats(bounds_text)
        except ValueError:
            bounds = ()
        if len(bounds) != 2:
            fail("input_bounds must be 'default', 'none' or two numbers", "scenario", "input_bounds")

    return ScenarioConfig(
        name=sc.get("name", "scenario"),
        plant=plant,
        variant=variant,
        disturbance=dist,
        initial_state=tuple(x0),
        dt=sc.get("dt", 1e-3),
        horizon=sc.get("horizon", _DEFAULT_HORIZON[kind]),
        input_bounds=tuple(bounds) if bounds is not None else None,
        observer=ObserverConfig(**ob),
        output_path=sc.get("output_path"),
        seed=seed,
    )


def load_config(path, overrides: Optional[Mapping[str, str]] = None) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path), overrides=overrides)


def config_to_text(cfg: ScenarioConfig) -> str:
    """Fully resolved config text; ``parse_config`` of it reproduces ``cfg``."""
    lines = ["[scenario]", f"name = {cfg.name}", f"dt = {cfg.dt!r}", f"horizon = {cfg.horizon!r}",
             f"seed = {cfg.seed}", "initial_state = " + " ".join(repr(float(v)) for v in cfg.initial_state)]
    if cfg.input_bounds is None:
        lines.append("input_bounds = none")
    else:
        lines.append(f"input_bounds = {cfg.input_bounds[0]!r} {cfg.input_bounds[1]!r}")
    if cfg.output_path:
        lines.append(f"output_path = {cfg.output_path}")

    kind = cfg.plant_kind
    lines += ["", "[plant]", f"kind = {kind}"]
    for key in sorted(_PLANT_KEYS[kind]):
        lines.append(f"{key} = {getattr(cfg.plant, key)!r}")

    lines += ["", "[variant]"]
    v = cfg.variant
    if v is None:
        lines.append("name = none")
    else:
        lines += [f"name = {v.variant.value}", "alpha = " + ", ".join(a.describe() for a in v.alpha_chain)]
        if v.beta is not None:
            lines.append(f"beta = {v.beta.describe()}")
        lines.append(f"sigma = {v.sigma!r}")
        if v.disturbance_bound is not None:
            lines.append(f"disturbance_bound = {v.disturbance_bound!r}")
        lines.append(f"error_bound = {v.error_bound.describe()}")

    d = cfg.disturbance
    lines += ["", "[disturbance]", f"kind = {d.kind}"]
    if d.kind in ("sine", "sum_of_sines"):
        lines.append("terms = " + ", ".join(" ".join(repr(p) for p in term) for term in d.terms))
    elif d.kind == "constant":
        lines.append(f"value = {d.value!r}")
    elif d.kind == "uniform_random_hold":
        lines += [f"amplitude = {d.amplitude!r}", f"hold_dt = {d.hold_dt!r}"]

    o = cfg.observer
    lines += ["", "[observer]", f"enabled = {str(o.enabled).lower()}", f"gain = {o.gain!r}",
              f"d_hat0 = {o.d_hat0!r}"]
    return "\n".join(lines) + "\n"
