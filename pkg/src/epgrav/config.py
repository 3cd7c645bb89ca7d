"""Run configuration: YAML in, validated dataclasses out, and back again."""

from dataclasses import asdict, dataclass, field, fields, is_dataclass
import copy
import hashlib
import json
import math
from pathlib import Path

import yaml

from .dynamics import UNIT_MODES, SystemParams
from .errors import ValidationError
from .yukawa import SlabGeometry

DEFAULT_CONFIG = Path(__file__).with_name("configs") / "paper_literal.yaml"


@dataclass
class SystemSpec:
    omega_m: float = 1e5
    kappa: float = 1e7
    g0: float = 50.0
    J: float = 1e5
    delta: float = 1e5
    gamma1: float = 0.0
    gamma2: float = 0.0
    Q: float = 1.2e7
    # null: membrane mass from the geometry (area * t_test * rho_test)
    m_t: float | None = None
    drive_signs: tuple = (1, -1)


@dataclass
class GeometrySpec:
    t_test: float = 50e-9
    t_source: float = 500e-9
    gap: float = 100e-9
    area: float = 1e-6
    rho_test: float = 3100.0
    rho_a: float = 19300.0
    rho_b: float = 2330.0


@dataclass
class SweepSpec:
    n_min: float = 0.0
    n_max: float = 1e11
    points: int = 1001
    spacing: str = "linear"


@dataclass
class EPSpec:
    bracket: tuple = (1e8, 1e12)


@dataclass
class ResponseSpec:
    # perturbation window in units of omega_m
    window: tuple = (1e-6, 1e-3)
    points: int = 31
    direction: str | int = "auto"
    curve_shift: float = 1e-3
    curve_points: int = 401


@dataclass
class SensingSpec:
    Y_override: float | None = None
    r_char: float = 375e-9


@dataclass
class ExclusionSpec:
    lambda_min: float = 1e-8
    lambda_max: float = 1e-4
    points: int = 81
    overlays: tuple = ()


@dataclass
class TimeDomainSpec:
    # operating point as a fraction of the EP photon number
    n_fraction: float = 0.5
    # explicit t_span overrides the automatic choice from beat_periods
    t_span: float | None = None
    beat_periods: float = 20.0
    growth_efolds: float = 30.0
    samples_per_period: float = 25.0
    initial_state: tuple = (1.0, 0.0, 0.0, 0.0)
    rtol: float = 1e-10


@dataclass
class RunConfig:
    unit_mode: str = "paper-literal"
    seed: int = 0
    system: SystemSpec = field(default_factory=SystemSpec)
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    ep: EPSpec = field(default_factory=EPSpec)
    response: ResponseSpec = field(default_factory=ResponseSpec)
    sensing: SensingSpec = field(default_factory=SensingSpec)
    exclusion: ExclusionSpec = field(default_factory=ExclusionSpec)
    timedomain: TimeDomainSpec = field(default_factory=TimeDomainSpec)
    base_dir: str = field(default=".", compare=False, repr=False)

    def to_dict(self):
        d = _plain(asdict(self))
        d.pop("base_dir")
        return d

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def sha256(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def geometry_obj(self):
        return SlabGeometry(**asdict(self.geometry))

    def system_params(self, n_cav=0.0):
        s = asdict(self.system)
        if s["m_t"] is None:
            s["m_t"] = self.geometry_obj().test_mass
        return SystemParams.from_frequencies(unit_mode=self.unit_mode, n_cav=n_cav, **s)

    def overlay_paths(self):
        return [(Path(self.base_dir) / p) for p in self.exclusion.overlays]


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _number(value, path, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, str):
        # YAML 1.1 reads "1e8" (no dot) as a string
        try:
            value = float(value)
        except ValueError:
            raise ValidationError("expected a number", path) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError("expected a number", path)
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError("must be finite", path)
    return value


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError("expected an integer", path)
    return value


def _coerce(value, default, path):
    # the expected type follows the default value
    if path.endswith("direction"):
        if value == "auto" or (not isinstance(value, bool) and value in (1, -1)):
            return value
        raise ValidationError("expected 'auto', 1 or -1", path)
    if path.endswith("overlays"):
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
            raise ValidationError("expected a list of file paths", path)
        return tuple(value)
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ValidationError("expected a list", path)
        if default and all(isinstance(d, int) for d in default):
            return tuple(_integer(v, f"{path}[{i}]") for i, v in enumerate(value))
        return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ValidationError("expected a string", path)
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        return _integer(value, path)
    return _number(value, path, allow_none=default is None)


def _build(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValidationError("expected a mapping", path or "<root>")
    names = {f.name: f for f in fields(cls) if f.name != "base_dir"}
    unknown = sorted(set(data) - set(names))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ValidationError("unknown field", where)
    kwargs = {}
    for name, f in names.items():
        sub = f"{path}.{name}" if path else name
        default = f.default_factory() if callable(f.default_factory) else f.default
        if name not in data:
            continue
        if is_dataclass(default):
            kwargs[name] = _build(type(default), data[name], sub)
        else:
            kwargs[name] = _coerce(data[name], default, sub)
    return cls(**kwargs)


def _require(cond, message, path):
    if not cond:
        raise ValidationError(message, path)


def validate(cfg):
    """Semantic checks; every failure names the offending field."""
    _require(cfg.unit_mode in UNIT_MODES, f"must be one of {UNIT_MODES}", "unit_mode")
    for section, build in (("geometry", cfg.geometry_obj), ("system", cfg.system_params)):
        try:
            build()
        except ValidationError as exc:
            raise ValidationError(exc.message, f"{section}.{exc.path}") from None

    s = cfg.sweep
    _require(s.n_min >= 0, "must be >= 0", "sweep.n_min")
    _require(s.points >= 1, "must be >= 1", "sweep.points")
    _require(s.points == 1 or s.n_max > s.n_min, "must exceed sweep.n_min", "sweep.n_max")
    _require(s.spacing in ("linear", "log"), "must be 'linear' or 'log'", "sweep.spacing")
    _require(s.spacing != "log" or s.n_min > 0, "log spacing needs n_min > 0", "sweep.n_min")

    lo, hi = (cfg.ep.bracket + (None, None))[:2]
    _require(len(cfg.ep.bracket) == 2 and 0 <= lo < hi, "must be [lo, hi] with 0 <= lo < hi",
             "ep.bracket")

    r = cfg.response
    _require(len(r.window) == 2 and 0 < r.window[0] < r.window[1],
             "must be [lo, hi] with 0 < lo < hi", "response.window")
    _require(r.points >= 8, "must be >= 8", "response.points")
    _require(r.curve_shift > 0, "must be > 0", "response.curve_shift")
    _require(r.curve_points >= 2, "must be >= 2", "response.curve_points")

    se = cfg.sensing
    _require(se.Y_override is None or se.Y_override > 0, "must be > 0", "sensing.Y_override")
    _require(se.r_char > 0, "must be > 0", "sensing.r_char")

    x = cfg.exclusion
    _require(x.lambda_min > 0, "must be > 0", "exclusion.lambda_min")
    _require(x.lambda_max > x.lambda_min, "must exceed exclusion.lambda_min",
             "exclusion.lambda_max")
    _require(x.points >= 2, "must be >= 2", "exclusion.points")
    for i, p in enumerate(cfg.overlay_paths()):
        _require(p.is_file(), f"file not found: {p}", f"exclusion.overlays[{i}]")

    t = cfg.timedomain
    _require(t.n_fraction >= 0, "must be >= 0", "timedomain.n_fraction")
    _require(t.t_span is None or t.t_span > 0, "must be > 0", "timedomain.t_span")
    _require(t.beat_periods > 0, "must be > 0", "timedomain.beat_periods")
    _require(t.growth_efolds > 0, "must be > 0", "timedomain.growth_efolds")
    _require(t.samples_per_period >= 20, "must be >= 20", "timedomain.samples_per_period")
    _require(len(t.initial_state) == 4, "must have 4 entries", "timedomain.initial_state")
    _require(t.rtol > 0, "must be > 0", "timedomain.rtol")
    return cfg


def from_dict(data, base_dir="."):
    cfg = _build(RunConfig, data, "")
    cfg.base_dir = str(base_dir)
    return validate(cfg)


def _set_dotted(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def parse_override(text):
    """``key.sub=value`` with the value read as YAML."""
    if "=" not in text:
        raise ValidationError(f"override must look like key=value, got {text!r}", "--override")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ValidationError("empty key", "--override")
    return key, yaml.safe_load(raw)


def load(path=None, overrides=(), unit_mode=None, seed=None):
    """Read a YAML config (the paper-literal defaults when ``path`` is None)."""
    path = Path(path) if path is not None else DEFAULT_CONFIG
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}", str(path)) from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"malformed YAML: {exc}", str(path)) from None
    data = copy.deepcopy(data)
    for item in overrides:
        key, value = parse_override(item)
        _set_dotted(data, key, value)
    if unit_mode is not None:
        data["unit_mode"] = unit_mode
    if seed is not None:
        data["seed"] = seed
    return from_dict(data, base_dir=path.parent)
