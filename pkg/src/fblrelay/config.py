"""Scenario configuration: JSON loading with dotted overrides, plus dB/dBm conversion."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .bler import DEFAULT_SAMPLES, DEFAULT_SEED, MIN_SAMPLES
from .channels import SystemParams
from .errors import ConfigError

BLER_AXES = ("power_s_dbm", "power_r_dbm", "omega_rr_db", "blocklength", "payload_bits")
DELAY_AXES = ("log10_bler",)
FORMATS = ("csv", "jsonl")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class Sweep:
    """One swept variable stepping linearly (in its own unit) from start to stop."""

    variable: str
    start: float
    stop: float
    step: float

    def points(self) -> list[float]:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + k * self.step, 12) for k in range(count)]


@dataclass(frozen=True)
class MonteCarlo:
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED


@dataclass(frozen=True)
class ScenarioConfig:
    """Deployment and coding settings (logarithmic units) with run options.

    ``omega_rr_db = None`` models perfect loop-interference cancellation.
    ``power_r_dbm = None`` lets each mode use its optimal relay power with
    the source power as the peak budget.
    """

    omega_sr_db: float = -80.0
    omega_rd_db: float = -85.0
    omega_rr_db: float | None = -110.0
    noise_r_dbm: float = -90.0
    noise_d_dbm: float = -90.0
    power_s_dbm: float = 30.0
    power_r_dbm: float | None = 20.0
    power_c_dbm: float = 30.0
    payload_bits: int = 256
    blocklength: int = 512
    target_bler: float = 1e-3
    quad_tol: float = 1e-9
    sweep: Sweep | None = None
    monte_carlo: MonteCarlo = field(default_factory=MonteCarlo)
    format: str = "csv"

    def system(self, power_s_dbm: float | None = None, power_r_dbm: float | None = None) -> SystemParams:
        """Linear-unit parameters; powers default to zero when not given."""
        return SystemParams(
            omega_sr=db_to_linear(self.omega_sr_db),
            omega_rd=db_to_linear(self.omega_rd_db),
            omega_rr=0.0 if self.omega_rr_db is None else db_to_linear(self.omega_rr_db),
            noise_r=dbm_to_watts(self.noise_r_dbm),
            noise_d=dbm_to_watts(self.noise_d_dbm),
            power_s=0.0 if power_s_dbm is None else dbm_to_watts(power_s_dbm),
            power_r=0.0 if power_r_dbm is None else dbm_to_watts(power_r_dbm),
        )

    def to_dict(self) -> dict:
        return asdict(self)


_REQUIRED = (
    "omega_sr_db", "omega_rd_db", "omega_rr_db", "noise_r_dbm", "noise_d_dbm",
    "power_s_dbm", "power_r_dbm", "power_c_dbm", "payload_bits", "blocklength",
)
_OPTIONAL_FLOATS = ("target_bler", "quad_tol")


def _number(value, path, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    return float(value)


def _integer(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"expected an integer, got {value!r}", path)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", path)
    return int(value)


def _sweep_from(raw, path="sweep"):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    unknown = set(raw) - {"variable", "start", "stop", "step"}
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}", path)
    for key in ("variable", "start", "stop", "step"):
        if key not in raw:
            raise ConfigError("missing field", f"{path}.{key}")
    variable = raw["variable"]
    if variable not in BLER_AXES + DELAY_AXES:
        raise ConfigError(f"unknown sweep variable {variable!r}", f"{path}.variable")
    sweep = Sweep(
        variable,
        _number(raw["start"], f"{path}.start"),
        _number(raw["stop"], f"{path}.stop"),
        _number(raw["step"], f"{path}.step"),
    )
    if not sweep.step > 0:
        raise ConfigError("step must be positive", f"{path}.step")
    if sweep.stop < sweep.start:
        raise ConfigError("sweep range is empty (stop < start)", f"{path}.stop")
    return sweep


def _monte_carlo_from(raw, path="monte_carlo"):
    if not isinstance(raw, dict):
        raise ConfigError("expected an object", path)
    unknown = set(raw) - {"samples", "seed"}
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}", path)
    samples = _integer(raw.get("samples", DEFAULT_SAMPLES), f"{path}.samples", 0)
    if 0 < samples < MIN_SAMPLES:
        raise ConfigError(f"must be 0 (disabled) or >= {MIN_SAMPLES}", f"{path}.samples")
    seed = _integer(raw.get("seed", DEFAULT_SEED), f"{path}.seed", 0)
    if seed >= 2**64:
        raise ConfigError("seed must fit in 64 bits", f"{path}.seed")
    return MonteCarlo(samples, seed)


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a plain mapping (as loaded from JSON) into a ScenarioConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError("missing field", key)
    values = {}
    for key in ("omega_sr_db", "omega_rd_db", "noise_r_dbm", "noise_d_dbm", "power_s_dbm", "power_c_dbm"):
        values[key] = _number(raw[key], key)
    values["omega_rr_db"] = _number(raw["omega_rr_db"], "omega_rr_db", allow_none=True)
    values["power_r_dbm"] = _number(raw["power_r_dbm"], "power_r_dbm", allow_none=True)
    values["payload_bits"] = _integer(raw["payload_bits"], "payload_bits", 1)
    values["blocklength"] = _integer(raw["blocklength"], "blocklength", 2)
    for key in _OPTIONAL_FLOATS:
        if key in raw:
            values[key] = _number(raw[key], key)
    if "target_bler" in values and not 0 < values["target_bler"] < 1:
        raise ConfigError("must lie in (0, 1)", "target_bler")
    if "quad_tol" in values and not values["quad_tol"] > 0:
        raise ConfigError("must be positive", "quad_tol")
    values["sweep"] = _sweep_from(raw.get("sweep"))
    values["monte_carlo"] = _monte_carlo_from(raw.get("monte_carlo", {}))
    fmt = raw.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"must be one of {FORMATS}, got {fmt!r}", "format")
    values["format"] = fmt
    return ScenarioConfig(**values)


def _set_path(tree: dict, dotted: str, value):
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        elif not isinstance(child, dict):
            raise ConfigError("cannot descend into a non-object", dotted)
        node = child
    node[keys[-1]] = value


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``key=value`` strings (dotted keys, JSON values) to a raw mapping."""
    tree = copy.deepcopy(raw)
    for item in overrides or ():
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value", "--set")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(tree, key.strip(), value)
    return tree


def load_raw(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}", "--config") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON ({exc})", "--config") from None


def parse_config(path=None, overrides=None, **flags) -> ScenarioConfig:
    """Build a config from an optional JSON file, ``--set`` overrides and flags.

    Without a file the built-in defaults (the reference deployment) are used.
    ``flags`` map onto fields directly: ``seed``/``samples`` go into
    ``monte_carlo``, ``format`` replaces the output format; None is ignored.
    """
    raw = load_raw(path) if path is not None else ScenarioConfig().to_dict()
    raw = apply_overrides(raw, overrides)
    if flags.get("seed") is not None:
        _set_path(raw, "monte_carlo.seed", flags["seed"])
    if flags.get("samples") is not None:
        _set_path(raw, "monte_carlo.samples", flags["samples"])
    if flags.get("format") is not None:
        raw["format"] = flags["format"]
    return config_from_dict(raw)


def emit_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def at_point(cfg: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    """Copy of ``cfg`` with one sweep variable set to ``value``."""
    if variable in ("blocklength", "payload_bits"):
        if value != int(value) or value < 1:
            raise ConfigError(f"sweep value {value} is not a positive integer", "sweep")
        value = int(value)
    return replace(cfg, **{variable: value})


def log_bler_grid(sweep: Sweep) -> np.ndarray:
    exps = np.array(sweep.points())
    if np.any(exps >= 0):
        raise ConfigError("log10_bler sweep must stay below 0", "sweep")
    return 10.0**exps
