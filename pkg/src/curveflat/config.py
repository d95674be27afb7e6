"""Scenario files.

A scenario is a YAML mapping with optional sections; any key left out
takes the default below (the Codogno setting)::

    name: codogno
    horizon: 240              # days
    runs: 100
    lockdown_days: 60         # on-off baseline
    network:
      n_nodes: 16000
      mean_degree: 19         # E[k]; edge probability is E[k]/(N-1)
    epidemic:
      beta_n: 0.0227          # per-link rate with no restrictions
      gamma_E: 0.25
      gamma_I: 0.1428
      p_d_low: 0.005          # death probability while i <= i_th
      p_d_high: 0.02          # ... while i > i_th
      i0_count: 800
      hospitalization_rate: 0.02   # informational only
    control:
      i_th: 0.025             # capacity, fraction of N
      mode: mismatched        # matched: i_ref(0) = i(0); mismatched: i_ref(0) = i_th
      psi_i: 1
      psi_s: 1.5
      epsilon: 1.0e-6
      beta_min_fraction: 0.25
      quantization_levels: 5
    measurement:
      delay_mean: 3
      delay_std: 1
      noise_std: 0.1
      update_interval: 7

The ODE demo (``simulate-ode``) reads an ``ode`` section instead; see
:class:`OdeScenario`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

MODES = ("matched", "mismatched")


class ScenarioError(ValueError):
    """Bad scenario file; the message carries the file position when known."""


@dataclass(frozen=True)
class NetworkConfig:
    n_nodes: int = 16000
    mean_degree: float = 19.0

    def validate(self):
        _check(self.n_nodes >= 2, "network.n_nodes must be >= 2")
        _check(0 < self.mean_degree <= self.n_nodes - 1, "network.mean_degree must lie in (0, N-1]")

    @property
    def edge_probability(self) -> float:
        return self.mean_degree / (self.n_nodes - 1)


@dataclass(frozen=True)
class EpidemicConfig:
    beta_n: float = 0.0227
    gamma_E: float = 0.25
    gamma_I: float = 0.1428
    p_d_low: float = 0.005
    p_d_high: float = 0.02
    i0_count: int = 800
    hospitalization_rate: float = 0.02

    def validate(self):
        _check(self.beta_n > 0, "epidemic.beta_n must be > 0")
        _check(self.gamma_E > 0 and self.gamma_I > 0, "epidemic.gamma_E and gamma_I must be > 0")
        _check(0 <= self.p_d_low <= self.p_d_high <= 1, "need 0 <= p_d_low <= p_d_high <= 1")
        _check(self.i0_count >= 1, "epidemic.i0_count must be >= 1")


@dataclass(frozen=True)
class ControlConfig:
    i_th: float = 0.025
    mode: str = "mismatched"
    psi_i: float = 1.0
    psi_s: float = 1.5
    epsilon: float = 1e-6
    beta_min_fraction: float = 0.25
    quantization_levels: int = 5

    def validate(self):
        _check(0 < self.i_th < 1, "control.i_th must lie in (0, 1)")
        _check(self.mode in MODES, f"control.mode must be one of {MODES}")
        _check(self.psi_s > 0, "control.psi_s must be > 0")
        _check(self.psi_i >= 0, "control.psi_i must be >= 0")
        _check(self.epsilon > 0, "control.epsilon must be > 0")
        _check(0 < self.beta_min_fraction < 1, "control.beta_min_fraction must lie in (0, 1)")
        _check(self.quantization_levels >= 2, "control.quantization_levels must be >= 2")


@dataclass(frozen=True)
class MeasurementConfig:
    delay_mean: float = 3.0
    delay_std: float = 1.0
    noise_std: float = 0.1
    update_interval: int = 7

    def validate(self):
        _check(self.delay_mean >= 0 and self.delay_std >= 0, "delays must be >= 0")
        _check(self.noise_std >= 0, "measurement.noise_std must be >= 0")
        _check(self.update_interval >= 1, "measurement.update_interval must be >= 1")


@dataclass(frozen=True)
class OdeScenario:
    """Closed-loop SIR demo: nominal start ``i0_bar``, true start ``i0``."""

    gamma: float = 0.1
    beta_max: float = 0.22
    beta_min: float = 0.055
    i0_bar: float = 0.1
    i0: float = 0.14
    i_th: float = 0.12
    horizon: float = 200.0
    dt: float = 0.01
    psi_i: float = 50.0
    psi_s: float = 20.0
    epsilon: float = 1e-6

    def validate(self):
        _check(self.gamma > 0, "ode.gamma must be > 0")
        _check(0 < self.i0 < 1 and 0 < self.i0_bar <= self.i_th < 1,
               "ode: need 0 < i0 < 1 and 0 < i0_bar <= i_th < 1")
        _check(self.horizon >= 0 and self.dt > 0, "ode.horizon must be >= 0 and ode.dt > 0")
        _check(self.psi_s > 0, "ode.psi_s must be > 0")
        _check(self.psi_i >= 0, "ode.psi_i must be >= 0")
        _check(0 < self.beta_min < self.beta_max, "ode: need 0 < beta_min < beta_max")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "codogno"
    horizon: int = 240
    runs: int = 100
    lockdown_days: int = 60
    master_seed: int | None = None
    network: NetworkConfig = field(default_factory=NetworkConfig)
    epidemic: EpidemicConfig = field(default_factory=EpidemicConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    ode: OdeScenario = field(default_factory=OdeScenario)

    def validate(self) -> "ScenarioConfig":
        _check(self.horizon >= 1, "horizon must be >= 1")
        _check(self.runs >= 1, "runs must be >= 1")
        _check(0 <= self.lockdown_days <= self.horizon, "lockdown_days must lie in [0, horizon]")
        for sec in (self.network, self.epidemic, self.control, self.measurement, self.ode):
            sec.validate()
        _check(self.epidemic.i0_count < self.network.n_nodes, "i0_count must be below n_nodes")
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        """``dataclasses.replace`` that also accepts ``section__key=value``."""
        top = {}
        nested: dict[str, dict[str, Any]] = {}
        for key, value in changes.items():
            if "__" in key:
                sec, sub = key.split("__", 1)
                nested.setdefault(sec, {})[sub] = value
            else:
                top[key] = value
        for sec, kv in nested.items():
            top[sec] = dataclasses.replace(getattr(self, sec), **kv)
        return dataclasses.replace(self, **top).validate()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check(ok: bool, msg: str):
    if not ok:
        raise ScenarioError(msg)


def _where(node) -> str:
    m = node.start_mark
    return f"{m.name}:{m.line + 1}"


def _build(cls, node, path: str):
    if not isinstance(node, yaml.MappingNode):
        raise ScenarioError(f"{_where(node)}: '{path or 'scenario'}' must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key_node, value_node in node.value:
        key = key_node.value
        if key not in fields:
            raise ScenarioError(f"{_where(key_node)}: unknown key '{path}{key}'")
        ftype = fields[key].type
        sub = _SECTIONS.get(key) if cls is ScenarioConfig else None
        if sub is not None:
            kwargs[key] = _build(sub, value_node, f"{key}.")
            continue
        value = yaml.safe_load(yaml.serialize(value_node))
        try:
            kwargs[key] = _coerce(value, ftype)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{_where(value_node)}: '{path}{key}': {exc}") from None
    try:
        obj = cls(**kwargs)
        if cls is not ScenarioConfig:
            obj.validate()
    except ScenarioError as exc:
        raise ScenarioError(f"{_where(node)}: {exc}") from None
    return obj


def _coerce(value, ftype: str):
    if "int" in ftype and "float" not in ftype:
        if value is None and "None" in ftype:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if ftype == "float":
        if isinstance(value, str):
            value = float(value)  # PyYAML reads "1e-6" as a string
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"expected a number, got {value!r}")
        return float(value)
    if ftype == "str":
        if not isinstance(value, str):
            raise ValueError(f"expected a string, got {value!r}")
    return value


_SECTIONS = {
    "network": NetworkConfig,
    "epidemic": EpidemicConfig,
    "control": ControlConfig,
    "measurement": MeasurementConfig,
    "ode": OdeScenario,
}


def loads_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    try:
        node = yaml.compose(_named(text, source))
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{source}: YAML error: {exc}") from None
    if node is None:
        return ScenarioConfig().validate()
    cfg = _build(ScenarioConfig, node, "")
    try:
        return cfg.validate()
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def _named(text: str, source: str):
    import io

    stream = io.StringIO(text)
    stream.name = source
    return stream


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load a scenario file, or a bundled one by name (e.g. ``codogno``)."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and p.name == str(path):
        bundled = resources.files("curveflat") / "scenarios" / f"{path}.yaml"
        if bundled.is_file():
            return loads_scenario(bundled.read_text(), f"{path}.yaml")
    if not p.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    return loads_scenario(p.read_text(), str(p))
