"""Strict YAML configuration for the command-line interface.

Every command accepts one YAML mapping.  Keys are validated against the
command's schema: unknown keys, keys from the wrong pulse family and
values of the wrong type or sign all raise ConfigError naming the dotted
key path.  Defaults are filled in so the resolved configuration written
into report headers fully reproduces a run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .effective import QuadratureSpec
from .errors import ConfigError
from .pulses import AnisotropyProfile, SechPulse, TabulatedPulse, tailored_sech

__all__ = ["RunConfig", "load_raw", "resolve", "DEFAULT_LAMBDAS"]

#: default strength grid for sweep commands: pi/4, pi/2, ..., 7*pi/4
DEFAULT_LAMBDAS = [k * math.pi / 4.0 for k in range(1, 8)]

_COMMAND_SECTIONS = {
    "effective-params": ("pulse", "anisotropy", "lambdas", "quadrature"),
    "compare": ("pulse", "anisotropy", "lambdas", "quadrature", "propagation"),
    "tailor-sweep": ("pulse", "anisotropy", "lambdas", "quadrature", "tailor"),
    "propagate": ("pulse", "anisotropy", "propagation"),
    "scaling": ("pulse", "anisotropy", "scales", "orders", "quadrature", "propagation"),
    "figure1": ("pulse", "lambdas", "figure"),
}

_SWEEP_COMMANDS = ("effective-params", "compare", "tailor-sweep", "figure1")

_FAMILY_KEYS = {
    "sech2": ("j0", "tau", "t0"),
    "tailored-sech2": ("j0_ref", "tau_ref", "t0", "lam"),
    "custom": ("times", "values", "t0"),
}

_GAMMA_MODELS = ("none", "rotated-exchange")


def _require_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_positive(value, path: str) -> float:
    out = _as_float(value, path)
    if out <= 0.0:
        raise ConfigError(f"{path}: must be positive, got {out!r}")
    return out


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_float_list(value, path: str, positive: bool = False) -> list:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{path}: expected a non-empty list of numbers")
    out = [_as_float(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if positive and any(v <= 0.0 for v in out):
        raise ConfigError(f"{path}: entries must be positive")
    return out


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one command invocation."""

    experiment: str
    pulse: dict
    anisotropy: dict
    lambdas: Optional[list]
    scales: list
    orders: list
    quadrature: QuadratureSpec
    tol: float
    step_cap: int
    constancy_rtol: float
    figure_samples: int

    def build_pulse(self, lam: Optional[float] = None):
        """Pulse object for the configured family.

        Sweep commands pass ``lam``: the plain family holds its width and
        rescales the height to j0 = lam / tau, the tailored family uses
        its reference pair, and tables keep their intrinsic strength.
        """
        p = self.pulse
        family = p["family"]
        if family == "sech2":
            if lam is None:
                return SechPulse(j0=p["j0"], tau=p["tau"], t0=p["t0"])
            return SechPulse(j0=lam / p["tau"], tau=p["tau"], t0=p["t0"])
        if family == "tailored-sech2":
            strength = p["lam"] if lam is None else lam
            return tailored_sech(
                strength, j0_ref=p["j0_ref"], tau_ref=p["tau_ref"], t0=p["t0"]
            )
        return TabulatedPulse(p["times"], p["values"], t0=p.get("t0"))

    def build_profile(self) -> Optional[AnisotropyProfile]:
        beta1 = np.asarray(self.anisotropy["beta1"], dtype=float)
        model = self.anisotropy["gamma_model"]
        if not np.any(beta1) and model == "none":
            return None
        return AnisotropyProfile(beta1=beta1, gamma_model=model)

    def flatten(self) -> list:
        """Sorted (dotted key, printable value) pairs of the resolved run."""

        def fmt(value):
            if isinstance(value, float):
                return repr(value)
            if isinstance(value, (list, tuple)):
                return "[" + ", ".join(fmt(v) for v in value) + "]"
            return str(value)

        sections = _COMMAND_SECTIONS[self.experiment]
        items = [("experiment", self.experiment)]
        for key, value in self.pulse.items():
            items.append((f"pulse.{key}", fmt(value)))
        if "anisotropy" in sections:
            items.append(("anisotropy.beta1", fmt(self.anisotropy["beta1"])))
            items.append(("anisotropy.gamma_model", self.anisotropy["gamma_model"]))
        if "lambdas" in sections and self.lambdas is not None:
            items.append(("lambdas", fmt(self.lambdas)))
        if "scales" in sections:
            items.append(("scales", fmt(self.scales)))
            items.append(("orders", fmt(self.orders)))
        if "quadrature" in sections:
            items.append(("quadrature.base_order", str(self.quadrature.base_order)))
            items.append(("quadrature.rtol", fmt(self.quadrature.rtol)))
            items.append(("quadrature.abs_floor", fmt(self.quadrature.abs_floor)))
        if "propagation" in sections:
            items.append(("propagation.tol", fmt(self.tol)))
            items.append(("propagation.step_cap", str(self.step_cap)))
        if "tailor" in sections:
            items.append(("tailor.constancy_rtol", fmt(self.constancy_rtol)))
        if "figure" in sections:
            items.append(("figure.samples", str(self.figure_samples)))
        return sorted(items)


def load_raw(path: str) -> dict:
    """Read one YAML mapping from ``path``."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return raw


def _resolve_pulse(section: dict, command: str) -> dict:
    default_family = (
        "tailored-sech2" if command in ("tailor-sweep", "figure1") else "sech2"
    )
    family = section.get("family", default_family)
    if family not in _FAMILY_KEYS:
        raise ConfigError(
            f"pulse.family: unknown family {family!r}; "
            f"choose from {sorted(_FAMILY_KEYS)}"
        )
    if command == "tailor-sweep" and family != "tailored-sech2":
        raise ConfigError(
            f"pulse.family: tailor-sweep requires 'tailored-sech2', got {family!r}"
        )
    allowed = _FAMILY_KEYS[family]
    for key in section:
        if key == "family":
            continue
        if key not in allowed:
            if any(key in keys for keys in _FAMILY_KEYS.values()):
                raise ConfigError(
                    f"pulse.{key}: does not apply to family {family!r}"
                )
            raise ConfigError(f"pulse.{key}: unknown key")

    resolved = {"family": family}
    if family == "sech2":
        resolved["j0"] = _as_positive(section.get("j0", 1.0), "pulse.j0")
        resolved["tau"] = _as_positive(section.get("tau", math.pi), "pulse.tau")
        resolved["t0"] = _as_float(section.get("t0", 0.0), "pulse.t0")
    elif family == "tailored-sech2":
        resolved["j0_ref"] = _as_positive(section.get("j0_ref", 1.0), "pulse.j0_ref")
        resolved["tau_ref"] = _as_positive(
            section.get("tau_ref", math.pi), "pulse.tau_ref"
        )
        resolved["t0"] = _as_float(section.get("t0", 0.0), "pulse.t0")
        if command in _SWEEP_COMMANDS:
            if "lam" in section:
                raise ConfigError(
                    "pulse.lam: sweep commands take strengths from 'lambdas'"
                )
        else:
            if "lam" not in section:
                raise ConfigError(
                    f"pulse.lam: required for family 'tailored-sech2' under "
                    f"'{command}'"
                )
            lam = _as_positive(section["lam"], "pulse.lam")
            if not lam < 2.0 * math.pi:
                raise ConfigError(
                    f"pulse.lam: must lie inside (0, 2*pi), got {lam!r}"
                )
            resolved["lam"] = lam
    else:
        if "times" not in section or "values" not in section:
            raise ConfigError("pulse.times / pulse.values: required for family 'custom'")
        times = _as_float_list(section["times"], "pulse.times")
        values = _as_float_list(section["values"], "pulse.values")
        if len(times) != len(values):
            raise ConfigError("pulse.values: must match pulse.times in length")
        resolved["times"] = times
        resolved["values"] = values
        if "t0" in section:
            resolved["t0"] = _as_float(section["t0"], "pulse.t0")
    return resolved


def _resolve_anisotropy(section: dict) -> dict:
    for key in section:
        if key not in ("beta1", "gamma_model"):
            raise ConfigError(f"anisotropy.{key}: unknown key")
    beta1 = section.get("beta1", [0.0, 0.0, 0.01])
    beta1 = _as_float_list(beta1, "anisotropy.beta1")
    if len(beta1) != 3:
        raise ConfigError("anisotropy.beta1: expected exactly 3 components")
    model = section.get("gamma_model", "none")
    if model not in _GAMMA_MODELS:
        raise ConfigError(
            f"anisotropy.gamma_model: must be one of {_GAMMA_MODELS}, got {model!r}"
        )
    return {"beta1": beta1, "gamma_model": model}


def _resolve_quadrature(section: dict) -> QuadratureSpec:
    for key in section:
        if key not in ("base_order", "rtol", "abs_floor"):
            raise ConfigError(f"quadrature.{key}: unknown key")
    try:
        return QuadratureSpec(
            base_order=_as_int(section.get("base_order", 64), "quadrature.base_order"),
            rtol=_as_positive(section.get("rtol", 1e-10), "quadrature.rtol"),
            abs_floor=_as_float(section.get("abs_floor", 1e-14), "quadrature.abs_floor"),
        )
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from exc


def resolve(raw: dict, command: str) -> RunConfig:
    """Validate ``raw`` against the schema of ``command``."""
    if command not in _COMMAND_SECTIONS:
        raise ConfigError(f"unknown command {command!r}")
    raw = _require_mapping(raw, "config")
    experiment = raw.get("experiment", command)
    if experiment != command:
        raise ConfigError(
            f"experiment: config is for {experiment!r} but the command is "
            f"{command!r}"
        )
    sections = _COMMAND_SECTIONS[command]
    for key in raw:
        if key != "experiment" and key not in sections:
            raise ConfigError(f"unknown key {key!r} for command {command!r}")

    pulse = _resolve_pulse(_require_mapping(raw.get("pulse"), "pulse"), command)
    anisotropy = _resolve_anisotropy(
        _require_mapping(raw.get("anisotropy"), "anisotropy")
    )

    lambdas: Optional[list] = None
    if "lambdas" in sections:
        if pulse["family"] == "custom":
            if "lambdas" in raw:
                raise ConfigError(
                    "lambdas: a custom table fixes its own strength; drop this key"
                )
        else:
            lambdas = _as_float_list(
                raw.get("lambdas", DEFAULT_LAMBDAS), "lambdas", positive=True
            )

    scales = [1.0, 2.0, 4.0]
    orders = [1, 2]
    if "scales" in sections:
        scales = _as_float_list(raw.get("scales", scales), "scales", positive=True)
        orders = raw.get("orders", orders)
        if not isinstance(orders, (list, tuple)) or not orders:
            raise ConfigError("orders: expected a non-empty list drawn from [1, 2]")
        orders = [_as_int(o, f"orders[{i}]") for i, o in enumerate(orders)]
        if any(o not in (1, 2) for o in orders):
            raise ConfigError("orders: entries must be 1 or 2")

    quadrature = _resolve_quadrature(
        _require_mapping(raw.get("quadrature"), "quadrature")
    )

    tol = 1e-11
    step_cap = 2**22
    if "propagation" in sections:
        section = _require_mapping(raw.get("propagation"), "propagation")
        for key in section:
            if key not in ("tol", "step_cap"):
                raise ConfigError(f"propagation.{key}: unknown key")
        tol = _as_positive(section.get("tol", tol), "propagation.tol")
        if not (1e-13 <= tol <= 1e-6):
            raise ConfigError(
                f"propagation.tol: must lie in [1e-13, 1e-6], got {tol!r}"
            )
        step_cap = _as_int(section.get("step_cap", step_cap), "propagation.step_cap")
        if step_cap < 2**11:
            raise ConfigError("propagation.step_cap: must be at least 2048")

    constancy_rtol = 1e-9
    if "tailor" in sections:
        section = _require_mapping(raw.get("tailor"), "tailor")
        for key in section:
            if key != "constancy_rtol":
                raise ConfigError(f"tailor.{key}: unknown key")
        constancy_rtol = _as_positive(
            section.get("constancy_rtol", constancy_rtol), "tailor.constancy_rtol"
        )

    figure_samples = 1001
    if "figure" in sections:
        section = _require_mapping(raw.get("figure"), "figure")
        for key in section:
            if key != "samples":
                raise ConfigError(f"figure.{key}: unknown key")
        figure_samples = _as_int(section.get("samples", figure_samples), "figure.samples")
        if figure_samples < 16:
            raise ConfigError("figure.samples: must be at least 16")

    return RunConfig(
        experiment=command,
        pulse=pulse,
        anisotropy=anisotropy,
        lambdas=lambdas,
        scales=scales,
        orders=orders,
        quadrature=quadrature,
        tol=tol,
        step_cap=step_cap,
        constancy_rtol=constancy_rtol,
        figure_samples=figure_samples,
    )
