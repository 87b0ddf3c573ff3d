"""Command-line interface.

Each subcommand reads one YAML config, runs its computation, writes a
delimited report (CSV by default, JSON Lines on request) and, when the
report goes to a file, renders a PNG figure next to it.  Headers record
the package version, the command line and the fully resolved
configuration, so a report reproduces bit for bit when rerun.

Exit codes: 0 on success (rows that fail individually carry an error
status instead of aborting the sweep), 2 on configuration errors, 3 on
computation errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import run_comparison, scaling_study
from .config import RunConfig, load_raw, resolve
from .effective import beta_bar, effective_gate
from .errors import ConfigError, SpinPulseError
from .propagation import propagate
from .pulses import TimeGrid
from . import plotting
from .reporting import Report, build_header, write_report

__all__ = ["main", "entry"]

_FIGURE1_TRAPZ_RTOL = 1e-4

_VEC_AXES = ("x", "y", "z")
_GAMMA_CELLS = (
    ("gamma_xx", 0, 0),
    ("gamma_yy", 1, 1),
    ("gamma_zz", 2, 2),
    ("gamma_xy", 0, 1),
    ("gamma_xz", 0, 2),
    ("gamma_yz", 1, 2),
)


def _vec_cells(prefix: str, vector) -> dict:
    return {f"{prefix}_{axis}": float(vector[i]) for i, axis in enumerate(_VEC_AXES)}


def _gamma_cells(tensor) -> dict:
    return {name: float(tensor[i, j]) for name, i, j in _GAMMA_CELLS}


def _sweep_items(cfg: RunConfig) -> list:
    return list(cfg.lambdas) if cfg.lambdas is not None else [None]


def _cmd_effective_params(cfg: RunConfig):
    columns = (
        ["lambda", "j0", "tau"]
        + [f"alpha_{a}" for a in _VEC_AXES]
        + [f"beta_{a}" for a in _VEC_AXES]
        + [f"mu_{a}" for a in _VEC_AXES]
        + [name for name, _, _ in _GAMMA_CELLS]
        + ["lambda_beta", "lambda_alpha", "near_resonance", "quad_order", "quad_change", "status"]
    )
    report = Report(columns=columns)
    profile = cfg.build_profile()
    lams, norms = [], {"|alpha|": [], "|beta|": [], "|mu|": [], "|gamma|": []}
    for requested in _sweep_items(cfg):
        try:
            pulse = cfg.build_pulse(requested)
            result = effective_gate(pulse, profile, cfg.quadrature)
        except SpinPulseError as exc:
            report.add_row(**{"lambda": requested, "status": type(exc).__name__})
            continue
        p = result.params
        report.add_row(
            **{
                "lambda": result.lam,
                "j0": float(pulse.j0),
                "tau": float(getattr(pulse, "tau", np.nan)),
                **_vec_cells("alpha", p.alpha),
                **_vec_cells("beta", p.beta),
                **_vec_cells("mu", p.mu),
                **_gamma_cells(p.gamma),
                "lambda_beta": result.validity["lambda_beta"],
                "lambda_alpha": result.validity["lambda_alpha"],
                "near_resonance": result.validity["near_resonance"],
                "quad_order": max(info.order for info in result.quadrature.values()),
                "quad_change": max(info.change for info in result.quadrature.values()),
                "status": "ok",
            }
        )
        lams.append(result.lam)
        norms["|alpha|"].append(float(np.linalg.norm(p.alpha)))
        norms["|beta|"].append(float(np.linalg.norm(p.beta)))
        norms["|mu|"].append(float(np.linalg.norm(p.mu)))
        norms["|gamma|"].append(float(np.linalg.norm(p.gamma)))

    def figure(path):
        plotting.plot_effective_params(lams, norms, path)

    return report, (figure if lams else None), None


def _cmd_compare(cfg: RunConfig):
    columns = [
        "lambda", "j0", "tau", "distance", "fidelity", "param_gap",
        "lambda_beta", "near_resonance", "steps", "step_diff",
        "unitarity_drift", "status",
    ]
    report = Report(columns=columns)
    profile = cfg.build_profile()
    lams, distances, gaps = [], [], []
    for requested in _sweep_items(cfg):
        try:
            pulse = cfg.build_pulse(requested)
            result = run_comparison(pulse, profile, cfg.quadrature, tol=cfg.tol)
        except SpinPulseError as exc:
            report.add_row(**{"lambda": requested, "status": type(exc).__name__})
            continue
        report.add_row(
            **{
                "lambda": result.lam,
                "j0": float(pulse.j0),
                "tau": float(getattr(pulse, "tau", np.nan)),
                "distance": result.distance.frobenius_phase_free,
                "fidelity": result.distance.fidelity,
                "param_gap": result.param_gap,
                "lambda_beta": result.effective.validity["lambda_beta"],
                "near_resonance": result.effective.validity["near_resonance"],
                "steps": result.numeric.steps,
                "step_diff": result.numeric.step_diff,
                "unitarity_drift": result.numeric.unitarity_drift,
                "status": "ok",
            }
        )
        lams.append(result.lam)
        distances.append(result.distance.frobenius_phase_free)
        gaps.append(result.param_gap)

    def figure(path):
        plotting.plot_compare(lams, distances, gaps, path)

    return report, (figure if lams else None), None


def _cmd_tailor_sweep(cfg: RunConfig):
    columns = [
        "lambda", "j0", "tau", "beta_bar_x", "beta_bar_y", "beta_bar_z",
        "rel_dev", "quad_order", "status",
    ]
    report = Report(columns=columns)
    beta1 = np.asarray(cfg.anisotropy["beta1"], dtype=float)
    if not np.any(beta1):
        raise ConfigError("anisotropy.beta1: tailor-sweep needs a nonzero vector")
    profile = cfg.build_profile()
    target = beta1 * (8.0 * cfg.pulse["j0_ref"] / math.pi**2)
    target_scale = float(np.max(np.abs(target)))
    lams, j0s, taus, devs = [], [], [], []
    worst = 0.0
    for requested in _sweep_items(cfg):
        try:
            pulse = cfg.build_pulse(requested)
            value, info = beta_bar(pulse, profile, cfg.quadrature)
        except SpinPulseError as exc:
            report.add_row(**{"lambda": requested, "status": type(exc).__name__})
            continue
        rel_dev = float(np.max(np.abs(value - target))) / target_scale
        worst = max(worst, rel_dev)
        report.add_row(
            **{
                "lambda": pulse.lam,
                "j0": pulse.j0,
                "tau": pulse.tau,
                "beta_bar_x": float(value[0]),
                "beta_bar_y": float(value[1]),
                "beta_bar_z": float(value[2]),
                "rel_dev": rel_dev,
                "quad_order": info.order,
                "status": "ok",
            }
        )
        lams.append(pulse.lam)
        j0s.append(pulse.j0)
        taus.append(pulse.tau)
        devs.append(rel_dev)

    failure = None
    if worst > cfg.constancy_rtol:
        failure = (
            f"tailor-sweep: mean vector deviates by {worst:.3g} relative, above "
            f"the constancy budget {cfg.constancy_rtol:.3g}"
        )

    def figure(path):
        plotting.plot_tailor_sweep(lams, j0s, taus, devs, path)

    return report, (figure if lams else None), failure


def _cmd_propagate(cfg: RunConfig):
    columns = ["lambda", "t_min", "t_max", "steps", "step_diff", "unitarity_drift"]
    gate_columns = []
    for i in range(4):
        for j in range(4):
            gate_columns += [f"g{i}{j}_re", f"g{i}{j}_im"]
    report = Report(columns=columns + gate_columns)
    pulse = cfg.build_pulse(None)
    profile = cfg.build_profile()
    result = propagate(pulse, profile, tol=cfg.tol, step_cap=cfg.step_cap)
    cells = {
        "lambda": float(pulse.lam),
        "t_min": result.grid.t_min,
        "t_max": result.grid.t_max,
        "steps": result.steps,
        "step_diff": result.step_diff,
        "unitarity_drift": result.unitarity_drift,
    }
    for i in range(4):
        for j in range(4):
            cells[f"g{i}{j}_re"] = float(result.gate[i, j].real)
            cells[f"g{i}{j}_im"] = float(result.gate[i, j].imag)
    report.add_row(**cells)

    times = TimeGrid.from_pulse(pulse).linspace(1001)
    envelope = pulse.J(times)
    integral = pulse.x(times)

    def figure(path):
        plotting.plot_propagate(times, envelope, integral, path)

    return report, figure, None


def _cmd_scaling(cfg: RunConfig):
    columns = ["order", "scale", "strength", "distance", "slope", "status"]
    report = Report(columns=columns)
    pulse = cfg.build_pulse(None)
    profile = cfg.build_profile()
    if profile is None:
        raise ConfigError("anisotropy.beta1: scaling needs a nonzero first-order profile")
    curves = []
    for order in cfg.orders:
        try:
            study = scaling_study(
                pulse, profile, cfg.scales, order=order,
                spec=cfg.quadrature, tol=cfg.tol,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        except SpinPulseError as exc:
            for scale in sorted(cfg.scales):
                report.add_row(order=order, scale=float(scale), status=type(exc).__name__)
            continue
        for scale, strength, distance in zip(
            study.scales, study.strengths, study.distances
        ):
            report.add_row(
                order=order,
                scale=float(scale),
                strength=float(strength),
                distance=float(distance),
                slope=study.slope,
                status="ok",
            )
        curves.append((order, study.strengths, study.distances, study.slope))

    def figure(path):
        plotting.plot_scaling(curves, path)

    return report, (figure if curves else None), None


def _cmd_figure1(cfg: RunConfig):
    pulses = [cfg.build_pulse(requested) for requested in _sweep_items(cfg)]
    lo = min(pulse.window()[0] for pulse in pulses)
    hi = max(pulse.window()[1] for pulse in pulses)
    times = np.linspace(lo, hi, cfg.figure_samples)
    labels, curves = [], []
    for pulse in pulses:
        if pulse.family == "custom":
            curve = np.zeros_like(times)
            inside = (times >= pulse.t_min) & (times <= pulse.t_max)
            curve[inside] = pulse.J(times[inside])
        else:
            curve = pulse.J(times)
        recovered = float(np.trapezoid(curve, times))
        rel = abs(recovered - pulse.lam) / pulse.lam
        if rel > _FIGURE1_TRAPZ_RTOL:
            raise SpinPulseError(
                f"figure1: sampled envelope at lambda = {pulse.lam:.6g} integrates "
                f"back with relative error {rel:.3g} (budget {_FIGURE1_TRAPZ_RTOL}); "
                f"increase figure.samples"
            )
        labels.append(f"lam_{pulse.lam:.6g}")
        curves.append(curve)
    columns = ["t"] + [f"J_{label}" for label in labels]
    report = Report(columns=columns)
    for i, t in enumerate(times):
        cells = {"t": float(t)}
        for label, curve in zip(labels, curves):
            cells[f"J_{label}"] = float(curve[i])
        report.add_row(**cells)

    def figure(path):
        plotting.plot_pulse_family(times, curves, labels, path)

    return report, figure, None


_IMPLEMENTATIONS = {
    "effective-params": _cmd_effective_params,
    "compare": _cmd_compare,
    "tailor-sweep": _cmd_tailor_sweep,
    "propagate": _cmd_propagate,
    "scaling": _cmd_scaling,
    "figure1": _cmd_figure1,
}

_HELP = {
    "effective-params": "pulse averages of the anisotropy across a strength grid",
    "compare": "distance between time-ordered and single-exponential gates",
    "tailor-sweep": "tailored pulse shapes holding the mean vector fixed",
    "propagate": "one converged time-ordered gate with diagnostics",
    "scaling": "power law of the model error in the anisotropy strength",
    "figure1": "sampled envelope family for the configured strengths",
}

_QUAD_COMMANDS = ("effective-params", "compare", "tailor-sweep", "scaling")
_PROP_COMMANDS = ("compare", "propagate", "scaling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinpulse",
        description="Pulsed two-spin gates and their effective anisotropy.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, impl_help in _HELP.items():
        sub = subparsers.add_parser(name, help=impl_help)
        sub.add_argument("--config", help="YAML configuration file")
        sub.add_argument("--out", help="report path; stdout when omitted")
        sub.add_argument(
            "--format", choices=("csv", "jsonl"), default="csv",
            help="report format (default csv)",
        )
        sub.add_argument(
            "--no-plot", action="store_true",
            help="skip the PNG figure rendered next to --out",
        )
        if name in _QUAD_COMMANDS:
            sub.add_argument(
                "--rtol", type=float, help="override quadrature relative target"
            )
        if name in _PROP_COMMANDS:
            sub.add_argument(
                "--tol", type=float, help="override propagation tolerance"
            )
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    rtol = getattr(args, "rtol", None)
    if rtol is not None:
        if rtol <= 0.0:
            raise ConfigError(f"--rtol: must be positive, got {rtol!r}")
        cfg = dataclasses.replace(
            cfg, quadrature=dataclasses.replace(cfg.quadrature, rtol=rtol)
        )
    tol = getattr(args, "tol", None)
    if tol is not None:
        if not (1e-13 <= tol <= 1e-6):
            raise ConfigError(f"--tol: must lie in [1e-13, 1e-6], got {tol!r}")
        cfg = dataclasses.replace(cfg, tol=tol)
    return cfg


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    try:
        raw = load_raw(args.config) if args.config else {}
        cfg = _apply_overrides(resolve(raw, args.command), args)
        report, figure, failure = _IMPLEMENTATIONS[args.command](cfg)
        report.header = build_header(
            __version__, "spinpulse " + " ".join(argv), cfg.flatten()
        )
        write_report(report, args.out, args.format)
        if args.out and not args.no_plot and figure is not None:
            figure(str(Path(args.out).with_suffix(".png")))
        if failure is not None:
            print(f"error: {failure}", file=sys.stderr)
            return 3
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpinPulseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
