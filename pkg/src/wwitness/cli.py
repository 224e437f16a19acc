"""Command-line interface of wwitness."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd
import yaml

from ._config import OPTIONS, set_options
from .experiment import (
    DetectorModel,
    ExperimentError,
    ExperimentReport,
    SourceModel,
    click_distribution,
    phase_scan,
    prepare_mixed_w,
    resolve_beta,
    run_modified_scheme,
    run_single_setting_scheme,
    sweep_critical_efficiency,
)
from .fock import FockSpaceError, MixedState, make_basis_state, vacuum
from .optics import OpticsError, WStateSpec, apply_network, invert_network, synthesize_w_network
from .witness import ModifiedWitness, WitnessError, alpha_w, optimize_reference

__all__ = ["UsageError", "emit_report", "main", "run_command"]

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "text")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NOT_DETECTED = 3


class UsageError(ValueError):
    """Invalid combination of command-line inputs."""


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from err
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"{value} is outside [0, 1]")
    return value


def _mode_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        bounds = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected N or N_min..N_max, got {text!r}") from err
    if bounds[0] < 1 or bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"invalid mode range {text!r}")
    return bounds


def _beta_rule(text: str) -> str | float:
    if text in ("near-one", "zero"):
        return text
    try:
        return float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected 'near-one', 'zero' or a number, got {text!r}") from err


def _round(obj: Any, digits: int) -> Any:
    # fixed significant digits for byte-stable output
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{digits}g}")
    if isinstance(obj, dict):
        return {str(k): _round(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v, digits) for v in obj]
    return obj


def emit_report(report: Any, fmt: str = "json", digits: int | None = None) -> str:
    """Serialize a report deterministically.

    Parameters
    ----------
    report : ExperimentReport, pd.DataFrame, dict or float
        Report to emit. Tables are the only reports with a CSV form.
    fmt : {"json", "csv", "text"}
        Output format.
    digits : int, optional
        Significant digits of numbers. Defaults to the ``float_digits`` option.

    Returns
    -------
    str
    """
    digits = digits or OPTIONS["float_digits"]
    if fmt not in FORMATS:
        raise UsageError(f"Unknown format {fmt!r}; expected one of {FORMATS}.")
    if fmt == "csv":
        if not isinstance(report, pd.DataFrame):
            raise UsageError("CSV output is only available for tables.")
        return report.to_csv(index=False, float_format=f"%.{digits}g", lineterminator="\n").rstrip("\n")

    if isinstance(report, ExperimentReport):
        payload: Any = report.to_dict()
    elif isinstance(report, pd.DataFrame):
        payload = report.to_dict(orient="records")
    else:
        payload = report
    payload = _round(payload, digits)

    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2)
    if isinstance(report, ExperimentReport):
        return report.to_text(digits)
    if isinstance(report, pd.DataFrame):
        return report.to_string(index=False, float_format=lambda x: f"{x:.{digits}g}")
    if isinstance(payload, (int, float)):
        return f"{payload:.{digits}g}"
    return yaml.safe_dump(payload, sort_keys=True).rstrip("\n")


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        config = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as err:
        raise UsageError(f"Cannot read config {path}: {err}") from err
    if not isinstance(config, dict):
        raise UsageError(f"Config {path} must hold a mapping.")
    return config


def _parse_coeffs(text: str) -> WStateSpec:
    text = text.strip()
    if text[:1] in "[{":
        try:
            return WStateSpec.from_dict(json.loads(text))
        except json.JSONDecodeError as err:
            raise UsageError(f"Malformed JSON coefficients: {err}") from err
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise UsageError(f"Coefficients must be comma-separated reals: {text!r}") from err
    return WStateSpec.from_values(values)


def _config_spec(entry: Any, key: str) -> WStateSpec:
    try:
        return WStateSpec.from_dict(entry)
    except OpticsError as err:
        raise UsageError(f"Config entry '{key}': {err}") from err


def _single_n(args: argparse.Namespace) -> int | None:
    if args.n is None:
        return None
    lo, hi = args.n
    if lo != hi:
        raise UsageError("A mode range is only accepted by 'sweep'.")
    return lo


def _spec(args: argparse.Namespace, config: dict[str, Any]) -> WStateSpec:
    if args.coeffs is not None:
        return _parse_coeffs(args.coeffs)
    n = _single_n(args)
    if args.symmetric:
        if n is None:
            raise UsageError("--symmetric needs --n.")
        return WStateSpec.symmetric(n)
    if "spec" in config:
        return _config_spec(config["spec"], "spec")
    raise UsageError("No state given: use --coeffs, --symmetric --n N, or a config with a 'spec' entry.")


def _reference(args: argparse.Namespace, config: dict[str, Any], spec: WStateSpec) -> WStateSpec | None:
    ref = args.reference if args.reference is not None else config.get("reference")
    if ref is None:
        return None
    if ref == "optimal":
        return optimize_reference(spec, seed=args.seed).reference
    if ref == "symmetric":
        return WStateSpec.symmetric(spec.modes)
    if isinstance(ref, str):
        return _parse_coeffs(ref)
    return _config_spec(ref, "reference")


def _model_value(args: argparse.Namespace, config: dict[str, Any], flag: str, key: str, default=None) -> float:
    value = getattr(args, flag)
    if value is None:
        value = config.get(key, default)
    if value is None:
        raise UsageError(f"--{flag} (or '{key}' in the config) is required.")
    try:
        return _probability(str(value))
    except argparse.ArgumentTypeError as err:
        raise UsageError(f"{key}: {err}") from err


def _rule(args: argparse.Namespace) -> str | float:
    return "near-one" if args.beta_rule is None else args.beta_rule


def _alpha(args, config):
    if args.beta is not None:
        n = _single_n(args) or _spec(args, config).modes
        return ModifiedWitness.build(n, args.beta).to_dict(), "text", EXIT_OK
    spec = _spec(args, config)
    if args.format == "json":
        return {"type": "basic", "alpha": alpha_w(spec), "spec": spec.to_dict()}, "json", EXIT_OK
    return alpha_w(spec), "text", EXIT_OK


def _synth(args, config):
    spec = _spec(args, config)
    net = synthesize_w_network(spec)
    return {"spec": spec.to_dict(), "network": net.to_dict(), "inverse": invert_network(net).to_dict()}, "json", EXIT_OK


def _simulate(args, config):
    spec = _spec(args, config)
    src = SourceModel(_model_value(args, config, "ps", "p_success", 1.0))
    det = DetectorModel(_model_value(args, config, "eta", "efficiency", 1.0))
    net = synthesize_w_network(spec)
    photon = make_basis_state((1,) + (0,) * (spec.modes - 1))
    source = MixedState(
        (w, s) for w, s in ((src.p_success, photon), (1 - src.p_success, vacuum(photon.space))) if w > 0
    )
    rho = apply_network(source, net)
    reference = _reference(args, config, spec) or spec
    disentangled = apply_network(rho, invert_network(synthesize_w_network(reference)))
    clicks = {",".join(map(str, k)): v for k, v in click_distribution(disentangled, det).items()}
    report = {
        "spec": spec.to_dict(),
        "network": net.to_dict(),
        "state": rho.to_dict(),
        "clicks": clicks,
        "parameters": {"efficiency": det.efficiency, "p_success": src.p_success},
    }
    return report, "json", EXIT_OK


def _detect(args, config):
    spec = _spec(args, config)
    src = SourceModel(_model_value(args, config, "ps", "p_success"))
    det = DetectorModel(_model_value(args, config, "eta", "efficiency"))
    scheme = args.scheme or config.get("scheme", "single")
    if scheme == "single":
        report = run_single_setting_scheme(
            spec, src, det, reference=_reference(args, config, spec), shots=args.shots, seed=args.seed
        )
    elif scheme == "modified":
        beta = args.beta if args.beta is not None else config.get("beta")
        if beta is None:
            beta = resolve_beta(_rule(args), spec.modes)
        report = run_modified_scheme(spec, src, det, float(beta), shots=args.shots, seed=args.seed)
    else:
        raise UsageError(f"Unknown scheme {scheme!r}; expected 'single' or 'modified'.")
    status = EXIT_OK
    if args.exit_verdict:
        status = EXIT_OK if report.detected else EXIT_NOT_DETECTED
    return report, "text", status


def _sweep(args, config):
    lo, hi = args.n or (3, 10)
    table = sweep_critical_efficiency(lo, hi, beta_rule=_rule(args), workers=args.workers)
    return table, "csv", EXIT_OK


def _optimize_ref(args, config):
    spec = _spec(args, config)
    best = optimize_reference(spec, starts=args.starts, seed=args.seed)
    report = {
        "target": spec.to_dict(),
        "reference": best.reference.to_dict(),
        "ratio": best.ratio,
        "baseline": alpha_w(spec),
        "optimizer": best.optimizer.to_dict(),
    }
    return report, "json", EXIT_OK


def _phase_scan(args, config):
    spec = _spec(args, config)
    src = SourceModel(_model_value(args, config, "ps", "p_success", 1.0))
    det = DetectorModel(_model_value(args, config, "eta", "efficiency", 1.0))
    reference = _reference(args, config, spec) or WStateSpec.symmetric(spec.modes)
    rho = prepare_mixed_w(spec, src)
    result = phase_scan(rho, reference, grid_points=args.grid, det=det, refine=args.refine)
    if args.format == "csv":
        return result.landscape.to_dataframe().reset_index(), "csv", EXIT_OK
    report = {
        "phases": list(result.phases),
        "fidelity": result.fidelity,
        "accept_probability": result.accept_probability,
        "grid_points": args.grid or OPTIONS["phase_grid_points"],
    }
    return report, "json", EXIT_OK


_COMMANDS: dict[str, tuple[Callable, str]] = {
    "alpha": (_alpha, "Witness constant of a W state, or of the modified witness with --beta."),
    "synth": (_synth, "Beam-splitter network preparing a W state and its inverse."),
    "simulate": (_simulate, "Propagate a lossy single-photon source through the synthesis network."),
    "detect": (_detect, "Run a detection scheme and report the verdict."),
    "sweep": (_sweep, "Critical efficiency of the modified scheme over a range of mode counts."),
    "optimize-ref": (_optimize_ref, "Reference W state minimizing the required overall efficiency."),
    "phase-scan": (_phase_scan, "Scan local phase compensations maximizing the fidelity."),
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON file with spec, p_success, efficiency, beta, scheme, reference.")
    common.add_argument("--coeffs", help="Comma-separated real coefficients, or complex coefficients as JSON.")
    common.add_argument("--n", type=_mode_range, help="Number of modes, or N_min..N_max for 'sweep'.")
    common.add_argument("--symmetric", action="store_true", help="Use the symmetric W state on --n modes.")
    common.add_argument("--eta", type=_probability, help="Detector efficiency.")
    common.add_argument("--ps", type=_probability, help="Source success probability.")
    common.add_argument("--beta", type=float, help="Weight of the biseparable projectors.")
    common.add_argument("--beta-rule", type=_beta_rule, help="'near-one', 'zero' or a value of (N - 1) * beta.")
    common.add_argument("--scheme", choices=["single", "modified"], help="Detection scheme.")
    common.add_argument("--reference", help="Reference coefficients, 'symmetric' or 'optimal'.")
    common.add_argument("--grid", type=int, help="Phase-scan points per mode.")
    common.add_argument("--refine", action="store_true", help="Polish the phase-scan optimum.")
    common.add_argument("--seed", type=int, help="Random seed. Defaults to the 'seed' option.")
    common.add_argument("--shots", type=int, help="Sample detections instead of exact probabilities.")
    common.add_argument("--starts", type=int, help="Random starts of the reference optimization.")
    common.add_argument("--workers", type=int, help="Worker processes for 'sweep'.")
    common.add_argument("--format", choices=FORMATS, help="Output format.")
    common.add_argument("--out", help="Write the report to this file instead of standard output.")
    common.add_argument("--exit-verdict", action="store_true", help="'detect' exits 0 if detected, 3 otherwise.")
    common.add_argument(
        "--verbosity", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default="WARNING", help="Logging level."
    )

    parser = argparse.ArgumentParser(prog="wwitness", description="Entanglement witnesses for single-photon W states.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, helptext) in _COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext, description=helptext)
    return parser


def run_command(argv: list[str] | None = None) -> int:
    """Parse `argv`, run the command and write its report.

    Returns
    -------
    int
        0 on success, 1 on a computation error, 2 on a usage error, and 3 for
        ``detect --exit-verdict`` when the witness does not fire.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    logging.basicConfig(level=args.verbosity, format="%(asctime)s [%(levelname)s] [%(name)s] %(message)s")
    logging.getLogger("wwitness").setLevel(args.verbosity)

    handler = _COMMANDS[args.command][0]
    options = {"phase_grid_points": args.grid} if args.grid else {}
    try:
        with set_options(**options):
            config = _load_config(args.config)
            report, default_fmt, status = handler(args, config)
            text = emit_report(report, args.format or default_fmt)
    except UsageError as err:
        print(f"wwitness {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        if isinstance(err, (FockSpaceError, OpticsError, WitnessError, ExperimentError)):
            module = type(err).__module__.rsplit(".", 1)[-1]
            print(f"{module}: {err}", file=sys.stderr)
            return EXIT_ERROR
        # invalid option values
        print(f"wwitness {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE

    if args.out:
        Path(args.out).write_text(text + "\n")
        logger.info("Report written to %s", args.out)
    else:
        sys.stdout.write(text + "\n")
    return status


def main():
    """Console entry point."""
    sys.exit(run_command(sys.argv[1:]))
