"""Simulated experiments: lossy sources and detectors, measurement settings and both detection schemes."""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence, Union

import numpy as np
import pandas as pd
import xarray as xr
from scipy.optimize import minimize
from scipy.stats import binom

from ._config import OPTIONS
from .fock import (
    FockSpace,
    FockState,
    MixedState,
    State,
    _as_mixed,
    permute_modes,
    photon_number_distribution,
    total_quanta_probability,
    vacuum,
)
from .optics import (
    Network,
    WStateSpec,
    apply_network,
    invert_network,
    local_phase_layer,
    synthesize_w_network,
)
from .witness import ModifiedWitness, WitnessError, alpha_modified, alpha_w, reference_ratio

__all__ = [
    "DetectorModel",
    "ExperimentError",
    "ExperimentReport",
    "MeasurementSetting",
    "PhaseScanResult",
    "SettingOutcome",
    "SourceModel",
    "click_distribution",
    "click_pattern_probability",
    "measure_setting",
    "phase_scan",
    "prepare_mixed_w",
    "resolve_beta",
    "run_modified_scheme",
    "run_single_setting_scheme",
    "sample_clicks",
    "settings_plan_modified",
    "sweep_critical_efficiency",
]

logger = logging.getLogger(__name__)

Pattern = tuple[int, ...]
BetaRule = Union[str, float, Callable[[int], float]]


class ExperimentError(ValueError):
    """Raised for invalid experiment parameters."""


def _check_probability(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and 0 <= value <= 1):
        raise ExperimentError(f"{name} must lie in [0, 1], got {value!r}.")


@dataclass(frozen=True)
class SourceModel:
    """Heralded single-photon source emitting with probability `p_success`, vacuum otherwise."""

    p_success: float

    def __post_init__(self):
        """Validate the probability."""
        _check_probability("p_success", self.p_success)


@dataclass(frozen=True)
class DetectorModel:
    """Photodetectors with a common per-photon efficiency.

    Dark counts are not modelled; a non-zero `dark_counts` is rejected.
    """

    efficiency: float
    number_resolving: bool = True
    dark_counts: float = 0.0

    def __post_init__(self):
        """Validate the parameters."""
        _check_probability("efficiency", self.efficiency)
        if self.dark_counts != 0:
            raise ExperimentError("Dark counts are not modelled; dark_counts must be 0.")


@dataclass(frozen=True)
class MeasurementSetting:
    """One measurement configuration.

    Modes in `passthrough_modes` go straight to their detectors. The remaining modes, in increasing order,
    feed the first inputs of `network`; the passthrough modes occupy its last inputs and are left untouched
    by construction of the network. An outcome is accepted when the click pattern equals `accept_pattern`.
    """

    label: str
    network: Network
    accept_pattern: Pattern
    passthrough_modes: tuple[int, ...] = ()

    def __post_init__(self):
        """Validate the pattern and the routing."""
        object.__setattr__(self, "accept_pattern", tuple(int(m) for m in self.accept_pattern))
        object.__setattr__(self, "passthrough_modes", tuple(int(m) for m in self.passthrough_modes))
        n = self.network.modes
        if len(self.accept_pattern) != n:
            raise ExperimentError(f"Accept pattern {self.accept_pattern} does not fit {n} modes.")
        if any(m < 0 for m in self.accept_pattern):
            raise ExperimentError(f"Accept pattern {self.accept_pattern} has negative counts.")
        if any(not 0 <= m < n for m in self.passthrough_modes) or len(set(self.passthrough_modes)) != len(
            self.passthrough_modes
        ):
            raise ExperimentError(f"Invalid passthrough modes {self.passthrough_modes} for {n} modes.")

    @property
    def modes(self) -> int:
        return self.network.modes

    @property
    def routing(self) -> tuple[int, ...]:
        """Network input k receives mode ``routing[k]``."""
        passthrough = set(self.passthrough_modes)
        return tuple(m for m in range(self.modes) if m not in passthrough) + self.passthrough_modes

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "accept_pattern": list(self.accept_pattern),
            "passthrough_modes": list(self.passthrough_modes),
            "network": self.network.to_dict(),
        }


class SettingOutcome(NamedTuple):
    """Accept probability of a setting and its click distribution."""

    probability: float
    distribution: dict[Pattern, float]
    shots: int | None = None


@dataclass
class ExperimentReport:
    """Outcome of a simulated scheme.

    `verdict` is "detected" exactly when `witness_value` is negative; values within the ``tolerance`` option of 0
    are stored as 0.
    """

    scheme: str
    parameters: dict[str, Any]
    settings: dict[str, dict[str, Any]]
    fidelities: dict[str, float]
    witness_value: float
    threshold: float
    witness: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        """Snap ties."""
        if abs(self.witness_value) <= OPTIONS["tolerance"]:
            self.witness_value = 0.0

    @property
    def detected(self) -> bool:
        return self.witness_value < 0

    @property
    def verdict(self) -> str:
        return "detected" if self.detected else "not-detected"

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme,
            "parameters": self.parameters,
            "witness": self.witness,
            "settings": self.settings,
            "fidelities": self.fidelities,
            "witness_value": self.witness_value,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }

    def to_text(self, digits: int = 12) -> str:
        """Human-readable summary with `digits` significant digits."""
        params = ", ".join(f"{k}={v}" for k, v in self.parameters.items())
        lines = [f"scheme: {self.scheme} ({params})"]
        lines += [f"fidelity {name}: {value:.{digits}g}" for name, value in self.fidelities.items()]
        lines += [
            f"threshold: {self.threshold:.{digits}g}",
            f"witness value: {self.witness_value:.{digits}g}",
            f"verdict: {self.verdict.replace('-', ' ')}",
        ]
        return "\n".join(lines)


def prepare_mixed_w(spec: WStateSpec, src: SourceModel, space: FockSpace | None = None) -> MixedState:
    """Return ``p_S |W><W| + (1 - p_S) |0..0><0..0|``; zero-weight components are dropped."""
    space = space or FockSpace(spec.modes)
    components = [(src.p_success, spec.state(space)), (1 - src.p_success, vacuum(space))]
    return MixedState((w, s) for w, s in components if w > 0)


def _check_pattern(pattern: Sequence[int], modes: int, det: DetectorModel) -> Pattern:
    pattern = tuple(int(m) for m in pattern)
    if len(pattern) != modes:
        raise ExperimentError(f"Pattern {pattern} is incompatible with {modes} modes.")
    if any(m < 0 for m in pattern):
        raise ExperimentError(f"Pattern {pattern} has negative counts.")
    if not det.number_resolving and any(m > 1 for m in pattern):
        raise ExperimentError(f"Pattern {pattern} is not a click/no-click pattern.")
    return pattern


def _detection_probability(occupation: Pattern, pattern: Pattern, det: DetectorModel) -> float:
    eta = det.efficiency
    n, m = np.asarray(occupation), np.asarray(pattern)
    if det.number_resolving:
        return float(np.prod(binom.pmf(m, n, eta)))
    miss = (1 - eta) ** n
    return float(np.prod(np.where(m > 0, 1 - miss, miss)))


def click_pattern_probability(rho: State, det: DetectorModel, pattern: Sequence[int]) -> float:
    """Probability of a detection pattern after independent per-photon loss.

    Parameters
    ----------
    rho : FockState or MixedState
        State reaching the detectors.
    det : DetectorModel
        Detector efficiency and resolution.
    pattern : sequence of int
        Counts per mode, or clicks (0/1) for non-resolving detectors.

    Returns
    -------
    float
    """
    pattern = _check_pattern(pattern, rho.space.modes, det)
    dist = photon_number_distribution(rho)
    return float(sum(p * _detection_probability(occ, pattern, det) for occ, p in dist.items()))


def click_distribution(rho: State, det: DetectorModel) -> dict[Pattern, float]:
    """Full distribution of detection patterns, support only, in sorted pattern order."""
    out: dict[Pattern, float] = {}
    for occ, p in photon_number_distribution(rho).items():
        if det.number_resolving:
            outcomes = itertools.product(*(range(n + 1) for n in occ))
        else:
            outcomes = itertools.product(*((0, 1) if n else (0,) for n in occ))
        for pattern in outcomes:
            prob = p * _detection_probability(occ, pattern, det)
            if prob > 0:
                out[pattern] = out.get(pattern, 0.0) + prob
    return dict(sorted(out.items()))


def sample_clicks(
    rho: State, det: DetectorModel, shots: int, seed: int | np.random.Generator | None = None
) -> dict[Pattern, int]:
    """Draw `shots` detection patterns.

    Photon numbers are drawn from the state's distribution, then thinned photon by photon.
    """
    if shots < 1:
        raise ExperimentError(f"shots must be positive, got {shots}.")
    rng = np.random.default_rng(OPTIONS["seed"] if seed is None else seed)
    dist = photon_number_distribution(rho)
    occupations = np.array(list(dist), dtype=int)
    probs = np.array(list(dist.values()))
    drawn = occupations[rng.choice(len(probs), size=shots, p=probs / probs.sum())]
    counts = rng.binomial(drawn, det.efficiency)
    if not det.number_resolving:
        counts = (counts > 0).astype(int)
    patterns, tally = np.unique(counts, axis=0, return_counts=True)
    return {tuple(int(m) for m in pat): int(t) for pat, t in zip(patterns, tally)}


def _route(rho: State, setting: MeasurementSetting) -> State:
    order = setting.routing
    routed = permute_modes(rho, order)
    routed = apply_network(routed, setting.network)
    return permute_modes(routed, np.argsort(order))


def measure_setting(
    rho: State,
    setting: MeasurementSetting,
    det: DetectorModel,
    shots: int | None = None,
    seed: int | np.random.Generator | None = None,
) -> SettingOutcome:
    """Route `rho` through a setting and detect it.

    With `shots`, the accept probability and distribution are sampled frequencies instead of exact values.
    """
    if rho.space.modes != setting.modes:
        raise ExperimentError(f"Setting {setting.label!r} needs {setting.modes} modes, state has {rho.space.modes}.")
    out = _route(rho, setting)
    if shots is None:
        dist = click_distribution(out, det)
        return SettingOutcome(click_pattern_probability(out, det, setting.accept_pattern), dist)
    counts = sample_clicks(out, det, shots, seed)
    dist = {pattern: c / shots for pattern, c in counts.items()}
    return SettingOutcome(dist.get(setting.accept_pattern, 0.0), dist, shots)


def _single_photon_pattern(modes: int, at: int) -> Pattern:
    pattern = [0] * modes
    pattern[at] = 1
    return tuple(pattern)


def _setting_summary(outcome: SettingOutcome, setting: MeasurementSetting) -> dict[str, Any]:
    summary = {
        "accept_pattern": list(setting.accept_pattern),
        "accept_probability": outcome.probability,
        "distribution": {",".join(map(str, k)): v for k, v in outcome.distribution.items()},
    }
    if outcome.shots is not None:
        summary["shots"] = outcome.shots
    return summary


def run_single_setting_scheme(
    spec: WStateSpec,
    src: SourceModel,
    det: DetectorModel,
    reference: WStateSpec | None = None,
    compensation: Sequence[float] | None = None,
    shots: int | None = None,
    seed: int | None = None,
) -> ExperimentReport:
    """Simulate the single-setting scheme.

    The source prepares the mixture of `spec` and vacuum; the disentangler is the inverse of the synthesis
    network of `reference` (defaults to `spec`), and the accept pattern is one photon in the first mode.
    The witness estimate is ``alpha_w(reference) - P(1, 0, ..., 0)``.

    Parameters
    ----------
    spec : WStateSpec
        State produced by the source.
    src : SourceModel
        Source success probability.
    det : DetectorModel
        Detectors.
    reference : WStateSpec, optional
        Target of the witness. Defaults to `spec`.
    compensation : sequence of float, optional
        Phases of a local phase layer inserted before the disentangler.
    shots : int, optional
        Sample the detection instead of using exact probabilities.
    seed : int, optional
        Seed of the sampler.

    Returns
    -------
    ExperimentReport
        The threshold is the overall efficiency ``eta * p_S`` above which the witness fires.
    """
    reference = reference or spec
    if reference.modes != spec.modes:
        raise ExperimentError(f"Reference has {reference.modes} modes, source state {spec.modes}.")
    try:
        threshold = reference_ratio(spec, reference)
    except WitnessError as err:
        raise ExperimentError(str(err)) from err

    rho: State = prepare_mixed_w(spec, src)
    if compensation is not None:
        if len(compensation) != spec.modes:
            raise ExperimentError(f"{len(compensation)} compensation phases given for {spec.modes} modes.")
        rho = apply_network(rho, local_phase_layer(compensation))
    setting = MeasurementSetting(
        "W", invert_network(synthesize_w_network(reference)), _single_photon_pattern(spec.modes, 0)
    )
    outcome = measure_setting(rho, setting, det, shots=shots, seed=seed)
    alpha = alpha_w(reference)
    logger.info("Single-setting scheme: P(1,0..0) = %.12g, alpha = %.12g", outcome.probability, alpha)

    params = {"N": spec.modes, "efficiency": det.efficiency, "p_success": src.p_success}
    return ExperimentReport(
        scheme="single",
        parameters=params,
        settings={setting.label: _setting_summary(outcome, setting)},
        fidelities={"W": outcome.probability},
        witness_value=alpha - outcome.probability,
        threshold=threshold,
        witness={"type": "basic", "alpha": alpha},
    )


def settings_plan_modified(modes: int) -> list[MeasurementSetting]:
    """Return the N + 1 settings of the modified scheme.

    Setting 0 disentangles the symmetric W_N. Setting i (1 <= i <= N) sends mode i - 1 straight to its
    detector and disentangles the symmetric W_{N-1} on the other modes; it accepts a single photon in the
    first of these modes.
    """
    if modes < 3:
        raise ExperimentError(f"The modified scheme needs at least 3 modes, got {modes}.")
    plan = [
        MeasurementSetting(
            "W", invert_network(synthesize_w_network(WStateSpec.symmetric(modes))), _single_photon_pattern(modes, 0)
        )
    ]
    sub = invert_network(synthesize_w_network(WStateSpec.symmetric(modes - 1))).embedded(modes)
    for i in range(modes):
        first = 1 if i == 0 else 0
        plan.append(MeasurementSetting(f"BS{i}", sub, _single_photon_pattern(modes, first), (i,)))
    return plan


def _two_quanta_probability(rho: State, setting_zero: SettingOutcome) -> float:
    if OPTIONS["identity_projector"] == "full":
        return 1.0
    if OPTIONS["lossy_two_quanta"]:
        return float(sum(p for pattern, p in setting_zero.distribution.items() if sum(pattern) <= 2))
    return total_quanta_probability(rho, 2)


def run_modified_scheme(
    spec: WStateSpec,
    src: SourceModel,
    det: DetectorModel,
    beta: float,
    alpha: float | None = None,
    shots: int | None = None,
    seed: int | None = None,
) -> ExperimentReport:
    """Simulate the modified scheme with N + 1 measurement settings.

    The estimates are combined as ``alpha P(<=2 quanta) - F_W + beta sum_i F_BS_i``. The reference is the
    symmetric W_N; an asymmetric `spec` triggers a warning.

    Parameters
    ----------
    spec : WStateSpec
        State produced by the source.
    src : SourceModel
        Source success probability.
    det : DetectorModel
        Detectors.
    beta : float
        Weight of the biseparable projectors, with (N - 1) * beta < 1.
    alpha : float, optional
        Witness constant. Computed with :py:func:`~wwitness.witness.alpha_modified` when omitted.
    shots : int, optional
        Shots per setting; each setting draws from its own generator spawned from `seed`.
    seed : int, optional
        Root seed of the samplers.

    Returns
    -------
    ExperimentReport
        The threshold is the critical efficiency ``alpha / (1 - (N - 1) beta)``.
    """
    modes = spec.modes
    plan = settings_plan_modified(modes)
    if not spec.is_symmetric():
        msg = "The modified scheme measures against the symmetric W state; the source state is asymmetric."
        logger.warning(msg)
        warnings.warn(msg)
    witness = ModifiedWitness.build(modes, beta) if alpha is None else ModifiedWitness(modes, beta, alpha)

    rho = prepare_mixed_w(spec, src)
    if shots is None:
        rngs: list[np.random.Generator | None] = [None] * len(plan)
    else:
        root = np.random.SeedSequence(OPTIONS["seed"] if seed is None else seed)
        rngs = [np.random.default_rng(s) for s in root.spawn(len(plan))]
    outcomes = [measure_setting(rho, setting, det, shots=shots, seed=rng) for setting, rng in zip(plan, rngs)]

    fidelities = {setting.label: outcome.probability for setting, outcome in zip(plan, outcomes)}
    identity = _two_quanta_probability(rho, outcomes[0])
    bs_total = sum(outcome.probability for outcome in outcomes[1:])
    value = witness.alpha * identity - outcomes[0].probability + beta * bs_total
    logger.info("Modified scheme: F_W = %.12g, sum F_BS = %.12g, value = %.12g", outcomes[0].probability, bs_total, value)

    params = {"N": modes, "efficiency": det.efficiency, "p_success": src.p_success, "beta": beta}
    return ExperimentReport(
        scheme="modified",
        parameters=params,
        settings={setting.label: _setting_summary(outcome, setting) for setting, outcome in zip(plan, outcomes)},
        fidelities=fidelities | {"two_quanta": identity},
        witness_value=value,
        threshold=witness.critical_efficiency,
        witness=witness.to_dict(),
    )


class PhaseScanResult(NamedTuple):
    """Best local phase compensation found by a scan."""

    phases: tuple[float, ...]
    fidelity: float
    accept_probability: float
    landscape: xr.DataArray


def _single_excitation_weights(rho: State, reference: WStateSpec) -> tuple[np.ndarray, np.ndarray]:
    # per component: conj(r_j) * a_j, where a_j is the amplitude of one photon in mode j
    rho = _as_mixed(rho)
    space = rho.space
    idx = [space.index(_single_photon_pattern(space.modes, j)) for j in range(space.modes)]
    amps = np.array([s.amplitudes[idx] for _, s in rho])
    return amps * reference.array.conj(), rho.weights


def _landscape_fidelity(terms: np.ndarray, weights: np.ndarray, phases: np.ndarray) -> np.ndarray:
    # phases: (points, N - 1), mode 0 fixed at 0
    overlap = terms[:, 0][None, :] + np.exp(-1j * phases) @ terms[:, 1:].T
    return np.abs(overlap) ** 2 @ weights


def phase_scan(
    rho: State,
    reference: WStateSpec,
    grid_points: int | None = None,
    det: DetectorModel | None = None,
    refine: bool = False,
    chunk: int = 2**16,
) -> PhaseScanResult:
    """Scan local phase compensations and keep the one maximizing the fidelity to `reference`.

    The phase of mode 0 is fixed at 0; the other modes take `grid_points` uniform values on [0, 2 pi).
    The best point is run through the single-setting disentangler to give the accept probability.
    The grid holds ``grid_points ** (N - 1)`` points; use `refine` with a coarse grid for larger N.

    Parameters
    ----------
    rho : FockState or MixedState
        State with unknown local phases.
    reference : WStateSpec
        Reference of the witness.
    grid_points : int, optional
        Points per mode. Defaults to the ``phase_grid_points`` option.
    det : DetectorModel, optional
        Detectors of the verification run. Defaults to ideal detectors.
    refine : bool
        Polish the best grid point with a Nelder-Mead simplex.
    chunk : int
        Grid points evaluated per vectorized batch.

    Returns
    -------
    PhaseScanResult
        Compensation phases, fidelity, accept probability and the fidelity landscape over the grid.
    """
    grid_points = OPTIONS["phase_grid_points"] if grid_points is None else grid_points
    if grid_points < 2:
        raise ExperimentError(f"grid_points must be at least 2, got {grid_points}.")
    modes = rho.space.modes
    if modes < 2 or reference.modes != modes:
        raise ExperimentError(f"Phase scan needs a reference on the state's {modes} modes (at least 2).")
    det = det or DetectorModel(1.0)

    terms, weights = _single_excitation_weights(rho, reference)
    grid = np.arange(grid_points) * (2 * math.pi / grid_points)
    shape = (grid_points,) * (modes - 1)
    total = grid_points ** (modes - 1)
    if total > 10**7:
        logger.warning("Phase scan over %s grid points.", total)

    fidelity = np.empty(total)
    for start in range(0, total, chunk):
        idx = np.stack(np.unravel_index(np.arange(start, min(start + chunk, total)), shape), axis=1)
        fidelity[start : start + len(idx)] = _landscape_fidelity(terms, weights, grid[idx])
    best_flat = int(np.argmax(fidelity))
    best = grid[list(np.unravel_index(best_flat, shape))]
    best_value = float(fidelity[best_flat])

    if refine:
        res = minimize(
            lambda x: -_landscape_fidelity(terms, weights, x[None, :])[0],
            best,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14},
        )
        if -res.fun > best_value:
            best, best_value = np.mod(res.x, 2 * math.pi), float(-res.fun)

    phases = (0.0, *(float(p) for p in best))
    compensated = apply_network(rho, local_phase_layer(phases))
    setting = MeasurementSetting(
        "W", invert_network(synthesize_w_network(reference)), _single_photon_pattern(modes, 0)
    )
    accept = measure_setting(compensated, setting, det).probability
    logger.debug("Phase scan best fidelity %.12g at %s", best_value, phases)

    landscape = xr.DataArray(
        fidelity.reshape(shape),
        dims=[f"phi_{j}" for j in range(1, modes)],
        coords={f"phi_{j}": grid for j in range(1, modes)},
        name="fidelity",
        attrs={"description": "Fidelity to the reference after local phase compensation", "fixed_mode": 0},
    )
    return PhaseScanResult(phases, best_value, accept, landscape)


def resolve_beta(rule: BetaRule, modes: int) -> float:
    """Return beta for `modes` modes from a rule: "near-one", "zero", a value of (N - 1) beta, or a callable of N."""
    if callable(rule):
        return float(rule(modes))
    if rule == "near-one":
        return (1 - OPTIONS["near_one_gap"]) / (modes - 1)
    if rule == "zero":
        return 0.0
    try:
        product = float(rule)
    except (TypeError, ValueError) as err:
        raise ExperimentError(
            f"Unknown beta rule {rule!r}; expected 'near-one', 'zero', a value of (N - 1) * beta or a callable."
        ) from err
    if not 0 <= product < 1:
        raise ExperimentError(f"(N - 1) * beta must lie in [0, 1), got {product}.")
    return product / (modes - 1)


def _sweep_row(modes: int, beta: float, grid_points: int, fatol: float) -> dict[str, float]:
    alpha = alpha_modified(modes, beta, grid_points=grid_points, fatol=fatol).alpha
    return {
        "N": modes,
        "beta": beta,
        "alpha": alpha,
        "e_c": alpha / (1 - (modes - 1) * beta),
        "baseline": 1 - 1 / modes,
    }


def sweep_critical_efficiency(
    n_min: int, n_max: int, beta_rule: BetaRule = "near-one", workers: int | None = None
) -> pd.DataFrame:
    """Tabulate the critical efficiency of the modified scheme over a range of mode counts.

    Parameters
    ----------
    n_min, n_max : int
        Inclusive range of N, with 3 <= n_min <= n_max <= the ``schmidt_max_modes`` option.
    beta_rule : {"near-one", "zero"}, float or callable
        "near-one" sets (N - 1) beta = 1 - ``near_one_gap``; a number x sets (N - 1) beta = x;
        a callable maps N to beta.
    workers : int, optional
        Evaluate the rows in that many processes.

    Returns
    -------
    pd.DataFrame
        Columns ``N``, ``beta``, ``alpha``, ``e_c`` and ``baseline`` (1 - 1/N), one row per N.
    """
    if not 3 <= n_min <= n_max <= OPTIONS["schmidt_max_modes"]:
        raise ExperimentError(
            f"Invalid mode range {n_min}..{n_max}; need 3 <= N_min <= N_max <= {OPTIONS['schmidt_max_modes']}."
        )
    ns = list(range(n_min, n_max + 1))
    betas = [resolve_beta(beta_rule, n) for n in ns]
    # spawned workers do not inherit OPTIONS
    grid = [OPTIONS["ansatz_grid_points"]] * len(ns)
    fatol = [OPTIONS["ansatz_fatol"]] * len(ns)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(_sweep_row, ns, betas, grid, fatol))
    else:
        rows = [_sweep_row(*args) for args in zip(ns, betas, grid, fatol)]

    table = pd.DataFrame(rows, columns=["N", "beta", "alpha", "e_c", "baseline"])
    table["N"] = table["N"].astype(int)
    above = table[table["e_c"] >= table["baseline"]]
    if not above.empty:
        logger.warning("Critical efficiency not below the baseline for N = %s", above["N"].tolist())
    return table
