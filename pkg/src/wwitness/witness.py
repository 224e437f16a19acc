"""Witness constants and expectation values for single-photon W states.

Two witness forms are covered:

* the basic projector witness ``alpha I - |W><W|``, whose constant is the largest overlap of a biseparable
  pure state with the target (the squared largest Schmidt coefficient over all bipartitions);
* the modified witness ``alpha I_2 - Q`` with ``Q = |W_N><W_N| - beta sum_i |BS_i><BS_i|``, whose constant is
  maximized over the product ansatz ``(cos t1 |0..0> + sin t1 |W_k>)(cos t2 |0..0> + sin t2 |W_{N-k}>)``.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
import pandas as pd
from scipy.linalg import svdvals
from scipy.optimize import minimize

from ._config import OPTIONS
from .fock import (
    FockSpace,
    FockState,
    MixedState,
    fidelity_to_pure,
    tensor_product,
    total_quanta_probability,
    vacuum,
    w_state,
)
from .optics import WStateSpec

__all__ = [
    "AnsatzMaximum",
    "BasicWitness",
    "BiseparableAnsatz",
    "ModifiedWitness",
    "MonteCarloCheck",
    "OptimizerInfo",
    "ReferenceOptimum",
    "SchmidtSplit",
    "WitnessError",
    "alpha_modified",
    "alpha_w",
    "ansatz_state",
    "basic_witness_value",
    "bs_state",
    "critical_efficiency",
    "max_biseparable_fidelity",
    "max_schmidt_alpha",
    "modified_witness_value",
    "optimize_reference",
    "q_value",
    "reference_ratio",
    "sample_biseparable_q",
    "scan_beta",
    "w_reference",
]

logger = logging.getLogger(__name__)


class WitnessError(ValueError):
    """Raised for invalid witness parameters or degenerate references."""


class OptimizerInfo(NamedTuple):
    """Convergence metadata of a numerical optimization."""

    starts: int
    converged: bool
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"starts": self.starts, "converged": self.converged, "seed": self.seed}


@dataclass(frozen=True)
class SchmidtSplit:
    """Bipartition achieving the largest Schmidt coefficient.

    `partition` lists the modes of the first party; the other modes form the second party.
    """

    partition: tuple[int, ...]
    lambda_max: float
    modes: int

    @property
    def mask(self) -> tuple[bool, ...]:
        return tuple(m in self.partition for m in range(self.modes))


@dataclass(frozen=True)
class BiseparableAnsatz:
    """Product ansatz: first `k` modes vs the rest, with mixing angles `theta1`, `theta2`."""

    k: int
    theta1: float
    theta2: float

    def __post_init__(self):
        """Validate the partition size."""
        if self.k < 1:
            raise WitnessError(f"Partition size must be at least 1, got {self.k}.")

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "theta1": self.theta1, "theta2": self.theta2}


@dataclass(frozen=True, eq=False)
class BasicWitness:
    """Witness ``alpha I - |Psi><Psi|`` with target `reference`."""

    alpha: float
    reference: FockState

    def __post_init__(self):
        """Validate the constant."""
        if not 0 <= self.alpha <= 1 + OPTIONS["tolerance"]:
            raise WitnessError(f"alpha must lie in [0, 1], got {self.alpha}.")

    @classmethod
    def for_w(cls, spec: WStateSpec) -> BasicWitness:
        """Witness of a W state, with the closed-form constant."""
        return cls(alpha_w(spec), spec.state())

    @classmethod
    def for_state(cls, psi: FockState) -> BasicWitness:
        """Witness of any pure state, with the constant from the Schmidt decomposition."""
        return cls(max_schmidt_alpha(psi)[0], psi)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "basic", "alpha": self.alpha}


@dataclass(frozen=True)
class ModifiedWitness:
    """Witness ``alpha I_2 - Q`` on `modes` modes."""

    modes: int
    beta: float
    alpha: float
    ansatz: BiseparableAnsatz | None = None
    optimizer: OptimizerInfo | None = None

    def __post_init__(self):
        """Validate the parameters."""
        _check_beta(self.modes, self.beta)
        if self.alpha < 0:
            raise WitnessError(f"alpha must be non-negative, got {self.alpha}.")

    @classmethod
    def build(cls, modes: int, beta: float) -> ModifiedWitness:
        """Compute the constant by maximization over the biseparable ansatz."""
        best = alpha_modified(modes, beta)
        return cls(modes, beta, best.alpha, best.ansatz, best.optimizer)

    @property
    def critical_efficiency(self) -> float:
        return self.alpha / (1 - (self.modes - 1) * self.beta)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": "modified", "alpha": self.alpha, "beta": self.beta}
        if self.ansatz is not None:
            out["ansatz"] = self.ansatz.to_dict()
        if self.optimizer is not None:
            out["optimizer"] = self.optimizer.to_dict()
        return out


class ReferenceOptimum(NamedTuple):
    """Best reference W state for a target, with its detection ratio."""

    reference: WStateSpec
    ratio: float
    optimizer: OptimizerInfo


class AnsatzMaximum(NamedTuple):
    """Maximum of Q over the biseparable ansatz."""

    alpha: float
    ansatz: BiseparableAnsatz
    optimizer: OptimizerInfo


class MonteCarloCheck(NamedTuple):
    """Outcome of a sampling check of a witness constant."""

    max_value: float
    alpha: float
    samples: int
    seed: int
    breached: bool


def _check_beta(modes: int, beta: float) -> None:
    if not math.isfinite(beta) or beta < 0:
        raise WitnessError(f"beta must be a non-negative real, got {beta}.")
    if (modes - 1) * beta >= 1:
        raise WitnessError(f"Invalid beta range: (N - 1) * beta = {(modes - 1) * beta:.6g} must be below 1.")


def _symmetric(modes: int, space: FockSpace) -> FockState:
    return w_state(np.full(modes, 1 / math.sqrt(modes)), space)


def w_reference(spec: WStateSpec, space: FockSpace | None = None) -> FockState:
    """Return the reference state |W> of a coefficient vector."""
    return spec.state(space)


def alpha_w(spec: WStateSpec) -> float:
    """Return ``1 - min_i |c_i|^2``, the witness constant of a W state."""
    return float(1 - np.min(spec.magnitudes**2))


def _bipartitions(modes: int):
    # first party always holds mode 0: 2**(N-1) - 1 proper cuts
    rest = range(1, modes)
    for size in range(0, modes - 1):
        for others in itertools.combinations(rest, size):
            yield (0, *others)


def max_schmidt_alpha(psi: FockState) -> tuple[float, SchmidtSplit]:
    """Return the squared largest Schmidt coefficient of `psi` over all bipartitions.

    For each cut the amplitudes are arranged in a matrix whose rows are indexed by the occupations of the
    first party and columns by those of the second; its largest singular value is the Schmidt coefficient.

    Parameters
    ----------
    psi : FockState
        Normalized pure state on at least two modes.

    Returns
    -------
    float
        alpha = (max over cuts of lambda_max) ** 2.
    SchmidtSplit
        The achieving bipartition.
    """
    modes = psi.modes
    if modes < 2:
        raise WitnessError("A bipartition needs at least two modes.")
    if modes > OPTIONS["schmidt_max_modes"]:
        raise WitnessError(
            f"{modes} modes exceed the enumeration bound of {OPTIONS['schmidt_max_modes']} (option 'schmidt_max_modes')."
        )
    support = np.flatnonzero(psi.amplitudes)
    occ = psi.space.occupations[support]
    amps = psi.amplitudes[support]
    weights = (psi.cap + 1) ** np.arange(modes)

    best_lambda, best_part = -1.0, ()
    for part in _bipartitions(modes):
        in_a = np.zeros(modes, dtype=bool)
        in_a[list(part)] = True
        rows, ri = np.unique(occ[:, in_a] @ weights[in_a], return_inverse=True)
        cols, ci = np.unique(occ[:, ~in_a] @ weights[~in_a], return_inverse=True)
        mat = np.zeros((rows.size, cols.size), dtype=complex)
        np.add.at(mat, (ri.ravel(), ci.ravel()), amps)
        lam = float(svdvals(mat)[0]) if mat.size else 0.0
        if lam > best_lambda:
            best_lambda, best_part = lam, part
    best_lambda = min(best_lambda, 1.0)
    return best_lambda**2, SchmidtSplit(best_part, best_lambda, modes)


def basic_witness_value(rho: FockState | MixedState, w: BasicWitness) -> float:
    """Return ``alpha - <Psi|rho|Psi>``; negative values certify genuine multipartite entanglement."""
    return w.alpha - fidelity_to_pure(rho, w.reference)


def reference_ratio(target: WStateSpec, candidate: WStateSpec) -> float:
    """Return ``alpha(candidate) / |<target|candidate>|^2``, the overall efficiency needed for detection."""
    if target.modes != candidate.modes:
        raise WitnessError(f"Mode mismatch: {target.modes} vs {candidate.modes}.")
    overlap = abs(np.vdot(target.array, candidate.array)) ** 2
    if overlap <= OPTIONS["tolerance"]:
        raise WitnessError("Target and reference have zero overlap.")
    return alpha_w(candidate) / overlap


def _ratio_objective(z: np.ndarray, target_mags: np.ndarray) -> float:
    norm2 = float(z @ z)
    if norm2 == 0:
        return math.inf
    probs = z**2 / norm2
    overlap = float(target_mags @ np.sqrt(probs)) ** 2
    if overlap <= 1e-300:
        return math.inf
    return (1 - probs.min()) / overlap


def optimize_reference(target: WStateSpec, starts: int | None = None, seed: int | None = None) -> ReferenceOptimum:
    """Find the reference W state minimizing the detection ratio for `target`.

    Candidates have non-negative amplitudes on the probability simplex and the phases of the target.
    A Nelder-Mead descent is run from the symmetric point and from `starts` random points.

    Parameters
    ----------
    target : WStateSpec
        The W state produced by the source.
    starts : int, optional
        Random starts. Defaults to the ``reference_starts`` option.
    seed : int, optional
        Seed of the start generator. Defaults to the ``seed`` option.

    Returns
    -------
    ReferenceOptimum
        Best candidate, its ratio, and convergence metadata.
    """
    starts = OPTIONS["reference_starts"] if starts is None else starts
    seed = OPTIONS["seed"] if seed is None else seed
    rng = np.random.default_rng(seed)
    n = target.modes
    mags = target.magnitudes

    initial = [np.ones(n)] + [np.sqrt(p) for p in rng.dirichlet(np.ones(n), size=starts)]
    best_x, best_f, best_ok = initial[0], _ratio_objective(initial[0], mags), True
    for x0 in initial:
        res = minimize(
            _ratio_objective,
            x0,
            args=(mags,),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000 * n, "maxfev": 8000 * n},
        )
        if res.fun < best_f:
            best_x, best_f, best_ok = res.x, float(res.fun), bool(res.success)
    logger.debug("Reference optimization over %s starts: ratio %.12g", len(initial), best_f)

    amps = np.abs(best_x) / np.linalg.norm(best_x)
    phases = np.where(mags > 0, target.phases, 0.0)
    reference = WStateSpec(tuple(amps * np.exp(1j * phases)))
    # recompute from the stored spec so that the ratio matches `reference_ratio`
    ratio = reference_ratio(target, reference)
    return ReferenceOptimum(reference, ratio, OptimizerInfo(len(initial), best_ok, seed))


def bs_state(i: int, modes: int, space: FockSpace | None = None) -> FockState:
    """Return |0_i>|W_{N-1}>: vacuum in mode `i`, symmetric W state on the other modes.

    Parameters
    ----------
    i : int
        The empty mode, 0 <= i < N.
    modes : int
        Number of modes N, at least 2.
    space : FockSpace, optional
        Enclosing space. Defaults to ``FockSpace(modes)``.

    Returns
    -------
    FockState
        The biseparable reference, with coefficients 1/sqrt(N - 1) on the other modes.
    """
    if not 0 <= i < modes:
        raise WitnessError(f"Mode index {i} out of range for {modes} modes.")
    if modes < 2:
        raise WitnessError("A biseparable reference needs at least two modes.")
    coeffs = np.full(modes, 1 / math.sqrt(modes - 1))
    coeffs[i] = 0
    return w_state(coeffs, space or FockSpace(modes))


def q_value(phi: FockState, beta: float, modes: int) -> float:
    """Return ``<phi|Q|phi> = |<W_N|phi>|^2 - beta sum_i |<BS_i|phi>|^2``.

    Parameters
    ----------
    phi : FockState
        Pure state on `modes` modes.
    beta : float
        Weight of the biseparable projectors.
    modes : int
        Number of modes N of the witness.

    Returns
    -------
    float
        The expectation value. The modified constant alpha is its maximum over biseparable states.
    """
    if phi.modes != modes:
        raise WitnessError(f"Dimension mismatch: state on {phi.modes} modes, witness on {modes}.")
    space = phi.space
    value = fidelity_to_pure(phi, _symmetric(modes, space))
    value -= beta * sum(fidelity_to_pure(phi, bs_state(i, modes, space)) for i in range(modes))
    return float(value)


def ansatz_state(modes: int, ansatz: BiseparableAnsatz, cap: int | None = None) -> FockState:
    """Return the product ansatz state on `modes` modes."""
    k = ansatz.k
    if k >= modes:
        raise WitnessError(f"Partition size {k} must be below the mode count {modes}.")
    cap = OPTIONS["photon_cap"] if cap is None else cap

    def _factor(size: int, theta: float) -> FockState:
        space = FockSpace(size, cap)
        amps = math.cos(theta) * vacuum(space).amplitudes + math.sin(theta) * _symmetric(size, space).amplitudes
        return FockState(space, amps)

    return tensor_product(_factor(k, ansatz.theta1), _factor(modes - k, ansatz.theta2), cap=cap)


def _ansatz_q(modes: int, k: int, beta: float, t1, t2):
    # one-photon amplitudes of the ansatz: equal within each party
    va = np.sin(t1) * np.cos(t2) / math.sqrt(k)
    vb = np.cos(t1) * np.sin(t2) / math.sqrt(modes - k)
    total = k * va + (modes - k) * vb
    bs = k * (total - va) ** 2 + (modes - k) * (total - vb) ** 2
    return total**2 / modes - beta * bs / (modes - 1)


def alpha_modified(
    modes: int, beta: float, grid_points: int | None = None, fatol: float | None = None
) -> AnsatzMaximum:
    """Maximize ``<phi|Q|phi>`` over the biseparable product ansatz.

    Every partition size k in 1..N//2 is scanned on a grid of both angles over [0, pi], and the best grid
    cell is refined with a Nelder-Mead simplex.

    Parameters
    ----------
    modes : int
        Number of modes N, at least 3.
    beta : float
        Weight of the biseparable projectors, with (N - 1) * beta < 1.
    grid_points : int, optional
        Points per angle. Defaults to the ``ansatz_grid_points`` option.
    fatol : float, optional
        Absolute tolerance on Q for the simplex refinement. Defaults to the ``ansatz_fatol`` option.

    Returns
    -------
    AnsatzMaximum
        The constant alpha (not clipped at 0), the maximizing ansatz and convergence metadata.
    """
    if modes < 3:
        raise WitnessError(f"The modified witness needs at least 3 modes, got {modes}.")
    _check_beta(modes, beta)
    grid_points = grid_points or OPTIONS["ansatz_grid_points"]
    fatol = fatol or OPTIONS["ansatz_fatol"]
    theta = np.linspace(0, math.pi, grid_points)
    t1, t2 = np.meshgrid(theta, theta, indexing="ij")

    best = None
    converged = True
    ks = range(1, modes // 2 + 1)
    for k in ks:
        grid = _ansatz_q(modes, k, beta, t1, t2)
        i, j = np.unravel_index(np.argmax(grid), grid.shape)
        res = minimize(
            lambda x, k=k: -_ansatz_q(modes, k, beta, x[0], x[1]),
            np.array([theta[i], theta[j]]),
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": fatol, "maxiter": 5000},
        )
        converged &= bool(res.success)
        value, x = (-float(res.fun), res.x) if -res.fun >= grid[i, j] else (float(grid[i, j]), (theta[i], theta[j]))
        if best is None or value > best[0]:
            best = (value, BiseparableAnsatz(k, float(x[0]), float(x[1])))
    logger.debug("Modified alpha for N=%s, beta=%.6g: %.6g", modes, beta, best[0])
    return AnsatzMaximum(best[0], best[1], OptimizerInfo(len(ks), converged))


def critical_efficiency(modes: int, beta: float) -> float:
    """Return ``alpha / (1 - (N - 1) beta)``, the overall efficiency above which the modified scheme detects.

    Parameters
    ----------
    modes : int
        Number of modes N, at least 3.
    beta : float
        Weight of the biseparable projectors, with (N - 1) * beta < 1.

    Returns
    -------
    float
        The critical product of detector efficiency and source success probability.
    """
    _check_beta(modes, beta)
    return alpha_modified(modes, beta).alpha / (1 - (modes - 1) * beta)


def modified_witness_value(rho: FockState | MixedState, w: ModifiedWitness) -> float:
    """Return ``alpha tr(rho I_2) - <W_N|rho|W_N> + beta sum_i <BS_i|rho|BS_i>``.

    ``I_2`` is the projector on at most two quanta, or the full identity when the ``identity_projector``
    option is "full".
    """
    space = rho.space
    if space.modes != w.modes:
        raise WitnessError(f"Dimension mismatch: state on {space.modes} modes, witness on {w.modes}.")
    if OPTIONS["identity_projector"] == "full":
        identity = 1.0
    else:
        identity = total_quanta_probability(rho, 2)
    value = w.alpha * identity - fidelity_to_pure(rho, _symmetric(w.modes, space))
    value += w.beta * sum(fidelity_to_pure(rho, bs_state(i, w.modes, space)) for i in range(w.modes))
    return float(value)


def _random_biseparable_excitations(rng: np.random.Generator, modes: int, size: int) -> np.ndarray:
    # one-photon amplitudes of random products of <=1-excitation factors over random bipartitions
    cuts = np.array([[m in part for m in range(modes)] for part in _bipartitions(modes)])
    mask = cuts[rng.integers(len(cuts), size=size)]
    z = rng.normal(size=(size, modes)) + 1j * rng.normal(size=(size, modes))
    z0a = rng.normal(size=size) + 1j * rng.normal(size=size)
    z0b = rng.normal(size=size) + 1j * rng.normal(size=size)
    weight = np.abs(z) ** 2
    norm_a = np.sqrt(np.abs(z0a) ** 2 + np.sum(weight * mask, axis=1))[:, None]
    norm_b = np.sqrt(np.abs(z0b) ** 2 + np.sum(weight * ~mask, axis=1))[:, None]
    return np.where(mask, z * z0b[:, None], z * z0a[:, None]) / (norm_a * norm_b)


def _sampled_max(modes: int, samples: int, seed: int, func, chunk: int = 100_000) -> float:
    rng = np.random.default_rng(seed)
    best = -math.inf
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        best = max(best, float(np.max(func(_random_biseparable_excitations(rng, modes, size)))))
        done += size
    return best


def sample_biseparable_q(
    modes: int, beta: float, samples: int | None = None, seed: int | None = None, alpha: float | None = None
) -> MonteCarloCheck:
    """Sample random complex biseparable states and compare their largest Q with the ansatz constant.

    A breach (a sample above alpha + 1e-6) is reported through a warning and the returned flag.
    """
    _check_beta(modes, beta)
    samples = samples or OPTIONS["monte_carlo_samples"]
    seed = OPTIONS["seed"] if seed is None else seed
    alpha = alpha_modified(modes, beta).alpha if alpha is None else alpha

    def _q(v):
        total = v.sum(axis=1, keepdims=True)
        return np.abs(total[:, 0]) ** 2 / modes - beta * np.sum(np.abs(total - v) ** 2, axis=1) / (modes - 1)

    max_value = _sampled_max(modes, samples, seed, _q)
    breached = max_value > alpha + 1e-6
    if breached:
        msg = f"Biseparable sample reached Q = {max_value:.9g} above the ansatz constant {alpha:.9g} (N={modes}, beta={beta:.6g})."
        logger.warning(msg)
        warnings.warn(msg)
    return MonteCarloCheck(max_value, alpha, samples, seed, breached)


def max_biseparable_fidelity(spec: WStateSpec, samples: int | None = None, seed: int | None = None) -> MonteCarloCheck:
    """Sample random biseparable states and compare their largest overlap with |W> to :py:func:`alpha_w`."""
    samples = samples or OPTIONS["monte_carlo_samples"]
    seed = OPTIONS["seed"] if seed is None else seed
    alpha = alpha_w(spec)
    coeffs = spec.array.conj()
    max_value = _sampled_max(spec.modes, samples, seed, lambda v: np.abs(v @ coeffs) ** 2)
    breached = max_value > alpha + 1e-9
    if breached:
        warnings.warn(f"Biseparable sample reached fidelity {max_value:.12g} above alpha = {alpha:.12g}.")
    return MonteCarloCheck(max_value, alpha, samples, seed, breached)


def scan_beta(modes: int, products=None) -> pd.DataFrame:
    """Tabulate the critical efficiency against ``(N - 1) beta``.

    Parameters
    ----------
    modes : int
        Number of modes.
    products : sequence of float, optional
        Values of (N - 1) * beta in [0, 1). Defaults to 0, 0.5, 0.9, 0.99 and 0.999.

    Returns
    -------
    pd.DataFrame
        Columns ``beta_product``, ``beta``, ``alpha``, ``e_c``.
    """
    products = (0.0, 0.5, 0.9, 0.99, 0.999) if products is None else products
    rows = []
    for prod in products:
        beta = prod / (modes - 1)
        alpha = alpha_modified(modes, beta).alpha
        rows.append({"beta_product": prod, "beta": beta, "alpha": alpha, "e_c": alpha / (1 - prod)})
    return pd.DataFrame(rows, columns=["beta_product", "beta", "alpha", "e_c"])
