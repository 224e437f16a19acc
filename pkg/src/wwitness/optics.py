"""Passive linear-optical elements and networks acting on truncated Fock states.

Beam splitters follow the real rotation convention: on modes (j, j+1) the creation operators are
substituted as ``a_j -> sin(theta) a_j + cos(theta) a_{j+1}`` and ``a_{j+1} -> -cos(theta) a_j + sin(theta) a_{j+1}``,
so that a photon entering mode j stays there with amplitude ``sin(theta)`` (transmissivity ``cos(theta)``).
Phase shifters multiply each ket by ``exp(-i phi n_j)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Any, Union

import numpy as np
from scipy.special import comb, factorial

from ._config import OPTIONS
from .fock import FockSpace, FockState, MixedState, w_state

__all__ = [
    "BeamSplitter",
    "Element",
    "Network",
    "OpticsError",
    "PhaseShifter",
    "WStateSpec",
    "apply_element",
    "apply_network",
    "element_matrix",
    "invert_network",
    "local_phase_layer",
    "network_matrix",
    "single_excitation_matrix",
    "synthesize_w_network",
]

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
# relative deviation of the squared norm above which user coefficients are reported as renormalized
RENORMALIZE_WARNING = 1e-9


class OpticsError(ValueError):
    """Raised for invalid elements, networks or W-state coefficients."""


@dataclass(frozen=True)
class BeamSplitter:
    """Beam splitter on the adjacent modes (mode, mode + 1) with rotation angle `theta` (radians)."""

    mode: int
    theta: float

    def __post_init__(self):
        """Validate the fields."""
        if not math.isfinite(self.theta):
            raise OpticsError(f"Beam splitter angle must be finite, got {self.theta}.")
        if self.mode < 0:
            raise OpticsError(f"Beam splitter mode must be non-negative, got {self.mode}.")

    @property
    def span(self) -> int:
        return self.mode + 2


@dataclass(frozen=True)
class PhaseShifter:
    """Phase shift `phi` (radians) on one mode."""

    mode: int
    phi: float

    def __post_init__(self):
        """Validate the fields."""
        if not math.isfinite(self.phi):
            raise OpticsError(f"Phase must be finite, got {self.phi}.")
        if self.mode < 0:
            raise OpticsError(f"Phase shifter mode must be non-negative, got {self.mode}.")

    @property
    def span(self) -> int:
        return self.mode + 1


Element = Union[BeamSplitter, PhaseShifter]


def _element_to_dict(element: Element) -> dict[str, Any]:
    if isinstance(element, BeamSplitter):
        return {"type": "bs", "mode": element.mode, "theta": element.theta % TWO_PI}
    return {"type": "ps", "mode": element.mode, "phi": element.phi % TWO_PI}


def _element_from_dict(obj: Mapping[str, Any]) -> Element:
    kind = obj.get("type")
    if kind == "bs":
        return BeamSplitter(int(obj["mode"]), float(obj["theta"]))
    if kind == "ps":
        return PhaseShifter(int(obj["mode"]), float(obj["phi"]))
    raise OpticsError(f"Unknown element type {kind!r}; expected 'bs' or 'ps'.")


@dataclass(frozen=True)
class Network:
    """Ordered sequence of elements on `modes` modes, applied left to right."""

    modes: int
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        """Validate the element indices."""
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.modes < 1:
            raise OpticsError(f"A network needs at least one mode, got {self.modes}.")
        for element in self.elements:
            if not isinstance(element, (BeamSplitter, PhaseShifter)):
                raise TypeError(f"Network elements must be BeamSplitter or PhaseShifter, got {type(element).__name__}.")
            if element.span > self.modes:
                raise OpticsError(f"{element} does not fit in {self.modes} modes.")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def then(self, other: Network) -> Network:
        """Return the network applying `self` first, then `other`."""
        if other.modes != self.modes:
            raise OpticsError(f"Cannot chain networks on {self.modes} and {other.modes} modes.")
        return Network(self.modes, self.elements + other.elements)

    def embedded(self, modes: int) -> Network:
        """Return the same elements acting on the first modes of a larger network."""
        return Network(modes, self.elements)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation, angles reduced modulo 2 pi."""
        return {"modes": self.modes, "elements": [_element_to_dict(e) for e in self.elements]}

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> Network:
        """Inverse of :py:meth:`to_dict`."""
        try:
            return cls(int(obj["modes"]), tuple(_element_from_dict(e) for e in obj["elements"]))
        except (KeyError, TypeError) as err:
            raise OpticsError(f"Malformed network description: {err!r}") from err


@dataclass(frozen=True)
class WStateSpec:
    """Complex coefficients of a single-photon W state, normalized within the ``tolerance`` option."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        """Validate the normalization."""
        coeffs = tuple(complex(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise OpticsError("A W state needs at least one coefficient.")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise OpticsError("W-state coefficients must be finite.")
        norm2 = sum(abs(c) ** 2 for c in coeffs)
        if abs(norm2 - 1) > OPTIONS["tolerance"]:
            raise OpticsError(f"W-state coefficients are not normalized: squared norm is {norm2!r}.")

    @classmethod
    def symmetric(cls, modes: int) -> WStateSpec:
        """Return the symmetric W state on `modes` modes."""
        if modes < 1:
            raise OpticsError(f"A W state needs at least one mode, got {modes}.")
        return cls((1 / math.sqrt(modes),) * modes)

    @classmethod
    def from_values(cls, values: Iterable[complex]) -> WStateSpec:
        """Build a spec from unnormalized values, renormalizing them.

        A warning is emitted when the squared norm deviates from 1 by more than 1e-9.
        """
        values = np.asarray(list(values), dtype=complex)
        norm2 = float(np.sum(np.abs(values) ** 2))
        if norm2 == 0 or not math.isfinite(norm2):
            raise OpticsError("W-state coefficients must not all vanish.")
        if abs(norm2 - 1) > RENORMALIZE_WARNING:
            warnings.warn(f"W-state coefficients had squared norm {norm2:.12g}; they were renormalized.")
        return cls(tuple(values / math.sqrt(norm2)))

    @property
    def modes(self) -> int:
        """Number of modes N."""
        return len(self.coeffs)

    @property
    def array(self) -> np.ndarray:
        """Coefficients as a complex vector."""
        return np.array(self.coeffs, dtype=complex)

    @property
    def magnitudes(self) -> np.ndarray:
        """Moduli |c_j|."""
        return np.abs(self.array)

    @property
    def phases(self) -> np.ndarray:
        """Arguments arg(c_j), in (-pi, pi]."""
        return np.angle(self.array)

    def is_symmetric(self, atol: float = 1e-9) -> bool:
        """Whether all coefficient magnitudes equal 1/sqrt(N), phases ignored."""
        return bool(np.allclose(self.magnitudes, 1 / math.sqrt(self.modes), rtol=0, atol=atol))

    def state(self, space: FockSpace | None = None) -> FockState:
        """Return |W> as a :py:class:`~wwitness.fock.FockState`."""
        return w_state(self.coeffs, space or FockSpace(self.modes))

    def to_dict(self) -> dict[str, Any]:
        return {"coeffs": [{"re": c.real, "im": c.imag} for c in self.coeffs]}

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any] | Sequence[Any]) -> WStateSpec:
        """Inverse of :py:meth:`to_dict`; a bare list of coefficients is also accepted."""
        try:
            entries = obj["coeffs"] if isinstance(obj, Mapping) else obj
            values = [
                complex(e["re"], e.get("im", 0.0)) if isinstance(e, Mapping) else complex(e) for e in entries
            ]
        except (KeyError, TypeError, ValueError) as err:
            raise OpticsError(f"Malformed W-state description: {err!r}") from err
        return cls.from_values(values)


def _beam_splitter_operator(space: FockSpace, mode: int, theta: float) -> np.ndarray:
    s, c = math.sin(theta), math.cos(theta)
    op = np.zeros((space.dim, space.dim))
    for col, occ in enumerate(space.basis):
        n1, n2 = occ[mode], occ[mode + 1]
        norm_in = math.sqrt(factorial(n1, exact=True) * factorial(n2, exact=True))
        # expand (s a1 + c a2)^n1 (-c a1 + s a2)^n2 acting on the vacuum
        for p in range(n1 + 1):
            for q in range(n2 + 1):
                coeff = comb(n1, p, exact=True) * comb(n2, q, exact=True) * s**p * c ** (n1 - p) * (-c) ** q * s ** (n2 - q)
                m1 = p + q
                m2 = n1 + n2 - m1
                out = list(occ)
                out[mode], out[mode + 1] = m1, m2
                try:
                    row = space.index(out)
                except ValueError as err:
                    raise OpticsError(f"Internal invariant violated: passive element left the space ({err}).") from err
                op[row, col] += coeff * math.sqrt(factorial(m1, exact=True) * factorial(m2, exact=True)) / norm_in
    return op


@lru_cache(maxsize=4096)
def element_matrix(space: FockSpace, element: Element) -> np.ndarray:
    """Return the action of one element on the truncated space as a dense matrix.

    Parameters
    ----------
    space : FockSpace
        Space on which the element acts.
    element : BeamSplitter or PhaseShifter
        The optical element.

    Returns
    -------
    np.ndarray
        Matrix of shape (dim, dim), read-only.
    """
    if element.span > space.modes:
        raise OpticsError(f"{element} does not fit in {space.modes} modes.")
    if isinstance(element, BeamSplitter):
        op = _beam_splitter_operator(space, element.mode, element.theta).astype(complex)
    else:
        op = np.diag(np.exp(-1j * element.phi * space.occupations[:, element.mode]))
    op.setflags(write=False)
    return op


def network_matrix(space: FockSpace, net: Network) -> np.ndarray:
    """Return the product of the element matrices of `net` on `space`."""
    if net.modes != space.modes:
        raise OpticsError(f"Network on {net.modes} modes applied to a {space.modes}-mode state.")
    return reduce(lambda acc, e: element_matrix(space, e) @ acc, net.elements, np.eye(space.dim, dtype=complex))


def apply_element(state: FockState, element: Element) -> FockState:
    """Send a pure state through one element.

    Parameters
    ----------
    state : FockState
        Input state. The element must fit in its modes.
    element : BeamSplitter or PhaseShifter
        The element.

    Returns
    -------
    FockState
        The output state, on the same space and with the same normalization flag.
    """
    return FockState(state.space, element_matrix(state.space, element) @ state.amplitudes, normalized=state.normalized)


def apply_network(state: FockState | MixedState, net: Network) -> FockState | MixedState:
    """Send a pure or mixed state through a network, element by element.

    Parameters
    ----------
    state : FockState or MixedState
        Input state, on as many modes as the network.
    net : Network
        The network.

    Returns
    -------
    FockState or MixedState
        Output of the same kind as the input.
    """
    if isinstance(state, MixedState):
        op = network_matrix(state.space, net)
        return state.map(lambda s: FockState(s.space, op @ s.amplitudes, normalized=s.normalized))
    if net.modes != state.modes:
        raise OpticsError(f"Network on {net.modes} modes applied to a {state.modes}-mode state.")
    return reduce(apply_element, net.elements, state)


def invert_network(net: Network) -> Network:
    """Return the network undoing `net`.

    Elements are taken in reverse order, each beam splitter B(theta) becoming B(pi - theta) and each phase
    shifter P(phi) becoming P(-phi).

    Parameters
    ----------
    net : Network
        The network to invert.

    Returns
    -------
    Network
        A network on the same modes whose composition with `net` is the identity.
    """
    inverse = []
    for element in reversed(net.elements):
        if isinstance(element, BeamSplitter):
            inverse.append(BeamSplitter(element.mode, math.pi - element.theta))
        else:
            inverse.append(PhaseShifter(element.mode, -element.phi))
    return Network(net.modes, tuple(inverse))


def synthesize_w_network(spec: WStateSpec) -> Network:
    """Return the beam-splitter array producing `spec` from a photon in the first mode.

    The j-th splitter angle is ``arcsin(|c_j| / prod_{i<j} cos(theta_i))``; trailing phase shifters set the
    coefficient phases. The amplitude left after the first j splitters equals the tail norm
    ``sqrt(sum_{i>=j} |c_i|^2)``, so each angle is evaluated as ``atan2(|c_j|, sqrt(sum_{i>j} |c_i|^2))``,
    which keeps full precision when one coefficient dominates.

    Parameters
    ----------
    spec : WStateSpec
        Target coefficients.

    Returns
    -------
    Network
        Network mapping |1, 0, ..., 0> onto sum_j c_j |0..1_j..0>.
    """
    mags = spec.magnitudes
    # tails[j] = sqrt(sum_{i>=j} |c_i|^2), accumulated from the last mode
    tails = np.append(np.sqrt(np.cumsum(mags[::-1] ** 2)[::-1]), 0.0)
    elements: list[Element] = [
        BeamSplitter(j, float(np.arctan2(mags[j], tails[j + 1]))) for j in range(spec.modes - 1)
    ]

    for j, (mag, phase) in enumerate(zip(mags, spec.phases)):
        if mag > 0 and phase != 0:
            elements.append(PhaseShifter(j, -float(phase)))
    logger.debug("Synthesized %s-mode W network with %s elements", spec.modes, len(elements))
    return Network(spec.modes, tuple(elements))


def local_phase_layer(phases: Sequence[float]) -> Network:
    """Return a network with one phase shifter per mode."""
    return Network(len(phases), tuple(PhaseShifter(j, float(phi)) for j, phi in enumerate(phases)))


def single_excitation_matrix(net: Network) -> np.ndarray:
    """Return the N x N transfer matrix of `net` on one-photon amplitudes."""
    transfer = np.eye(net.modes, dtype=complex)
    for element in net.elements:
        step = np.eye(net.modes, dtype=complex)
        j = element.mode
        if isinstance(element, BeamSplitter):
            s, c = math.sin(element.theta), math.cos(element.theta)
            step[j : j + 2, j : j + 2] = [[s, -c], [c, s]]
        else:
            step[j, j] = np.exp(-1j * element.phi)
        transfer = step @ transfer
    return transfer
