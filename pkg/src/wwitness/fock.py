"""Exact state algebra on a bosonic Fock space truncated at a total photon number."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Union

import numpy as np

from ._config import OPTIONS

__all__ = [
    "FockSpace",
    "FockSpaceError",
    "FockState",
    "MixedState",
    "fidelity_to_pure",
    "inner_product",
    "make_basis_state",
    "permute_modes",
    "photon_number_distribution",
    "tensor_product",
    "total_quanta_probability",
    "vacuum",
    "w_state",
]

logger = logging.getLogger(__name__)

Occupation = tuple[int, ...]


class FockSpaceError(ValueError):
    """Raised when states do not fit their Fock space or do not share one."""


@lru_cache(maxsize=64)
def _enumerate_basis(modes: int, cap: int) -> tuple[Occupation, ...]:
    # ordered by total quanta, then lexicographically
    basis: list[Occupation] = []
    for total in range(cap + 1):
        level = set()
        for combo in itertools.combinations_with_replacement(range(modes), total):
            counts = [0] * modes
            for mode in combo:
                counts[mode] += 1
            level.add(tuple(counts))
        basis.extend(sorted(level))
    return tuple(basis)


@dataclass(frozen=True)
class FockSpace:
    """N-mode Fock space truncated at a maximal total photon number.

    Parameters
    ----------
    modes : int
        Number of modes N, at least 1.
    cap : int, optional
        Maximal total number of quanta. Defaults to the ``photon_cap`` option.
    """

    modes: int
    cap: int = None  # type: ignore[assignment]

    def __post_init__(self):
        """Validate the dimensions."""
        if self.cap is None:
            object.__setattr__(self, "cap", OPTIONS["photon_cap"])
        if not isinstance(self.modes, (int, np.integer)) or self.modes < 1:
            raise FockSpaceError(f"A Fock space needs at least one mode, got {self.modes}.")
        if not isinstance(self.cap, (int, np.integer)) or self.cap < 0:
            raise FockSpaceError(f"The photon cap must be a non-negative integer, got {self.cap}.")
        object.__setattr__(self, "modes", int(self.modes))
        object.__setattr__(self, "cap", int(self.cap))

    @property
    def basis(self) -> tuple[Occupation, ...]:
        """Occupation vectors of the basis, in canonical order."""
        return _enumerate_basis(self.modes, self.cap)

    @cached_property
    def occupations(self) -> np.ndarray:
        """Basis occupations as an integer array of shape (dim, modes)."""
        occ = np.array(self.basis, dtype=int).reshape(len(self.basis), self.modes)
        occ.setflags(write=False)
        return occ

    @cached_property
    def _lookup(self) -> dict[Occupation, int]:
        return {occ: i for i, occ in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        """Dimension of the truncated space."""
        return len(self.basis)

    def validate(self, occupation: Sequence[int]) -> Occupation:
        """Return the occupation as a tuple, raising if it does not belong to the space."""
        occ = tuple(int(n) for n in occupation)
        if len(occ) != self.modes:
            raise FockSpaceError(f"Occupation {occ} has {len(occ)} modes, the space has {self.modes}.")
        if any(n < 0 for n in occ):
            raise FockSpaceError(f"Occupation {occ} has negative photon numbers.")
        if sum(occ) > self.cap:
            raise FockSpaceError(f"Occupation {occ} holds {sum(occ)} quanta: cap exceeded ({self.cap}).")
        return occ

    def index(self, occupation: Sequence[int]) -> int:
        """Position of an occupation vector in the basis."""
        return self._lookup[self.validate(occupation)]

    def check_same(self, other: FockSpace) -> None:
        """Raise if `other` is not this space."""
        if self != other:
            raise FockSpaceError(
                f"Dimension mismatch: space ({self.modes} modes, cap {self.cap}) "
                f"vs ({other.modes} modes, cap {other.cap})."
            )


class FockState:
    """Pure state as an amplitude vector over the basis of a :py:class:`FockSpace`.

    Values are immutable. Normalization is checked unless ``normalized=False`` is given;
    use :py:meth:`renormalized` for an explicit renormalization.

    Parameters
    ----------
    space : FockSpace
        The enclosing space.
    amplitudes : array-like of complex
        Amplitudes in the canonical basis order of `space`.
    normalized : bool
        Whether the state is flagged as normalized (checked within the ``tolerance`` option).
    """

    __slots__ = ("_amplitudes", "normalized", "space")

    def __init__(self, space: FockSpace, amplitudes: Iterable[complex], normalized: bool = True):
        amps = np.array(amplitudes, dtype=complex).ravel()
        if amps.size != space.dim:
            raise FockSpaceError(f"Expected {space.dim} amplitudes for this space, got {amps.size}.")
        if not np.all(np.isfinite(amps)):
            raise FockSpaceError("Amplitudes must be finite.")
        if normalized:
            norm2 = float(np.vdot(amps, amps).real)
            if abs(norm2 - 1) > OPTIONS["tolerance"]:
                raise FockSpaceError(f"State is not normalized: squared norm is {norm2!r}.")
        amps.setflags(write=False)
        self.space = space
        self._amplitudes = amps
        self.normalized = normalized

    @classmethod
    def from_mapping(
        cls, space: FockSpace, amplitudes: Mapping[Sequence[int], complex], normalized: bool = True
    ) -> FockState:
        """Build a state from an {occupation: amplitude} mapping."""
        vec = np.zeros(space.dim, dtype=complex)
        for occ, amp in amplitudes.items():
            vec[space.index(occ)] += amp
        return cls(space, vec, normalized=normalized)

    @property
    def amplitudes(self) -> np.ndarray:
        """Read-only amplitude vector."""
        return self._amplitudes

    @property
    def modes(self) -> int:
        """Number of modes of the underlying space."""
        return self.space.modes

    @property
    def cap(self) -> int:
        """Photon-number cap of the underlying space."""
        return self.space.cap

    def amplitude(self, occupation: Sequence[int]) -> complex:
        """Amplitude of one basis ket."""
        return complex(self._amplitudes[self.space.index(occupation)])

    def items(self, atol: float = 0.0) -> Iterator[tuple[Occupation, complex]]:
        """Iterate over (occupation, amplitude) pairs with modulus above `atol`."""
        for i in np.flatnonzero(np.abs(self._amplitudes) > atol):
            yield self.space.basis[i], complex(self._amplitudes[i])

    def norm(self) -> float:
        return float(np.linalg.norm(self._amplitudes))

    def renormalized(self) -> FockState:
        """Return the state scaled to unit norm."""
        norm = self.norm()
        if norm == 0:
            raise FockSpaceError("Cannot renormalize the zero vector.")
        return FockState(self.space, self._amplitudes / norm)

    def allclose(self, other: FockState, atol: float = 1e-10) -> bool:
        """Amplitude-wise comparison, global phase included."""
        self.space.check_same(other.space)
        return bool(np.allclose(self._amplitudes, other._amplitudes, rtol=0, atol=atol))

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation, listing non-zero amplitudes only."""
        return {
            "modes": self.modes,
            "cap": self.cap,
            "amplitudes": [
                {"occ": list(occ), "re": amp.real, "im": amp.imag} for occ, amp in self.items()
            ],
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any], renormalize: bool = True) -> FockState:
        """Inverse of :py:meth:`to_dict`.

        With `renormalize`, deviations from unit norm up to 1e-9 (rounded serializations) are removed.
        """
        try:
            space = FockSpace(int(obj["modes"]), int(obj["cap"]))
            mapping = {tuple(entry["occ"]): complex(entry["re"], entry.get("im", 0.0)) for entry in obj["amplitudes"]}
        except (KeyError, TypeError) as err:
            raise FockSpaceError(f"Malformed state description: {err!r}") from err
        state = cls.from_mapping(space, mapping, normalized=False)
        if renormalize and abs(state.norm() ** 2 - 1) <= 1e-9:
            return state.renormalized()
        return cls(space, state.amplitudes)

    def __repr__(self) -> str:
        terms = " + ".join(f"({amp:.4g})|{','.join(map(str, occ))}>" for occ, amp in self.items(1e-12))
        return f"FockState({terms or '0'})"


class MixedState:
    """Weighted ensemble of pure states sharing one Fock space.

    Parameters
    ----------
    components : iterable of (float, FockState)
        Probabilities and pure states. Weights must be non-negative and sum to 1.
    """

    __slots__ = ("components", "space")

    def __init__(self, components: Iterable[tuple[float, FockState]]):
        comps = tuple((float(w), s) for w, s in components)
        if not comps:
            raise FockSpaceError("A mixed state needs at least one component.")
        space = comps[0][1].space
        for weight, state in comps:
            if weight < 0:
                raise FockSpaceError(f"Negative mixture weight {weight}.")
            space.check_same(state.space)
        total = sum(w for w, _ in comps)
        if abs(total - 1) > OPTIONS["tolerance"]:
            raise FockSpaceError(f"Mixture weights sum to {total!r}, not 1.")
        self.components = comps
        self.space = space

    @classmethod
    def pure(cls, state: FockState) -> MixedState:
        return cls([(1.0, state)])

    def __iter__(self) -> Iterator[tuple[float, FockState]]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    @property
    def modes(self) -> int:
        """Number of modes shared by all components."""
        return self.space.modes

    @property
    def weights(self) -> np.ndarray:
        """Mixture weights, in component order."""
        return np.array([w for w, _ in self.components])

    def map(self, func) -> MixedState:
        """Apply `func` to every pure component, keeping the weights."""
        return MixedState((w, func(s)) for w, s in self.components)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "modes": self.space.modes,
            "cap": self.space.cap,
            "components": [{"weight": w} | {"amplitudes": s.to_dict()["amplitudes"]} for w, s in self.components],
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> MixedState:
        """Inverse of :py:meth:`to_dict`."""
        try:
            head = {"modes": obj["modes"], "cap": obj["cap"]}
            return cls((float(c["weight"]), FockState.from_dict(head | {"amplitudes": c["amplitudes"]})) for c in obj["components"])
        except (KeyError, TypeError) as err:
            raise FockSpaceError(f"Malformed mixed state description: {err!r}") from err

    def __repr__(self) -> str:
        return "MixedState(" + ", ".join(f"{w:.4g}: {s!r}" for w, s in self.components) + ")"


State = Union[FockState, MixedState]


def _as_mixed(rho: State) -> MixedState:
    if isinstance(rho, MixedState):
        return rho
    if isinstance(rho, FockState):
        return MixedState.pure(rho)
    raise TypeError(f"Expected a FockState or MixedState, got {type(rho).__name__}.")


def make_basis_state(occupation: Sequence[int], space: FockSpace | None = None) -> FockState:
    """Return the basis ket of an occupation vector.

    Parameters
    ----------
    occupation : sequence of int
        Photons per mode.
    space : FockSpace, optional
        Target space. Defaults to ``len(occupation)`` modes with the default cap.

    Returns
    -------
    FockState
    """
    space = space or FockSpace(len(occupation))
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(occupation)] = 1
    return FockState(space, vec)


def vacuum(space: FockSpace) -> FockState:
    """Return the vacuum of `space`."""
    return make_basis_state((0,) * space.modes, space)


def w_state(coeffs: Sequence[complex], space: FockSpace | None = None) -> FockState:
    """Return the single-excitation state sum_j c_j |0..1_j..0>."""
    coeffs = np.asarray(coeffs, dtype=complex)
    space = space or FockSpace(coeffs.size)
    if coeffs.size != space.modes:
        raise FockSpaceError(f"{coeffs.size} coefficients given for a {space.modes}-mode space.")
    if space.cap < 1:
        raise FockSpaceError("A W state needs a photon cap of at least 1.")
    vec = np.zeros(space.dim, dtype=complex)
    for mode, c in enumerate(coeffs):
        occ = [0] * space.modes
        occ[mode] = 1
        vec[space.index(occ)] = c
    return FockState(space, vec)


def inner_product(a: FockState, b: FockState) -> complex:
    """Return the overlap <a|b>, conjugate-linear in `a`.

    Parameters
    ----------
    a, b : FockState
        States on the same truncated space.

    Returns
    -------
    complex
        The overlap. States are not renormalized first.

    Raises
    ------
    FockSpaceError
        If the two states live on different spaces.
    """
    a.space.check_same(b.space)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor_product(a: FockState, b: FockState, cap: int | None = None) -> FockState:
    """Return |a>|b> on the concatenated modes.

    Parameters
    ----------
    a, b : FockState
        Factors, `a` on the first modes.
    cap : int, optional
        Photon cap of the result. Defaults to the larger cap of the factors.

    Returns
    -------
    FockState
    """
    space = FockSpace(a.modes + b.modes, max(a.cap, b.cap) if cap is None else cap)
    tol = OPTIONS["tolerance"]
    vec = np.zeros(space.dim, dtype=complex)
    for occ_a, amp_a in a.items():
        for occ_b, amp_b in b.items():
            amp = amp_a * amp_b
            occ = occ_a + occ_b
            if sum(occ) > space.cap:
                if abs(amp) > tol:
                    raise FockSpaceError(f"Product term {occ} holds {sum(occ)} quanta: cap exceeded ({space.cap}).")
                continue
            vec[space.index(occ)] += amp
    return FockState(space, vec, normalized=a.normalized and b.normalized)


def fidelity_to_pure(rho: State, psi: FockState) -> float:
    """Return <psi|rho|psi> for an ensemble or a pure state.

    Parameters
    ----------
    rho : FockState or MixedState
        The state, a pure state being treated as a one-component ensemble.
    psi : FockState
        The pure target, on the same space as `rho`.

    Returns
    -------
    float
        ``sum_k p_k |<psi|psi_k>|^2``, in [0, 1] for normalized inputs.
    """
    rho = _as_mixed(rho)
    rho.space.check_same(psi.space)
    fid = sum(w * abs(np.vdot(psi.amplitudes, s.amplitudes)) ** 2 for w, s in rho)
    return float(fid)


def photon_number_distribution(rho: State) -> dict[Occupation, float]:
    """Return the joint photon-number probabilities, restricted to their support.

    Returns
    -------
    dict
        Mapping {occupation: probability} in canonical basis order.
    """
    rho = _as_mixed(rho)
    probs = np.zeros(rho.space.dim)
    for w, s in rho:
        probs += w * np.abs(s.amplitudes) ** 2
    return {rho.space.basis[i]: float(probs[i]) for i in np.flatnonzero(probs)}


def total_quanta_probability(rho: State, max_total: int) -> float:
    """Probability that the total photon number is at most `max_total`."""
    return float(sum(p for occ, p in photon_number_distribution(rho).items() if sum(occ) <= max_total))


def permute_modes(rho: State, order: Sequence[int]) -> State:
    """Relabel modes: mode k of the result carries mode ``order[k]`` of the input."""
    if isinstance(rho, MixedState):
        return rho.map(lambda s: permute_modes(s, order))
    space = rho.space
    order = tuple(int(m) for m in order)
    if sorted(order) != list(range(space.modes)):
        raise FockSpaceError(f"{order} is not a permutation of {space.modes} modes.")
    perm = space.occupations[:, order]
    vec = np.zeros(space.dim, dtype=complex)
    for i, occ in enumerate(perm):
        vec[space.index(occ)] = rho.amplitudes[i]
    return FockState(space, vec, normalized=rho.normalized)
