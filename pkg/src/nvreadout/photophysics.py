"""Five-level rate-equation model of NV⁻ optical pumping.

The model keeps two ground sublevels (m_s=0 and the merged m_s=±1 pair),
their two optically excited counterparts, and the metastable singlet shelf.
A laser pumps each ground level to its excited partner at a rate ``beta``
(spin conserved); the excited levels decay radiatively back down or cross
over non-radiatively into the singlet, which empties into the ground
manifold with a strong preference for m_s=0.  Spin contrast in fluorescence
comes entirely from the m_s=±1 excited level crossing over more strongly.

Populations are plain length-5 numpy vectors ordered by :class:`Level`.
Rate matrices ``M`` are 5x5 generators with the convention ``dp/dt = M @ p``
(columns sum to zero), so ``p(t) = expm(M t) @ p(0)`` for a constant drive.

All rates are in 1/ns and all times in ns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateModelError, NumericError, ParameterError

N_LEVELS = 5


class Level(IntEnum):
    """Fixed ordering of the five model levels inside population vectors."""

    G0 = 0  # ground, m_s = 0
    G1 = 1  # ground, m_s = ±1 (merged)
    E0 = 2  # excited, m_s = 0
    E1 = 3  # excited, m_s = ±1 (merged)
    S = 4   # metastable singlet shelf


#: Singlet shelf lifetime 1/(k_s0 + k_s1) used by the default parameters.
DEFAULT_SINGLET_LIFETIME_NS = 250.0


@dataclass(frozen=True)
class AmplitudeMap:
    """Map from normalized drive amplitude u ∈ [0, 1] to pumping rate (1/ns).

    The map is monotone non-decreasing with ``rate(0) = 0`` and
    ``rate(1) = beta_max``.  ``shape="linear"`` is the default; the
    ``"saturating"`` shape reaches half of ``beta_max`` at ``sat_amp`` and
    models a drive chain that compresses at high amplitude.
    """

    beta_max: float = 0.5
    shape: str = "linear"
    sat_amp: float | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.beta_max) or self.beta_max <= 0:
            raise ParameterError(f"beta_max must be positive, got {self.beta_max}")
        if self.shape not in ("linear", "saturating"):
            raise ParameterError(f"unknown amplitude map shape {self.shape!r}")
        if self.shape == "saturating":
            if self.sat_amp is None or not (0.0 < self.sat_amp < 0.5):
                raise ParameterError(
                    "saturating map needs sat_amp in (0, 0.5), got "
                    f"{self.sat_amp}"
                )

    def rate(self, amplitude):
        """Pumping rate for a scalar or array of amplitudes in [0, 1]."""
        u = np.asarray(amplitude, dtype=float)
        if np.any(u < -1e-12) or np.any(u > 1.0 + 1e-12):
            raise ParameterError("amplitude outside [0, 1]")
        u = np.clip(u, 0.0, 1.0)
        if self.shape == "linear":
            beta = self.beta_max * u
        else:
            # c chosen so that rate(sat_amp) = beta_max / 2 and rate(1) = beta_max
            c = self.sat_amp / (1.0 - 2.0 * self.sat_amp)
            beta = self.beta_max * u * (1.0 + c) / (u + c)
        return float(beta) if np.isscalar(amplitude) else beta


@dataclass(frozen=True)
class RateParams:
    """Transition rates, collection efficiency, and the drive-to-rate map.

    Defaults reproduce the usual room-temperature ordering of the NV⁻
    kinetics: m_s=±1 crosses into the singlet much faster than m_s=0, and
    the singlet returns preferentially to m_s=0 with a 250 ns lifetime.

    Attributes
    ----------
    k_rad : float
        Radiative decay rate E→G, spin conserving (1/ns).
    k_isc0, k_isc1 : float
        Intersystem-crossing rates E0→S and E1→S (1/ns); ``k_isc1 > k_isc0``.
    k_s0, k_s1 : float
        Singlet decay rates S→G0 and S→G1 (1/ns); ``k_s0 > k_s1``.
    eta : float
        Detected photons per radiative decay, in (0, 1].
    amp_map : AmplitudeMap
        Conversion from waveform amplitude to pumping rate.
    """

    k_rad: float = 0.065
    k_isc0: float = 0.011
    k_isc1: float = 0.050
    k_s0: float = 0.8 / DEFAULT_SINGLET_LIFETIME_NS
    k_s1: float = 0.2 / DEFAULT_SINGLET_LIFETIME_NS
    eta: float = 0.0025
    amp_map: AmplitudeMap = field(default_factory=AmplitudeMap)

    def __post_init__(self) -> None:
        rates = (self.k_rad, self.k_isc0, self.k_isc1, self.k_s0, self.k_s1)
        if any(not np.isfinite(k) or k < 0 for k in rates):
            raise ParameterError(f"all rates must be finite and >= 0, got {rates}")
        if not (0.0 < self.eta <= 1.0):
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.k_isc1 > self.k_isc0:
            raise ParameterError("k_isc1 must exceed k_isc0 (spin contrast)")
        if not self.k_s0 > self.k_s1:
            raise ParameterError("k_s0 must exceed k_s1 (singlet favors m_s=0)")

    @property
    def singlet_lifetime_ns(self) -> float:
        return 1.0 / (self.k_s0 + self.k_s1)

    def _key(self) -> tuple:
        """Hashable identity of everything that enters the rate matrix."""
        return (self.k_rad, self.k_isc0, self.k_isc1, self.k_s0, self.k_s1, self.eta)


def pure_state(level: Level | int) -> np.ndarray:
    """Population vector with all weight on one level."""
    p = np.zeros(N_LEVELS)
    p[int(level)] = 1.0
    return p


def thermal_ground_state() -> np.ndarray:
    """Unpolarized room-temperature ground doublet: G0 = G1 = 1/2."""
    p = np.zeros(N_LEVELS)
    p[Level.G0] = p[Level.G1] = 0.5
    return p


def check_populations(p: np.ndarray, *, entry_tol: float = 1e-12,
                      sum_tol: float = 1e-9) -> np.ndarray:
    """Validate a population vector; returns it as a float array."""
    p = np.asarray(p, dtype=float)
    if p.shape != (N_LEVELS,):
        raise ParameterError(f"populations must have shape ({N_LEVELS},), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NumericError("population vector contains non-finite entries")
    if np.any(p < -entry_tol) or np.any(p > 1.0 + entry_tol):
        raise ParameterError(f"population entries outside [0, 1]: {p}")
    if abs(p.sum() - 1.0) > sum_tol:
        raise ParameterError(f"populations sum to {p.sum()}, expected 1")
    return p


def build_rate_matrix(params: RateParams, beta: float) -> np.ndarray:
    """Generator matrix for pumping rate ``beta`` (1/ns).

    Encodes exactly the five-level optical cycle: spin-conserving pumping
    G0→E0 and G1→E1 at ``beta``, radiative decay E→G at ``k_rad``,
    intersystem crossing E0→S / E1→S, and singlet decay S→G0 / S→G1.
    Columns sum to zero exactly.
    """
    if not np.isfinite(beta) or beta < 0:
        raise ParameterError(f"pumping rate must be finite and >= 0, got {beta}")
    G0, G1, E0, E1, S = Level.G0, Level.G1, Level.E0, Level.E1, Level.S
    M = np.zeros((N_LEVELS, N_LEVELS))
    M[E0, G0] = beta
    M[E1, G1] = beta
    M[G0, E0] = params.k_rad
    M[G1, E1] = params.k_rad
    M[S, E0] = params.k_isc0
    M[S, E1] = params.k_isc1
    M[G0, S] = params.k_s0
    M[G1, S] = params.k_s1
    # diagonal balances each column exactly, so column sums are 0 by construction
    np.fill_diagonal(M, 0.0)
    M[np.diag_indices(N_LEVELS)] = -M.sum(axis=0)
    return M


def propagate(M: np.ndarray, p0: np.ndarray, dt: float) -> np.ndarray:
    """Evolve populations for ``dt`` ns under a constant generator.

    Uses the matrix exponential, which is exact for a constant drive, so
    there is no step-size error to tune.
    """
    if not np.isfinite(dt):
        raise NumericError(f"dt must be finite, got {dt}")
    if dt < 0:
        raise ParameterError(f"dt must be >= 0, got {dt}")
    p0 = check_populations(p0)
    if dt == 0.0:
        return p0.copy()
    if not np.all(np.isfinite(M)):
        raise NumericError("rate matrix contains non-finite entries")
    p = expm(M * dt) @ p0
    return check_populations(p)


def steady_state(M: np.ndarray) -> np.ndarray:
    """Stationary population vector of an irreducible generator.

    Solves ``M p = 0`` with the normalization Σp = 1 by replacing the last
    (redundant) row of the singular generator with the normalization row.
    Requires a positive pumping rate; with the laser off the chain splits
    into absorbing ground states and has no unique stationary vector.
    """
    if M[Level.E0, Level.G0] <= 0.0 or M[Level.E1, Level.G1] <= 0.0:
        raise DegenerateModelError(
            "steady state undefined for beta = 0 (reducible chain)"
        )
    A = M.copy()
    A[-1, :] = 1.0
    b = np.zeros(N_LEVELS)
    b[-1] = 1.0
    p = np.linalg.solve(A, b)
    if np.any(p < -1e-12):
        raise NumericError(f"steady-state solve produced negative entries: {p}")
    p = np.maximum(p, 0.0)
    p /= p.sum()
    residual = np.max(np.abs(M @ p))
    if residual >= 1e-10:
        raise NumericError(f"steady-state residual too large: {residual:.3e}")
    return p


def emission_rate(p: np.ndarray, params: RateParams) -> float:
    """Detected-photon rate (1/ns) for the given populations."""
    p = check_populations(p)
    return params.eta * params.k_rad * (p[Level.E0] + p[Level.E1])
