"""Killed Markov process models.

A model describes a time-homogeneous Markov process on a live space F plus
an absorbing cemetery. Three concrete models are provided:

* AbsorbingChainModel  — finite-state chain with a sub-Markovian generator;
  simulated exactly by competing exponential clocks (no discretization).
* KilledBrownianModel  — standard Brownian motion on an interval (a, b),
  absorbed at the boundary; Euler stepping with a choice of boundary rule.
  Its survival semigroup has a computable Dirichlet eigenfunction series.
* KilledDiffusionModel — dX = (c0 + c1 X) dt + s dW on an interval, same
  boundary handling; no exact semigroup.

Model objects are immutable after construction and safe to share across
workers; every simulation routine takes an explicit Generator it owns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidModelError, NonFiniteStateError
from .rng import ScalarDraws

__all__ = [
    "KilledState",
    "CEMETERY",
    "BoundaryRule",
    "AbsorbingChainModel",
    "KilledBrownianModel",
    "KilledDiffusionModel",
    "ProcessModel",
    "sample_initial",
    "advance_until",
    "exact_semigroup_available",
]

GENERATOR_ATOL = 1e-9  # diagonal-consistency tolerance for chain generators
DIST_ATOL = 1e-12  # probability mass tolerance


@dataclass(frozen=True)
class KilledState:
    """A point of F or the cemetery. Cemetery carries no live value."""

    live: bool
    value: float | int | None = None

    def __post_init__(self):
        if self.live and self.value is None:
            raise ValueError("live state requires a value")
        if not self.live and self.value is not None:
            raise ValueError("cemetery carries no value")


CEMETERY = KilledState(live=False)


class BoundaryRule(str, Enum):
    """How Euler steps detect absorption at the interval boundary.

    SIGN_CROSSING kills only when a step endpoint leaves the closed interval;
    it underestimates killing with O(sqrt(dt)) bias. BRIDGE_CORRECTION also
    kills between two interior endpoints with the Brownian-bridge exit
    probability exp(-2 (x-a)(y-a) / (s^2 dt)) (and symmetrically at b).
    """

    SIGN_CROSSING = "sign_crossing"
    BRIDGE_CORRECTION = "bridge_correction"


@dataclass(frozen=True, eq=False)
class AbsorbingChainModel:
    """Finite-state chain with live generator A and kill-rate vector kappa.

    `generator` is the sub-Markovian generator on F: off-diagonal entries are
    the jump rates between live states, and each diagonal entry must equal
    -(sum of off-diagonal row entries) - kappa[i].
    """

    generator: np.ndarray
    kill_rates: np.ndarray
    initial_dist: np.ndarray

    def __post_init__(self):
        a = np.array(self.generator, dtype=float)
        kappa = np.array(self.kill_rates, dtype=float)
        eta0 = np.array(self.initial_dist, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidModelError("generator must be a square matrix")
        n = a.shape[0]
        if kappa.shape != (n,) or eta0.shape != (n,):
            raise InvalidModelError("kill_rates and initial_dist must have length |F|")
        off = a - np.diag(np.diag(a))
        if off.min() < 0:
            raise InvalidModelError("off-diagonal generator entries must be >= 0")
        if kappa.min() < 0:
            raise InvalidModelError("kill rates must be >= 0")
        expected_diag = -(off.sum(axis=1) + kappa)
        if not np.allclose(np.diag(a), expected_diag, atol=GENERATOR_ATOL, rtol=0):
            raise InvalidModelError(
                "diagonal must equal -(row sum of off-diagonals) - kill rate"
            )
        if eta0.min() < 0 or abs(eta0.sum() - 1.0) > DIST_ATOL:
            raise InvalidModelError("initial_dist must be a probability vector (to 1e-12)")
        for arr in (a, kappa, eta0):
            arr.flags.writeable = False
        object.__setattr__(self, "generator", a)
        object.__setattr__(self, "kill_rates", kappa)
        object.__setattr__(self, "initial_dist", eta0)
        # per-state event data for exact simulation
        rates = off.sum(axis=1) + kappa
        rates.flags.writeable = False
        object.__setattr__(self, "_rates", rates)
        cum = np.cumsum(np.hstack([kappa[:, None], off]), axis=1)
        cum.flags.writeable = False
        object.__setattr__(self, "_event_cum", cum)  # col 0: kill, cols 1..n: jump targets
        cdf0 = np.cumsum(eta0)
        cdf0.flags.writeable = False
        object.__setattr__(self, "_initial_cdf", cdf0)

    _rates: np.ndarray = field(init=False, repr=False)
    _event_cum: np.ndarray = field(init=False, repr=False)
    _initial_cdf: np.ndarray = field(init=False, repr=False)

    @property
    def n_states(self) -> int:
        return self.generator.shape[0]

    @property
    def never_killed(self) -> bool:
        """True when kappa is identically zero, so survival is exactly 1."""
        return float(self.kill_rates.max()) == 0.0

    @property
    def max_rate(self) -> float:
        """Largest total event rate over states (uniformization rate)."""
        return float(self._rates.max())


@dataclass(frozen=True)
class KilledBrownianModel:
    """Standard Brownian motion on (a, b), absorbed at the boundary.

    series_terms is the truncation order of the Dirichlet eigenfunction
    series used by the exact oracle; dt and boundary_rule configure the
    Euler simulation only.
    """

    a: float
    b: float
    x0: float
    series_terms: int = 32
    dt: float = 1e-3
    boundary_rule: BoundaryRule = BoundaryRule.BRIDGE_CORRECTION

    def __post_init__(self):
        if not self.a < self.x0 < self.b:
            raise InvalidModelError("need a < x0 < b")
        if self.series_terms < 1:
            raise InvalidModelError("series_terms must be >= 1")
        if self.dt <= 0:
            raise InvalidModelError("dt must be > 0")
        object.__setattr__(self, "boundary_rule", BoundaryRule(self.boundary_rule))

    def drift(self, x):
        return 0.0 * x

    @property
    def sigma(self) -> float:
        return 1.0


@dataclass(frozen=True)
class KilledDiffusionModel:
    """dX = (drift_c0 + drift_c1 X) dt + sigma dW on (a, b), boundary-absorbed.

    The drift family is restricted to affine and sigma to a constant so that
    configurations stay declarative; sigma > 0 gives uniform ellipticity.
    No exact semigroup is available for this model.
    """

    a: float
    b: float
    x0: float
    dt: float
    drift_c0: float = 0.0
    drift_c1: float = 0.0
    sigma: float = 1.0
    boundary_rule: BoundaryRule = BoundaryRule.BRIDGE_CORRECTION

    def __post_init__(self):
        if not self.a < self.x0 < self.b:
            raise InvalidModelError("need a < x0 < b")
        if self.dt <= 0:
            raise InvalidModelError("dt must be > 0")
        if self.sigma <= 0:
            raise InvalidModelError("sigma must be > 0 (uniform ellipticity)")
        object.__setattr__(self, "boundary_rule", BoundaryRule(self.boundary_rule))

    def drift(self, x):
        return self.drift_c0 + self.drift_c1 * x


ProcessModel = AbsorbingChainModel | KilledBrownianModel | KilledDiffusionModel


def exact_semigroup_available(model: ProcessModel) -> bool:
    """True when the oracle can evaluate Q^t for this model."""
    return isinstance(model, (AbsorbingChainModel, KilledBrownianModel))


def sample_initial(model: ProcessModel, rng: np.random.Generator) -> KilledState:
    """Draw a live initial state from the model's initial law."""
    if isinstance(model, AbsorbingChainModel):
        s = int(np.searchsorted(model._initial_cdf, rng.random(), side="right"))
        return KilledState(live=True, value=min(s, model.n_states - 1))
    return KilledState(live=True, value=model.x0)


def sample_initial_states(
    model: AbsorbingChainModel, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Vector version of sample_initial for chains (state indices)."""
    s = np.searchsorted(model._initial_cdf, rng.random(n), side="right")
    return np.minimum(s, model.n_states - 1).astype(np.int64)


def chain_next_event(
    model: AbsorbingChainModel, state: int, t_now: float, draws: ScalarDraws
) -> tuple[float, int]:
    """Sample the next event for one particle at `state`.

    Returns (event_time, new_state) with new_state = -1 for absorption.
    event_time is math.inf when the state has no event source.
    """
    r = model._rates[state]
    if r <= 0.0:
        return math.inf, state
    t = t_now + draws.exponential() / r
    u = draws.uniform() * r
    row = model._event_cum[state]
    k = int(np.searchsorted(row, u, side="right"))
    # slot 0 is the kill event; slot j >= 1 is a jump to state j-1
    return t, k - 1 if k >= 1 else -1


def advance_until(
    model: ProcessModel,
    state: KilledState,
    t_now: float,
    t_stop: float,
    rng: np.random.Generator,
) -> tuple[KilledState, float]:
    """Simulate one killed path from (t_now, state) up to t_stop.

    Returns (Live s', t_stop) if the path survives, otherwise
    (CEMETERY, tau) with t_now < tau <= t_stop. Chains are advanced exactly;
    interval models use the Euler scheme with the model's boundary rule, and
    an absorption detected inside a step is reported at the step's end.
    """
    if not state.live:
        raise ValueError("advance_until requires a live state")
    if not t_now < t_stop:
        raise ValueError("advance_until requires t_now < t_stop")

    if isinstance(model, AbsorbingChainModel):
        draws = ScalarDraws(rng, block=64)
        s = int(state.value)
        t = t_now
        while True:
            t_next, s_next = chain_next_event(model, s, t, draws)
            if t_next > t_stop:
                return KilledState(live=True, value=s), t_stop
            if s_next < 0:
                return CEMETERY, t_next
            s, t = s_next, t_next

    a, b, sig = model.a, model.b, model.sigma
    bridge = model.boundary_rule is BoundaryRule.BRIDGE_CORRECTION
    x = float(state.value)
    t = t_now
    while t < t_stop:
        h = min(model.dt, t_stop - t)
        y = x + model.drift(x) * h + sig * math.sqrt(h) * rng.standard_normal()
        if not math.isfinite(y):
            raise NonFiniteStateError(f"non-finite Euler update at t={t + h:.6g}")
        t += h
        if y <= a or y >= b:
            return CEMETERY, t
        if bridge:
            q = math.exp(-2.0 * (x - a) * (y - a) / (sig * sig * h)) + math.exp(
                -2.0 * (b - x) * (b - y) / (sig * sig * h)
            )
            if rng.random() < q:
                return CEMETERY, t
        x = y
    return KilledState(live=True, value=x), t_stop
