"""Bounded test functions evaluated on live states.

Every observable is a bounded function on the live state space, extended to
the cemetery by 0. The simulator and the oracle only ever evaluate live
states; the cemetery convention enters through the estimators (a dead path
contributes nothing).

The family is deliberately small and declarative so experiment configs stay
plain JSON: the full-space indicator, indicators of subsets, affine maps and
single-frequency trigonometric maps of the live coordinate. For chain models
the live coordinate is the state index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Observable",
    "IndicatorAll",
    "IndicatorSet",
    "AffineObservable",
    "TrigObservable",
    "observable_from_config",
    "observable_to_config",
]


@dataclass(frozen=True)
class Observable:
    """Base class; subclasses implement evaluate() on a live coordinate."""

    name: str

    def evaluate(self, x: float) -> float:
        raise NotImplementedError

    def values_on_states(self, n_states: int) -> np.ndarray:
        """Vector of values over chain states 0..n_states-1."""
        return np.array([self.evaluate(s) for s in range(n_states)], dtype=float)

    def sup_norm(self, lo: float, hi: float) -> float:
        """Upper bound for sup|phi| over [lo, hi] (chains: lo=0, hi=|F|-1)."""
        raise NotImplementedError


@dataclass(frozen=True)
class IndicatorAll(Observable):
    """The indicator of the whole live space: 1 on F, 0 at the cemetery."""

    def evaluate(self, x: float) -> float:
        return 1.0

    def values_on_states(self, n_states: int) -> np.ndarray:
        return np.ones(n_states)

    def sup_norm(self, lo: float, hi: float) -> float:
        return 1.0


@dataclass(frozen=True)
class IndicatorSet(Observable):
    """Indicator of a subset: chain states, or a sub-interval [lo, hi]."""

    states: tuple[int, ...] | None = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        has_states = self.states is not None
        has_interval = self.lo is not None and self.hi is not None
        if has_states == has_interval:
            raise ValueError("IndicatorSet needs either states or (lo, hi), not both")
        if has_interval and self.lo > self.hi:
            raise ValueError("IndicatorSet interval requires lo <= hi")
        if has_states:
            object.__setattr__(self, "states", tuple(int(s) for s in self.states))

    def evaluate(self, x: float) -> float:
        if self.states is not None:
            return 1.0 if int(x) in self.states else 0.0
        return 1.0 if self.lo <= x <= self.hi else 0.0

    def values_on_states(self, n_states: int) -> np.ndarray:
        v = np.zeros(n_states)
        if self.states is not None:
            v[list(self.states)] = 1.0
        else:
            for s in range(n_states):
                v[s] = self.evaluate(float(s))
        return v

    def sup_norm(self, lo: float, hi: float) -> float:
        return 1.0


@dataclass(frozen=True)
class AffineObservable(Observable):
    """phi(x) = c0 + c1 * x on the live coordinate."""

    c0: float = 0.0
    c1: float = 1.0

    def evaluate(self, x: float) -> float:
        return self.c0 + self.c1 * x

    def values_on_states(self, n_states: int) -> np.ndarray:
        return self.c0 + self.c1 * np.arange(n_states, dtype=float)

    def sup_norm(self, lo: float, hi: float) -> float:
        return max(abs(self.c0 + self.c1 * lo), abs(self.c0 + self.c1 * hi))


@dataclass(frozen=True)
class TrigObservable(Observable):
    """phi(x) = amp * sin(freq * x + phase) or the cos variant."""

    amp: float = 1.0
    freq: float = 1.0
    phase: float = 0.0
    fn: str = "sin"

    def __post_init__(self):
        if self.fn not in ("sin", "cos"):
            raise ValueError("fn must be 'sin' or 'cos'")

    def evaluate(self, x: float) -> float:
        arg = self.freq * x + self.phase
        return self.amp * (math.sin(arg) if self.fn == "sin" else math.cos(arg))

    def values_on_states(self, n_states: int) -> np.ndarray:
        arg = self.freq * np.arange(n_states, dtype=float) + self.phase
        return self.amp * (np.sin(arg) if self.fn == "sin" else np.cos(arg))

    def sup_norm(self, lo: float, hi: float) -> float:
        return abs(self.amp)


_KINDS = {
    "indicator_all": IndicatorAll,
    "indicator_set": IndicatorSet,
    "affine": AffineObservable,
    "trig": TrigObservable,
}


def observable_from_config(spec: dict) -> Observable:
    """Build an observable from its JSON form: {"name": ..., "kind": ..., params}."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind not in _KINDS:
        raise ValueError(f"unknown observable kind: {kind!r}")
    cls = _KINDS[kind]
    if kind == "indicator_set" and "states" in spec and spec["states"] is not None:
        spec["states"] = tuple(spec["states"])
    return cls(**spec)


def observable_to_config(obs) -> dict:
    """Inverse of observable_from_config."""
    for kind, cls in _KINDS.items():
        if type(obs) is cls:
            d = {"name": obs.name, "kind": kind}
            if kind == "indicator_set":
                if obs.states is not None:
                    d["states"] = list(obs.states)
                else:
                    d["lo"] = obs.lo
                    d["hi"] = obs.hi
            elif kind == "affine":
                d["c0"] = obs.c0
                d["c1"] = obs.c1
            elif kind == "trig":
                d.update(amp=obs.amp, freq=obs.freq, phase=obs.phase, fn=obs.fn)
            return d
    raise ValueError(f"not a config-representable observable: {obs!r}")
