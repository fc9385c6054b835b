"""Exact semigroup computations and asymptotic-variance formulas.

For models with a computable sub-Markovian semigroup Q^t (finite chains and
killed Brownian motion) this module evaluates, to quadrature/series accuracy:

* the survival probability p_t = eta_0(Q^t 1) and its derivative,
* the conditional moments eta_t(psi) = gamma_t(psi) / p_t,
* the asymptotic variance of the particle estimator in its two equivalent
  formulations, which double as a mutual implementation cross-check:

  form A ("var1"):  sigma_T^2(phi) = V_{eta_0}(Q^T phi) + i_T(phi),
      i_T(phi) = p_T gamma_T(Q^2) - gamma_0(Q^2)
                 + gamma_T(Q)^2 ln p_T - 2 \\int_0^T gamma_u(Q^2) dp_u

  form B ("var2"):  sigma_T^2(phi) = p_T^2 V_{eta_T}(phi)
                 - p_T^2 ln(p_T) eta_T(phi)^2
                 - 2 \\int_0^T V_{eta_t}(Q^{T-t} phi) p_t dp_t

  where gamma_t(Q^l) is shorthand for gamma_t([Q^{T-t} phi]^l).

The two forms are assembled through deliberately separate code paths (only
the semigroup evaluation itself is shared), so their agreement to 1e-8
relative is a real consistency check and not a tautology.

Chain semigroups use uniformization (Poisson-weighted powers of the
uniformized kernel), which preserves nonnegativity and sub-stochasticity
exactly. Stieltjes integrals against dp_t are rewritten with the exact
derivative p_t' (chains: eta_0 e^{tA} A 1 = -eta_0 e^{tA} kappa; Brownian:
term-wise differentiated series) and evaluated by composite Simpson with one
doubling for a Richardson error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidModelError, QuadratureNotConvergedError, UnsupportedModelError
from .models import (
    AbsorbingChainModel,
    KilledBrownianModel,
    ProcessModel,
    exact_semigroup_available,
)
from .observables import Observable

__all__ = [
    "chain_semigroup",
    "exact_survival",
    "brownian_survival_series",
    "sigma2_var1",
    "sigma2_var2",
    "crude_mc_variance",
    "gamma_T",
    "eta_T",
    "chain_q_vectors",
    "OracleReport",
    "build_oracle_report",
]

UNIF_TOL = 1e-13  # Poisson tail mass kept below this in uniformization
QUAD_RTOL = 1e-6  # relative movement allowed when doubling the panel count
SERIES_EPS = 1e-16  # per-term floor for the spectral series truncation


# ---------------------------------------------------------------------------
# chain semigroup (uniformization)
# ---------------------------------------------------------------------------


def chain_semigroup(model: AbsorbingChainModel, t: float, tol: float = UNIF_TOL) -> np.ndarray:
    """e^{tA} for the sub-Markovian chain generator, by uniformization.

    Entries stay in [0, 1] and row sums stay <= 1 up to the truncation
    tolerance, because every summand is a substochastic matrix power with a
    nonnegative Poisson weight.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    n = model.n_states
    lam = model.max_rate
    if t == 0.0 or lam == 0.0:
        return np.eye(n)
    kernel = np.eye(n) + model.generator / lam
    out = np.zeros((n, n))
    term = np.eye(n)  # kernel^k
    mu = lam * t
    weight = math.exp(-mu)  # Poisson(mu) pmf at k
    acc = 0.0
    k = 0
    while acc < 1.0 - tol or k <= mu:
        out += weight * term
        acc += weight
        k += 1
        weight *= mu / k
        term = term @ kernel
        if k > 1000 + 10 * mu:  # unreachable for sane rates; avoid spinning
            break
    return out


def _apply_uniformized(step_kernel: np.ndarray, weights: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sum_k weights[k] * kernel^k v (vector form of uniformization)."""
    out = weights[0] * v
    cur = v
    for w in weights[1:]:
        cur = step_kernel @ cur
        out += w * cur
    return out


def _poisson_weights(mu: float, tol: float) -> np.ndarray:
    if mu == 0.0:
        return np.array([1.0])
    ws = [math.exp(-mu)]
    acc = ws[0]
    k = 0
    while acc < 1.0 - tol or k <= mu:
        k += 1
        ws.append(ws[-1] * mu / k)
        acc += ws[-1]
        if k > 1000 + 10 * mu:
            break
    return np.array(ws)


class _ChainGrid:
    """Forward/backward semigroup vectors on a uniform time grid.

    Propagates u_i = eta_0^T e^{t_i A} (row) and q_i = e^{(T-t_i) A} phi
    (column) with a single one-step uniformized exponential, so the whole
    grid costs O(G n^2).
    """

    def __init__(self, model: AbsorbingChainModel, phi_vec: np.ndarray, T: float, n_nodes: int):
        n = model.n_states
        grid = np.linspace(0.0, T, n_nodes)
        lam = model.max_rate
        if n_nodes < 2 or T == 0.0:
            u = np.tile(model.initial_dist, (n_nodes, 1))
            q = np.tile(phi_vec, (n_nodes, 1))
        else:
            dt = T / (n_nodes - 1)
            if lam > 0.0:
                kernel = np.eye(n) + model.generator / lam
                weights = _poisson_weights(lam * dt, UNIF_TOL * 1e-2)
            else:
                kernel = np.eye(n)
                weights = np.array([1.0])
            u = np.empty((n_nodes, n))
            q = np.empty((n_nodes, n))
            u[0] = model.initial_dist
            q[-1] = phi_vec
            for i in range(1, n_nodes):
                u[i] = _apply_uniformized(kernel.T, weights, u[i - 1])
            for i in range(n_nodes - 2, -1, -1):
                q[i] = _apply_uniformized(kernel, weights, q[i + 1])
        self.times = grid
        self.u = u
        self.q = q
        self.p = u.sum(axis=1)
        self.dp = -u @ model.kill_rates
        self.phi_vec = phi_vec

    # gamma_t(psi) = u_t . psi for a state vector psi
    def gamma_q(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.u, self.q)

    def gamma_q2(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.u, self.q**2)

    def gamma_T_phi2(self) -> float:
        return float(self.u[-1] @ self.phi_vec**2)

    def v_eta0_qT(self) -> float:
        m2 = float(self.u[0] @ self.q[0] ** 2)
        m1 = float(self.u[0] @ self.q[0])
        return m2 / self.p[0] - (m1 / self.p[0]) ** 2


# ---------------------------------------------------------------------------
# killed Brownian motion (Dirichlet eigenfunction series)
# ---------------------------------------------------------------------------


class _BrownianSpectral:
    """Dirichlet spectral data for Brownian motion absorbed outside (a, b).

    Eigenpairs of the generator (1/2) d^2/dx^2 with absorbing boundary:
    lambda_k = k^2 pi^2 / (2 L^2), phi_k(x) = sqrt(2/L) sin(k pi (x-a)/L).
    The truncation order is sized so that e^{-lambda_K t} is below working
    precision at the smallest time the caller will evaluate, making every
    grid value fully converged; only t = 0 (handled analytically) would need
    more terms.
    """

    def __init__(self, model: KilledBrownianModel, k_terms: int):
        self.model = model
        L = model.b - model.a
        self.L = L
        self.K = k_terms
        k = np.arange(1, k_terms + 1)
        self.lam = k**2 * math.pi**2 / (2.0 * L**2)
        # <phi_k, 1> has a closed form; only odd k contribute
        self.c_one = np.sqrt(2.0 * L) * (1.0 - (-1.0) ** k) / (k * math.pi)
        self.fk_x0 = np.sqrt(2.0 / L) * np.sin(k * math.pi * (model.x0 - model.a) / L)
        # Gauss-Legendre nodes on (a, b), dense enough for the top frequency
        m = max(160, int(3.2 * k_terms) + 32)
        xs, ws = roots_legendre(m)
        self.nodes = model.a + (xs + 1.0) * (L / 2.0)
        self.weights = ws * (L / 2.0)
        self.basis = np.sqrt(2.0 / L) * np.sin(
            np.outer(k, math.pi * (self.nodes - model.a) / L)
        )  # (K, M)

    @classmethod
    def for_min_time(cls, model: KilledBrownianModel, t_min: float) -> "_BrownianSpectral":
        L = model.b - model.a
        need = int(math.ceil(L * math.sqrt(-2.0 * math.log(SERIES_EPS) / t_min) / math.pi)) + 4
        return cls(model, min(max(model.series_terms, need), 4000))

    def coeffs(self, values_on_nodes: np.ndarray) -> np.ndarray:
        """<phi_k, f> for f given on the quadrature nodes."""
        return self.basis @ (self.weights * values_on_nodes)

    def survival(self, t: float) -> float:
        if t == 0.0:
            return 1.0
        return float(np.exp(-self.lam * t) @ (self.fk_x0 * self.c_one))

    def survival_deriv(self, t: float) -> float:
        # all time derivatives of p vanish at t = 0+ (boundary is not seen)
        if t == 0.0:
            return 0.0
        return float((-self.lam * np.exp(-self.lam * t)) @ (self.fk_x0 * self.c_one))

    def qt_at_x0(self, t: float, coef: np.ndarray) -> float:
        """[Q^t f](x0) for f with spectral coefficients coef."""
        if t == 0.0:
            raise ValueError("evaluate f directly at t=0")
        return float(np.exp(-self.lam * t) @ (self.fk_x0 * coef))

    def qs_on_nodes(self, s: float, coef: np.ndarray, values: np.ndarray) -> np.ndarray:
        """[Q^s f] on the quadrature nodes (f itself when s = 0)."""
        if s == 0.0:
            return values
        return (np.exp(-self.lam * s) * coef) @ self.basis


def brownian_survival_series(
    model: KilledBrownianModel, t: float, k_terms: int | None = None
) -> tuple[float, float]:
    """Truncated survival series and a rigorous bound on the dropped tail.

    For t > 0 the tail is dominated termwise; at t = 0 the exponentials do
    not decay and an Abel-summation bound on the sine tail is used instead
    (partial sums of sin((2j+1) theta) are bounded by 1/|sin theta|).
    """
    K = model.series_terms if k_terms is None else k_terms
    sp = _BrownianSpectral(model, K)
    value = float(np.exp(-sp.lam * t) @ (sp.fk_x0 * sp.c_one)) if t > 0 else float(
        sp.fk_x0 @ sp.c_one
    )
    L = sp.L
    theta = math.pi * (model.x0 - model.a) / L
    kk = K + 1 if (K + 1) % 2 == 1 else K + 2  # first odd index past K
    a_next = 4.0 / (kk * math.pi)
    abel = a_next / abs(math.sin(theta)) if math.sin(theta) != 0.0 else math.inf
    if t > 0:
        lam_next = kk**2 * math.pi**2 / (2.0 * L**2)
        dominated = 0.0
        k = kk
        while True:
            lam_k = k**2 * math.pi**2 / (2.0 * L**2)
            term = 4.0 / (k * math.pi) * math.exp(-lam_k * t)
            dominated += term
            if term < 1e-300 or term < 1e-18 * max(dominated, 1.0):
                break
            k += 2
        tail = min(dominated, abel * math.exp(-lam_next * t))
    else:
        tail = abel
    return value, tail


# ---------------------------------------------------------------------------
# survival probability
# ---------------------------------------------------------------------------


def exact_survival(model: ProcessModel, t: float) -> float:
    """p_t = P(absorption time > t), from the model's exact semigroup."""
    if not exact_semigroup_available(model):
        raise UnsupportedModelError("no exact semigroup for this model")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 1.0
    if isinstance(model, AbsorbingChainModel):
        return float(model.initial_dist @ chain_semigroup(model, t) @ np.ones(model.n_states))
    value, _ = brownian_survival_series(model, t)
    return value


# ---------------------------------------------------------------------------
# Simpson rule with one doubling
# ---------------------------------------------------------------------------


def _simpson_pair(values: np.ndarray, T: float) -> tuple[float, float]:
    """(fine integral, Richardson error estimate) from 2n+1 equispaced values."""
    m = len(values) - 1  # fine panel count, divisible by 4
    h = T / m
    fine = (h / 3.0) * (
        values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-1:2].sum()
    )
    coarse_vals = values[::2]
    h2 = 2.0 * h
    coarse = (h2 / 3.0) * (
        coarse_vals[0]
        + coarse_vals[-1]
        + 4.0 * coarse_vals[1:-1:2].sum()
        + 2.0 * coarse_vals[2:-1:2].sum()
    )
    return float(fine), abs(fine - coarse) / 15.0


def _check_quad(fine: float, err15: float, what: str) -> None:
    if 15.0 * err15 > QUAD_RTOL * max(1e-6, abs(fine)):
        raise QuadratureNotConvergedError(
            f"{what}: doubling the panel count moved the integral by {15.0 * err15:.3e}"
        )


def _node_count(n_quad: int) -> int:
    if n_quad < 2:
        raise ValueError("n_quad must be >= 2")
    n = n_quad + (n_quad % 2)  # composite Simpson needs an even panel count
    return 2 * n + 1  # fine grid = doubled panels


# ---------------------------------------------------------------------------
# variance formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _VarianceDetail:
    value: float
    quad_error: float


def _chain_grid(model: AbsorbingChainModel, obs: Observable, T: float, n_quad: int) -> _ChainGrid:
    phi_vec = obs.values_on_states(model.n_states).astype(float)
    return _ChainGrid(model, phi_vec, T, _node_count(n_quad))


def _sigma2_var2_chain(grid: _ChainGrid, T: float) -> _VarianceDetail:
    p = grid.p
    g1 = grid.gamma_q()
    g2 = grid.gamma_q2()
    v_eta = g2 / p - (g1 / p) ** 2
    integrand = v_eta * p * grid.dp
    integral, err = _simpson_pair(integrand, T)
    _check_quad(integral, err, "sigma2_var2 time integral")
    p_T = p[-1]
    eta_T_phi = float(grid.u[-1] @ grid.phi_vec) / p_T
    v_eta_T = grid.gamma_T_phi2() / p_T - eta_T_phi**2
    value = p_T**2 * v_eta_T - p_T**2 * math.log(p_T) * eta_T_phi**2 - 2.0 * integral
    return _VarianceDetail(value, err)


def _sigma2_var1_chain(grid: _ChainGrid, T: float) -> _VarianceDetail:
    p = grid.p
    g2 = grid.gamma_q2()
    integrand = g2 * grid.dp
    integral, err = _simpson_pair(integrand, T)
    _check_quad(integral, err, "sigma2_var1 time integral")
    p_T = p[-1]
    gamma_T_phi = float(grid.u[-1] @ grid.phi_vec)
    i_T = p_T * g2[-1] - g2[0] + gamma_T_phi**2 * math.log(p_T) - 2.0 * integral
    return _VarianceDetail(grid.v_eta0_qT() + i_T, err)


class _BrownianGrid:
    """Semigroup quantities for the Brownian model on the Simpson grid.

    eta_0 is the point mass at x0, so gamma_t(psi) = [Q^t psi](x0) and
    V_{eta_0} of anything is 0. The endpoints are assembled analytically:
    at t=0 the integrands vanish (p' = 0+ exactly), at t=T the test function
    is used directly instead of a zero-time series.
    """

    def __init__(self, model: KilledBrownianModel, obs: Observable, T: float, n_nodes: int):
        self.times = np.linspace(0.0, T, n_nodes)
        t_min = T / (n_nodes - 1)
        sp = _BrownianSpectral.for_min_time(model, t_min)
        self.sp = sp
        phi_nodes = np.array([obs.evaluate(x) for x in sp.nodes])
        self.phi_nodes = phi_nodes
        self.c_phi = sp.coeffs(phi_nodes)
        self.p = np.array([sp.survival(t) for t in self.times])
        self.dp = np.array([sp.survival_deriv(t) for t in self.times])
        G = n_nodes
        self.g1 = np.empty(G)  # gamma_t(Q) = Q^t[Q^{T-t} phi](x0)
        self.g2 = np.empty(G)  # gamma_t(Q^2)
        for i, t in enumerate(self.times):
            s = T - t
            g_s = sp.qs_on_nodes(s, self.c_phi, phi_nodes)
            if t == 0.0:
                self.g1[i] = g_s[0] * 0.0 + self._at_x0(g_s)
                self.g2[i] = self._at_x0(g_s) ** 2
            else:
                self.g1[i] = sp.qt_at_x0(t, sp.coeffs(g_s))
                self.g2[i] = sp.qt_at_x0(t, sp.coeffs(g_s * g_s))
        self.gamma_T_phi = float(self.g1[-1])
        self.gamma_T_phi2 = float(self.g2[-1])

    def _at_x0(self, values_on_nodes: np.ndarray) -> float:
        # eta_0 = delta_{x0}: evaluate Q^T phi at x0 through the series
        return self.sp.qt_at_x0(self.sp.model.dt * 0.0 + (self.times[-1]), self.c_phi)


def _brownian_grid(
    model: KilledBrownianModel, obs: Observable, T: float, n_quad: int
) -> _BrownianGrid:
    return _BrownianGrid(model, obs, T, _node_count(n_quad))


def _sigma2_var2_brownian(grid: _BrownianGrid, T: float) -> _VarianceDetail:
    p = grid.p
    v_eta = grid.g2 / p - (grid.g1 / p) ** 2
    integrand = v_eta * p * grid.dp
    integrand[0] = 0.0  # V_{eta_0} = 0 for a point mass and p'(0+) = 0
    integral, err = _simpson_pair(integrand, T)
    _check_quad(integral, err, "sigma2_var2 time integral")
    p_T = p[-1]
    eta_T_phi = grid.gamma_T_phi / p_T
    v_eta_T = grid.gamma_T_phi2 / p_T - eta_T_phi**2
    value = p_T**2 * v_eta_T - p_T**2 * math.log(p_T) * eta_T_phi**2 - 2.0 * integral
    return _VarianceDetail(value, err)


def _sigma2_var1_brownian(grid: _BrownianGrid, T: float) -> _VarianceDetail:
    integrand = grid.g2 * grid.dp
    integrand[0] = 0.0  # p'(0+) = 0
    integral, err = _simpson_pair(integrand, T)
    _check_quad(integral, err, "sigma2_var1 time integral")
    p_T = grid.p[-1]
    i_T = (
        p_T * grid.g2[-1]
        - grid.g2[0]
        + grid.gamma_T_phi**2 * math.log(p_T)
        - 2.0 * integral
    )
    return _VarianceDetail(0.0 + i_T, err)  # V_{eta_0}(Q^T phi) = 0 (point mass)


def _variance_detail(
    model: ProcessModel, obs: Observable, T: float, n_quad: int, form: str
) -> _VarianceDetail:
    if not exact_semigroup_available(model):
        raise UnsupportedModelError("asymptotic variance needs an exact semigroup")
    if T < 0:
        raise ValueError("T must be >= 0")
    if T == 0.0:
        # sigma_0^2(phi) = V_{eta_0}(phi); all integrals are empty
        if isinstance(model, AbsorbingChainModel):
            phi_vec = obs.values_on_states(model.n_states)
            m1 = float(model.initial_dist @ phi_vec)
            m2 = float(model.initial_dist @ phi_vec**2)
            return _VarianceDetail(m2 - m1**2, 0.0)
        return _VarianceDetail(0.0, 0.0)
    if isinstance(model, AbsorbingChainModel):
        grid = _chain_grid(model, obs, T, n_quad)
        detail = _sigma2_var2_chain(grid, T) if form == "var2" else _sigma2_var1_chain(grid, T)
    else:
        grid = _brownian_grid(model, obs, T, n_quad)
        detail = (
            _sigma2_var2_brownian(grid, T) if form == "var2" else _sigma2_var1_brownian(grid, T)
        )
    value = detail.value
    if -1e-10 < value < 0.0:  # roundoff guard; genuinely negative is a bug
        value = 0.0
    return _VarianceDetail(value, detail.quad_error)


def sigma2_var2(model: ProcessModel, obs: Observable, T: float, n_quad: int = 512) -> float:
    """Asymptotic variance via form B (the final-time formulation)."""
    return _variance_detail(model, obs, T, n_quad, "var2").value


def sigma2_var1(model: ProcessModel, obs: Observable, T: float, n_quad: int = 512) -> float:
    """Asymptotic variance via form A (initial variance + i_T)."""
    return _variance_detail(model, obs, T, n_quad, "var1").value


def crude_mc_variance(model: ProcessModel, obs: Observable, T: float) -> float:
    """Single-path variance of phi(X_T) 1_{alive}: gamma_T(phi^2) - gamma_T(phi)^2."""
    if not exact_semigroup_available(model):
        raise UnsupportedModelError("crude variance needs an exact semigroup")
    if isinstance(model, AbsorbingChainModel):
        phi_vec = obs.values_on_states(model.n_states)
        row = model.initial_dist @ chain_semigroup(model, T)
        return float(row @ phi_vec**2 - (row @ phi_vec) ** 2)
    sp = _BrownianSpectral.for_min_time(model, max(T, 1e-6))
    phi_nodes = np.array([obs.evaluate(x) for x in sp.nodes])
    if T == 0.0:
        return 0.0
    m2 = sp.qt_at_x0(T, sp.coeffs(phi_nodes**2))
    m1 = sp.qt_at_x0(T, sp.coeffs(phi_nodes))
    return m2 - m1**2


def gamma_T(model: ProcessModel, obs: Observable, T: float) -> float:
    """gamma_T(phi) = eta_0(Q^T phi), the unnormalized target."""
    if not exact_semigroup_available(model):
        raise UnsupportedModelError("gamma_T needs an exact semigroup")
    if isinstance(model, AbsorbingChainModel):
        phi_vec = obs.values_on_states(model.n_states)
        return float(model.initial_dist @ chain_semigroup(model, T) @ phi_vec)
    if T == 0.0:
        return obs.evaluate(model.x0)
    sp = _BrownianSpectral.for_min_time(model, T)
    phi_nodes = np.array([obs.evaluate(x) for x in sp.nodes])
    return sp.qt_at_x0(T, sp.coeffs(phi_nodes))


def eta_T(model: ProcessModel, obs: Observable, T: float) -> float:
    """eta_T(phi) = gamma_T(phi) / p_T."""
    return gamma_T(model, obs, T) / exact_survival(model, T)


def chain_q_vectors(
    model: AbsorbingChainModel, obs: Observable, T: float, times: np.ndarray
) -> np.ndarray:
    """Rows of Q^{T-t} phi over chain states, one row per requested time."""
    phi_vec = obs.values_on_states(model.n_states)
    return np.array([chain_semigroup(model, T - t) @ phi_vec for t in np.asarray(times, float)])


# ---------------------------------------------------------------------------
# oracle report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservableOracle:
    """Per-observable oracle outputs on the report grid."""

    gamma_T: float
    eta_T: float
    sigma2_var1: float
    sigma2_var2: float
    sigma2_crude: float
    quad_error: float
    v_eta_q: list[float]
    gamma_q2: list[float]


@dataclass(frozen=True)
class OracleReport:
    """Exact curves and variances for a model with a computable semigroup."""

    T: float
    n_quad: int
    time_grid: list[float]
    p_vals: list[float]
    dp_vals: list[float]
    p_T: float
    series_tail: float | None
    observables: dict[str, ObservableOracle]

    def to_json_dict(self) -> dict:
        return {
            "T": self.T,
            "n_quad": self.n_quad,
            "time_grid": self.time_grid,
            "p_vals": self.p_vals,
            "dp_vals": self.dp_vals,
            "p_T": self.p_T,
            "series_tail": self.series_tail,
            "observables": {
                name: {
                    "gamma_T": o.gamma_T,
                    "eta_T": o.eta_T,
                    "sigma2_var1": o.sigma2_var1,
                    "sigma2_var2": o.sigma2_var2,
                    "sigma2_crude": o.sigma2_crude,
                    "quad_error": o.quad_error,
                    "v_eta_q": o.v_eta_q,
                    "gamma_q2": o.gamma_q2,
                }
                for name, o in self.observables.items()
            },
        }


def build_oracle_report(
    model: ProcessModel,
    observables: list[Observable],
    T: float,
    n_quad: int = 512,
    report_nodes: int = 129,
) -> OracleReport:
    """Evaluate the full oracle for every observable.

    report_nodes controls only the size of the serialized curves; the
    variance integrals always run on the full Simpson grid for n_quad.
    """
    if not exact_semigroup_available(model):
        raise UnsupportedModelError("oracle report needs an exact semigroup")
    if T <= 0:
        raise InvalidModelError("oracle report requires T > 0")
    names = [o.name for o in observables]
    if len(set(names)) != len(names):
        raise InvalidModelError("observable names must be unique")

    stride = max(1, (_node_count(n_quad) - 1) // max(2, report_nodes - 1))
    per_obs: dict[str, ObservableOracle] = {}
    grid_times = p_vals = dp_vals = None
    series_tail = None
    if isinstance(model, KilledBrownianModel):
        _, series_tail = brownian_survival_series(model, T)

    for obs in observables:
        if isinstance(model, AbsorbingChainModel):
            grid = _chain_grid(model, obs, T, n_quad)
            v2 = _sigma2_var2_chain(grid, T)
            v1 = _sigma2_var1_chain(grid, T)
        else:
            grid = _brownian_grid(model, obs, T, n_quad)
            v2 = _sigma2_var2_brownian(grid, T)
            v1 = _sigma2_var1_brownian(grid, T)
        g1 = grid.gamma_q() if isinstance(model, AbsorbingChainModel) else grid.g1
        g2 = grid.gamma_q2() if isinstance(model, AbsorbingChainModel) else grid.g2
        v_eta = g2 / grid.p - (g1 / grid.p) ** 2
        if grid_times is None:
            grid_times = grid.times[::stride].tolist()
            p_vals = grid.p[::stride].tolist()
            dp_vals = grid.dp[::stride].tolist()
        per_obs[obs.name] = ObservableOracle(
            gamma_T=float(g1[-1]),
            eta_T=float(g1[-1] / grid.p[-1]),
            sigma2_var1=max(v1.value, 0.0) if -1e-10 < v1.value < 0 else v1.value,
            sigma2_var2=max(v2.value, 0.0) if -1e-10 < v2.value < 0 else v2.value,
            sigma2_crude=crude_mc_variance(model, obs, T),
            quad_error=max(v1.quad_error, v2.quad_error),
            v_eta_q=v_eta[::stride].tolist(),
            gamma_q2=g2[::stride].tolist(),
        )

    return OracleReport(
        T=T,
        n_quad=n_quad,
        time_grid=grid_times,
        p_vals=p_vals,
        dp_vals=dp_vals,
        p_T=p_vals[-1],
        series_tail=series_tail,
        observables=per_obs,
    )
