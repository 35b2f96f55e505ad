"""
Ground-truth generator: a bivariate VECM with GARCH(1,1) innovations, an
optional structural break with a one-time jump in the reserve index, and an
optional sign-dependent peg adjustment speed.

The deviation from the long-run relation is measured against fixed anchors::

    ect[t] = (peg[t] - peg_anchor) - gamma * (green[t] - green_start)

so a noiseless run with zero drift stays at ``(peg_anchor, green_start)``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .series import BivariateSeries

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Regime:
    alpha: tuple[float, float]
    gamma_matrices: tuple = ()  # Gamma_1.. as nested 2x2 tuples
    green_drift: float = 0.0
    garch_peg: tuple[float, float, float] = (1e-6, 0.0, 0.0)
    garch_green: tuple[float, float, float] = (0.01, 0.0, 0.0)
    innovation_correlation: float = 0.0

    def gammas(self) -> np.ndarray:
        return np.asarray(self.gamma_matrices, dtype=float).reshape(-1, 2, 2)


@dataclass(frozen=True)
class Asymmetry:
    alpha_peg_down: float
    alpha_peg_up: float


@dataclass(frozen=True)
class Scenario:
    name: str
    version: str
    n_days: int
    break_day: int | None  # 1-based day on which the post regime and the jump start
    pre_regime: Regime
    post_regime: Regime
    beta_gamma: float
    green_jump: float = 0.0  # level change applied on break_day, index points
    asymmetry: Asymmetry | None = None
    peg_anchor: float = 1.0
    green_start: float = 100.0
    start_date: str = "2024-01-01"
    seed: int = 42

    @property
    def dates(self) -> np.ndarray:
        return np.datetime64(self.start_date, "D") + np.arange(self.n_days)

    @property
    def break_date(self) -> np.datetime64 | None:
        if self.break_day is None:
            return None
        return np.datetime64(self.start_date, "D") + (self.break_day - 1)

    def validate(self) -> None:
        if self.n_days < 3:
            raise ConfigError("n_days must be at least 3")
        if self.break_day is not None and not 1 < self.break_day < self.n_days:
            raise ConfigError("break_day must lie strictly inside the sample")
        for label, regime in (("pre", self.pre_regime), ("post", self.post_regime)):
            for eq, (omega, a, b) in (("peg", regime.garch_peg), ("green", regime.garch_green)):
                if not omega > 0.0 or a < 0.0 or b < 0.0 or a + b >= 1.0:
                    raise ConfigError(f"{label} regime {eq} GARCH needs omega > 0, a, b >= 0, a + b < 1")
            if not -1.0 < regime.innovation_correlation < 1.0:
                raise ConfigError(f"{label} regime innovation correlation must lie in (-1, 1)")
            if len(regime.alpha) != 2:
                raise ConfigError("alpha must have two entries")
        if len(self.pre_regime.gammas()) != len(self.post_regime.gammas()):
            raise ConfigError("both regimes need the same number of Gamma matrices")
        if not abs(1.0 + self.pre_regime.alpha[0]) < 1.0:
            raise ConfigError("pre-break peg adjustment must satisfy |1 + alpha_peg| < 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported scenario schema_version {version}")
        try:
            regimes = {k: Regime(**_tuplify(d.pop(k))) for k in ("pre_regime", "post_regime")}
            asym = d.pop("asymmetry", None)
            return cls(**d, **regimes, asymmetry=Asymmetry(**asym) if asym else None)
        except TypeError as exc:
            raise ConfigError(f"malformed scenario: {exc}") from exc


def _tuplify(d: dict) -> dict:
    def conv(v):
        return tuple(conv(x) for x in v) if isinstance(v, list) else v

    return {k: conv(v) for k, v in d.items()}


def load_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario is not valid JSON: {exc}") from exc
    scenario = Scenario.from_dict(data)
    scenario.validate()
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), indent=2) + "\n"


@dataclass(frozen=True, eq=False)
class GroundTruthRecord:
    scenario: Scenario
    seed: int
    innovations: np.ndarray  # (n, 2) GARCH innovations, row 0 is zero
    jumps: np.ndarray  # (n, 2) break-day jump, zero elsewhere
    conditional_variance: np.ndarray  # (n, 2)
    regime: np.ndarray  # 0 pre, 1 post
    ect: np.ndarray
    long_run_constant: float = field(default=0.0)


def simulate(scenario: Scenario, seed_override: int | None = None) -> tuple[BivariateSeries, GroundTruthRecord]:
    scenario.validate()
    seed = scenario.seed if seed_override is None else seed_override
    rng = np.random.default_rng(seed)
    n = scenario.n_days
    z = rng.standard_normal((n, 2))

    regimes = [scenario.pre_regime, scenario.post_regime]
    gammas = [r.gammas() for r in regimes]
    lags = gammas[0].shape[0]
    alphas = [np.asarray(r.alpha, dtype=float) for r in regimes]
    garch = [np.array([r.garch_peg, r.garch_green], dtype=float) for r in regimes]  # rows (omega, a, b)
    chol = [np.array([[1.0, 0.0], [r.innovation_correlation, np.sqrt(1 - r.innovation_correlation**2)]]) for r in regimes]
    bday = None if scenario.break_day is None else scenario.break_day - 1
    gamma_lr = scenario.beta_gamma

    y = np.empty((n, 2))
    dy = np.zeros((n, 2))
    eps = np.zeros((n, 2))
    s2 = np.zeros((n, 2))
    ect = np.zeros(n)
    regime_idx = np.zeros(n, dtype=np.int8)
    jumps = np.zeros((n, 2))
    y[0] = (scenario.peg_anchor, scenario.green_start)
    g0 = garch[0]
    s2_prev = g0[:, 0] / (1.0 - g0[:, 1] - g0[:, 2])
    eps_prev = np.zeros(2)
    for t in range(1, n):
        k = 1 if bday is not None and t >= bday else 0
        regime_idx[t] = k
        om, a, b = garch[k].T
        s2_t = om + a * eps_prev**2 + b * s2_prev
        e = np.sqrt(s2_t) * (chol[k] @ z[t])
        dev = (y[t - 1, 0] - scenario.peg_anchor) - gamma_lr * (y[t - 1, 1] - scenario.green_start)
        ect[t - 1] = dev
        alpha = alphas[k].copy()
        if scenario.asymmetry is not None:
            alpha[0] = scenario.asymmetry.alpha_peg_down if dev < 0 else scenario.asymmetry.alpha_peg_up
        step = alpha * dev + e
        step[1] += regimes[k].green_drift
        for i in range(lags):
            if t - 1 - i >= 1:
                step += gammas[k][i] @ dy[t - 1 - i]
        if bday is not None and t == bday:
            # The jump arrives as an extra green innovation; the peg takes its
            # contemporaneous share through the innovation correlation.
            rho = regimes[k].innovation_correlation
            jump = np.array([rho * np.sqrt(s2_t[0] / s2_t[1]), 1.0]) * scenario.green_jump
            step += jump
            jumps[t] = jump
        dy[t] = step
        y[t] = y[t - 1] + step
        eps[t], s2[t] = e, s2_t
        eps_prev, s2_prev = e + jumps[t], s2_t
    ect[n - 1] = (y[n - 1, 0] - scenario.peg_anchor) - gamma_lr * (y[n - 1, 1] - scenario.green_start)
    s2[0] = garch[0][:, 0] / (1.0 - garch[0][:, 1] - garch[0][:, 2])

    pair = BivariateSeries(scenario.dates, y[:, 0], y[:, 1])
    truth = GroundTruthRecord(
        scenario=scenario,
        seed=seed,
        innovations=eps,
        jumps=jumps,
        conditional_variance=s2,
        regime=regime_idx,
        ect=ect,
        long_run_constant=-scenario.peg_anchor + gamma_lr * scenario.green_start,
    )
    return pair, truth


# Frozen, versioned parameterizations. Changing a number here is a new version.
_ZERO = ((0.0, 0.0), (0.0, 0.0))
_BUILTINS = {
    "treasury-2024": Scenario(
        name="treasury-2024",
        version="2",
        n_days=1096,
        break_day=None,
        pre_regime=Regime(
            alpha=(-0.38, 0.0),
            gamma_matrices=(_ZERO,),
            garch_peg=(2.0e-8, 0.05, 0.90),
            garch_green=(0.004, 0.05, 0.90),
            innovation_correlation=0.35,
        ),
        post_regime=Regime(
            alpha=(-0.38, 0.0),
            gamma_matrices=(_ZERO,),
            garch_peg=(2.0e-8, 0.05, 0.90),
            garch_green=(0.004, 0.05, 0.90),
            innovation_correlation=0.35,
        ),
        beta_gamma=1.0e-5,
    ),
    "genius-2025": Scenario(
        name="genius-2025",
        version="2",
        n_days=955,
        break_day=868,  # 2025-07-18
        pre_regime=Regime(
            alpha=(-0.14, 0.0),
            gamma_matrices=(_ZERO, _ZERO),
            garch_peg=(2.0e-8, 0.05, 0.90),
            garch_green=(0.004, 0.05, 0.90),
            innovation_correlation=0.0351,
        ),
        post_regime=Regime(
            alpha=(-0.1556, 0.0),
            # lagged green differences feed the peg one and two days later
            gamma_matrices=(((0.1781, 0.003096), (0.0, -0.1458)), ((0.0, 0.0005792), (0.0, 0.0))),
            garch_peg=(7.237e-9, 0.07268, 0.8872),
            garch_green=(0.000642, 0.02813, 0.7849),
            innovation_correlation=0.5104,
        ),
        beta_gamma=3.457e-5,
        green_jump=-8.472,
        start_date="2023-03-04",
    ),
}


def builtin_scenario(name: str) -> Scenario:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(_BUILTINS)}") from None


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def with_overrides(scenario: Scenario, **changes) -> Scenario:
    return replace(scenario, **changes)
