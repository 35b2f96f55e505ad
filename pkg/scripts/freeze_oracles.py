"""Compute reference values with independent methods and freeze them.

Writes ``tests/data/oracles.json``. Nothing here calls into the package
except the GARCH band, which by construction describes the estimator's own
sampling spread. Run once; the tests only read the file.
"""

import argparse
import json
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy import linalg

mp.mp.dps = 30


def normal_cdf(x):
    return float(mp.ncdf(x))


def chi2_cdf(x, k):
    return float(mp.gammainc(mp.mpf(k) / 2, 0, mp.mpf(x) / 2, regularized=True))


def f_cdf(x, d1, d2):
    z = mp.mpf(d1) * x / (mp.mpf(d1) * x + d2)
    return float(mp.betainc(mp.mpf(d1) / 2, mp.mpf(d2) / 2, 0, z, regularized=True))


def recursion_half_life(alpha, horizon=200):
    """Iterate d_t = (1 + alpha) d_{t-1} from d_0 = 1 and interpolate the 0.5 crossing."""
    d = [1.0]
    for _ in range(horizon):
        d.append(d[-1] * (1.0 + alpha))
    for t in range(1, len(d)):
        if d[t] <= 0.5:
            return (t - 1) + (d[t - 1] - 0.5) / (d[t - 1] - d[t])
    return None


def trace_stat_loop(levels):
    """Restricted-constant trace statistic, one replication, via scipy's generalized eigh."""
    dy = np.diff(levels, axis=0)
    t = dy.shape[0]
    z1 = np.column_stack([levels[:-1], np.ones(t)])
    s00 = dy.T @ dy / t
    s01 = dy.T @ z1 / t
    s11 = z1.T @ z1 / t
    lam = linalg.eigh(s01.T @ np.linalg.inv(s00) @ s01, s11, eigvals_only=True)
    lam = np.sort(lam)[::-1][: levels.shape[1]]
    return -t * np.sum(np.log(1.0 - lam))


def trace_quantiles(dim, reps, nobs, seed):
    rng = np.random.default_rng(seed)
    stats = np.empty(reps)
    for i in range(reps):
        stats[i] = trace_stat_loop(np.cumsum(rng.standard_normal((nobs + 1, dim)), axis=0))
    return {str(s): float(np.quantile(stats, s / 100)) for s in (90, 95, 99)}


def rolling_corr_band(seeds, n=2000, window=60):
    out = []
    for s in range(seeds):
        rng = np.random.default_rng(10_000 + s)
        x = np.cumsum(rng.standard_normal(n))
        y = np.cumsum(rng.standard_normal(n))
        r = [np.corrcoef(x[i - window:i], y[i - window:i])[0, 1] for i in range(window, n + 1)]
        out.append(float(np.mean(np.abs(r))))
    return {"max_mean_abs": max(out), "median_mean_abs": float(np.median(out))}


def normal_tail(conf):
    z = mp.sqrt(2) * mp.erfinv(2 * mp.mpf(conf) - 1)
    tvar = mp.quad(lambda x: x * mp.npdf(x), [z, mp.inf]) / (1 - mp.mpf(conf))
    return float(z), float(tvar)


def garch_band(seeds):
    from pegrisk.garch import fit_garch, simulate_garch
    from pegrisk.series import TimeSeries

    rows = []
    dates = np.datetime64("2000-01-01") + np.arange(5000)
    for s in range(seeds):
        eps = simulate_garch(5000, 0.05, 0.10, 0.85, np.random.default_rng(50_000 + s))
        m = fit_garch(TimeSeries(dates, eps - eps.mean()))
        rows.append((m.omega, m.a, m.b))
    rows = np.array(rows)
    return {
        name: [float(np.quantile(rows[:, j], 0.005)), float(np.quantile(rows[:, j], 0.995))]
        for j, name in enumerate(("omega", "a", "b"))
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"))
    ap.add_argument("--trace-reps", type=int, default=10_000)
    args = ap.parse_args()

    grid = [-3.0, -1.0, 0.0, 0.5, 1.96, 3.0]
    var99, tvar99 = normal_tail(0.99)
    doc = {
        "normal_cdf": [[x, normal_cdf(x)] for x in grid],
        "chi2_cdf": [[x, k, chi2_cdf(x, k)] for x, k in [(3.841, 1), (0.5, 1), (5.991, 2), (18.307, 10), (2.0, 7)]],
        "f_cdf": [[x, d1, d2, f_cdf(x, d1, d2)] for x, d1, d2 in [(1.0, 2, 30), (4.0, 1, 100), (0.5, 5, 12), (3.0, 2, 1000)]],
        "half_life_alpha_-0.1": recursion_half_life(-0.1),
        "trace_mc": {
            "2": trace_quantiles(2, args.trace_reps, 1000, 777),
            "1": trace_quantiles(1, args.trace_reps, 1000, 778),
        },
        "rolling_corr_random_walks": rolling_corr_band(100),
        "normal_tail_99": {"var": var99, "tvar": tvar99},
        "garch_band_200": garch_band(200),
    }
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(json.dumps(doc, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
