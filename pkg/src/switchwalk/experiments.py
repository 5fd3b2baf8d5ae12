"""Reproducible Monte Carlo experiments.

Every experiment derives each fixed-size chunk of trials from
(master_seed, chunk_index) through NumPy's SeedSequence spawn keys and
reduces per-chunk partials in chunk order with compensated summation, so
reports are bit-identical for any worker count.  Heavy lifting happens in
the kernel backend on packed bit words / CSR event lists.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import exact
from ._backend import BACKEND_NAME, kernels
from .walks import _ceil_power, barrier_levels

__all__ = [
    "SEED_ENV_VAR",
    "RngStreamSpec",
    "EstimateRow",
    "ExperimentReport",
    "UvIdentityError",
    "resolve_seed",
    "noise_sensitivity_curve",
    "eps_preset",
    "u_abs_v_experiment",
    "k_of_n",
    "kappa_experiment",
    "phi_experiment",
    "influence_profile",
    "alpha_tail_report",
    "registered_se_checks",
]

SEED_ENV_VAR = "SWITCHWALK_SEED"

NS_CHUNK = 4096
UV_CHUNK = 512
TIMELINE_CHUNK = 256

COLUMNS = (
    "experiment",
    "n",
    "m",
    "eps",
    "gamma",
    "alpha",
    "kind",
    "trials",
    "estimate",
    "stderr",
    "seconds",
    "exact",
)


class UvIdentityError(RuntimeError):
    """The telescoping identities U'+-V' failed on some trial (implementation bug)."""


@dataclass(frozen=True)
class RngStreamSpec:
    """Derivation of one chunk's random stream from the master seed."""

    master_seed: int
    stream_index: int

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index,)
        )

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


@dataclass(frozen=True)
class EstimateRow:
    """One reported estimate; field names double as CSV column names."""

    experiment: str
    estimate: float
    stderr: float | None = None
    n: int | None = None
    m: int | None = None
    eps: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    kind: str | None = None
    trials: int | None = None
    seconds: float | None = None
    exact: str | None = None

    def as_dict(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple
    meta: dict

    def __post_init__(self):
        if not self.rows:
            raise ValueError("a completed report has at least one row")


def resolve_seed(seed) -> int:
    """Explicit seed, else SWITCHWALK_SEED from the environment, else 0."""
    if seed is None:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed


def _meta(master_seed: int) -> dict:
    return {
        "master_seed": master_seed,
        "backend": BACKEND_NAME,
        "version": "0.1.0",
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }


def _resolve_workers(workers: int) -> int:
    if workers < 0:
        raise ValueError("workers must be >= 0")
    return workers if workers else (os.cpu_count() or 1)


def _chunk_jobs(trials: int, size: int, base_index: int = 0):
    return [
        (base_index + k, min(size, trials - k * size))
        for k in range((trials + size - 1) // size)
    ]


def _map_chunks(workers: int, jobs, fn):
    """Run fn(chunk_index, count) over jobs; results in chunk order."""
    w = _resolve_workers(workers)
    if w <= 1 or len(jobs) <= 1:
        return [fn(ci, cnt) for ci, cnt in jobs]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


def _mean_se(s1: float, s2: float, t: int):
    mean = s1 / t
    if t < 2:
        return mean, None
    var = max((s2 - t * mean * mean) / (t - 1), 0.0)
    return mean, math.sqrt(var / t)


def _binom_se(count: int, t: int):
    p = count / t
    if t < 2:
        return p, None
    return p, math.sqrt(p * (1.0 - p) / (t - 1))


# -- noise sensitivity -----------------------------------------------------------


def _geometric_positions(rng, rows: int, n: int, p: float):
    """CSR-packed 1-based change positions in 1..n, geometric(p) gaps per row."""
    if p <= 0.0:
        return np.empty(0, dtype=np.int64), np.zeros(rows + 1, dtype=np.int64)
    mean = n * p
    cols = max(4, int(mean + 8.0 * math.sqrt(mean + 4.0) + 8.0))
    pos = np.cumsum(rng.geometric(p, size=(rows, cols)), axis=1)
    while pos[:, -1].min() <= n:
        more = np.cumsum(rng.geometric(p, size=(rows, max(4, cols // 2))), axis=1)
        pos = np.hstack([pos, pos[:, -1:] + more])
    keep = pos <= n
    off = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(keep.sum(axis=1), out=off[1:])
    return pos[keep].astype(np.int64), off


def _ns_chunk(n, p, kind_code, master_seed, chunk_index, count):
    rng = RngStreamSpec(master_seed, chunk_index).generator()
    width = (n + 63) // 64
    words = rng.integers(0, 1 << 64, size=(count, width), dtype=np.uint64)
    flat, off = _geometric_positions(rng, count, n, p)
    a0, at = kernels.ns_endpoints_chunk(n, words, flat, off, kind_code)
    joint = int(np.count_nonzero((a0 > 0) & (at > 0)))
    marg = int(np.count_nonzero(a0 > 0))
    return joint, marg


def eps_preset(n: int, c: float, beta: float) -> float:
    """The decorrelation scales eps_n = c / n**beta.

    beta < 1 gives n*eps_n -> infinity (the sensitive regime); beta = 1 is
    the boundary negative control (no decorrelation expected).
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    return c / n**beta


def noise_sensitivity_curve(
    n: int,
    eps_list,
    trials: int,
    kind: str = "switch",
    seed=None,
    workers: int = 0,
) -> ExperimentReport:
    """Joint positivity of the endpoint at times 0 and eps, per eps.

    Rows per eps: ns.joint = P_hat(Z_n(0) > 0 and Z_n(eps) > 0), ns.marginal
    = P_hat(Z_n(0) > 0), and ns.gap = joint - marginal**2 (the covariance
    witness that vanishes under decorrelation).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if kind not in ("switch", "compass"):
        raise ValueError(f"unknown walk kind {kind!r}")
    eps_values = [float(e) for e in eps_list]
    if not eps_values:
        raise ValueError("eps_list must be non-empty")
    if any(e < 0 for e in eps_values):
        raise ValueError("eps must be non-negative")
    master = resolve_seed(seed)
    kind_code = 0 if kind == "switch" else 1
    n_chunks = (trials + NS_CHUNK - 1) // NS_CHUNK
    rows = []
    for k, eps in enumerate(eps_values):
        t0 = time.perf_counter()
        p = 0.5 * -math.expm1(-eps)
        jobs = _chunk_jobs(trials, NS_CHUNK, base_index=k * n_chunks)
        parts = _map_chunks(
            workers, jobs, lambda ci, cnt: _ns_chunk(n, p, kind_code, master, ci, cnt)
        )
        joint = sum(p_[0] for p_ in parts)
        marg = sum(p_[1] for p_ in parts)
        dt = time.perf_counter() - t0
        jp, jse = _binom_se(joint, trials)
        mp, mse = _binom_se(marg, trials)
        gap = jp - mp * mp
        if trials >= 2:
            # delta method for joint - marginal^2; the joint event implies
            # the marginal one, so E[1_J 1_A] = jp
            var = (
                jp * (1 - jp)
                + 4.0 * mp * mp * mp * (1 - mp)
                - 4.0 * mp * (jp - jp * mp)
            )
            gse = math.sqrt(max(var, 0.0) / (trials - 1))
        else:
            gse = None
        common = dict(n=n, eps=eps, kind=kind, trials=trials)
        rows.append(EstimateRow("ns.joint", jp, jse, seconds=dt, **common))
        rows.append(EstimateRow("ns.marginal", mp, mse, **common))
        rows.append(EstimateRow("ns.gap", gap, gse, **common))
    return ExperimentReport(tuple(rows), _meta(master))


# -- U/V split of the rerandomized endpoint ----------------------------------------


def k_of_n(n: int, eps: float) -> int:
    """Number of tracked changes K(n) = 2*floor(n*(1 - e^(-eps))/4)."""
    return 2 * int(n * -math.expm1(-eps) / 4.0)


def _uv_chunk(n, p, K, master_seed, chunk_index, count):
    rng = RngStreamSpec(master_seed, chunk_index).generator()
    ipos = np.cumsum(rng.geometric(p, size=(count, K)), axis=1)
    width = (int(ipos[:, -1].max()) + 63) // 64
    words = rng.integers(0, 1 << 64, size=(count, width), dtype=np.uint64)
    C, z0, zt = kernels.uv_captures_chunk(ipos, words)
    diffs = C[:, 1:] - C[:, :-1]
    u = C[:, 0] + diffs[:, 1::2].sum(axis=1) + (z0 - C[:, -1])
    v = diffs[:, 0::2].sum(axis=1)
    bad = int(np.count_nonzero((u + v != z0) | (u - v != zt)))
    wins = int(np.count_nonzero(u > np.abs(v)))
    return wins, bad


def u_abs_v_experiment(
    n: int, eps: float, trials: int, seed=None, workers: int = 0
) -> EstimateRow:
    """Estimate P(U' > |V'|) over the first K(n) changes; expected -> 1/4.

    The telescoping identities U' + V' = Z_{I_K}(0) and U' - V' = Z_{I_K}(t)
    are checked on every trial against independently walked endpoints.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    K = k_of_n(n, eps)
    if K < 2:
        raise ValueError(
            f"K(n) = {K} < 2 at n={n}, eps={eps}: decorrelation window too small"
        )
    master = resolve_seed(seed)
    p = 0.5 * -math.expm1(-eps)
    t0 = time.perf_counter()
    parts = _map_chunks(
        workers,
        _chunk_jobs(trials, UV_CHUNK),
        lambda ci, cnt: _uv_chunk(n, p, K, master, ci, cnt),
    )
    wins = sum(p_[0] for p_ in parts)
    bad = sum(p_[1] for p_ in parts)
    if bad:
        raise UvIdentityError(f"{bad} of {trials} trials violated the U/V identities")
    est, se = _binom_se(wins, trials)
    return EstimateRow(
        "uv.p_u_gt_absv",
        est,
        se,
        n=n,
        eps=eps,
        trials=trials,
        seconds=time.perf_counter() - t0,
    )


# -- occupation measure and pair energy ---------------------------------------------


def _timeline_chunk(n, barrier, gamma, master_seed, chunk_index, count):
    rng = RngStreamSpec(master_seed, chunk_index).generator()
    init = (1 - 2 * rng.integers(0, 2, size=(count, n))).astype(np.int8)
    counts = rng.poisson(1.0, size=(count, n))
    per_trial = counts.sum(axis=1)
    total = int(per_trial.sum())
    times = rng.random(total)
    vals = (1 - 2 * rng.integers(0, 2, size=total)).astype(np.int8)
    trial_of = np.repeat(np.arange(count), per_trial)
    bit_of = np.repeat(np.tile(np.arange(n, dtype=np.int64), count), counts.ravel())
    order = np.lexsort((times, trial_of))
    off = np.zeros(count + 1, dtype=np.int64)
    np.cumsum(per_trial, out=off[1:])
    kappa, phi = kernels.timeline_stats_chunk(
        barrier, init, off, times[order], bit_of[order], vals[order], gamma
    )
    return (
        float(np.sum(kappa)),
        float(np.sum(kappa**2)),
        float(np.sum(kappa**3)),
        float(np.sum(kappa**4)),
        int(np.count_nonzero(kappa > 0)),
        float(np.sum(phi)),
        float(np.sum(phi**2)),
    )


def _run_timeline(n, alpha, gamma, trials, master, workers):
    barrier = barrier_levels(n, alpha)
    parts = _map_chunks(
        workers,
        _chunk_jobs(trials, TIMELINE_CHUNK),
        lambda ci, cnt: _timeline_chunk(n, barrier, gamma, master, ci, cnt),
    )
    sums = [math.fsum(p_[i] for p_ in parts) for i in range(4)]
    npos = sum(p_[4] for p_ in parts)
    phi1 = math.fsum(p_[5] for p_ in parts)
    phi2 = math.fsum(p_[6] for p_ in parts)
    return sums, npos, phi1, phi2


def kappa_experiment(
    n: int, trials: int, seed=None, workers: int = 0
) -> ExperimentReport:
    """Occupation measure of the positive times in [0,1].

    Rows: kappa.mean (whose exact target is stay_positive_prob(n)),
    kappa.second_moment, kappa.ratio = m2/m1**2 (delta-method SE), and
    kappa.pos_prob = P_hat(kappa > 0).
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    master = resolve_seed(seed)
    t0 = time.perf_counter()
    (s1, s2, s3, s4), npos, _, _ = _run_timeline(n, 0.0, -1.0, trials, master, workers)
    dt = time.perf_counter() - t0
    m1, se1 = _mean_se(s1, s2, trials)
    m2, se2 = _mean_se(s2, s4, trials)
    m3 = s3 / trials
    m4 = s4 / trials
    if m1 > 0:
        ratio = m2 / (m1 * m1)
        if trials >= 2:
            c11 = max(m2 - m1 * m1, 0.0)
            c22 = max(m4 - m2 * m2, 0.0)
            c12 = m3 - m1 * m2
            g1 = -2.0 * m2 / m1**3
            g2 = 1.0 / (m1 * m1)
            var = g1 * g1 * c11 + 2.0 * g1 * g2 * c12 + g2 * g2 * c22
            rse = math.sqrt(max(var, 0.0) / trials)
        else:
            rse = None
    else:
        ratio, rse = float("nan"), None
    pp, pse = _binom_se(npos, trials)
    common = dict(n=n, trials=trials)
    rows = (
        EstimateRow(
            "kappa.mean",
            m1,
            se1,
            seconds=dt,
            exact=str(exact.stay_positive_prob(n)),
            **common,
        ),
        EstimateRow("kappa.second_moment", m2, se2, **common),
        EstimateRow("kappa.ratio", ratio, rse, **common),
        EstimateRow("kappa.pos_prob", pp, pse, **common),
    )
    return ExperimentReport(rows, _meta(master))


def phi_experiment(
    n: int, alpha: float, gamma: float, trials: int, seed=None, workers: int = 0
) -> ExperimentReport:
    """Mean of the normalized pair energy Phi = E_pair / P(barrier event)**2."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    denom = exact.barrier_positive_prob(n, alpha)  # also validates alpha
    df = float(denom)
    master = resolve_seed(seed)
    t0 = time.perf_counter()
    _, _, phi1, phi2 = _run_timeline(n, alpha, gamma, trials, master, workers)
    dt = time.perf_counter() - t0
    mean, se = _mean_se(phi1, phi2, trials)
    scale = 1.0 / (df * df)
    rows = (
        EstimateRow(
            "phi.mean",
            mean * scale,
            None if se is None else se * scale,
            n=n,
            gamma=gamma,
            alpha=alpha,
            trials=trials,
            seconds=dt,
        ),
        EstimateRow(
            "phi.denominator", df, None, n=n, alpha=alpha, exact=str(denom)
        ),
    )
    return ExperimentReport(rows, _meta(master))


# -- influence profiles --------------------------------------------------------------


def _mc_influence_chunk_size(n: int) -> int:
    return max(256, min(8192, (1 << 22) // max(n, 1)))


def _mc_influence_chunk(n, master_seed, chunk_index, count):
    rng = RngStreamSpec(master_seed, chunk_index).generator()
    bits01 = rng.integers(0, 2, size=(count, n), dtype=np.uint8)
    par = np.bitwise_xor.accumulate(bits01, axis=1)
    z = np.cumsum(1 - 2 * par.astype(np.int32), axis=1, dtype=np.int32)
    # pivotality of bit m from one pass: positive prefix, and exactly one of
    # the original / reflected suffixes stays positive
    pmin = np.minimum.accumulate(z, axis=1)
    smin = np.minimum.accumulate(z[:, ::-1], axis=1)[:, ::-1]
    smax = np.maximum.accumulate(z[:, ::-1], axis=1)[:, ::-1]
    zprev = np.concatenate([np.zeros((count, 1), np.int32), z[:, :-1]], axis=1)
    pre_ok = np.concatenate(
        [np.ones((count, 1), bool), pmin[:, :-1] >= 1], axis=1
    )
    orig_pos = smin >= 1
    flip_pos = smax < 2 * zprev
    pivotal = pre_ok & (orig_pos != flip_pos)
    return pivotal.sum(axis=0, dtype=np.int64)


def influence_profile(
    n: int, mode: str = "exact", trials=None, seed=None, workers: int = 0
) -> ExperimentReport:
    """The influence vector (I_m)_{m=1..n} of the stay-positive event.

    Modes: exact (dyadic), float (large-n accelerator), oracle (full
    enumeration, n <= 20), mc (pivotality sampling; needs trials).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    master = resolve_seed(seed)
    t0 = time.perf_counter()
    if mode == "exact":
        vals = exact.influence_profile_exact(n)
        rows = [
            EstimateRow(
                "influence.exact", float(v), n=n, m=m + 1, exact=str(v)
            )
            for m, v in enumerate(vals)
        ]
    elif mode == "float":
        prof = exact.influence_profile_float(n)
        rows = [
            EstimateRow("influence.float", float(prof[m]), n=n, m=m + 1)
            for m in range(n)
        ]
    elif mode == "oracle":
        vals = [exact.influence_oracle(n, m) for m in range(1, n + 1)]
        rows = [
            EstimateRow(
                "influence.oracle", float(v), n=n, m=m + 1, exact=str(v)
            )
            for m, v in enumerate(vals)
        ]
    elif mode == "mc":
        if trials is None or int(trials) < 1:
            raise ValueError("mc mode needs trials >= 1")
        trials = int(trials)
        counts = _map_chunks(
            workers,
            _chunk_jobs(trials, _mc_influence_chunk_size(n)),
            lambda ci, cnt: _mc_influence_chunk(n, master, ci, cnt),
        )
        total = np.sum(np.stack(counts), axis=0)
        rows = []
        for m in range(1, n + 1):
            est, se = _binom_se(int(total[m - 1]), trials)
            rows.append(
                EstimateRow("influence.mc", est, se, n=n, m=m, trials=trials)
            )
    else:
        raise ValueError(f"unknown influence mode {mode!r}")
    rows[0] = EstimateRow(
        **{**rows[0].as_dict(), "seconds": time.perf_counter() - t0}
    )
    return ExperimentReport(tuple(rows), _meta(master))


# -- supercritical tails ---------------------------------------------------------------


def alpha_tail_report(n: int, alpha: float) -> ExperimentReport:
    """Exact tail at the parity-adjusted level ceil(n**alpha) vs both bounds.

    Compares P(Z_n >= x) with the envelope exp(-n**(2*alpha-1)/4) that makes
    barrier crossings summable for alpha > 1/2, and with the Chernoff bound
    exp(-x**2/(2n)); reports both margins (bound - tail).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 1/2")
    t0 = time.perf_counter()
    x = _ceil_power(n, alpha)
    if (x - n) % 2:
        x += 1
    tail = exact.tail_prob(n, x)
    tf = float(tail)
    envelope = math.exp(-(float(n) ** (2.0 * alpha - 1.0)) / 4.0)
    chernoff = math.exp(-(x * x) / (2.0 * n))
    dt = time.perf_counter() - t0
    common = dict(n=n, alpha=alpha)
    rows = (
        EstimateRow("tail.threshold", float(x), seconds=dt, **common),
        EstimateRow("tail.exact", tf, exact=str(tail), **common),
        EstimateRow("tail.envelope", envelope, **common),
        EstimateRow("tail.envelope_margin", envelope - tf, **common),
        EstimateRow("tail.chernoff", chernoff, **common),
        EstimateRow("tail.chernoff_margin", chernoff - tf, **common),
    )
    return ExperimentReport(rows, _meta(0))


# -- registered statistical checks --------------------------------------------------


def registered_se_checks(seed=None, workers: int = 0) -> ExperimentReport:
    """Monte Carlo estimates with exact targets, reported as z-scores.

    Each row's estimate is the MC value, ``exact`` its exact target and
    ``stderr`` the standard error; a row is a 4-SE failure when
    |estimate - target| > 4*stderr.  The suite-level rule: more than 1% of
    rows failing fails the build.
    """
    master = resolve_seed(seed)
    rows = []

    def z_row(name, est, se, target, **kw):
        rows.append(
            EstimateRow(name, est, se, exact=str(target), **kw)
        )

    for n, trials in ((16, 40000), (64, 40000)):
        rep = kappa_experiment(n, trials, seed=master, workers=workers)
        r = rep.rows[0]
        z_row("check.kappa_mean", r.estimate, r.stderr, exact.stay_positive_prob(n), n=n, trials=trials)

    for kind in ("switch", "compass"):
        n, trials = 64, 100000
        rep = noise_sensitivity_curve(n, [0.0], trials, kind=kind, seed=master, workers=workers)
        joint = rep.rows[0]
        target = exact.tail_prob(n, 1)  # P(Z_n > 0) = P(Z_n >= 1)
        z_row("check.ns_eps0_" + kind, joint.estimate, joint.stderr, target, n=n, trials=trials, kind=kind)

    n, trials = 16, 200000
    prof = influence_profile(n, mode="mc", trials=trials, seed=master, workers=workers)
    targets = exact.influence_profile_exact(n)
    for row, tgt in zip(prof.rows, targets):
        z_row("check.influence_mc", row.estimate, row.stderr, tgt, n=n, m=row.m, trials=trials)

    return ExperimentReport(tuple(rows), _meta(master))
