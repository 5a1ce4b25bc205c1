"""Quantitative checks connecting simulation to the approximation theory.

The error variables of one coupled run are

    R_{+-1}(t) = (v(+-1, t) - eps   A_{+-1}(eps^2 t)) / eps^2,
    R_{+-3}(t) = (v(+-3, t) - eps   A_{+-3}(eps^2 t)) / eps^2,
    R_k(t)     = (v(k, t)   - eps^2 A_k(eps^2 t))     / eps^3   (|k| in {2,4,6}),
    R_k(t)     =  v(k, t) / eps^3                               (otherwise),

and the headline metrics per path are E_R = sup_t of the weighted norm of
the R-vector, plus physical-space suprema of u and v against the amplitude
reconstruction.  The approximation theory predicts E_R = O(1) uniformly in
eps and sup_x |v - reconstruction| = O(eps^2); the sup metric for u also
carries the critical-mode noise component, which is itself O(eps) over the
long horizon, so acceptance rests on the v-metrics and E_R while the
u-metric is reported for transparency.

Ensemble studies fit log-log slopes of median metrics against eps and count
how many paths satisfy E_sup_v <= C2 eps^2 for a C2 calibrated at the
largest eps (the desk-scale surrogate for the probabilistic error bound).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import landau
from .duks import SimConfig, Trajectory, full_residual, phi1, phi2, simulate_coupled
from .errors import ConfigurationError, DivergenceError, InternalConsistencyError, SequencingError
from .noise import CRITICAL_MODES, NoiseScaling, _PURPOSE_OU, mode_stream, ou_second_moment, tail_bound
from .spectrum import DEFAULT_GRID_FACTOR, IMAG_RESIDUE_TOL, SpectralField, symbol_lambda

SLAVED_MODES = (2, 4, 6)


# ---------------------------------------------------------------------------
# small statistical helpers
# ---------------------------------------------------------------------------

def fit_loglog(x, y):
    """Least-squares slope and intercept of log(y) against log(x)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ConfigurationError("log-log fit needs >= 2 strictly positive points")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def wilson_interval(successes, n, z=1.959963984540054):
    """Wilson 95% confidence interval for a binomial proportion."""
    if n <= 0:
        raise ConfigurationError("need n > 0")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def bootstrap_median_se(values, n_boot=500, seed=0):
    """Bootstrap standard error of the sample median."""
    values = np.asarray(values, dtype=float)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 9241))))
    idx = rng.integers(0, values.size, size=(n_boot, values.size))
    return float(np.std(np.median(values[idx], axis=1)))


def config_for_eps(base: SimConfig, eps) -> SimConfig:
    """Copy of a configuration at a different eps (scaling follows along)."""
    return replace(base, eps=float(eps), scaling=replace(base.scaling, eps=float(eps)))


# ---------------------------------------------------------------------------
# pathwise error metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathErrorRecord:
    """Error metrics of one coupled run (one noise realisation)."""

    eps: float
    seed: int
    path: int
    r_weight: float
    order: str
    e_r: float
    e_sup_v: float
    e_sup_u: float
    aborted: bool = False
    abort_mode: int | None = None
    abort_time: float | None = None
    sanity_l1_ok: bool = True

    def as_row(self):
        return {
            "eps": self.eps,
            "path": self.path,
            "seed": self.seed,
            "e_r": self.e_r,
            "e_sup_v": self.e_sup_v,
            "e_sup_u": self.e_sup_u,
            "aborted": self.aborted,
        }


def _grid_sup(coeff_rows, truncation, m=None):
    """Row-wise sup_x |u(x)| via zero-padded inverse FFT (vectorised)."""
    n = truncation
    if m is None:
        m = DEFAULT_GRID_FACTOR * n
    buf = np.zeros((coeff_rows.shape[0], m), dtype=complex)
    ks = np.arange(-n, n + 1)
    buf[:, ks % m] = coeff_rows
    samples = np.fft.ifft(buf, axis=1) * m
    mass = np.sum(np.abs(coeff_rows), axis=1)
    residue = np.max(np.abs(samples.imag), axis=1)
    if np.any(residue > IMAG_RESIDUE_TOL * np.maximum(mass, 1e-300)):
        raise InternalConsistencyError("imaginary residue in grid evaluation")
    return np.max(np.abs(samples.real), axis=1), mass


def _reconstruction_rows(amp: landau.AmplitudeTrajectory, eps, order, truncation):
    """Coefficient rows of the amplitude reconstruction at every sample."""
    n = truncation
    rows = np.zeros((amp.T.size, 2 * n + 1), dtype=complex)
    def put(k, vals):
        rows[:, n + k] = vals
        rows[:, n - k] = np.conj(vals)
    put(1, eps * amp.a1)
    put(3, eps * amp.a3)
    if order == "second":
        put(2, eps**2 * amp.a2)
        put(4, eps**2 * amp.a4)
        put(6, eps**2 * amp.a6)
    elif order != "first":
        raise ConfigurationError(f"unknown approximation order {order!r}")
    return rows


def pathwise_error(traj: Trajectory, amp: landau.AmplitudeTrajectory,
                   r_weight=2.0, order="first") -> PathErrorRecord:
    """Error metrics of a coupled run driven by one shared noise realisation.

    Requires aligned sample grids (fast t <-> slow T = eps^2 t); raises
    :class:`SequencingError` otherwise.  Also checks per sample that the
    physical-space supremum never exceeds the coefficient l1 mass of the
    difference field (a sanity inequality).
    """
    cfg = traj.config
    eps = cfg.eps
    n = cfg.truncation
    if amp.T.size != traj.times.size or not np.array_equal(amp.history.times, traj.times):
        raise SequencingError("trajectory and amplitude sample grids are not aligned")
    if abs(amp.history.eps - eps) > 0:
        raise SequencingError("trajectory and amplitude paths use different eps")

    nsamp = traj.times.size
    ks = np.arange(-n, n + 1)
    weights = (1.0 + ks.astype(float) ** 2) ** r_weight

    # R-vector rows: default the eps^-3 scaling, then the privileged modes.
    rvec = traj.v / eps**3
    def assign(k, amp_vals, power):
        scale = eps**power
        rvec[:, n + k] = (traj.v[:, n + k] - scale * amp_vals) / eps ** (power + 1)
        rvec[:, n - k] = (traj.v[:, n - k] - scale * np.conj(amp_vals)) / eps ** (power + 1)
    assign(1, amp.a1, 1)
    assign(3, amp.a3, 1)
    assign(2, amp.a2, 2)
    assign(4, amp.a4, 2)
    assign(6, amp.a6, 2)
    norms = np.sqrt(np.sum(weights * np.abs(rvec) ** 2, axis=1))
    e_r = float(np.max(norms))

    recon = _reconstruction_rows(amp, eps, order, n)
    sup_v, l1_v = _grid_sup(traj.v - recon, n)
    sup_u, _ = _grid_sup(traj.v + traj.z - recon, n)
    sanity_ok = bool(np.all(sup_v <= l1_v * (1 + 1e-9) + 1e-300))

    del nsamp
    return PathErrorRecord(
        eps=eps, seed=traj.seed, path=traj.path, r_weight=r_weight, order=order,
        e_r=e_r, e_sup_v=float(np.max(sup_v)), e_sup_u=float(np.max(sup_u)),
        sanity_l1_ok=sanity_ok,
    )


# ---------------------------------------------------------------------------
# ensemble scaling study
# ---------------------------------------------------------------------------

METRICS = ("e_sup_v", "e_sup_u", "e_r")


def _scaling_worker(task):
    config, path, r_weight, order = task
    try:
        traj, amp = simulate_coupled(config, path=path)
        return pathwise_error(traj, amp, r_weight=r_weight, order=order)
    except DivergenceError as err:
        return PathErrorRecord(
            eps=config.eps, seed=config.seed, path=path, r_weight=r_weight,
            order=order, e_r=math.nan, e_sup_v=math.nan, e_sup_u=math.nan,
            aborted=True, abort_mode=err.mode, abort_time=err.time,
        )


@dataclass(frozen=True)
class ScalingTable:
    """Aggregated eps-scaling ensemble: quantiles, slope fits, success counts."""

    eps: tuple
    paths: int
    r_weight: float
    order: str
    records: tuple
    medians: dict
    p95s: dict
    slopes: dict
    c2: float
    success_fraction: float
    success_by_eps: tuple
    wilson95: tuple
    e_r_ratio: float
    passes: dict

    def success_fraction_for(self, c2):
        """Fraction of paths with E_sup_v <= c2 * eps^2 (aborted count as failures)."""
        good = sum(
            1 for rec in self.records
            if not rec.aborted and rec.e_sup_v <= c2 * rec.eps**2
        )
        return good / len(self.records)

    def to_json_dict(self):
        return {
            "kind": "scaling",
            "eps": list(self.eps),
            "paths_per_eps": self.paths,
            "r_weight": self.r_weight,
            "order": self.order,
            "metrics": {
                name: {
                    "median": list(self.medians[name]),
                    "p95": list(self.p95s[name]),
                    "slope": self.slopes[name][0],
                    "intercept": self.slopes[name][1],
                }
                for name in METRICS
            },
            "c2": self.c2,
            "c2_rule": "1.5x-median-at-largest-eps",
            "success_fraction": self.success_fraction,
            "success_by_eps": list(self.success_by_eps),
            "success_wilson95": list(self.wilson95),
            "e_r_ratio": self.e_r_ratio,
            "aborted": [
                {"eps": rec.eps, "path": rec.path, "seed": rec.seed,
                 "mode": rec.abort_mode, "time": rec.abort_time}
                for rec in self.records if rec.aborted
            ],
            "pass": dict(self.passes),
        }

    def to_csv_lines(self):
        yield "eps,path,seed,e_r,e_sup_v,e_sup_u,aborted"
        for rec in self.records:
            yield (
                f"{rec.eps:.17g},{rec.path},{rec.seed},{rec.e_r:.17g},"
                f"{rec.e_sup_v:.17g},{rec.e_sup_u:.17g},{int(rec.aborted)}"
            )


def epsilon_scaling_study(base: SimConfig, eps_list, paths, workers=1,
                          r_weight=2.0, order="first") -> ScalingTable:
    """Coupled shared-noise ensembles at several eps, with slope and success fits.

    For each eps, ``paths`` coupled pairs run on per-path keyed streams; the
    aggregation is independent of the worker count.  Aborted paths are
    reported with their (eps, path, seed) and count as failures.
    """
    eps_list = tuple(float(e) for e in eps_list)
    if len(set(eps_list)) < 3:
        raise ConfigurationError("scaling study needs >= 3 distinct eps values")
    paths = int(paths)
    if paths < 16:
        raise ConfigurationError("scaling study needs >= 16 paths per eps")

    tasks = [
        (config_for_eps(base, eps), path, float(r_weight), order)
        for eps in eps_list
        for path in range(paths)
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_scaling_worker, tasks, chunksize=1))
    else:
        records = [_scaling_worker(t) for t in tasks]

    medians = {}
    p95s = {}
    for name in METRICS:
        med_rows, p95_rows = [], []
        for eps in eps_list:
            vals = np.array([
                getattr(rec, name) for rec in records
                if rec.eps == eps and not rec.aborted
            ])
            if vals.size == 0:
                raise DivergenceError(0, 0.0, math.inf)
            med_rows.append(float(np.median(vals)))
            p95_rows.append(float(np.quantile(vals, 0.95)))
        medians[name] = med_rows
        p95s[name] = p95_rows

    slopes = {name: fit_loglog(eps_list, medians[name]) for name in ("e_sup_v", "e_sup_u")}
    # E_R is expected flat; a log-log fit still summarises its drift.
    slopes["e_r"] = fit_loglog(eps_list, medians["e_r"])

    eps_max = max(eps_list)
    i_max = eps_list.index(eps_max)
    c2 = 1.5 * medians["e_sup_v"][i_max] / eps_max**2

    success_by_eps = []
    good_total = 0
    for eps in eps_list:
        recs = [rec for rec in records if rec.eps == eps]
        good = sum(1 for rec in recs if not rec.aborted and rec.e_sup_v <= c2 * eps**2)
        success_by_eps.append(good / len(recs))
        good_total += good
    success_fraction = good_total / len(records)
    wilson = wilson_interval(good_total, len(records))

    med_e_r = medians["e_r"]
    e_r_ratio = max(med_e_r) / min(med_e_r)

    passes = {
        "slope_in_window": 1.6 <= slopes["e_sup_v"][0] <= 2.4,
        "success_ge_0.9": success_fraction >= 0.9,
        "e_r_ratio_lt_3": e_r_ratio < 3.0,
    }
    return ScalingTable(
        eps=eps_list, paths=paths, r_weight=float(r_weight), order=order,
        records=tuple(records), medians=medians, p95s=p95s, slopes=slopes,
        c2=float(c2), success_fraction=float(success_fraction),
        success_by_eps=tuple(success_by_eps), wilson95=wilson,
        e_r_ratio=float(e_r_ratio), passes=passes,
    )


# ---------------------------------------------------------------------------
# residual order study
# ---------------------------------------------------------------------------

RESIDUAL_MODES = (0, 1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class ResidualOrderTable:
    """sup_t |Res(k, t)| along the second-order reconstruction, with eps-order fits."""

    eps: tuple
    sup_residual: dict
    residual_orders: dict
    sup_integrated: dict
    integrated_orders: dict

    def to_json_dict(self):
        return {
            "kind": "residuals",
            "eps": list(self.eps),
            "residual": [
                {"k": k, "sup": list(self.sup_residual[k]),
                 "order": self.residual_orders[k]}
                for k in sorted(self.sup_residual)
            ],
            "integrated_reduced": [
                {"j": j, "sup": list(self.sup_integrated[j]),
                 "order": self.integrated_orders[j]}
                for j in sorted(self.sup_integrated)
            ],
        }


def _residuals_one_eps(config: SimConfig):
    """sup_t |Res(k)| for k in RESIDUAL_MODES plus integrated reduced residuals.

    The reconstruction is the second-order one; its time derivative uses the
    amplitude drift and the classical slaved-mode rate (noise arguments
    held fixed: their derivative is distributional, and the corresponding
    residual contribution is handled separately by the error equations).
    """
    traj, amp = simulate_coupled(config)
    eps = config.eps
    n = config.truncation
    nsamp = traj.times.size
    hist = amp.history

    sup_res = {k: 0.0 for k in RESIDUAL_MODES}
    g = {j: np.empty(nsamp, dtype=complex) for j in SLAVED_MODES}

    for i in range(nsamp):
        zs = hist.sample(i)
        state = amp.state(i)
        d1, d3 = landau.rhs_amplitudes(state.a1, state.a3, zs)
        d2, d4, d6 = landau.slaved_modes_rate(state.a1, state.a3, zs, d1, d3)

        vc = np.zeros(2 * n + 1, dtype=complex)
        dc = np.zeros(2 * n + 1, dtype=complex)
        for k, amp_val, damp_val, power in (
            (1, state.a1, d1, 1), (3, state.a3, d3, 1),
            (2, state.a2, d2, 2), (4, state.a4, d4, 2), (6, state.a6, d6, 2),
        ):
            vc[n + k] = eps**power * amp_val
            vc[n - k] = np.conj(vc[n + k])
            dc[n + k] = eps ** (power + 2) * damp_val
            dc[n - k] = np.conj(dc[n + k])

        res = full_residual(
            SpectralField(vc, n),
            traj.z_field(i),
            eps,
            SpectralField(dc, n),
        )
        for k in RESIDUAL_MODES:
            sup_res[k] = max(sup_res[k], abs(res.coeff(k)))

        for j, dval, aval in ((2, d2, state.a2), (4, d4, state.a4), (6, d6, state.a6)):
            zj = getattr(zs, f"z{j}")
            g[j][i] = eps * (-dval + (aval + zj))

    # Integrated reduced residuals: I' = lambda(j) I + g, solved sample to
    # sample by the exact exponential-trapezoid rule (stiff-safe).
    delta = config.cadence
    sup_int = {}
    for j in SLAVED_MODES:
        z = symbol_lambda(j) * delta
        decay = math.exp(z)
        w0 = delta * phi1(z)
        w1 = delta * phi2(z)
        acc = 0j
        sup = 0.0
        for i in range(nsamp - 1):
            acc = decay * acc + w0 * g[j][i] + w1 * (g[j][i + 1] - g[j][i])
            sup = max(sup, abs(acc))
        sup_int[j] = sup
    return sup_res, sup_int


def residual_order_study(base: SimConfig, eps_list) -> ResidualOrderTable:
    """Fit eps-orders of the residual hierarchy along the reconstruction."""
    eps_list = tuple(float(e) for e in eps_list)
    if len(set(eps_list)) < 3:
        raise ConfigurationError("residual study needs >= 3 distinct eps values")
    sup_res = {k: [] for k in RESIDUAL_MODES}
    sup_int = {j: [] for j in SLAVED_MODES}
    for eps in eps_list:
        res, integ = _residuals_one_eps(config_for_eps(base, eps))
        for k in RESIDUAL_MODES:
            sup_res[k].append(res[k])
        for j in SLAVED_MODES:
            sup_int[j].append(integ[j])
    res_orders = {k: fit_loglog(eps_list, sup_res[k])[0] for k in RESIDUAL_MODES}
    int_orders = {j: fit_loglog(eps_list, sup_int[j])[0] for j in SLAVED_MODES}
    return ResidualOrderTable(
        eps=eps_list,
        sup_residual={k: tuple(v) for k, v in sup_res.items()},
        residual_orders=res_orders,
        sup_integrated={j: tuple(v) for j, v in sup_int.items()},
        integrated_orders=int_orders,
    )


# ---------------------------------------------------------------------------
# noise statistics checks
# ---------------------------------------------------------------------------

def _single_mode_ensemble(k, t_grid, scaling, paths, seed):
    """Exact-update values Z(k, t) over an ensemble, at each t in t_grid."""
    lam = symbol_lambda(k)
    alpha = scaling.alpha(k)
    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.diff(np.concatenate([[0.0], t_grid]))
    if np.any(steps < 0):
        raise ConfigurationError("t_grid must be increasing")
    out = np.empty((paths, t_grid.size), dtype=complex)
    for p in range(paths):
        gen = mode_stream(seed, p, k, _PURPOSE_OU)
        draws = gen.standard_normal((t_grid.size, 2))
        z = 0j
        for i, h in enumerate(steps):
            if lam < 0:
                sig = math.sqrt(-math.expm1(2 * lam * h) / (2 * abs(lam)))
            else:
                sig = math.sqrt(h)
            if k == 0:
                gc = draws[i, 0]
            else:
                gc = (draws[i, 0] + 1j * draws[i, 1]) * math.sqrt(0.5)
            z = math.exp(lam * h) * z + alpha * sig * gc
            out[p, i] = z
    return out


def _tail_sup_ensemble(k, horizon, dt, scaling, paths, seed):
    """Discrete-grid sup_{tau <= t} |Z(k, tau)| over an ensemble."""
    lam = symbol_lambda(k)
    alpha = scaling.alpha(k)
    nsteps = int(round(horizon / dt))
    draws = np.empty((paths, nsteps, 2))
    for p in range(paths):
        gen = mode_stream(seed, p, k, _PURPOSE_OU)
        draws[p] = gen.standard_normal((nsteps, 2))
    if lam < 0:
        sig = math.sqrt(-math.expm1(2 * lam * dt) / (2 * abs(lam)))
    else:
        sig = math.sqrt(dt)
    decay = math.exp(lam * dt)
    if k == 0:
        gc = draws[:, :, 0].astype(complex)
    else:
        gc = (draws[:, :, 0] + 1j * draws[:, :, 1]) * math.sqrt(0.5)
    z = np.zeros(paths, dtype=complex)
    sup = np.zeros(paths)
    for i in range(nsteps):
        z = decay * z + alpha * sig * gc[:, i]
        sup = np.maximum(sup, np.abs(z))
    return sup


def _tail_thresholds(k, horizon, scaling):
    """Threshold grid where the martingale bound is informative for this mode.

    Scales are the natural mode scale (alpha sqrt(t) for critical modes,
    alpha / sqrt(2 |lambda|) for damped ones).  For damped modes the lowest
    multiple grows with the number of relaxation times in the horizon: the
    bound is uniform in t while the observed supremum of a recurrent process
    is not, so comparisons close to the stationary scale would be vacuous.
    """
    lam = symbol_lambda(k)
    if lam == 0.0:
        scale = scaling.alpha(k) * math.sqrt(horizon)
        qs = (2.0, 3.0, 4.0)
    else:
        scale = scaling.alpha(k) / math.sqrt(2 * abs(lam))
        q0 = math.ceil(math.sqrt(math.log(max(math.e, 200.0 * horizon * abs(lam)))))
        qs = (float(q0), float(q0 + 1), float(q0 + 2))
    return [q * scale for q in qs]


def weighted_sup_ensemble(scaling: NoiseScaling, truncation, horizon, dt, paths,
                          seed, r_weight=2.0, block=512):
    """Per-path sup_t sum_{k not critical} |Z_k(t)|^2 (1+k^2)^r (rescaled values).

    Streams the exact per-mode updates in blocks so arbitrarily long
    horizons fit in memory.
    """
    n = int(truncation)
    ks = np.arange(n + 1)
    lam = symbol_lambda(ks)
    alpha = scaling.alpha_array(n)
    c = scaling.c_array(n)
    weight = (1.0 + ks.astype(float) ** 2) ** r_weight
    mult = np.where(ks == 0, 1.0, 2.0)
    mult[np.isin(ks, CRITICAL_MODES)] = 0.0

    decay = np.exp(lam * dt)
    denom = np.where(lam < 0.0, 2.0 * lam, 1.0)
    sig = np.sqrt(np.where(lam < 0.0, np.expm1(2.0 * lam * dt) / denom, dt))
    gain = alpha * sig

    nsteps = int(round(horizon / dt))
    gens = [[mode_stream(seed, p, k, _PURPOSE_OU) for k in range(n + 1)]
            for p in range(paths)]
    z = np.zeros((paths, n + 1), dtype=complex)
    sup = np.zeros(paths)
    done = 0
    wfac = mult * weight / c**2
    while done < nsteps:
        bs = min(block, nsteps - done)
        draws = np.empty((paths, n + 1, bs, 2))
        for p in range(paths):
            for k in range(n + 1):
                draws[p, k] = gens[p][k].standard_normal((bs, 2))
        gc = (draws[..., 0] + 1j * draws[..., 1]) * math.sqrt(0.5)
        gc[:, 0, :] = draws[:, 0, :, 0]
        for i in range(bs):
            z = decay * z + gain * gc[:, :, i]
            stat = np.sum(wfac * np.abs(z) ** 2, axis=1)
            sup = np.maximum(sup, stat)
        done += bs
    return sup


def ou_statistics_check(scaling: NoiseScaling, modes=(0, 1, 2, 3, 4, 5, 6, 10),
                        t_grid=(0.1, 1.0, 10.0), paths=10_000, tail_paths=1_000,
                        tail_modes=(1, 2, 5), tail_horizon=1.0, tail_dt=0.01,
                        seed=2024, weighted_paths=0, weighted_horizon=None,
                        weighted_dt=0.01, truncation=32, r_weight=2.0, s_weight=1.0):
    """Moment, tail-bound and (optionally) weighted-supremum statistics.

    Returns a JSON-ready dict.  Moment checks compare the empirical second
    moment at each (mode, t) against the closed form within three standard
    errors; tail checks require the empirical exceedance frequency to stay
    below the closed-form bound plus three binomial standard errors.
    """
    report = {
        "kind": "ou_check",
        "eps": scaling.eps,
        "paths_moments": int(paths),
        "paths_tails": int(tail_paths),
        "t_grid": list(t_grid),
        "modes": list(modes),
        "moments": [],
        "tails": [],
    }
    all_ok = True

    for k in modes:
        ens = _single_mode_ensemble(k, t_grid, scaling, paths, seed)
        sq = np.abs(ens) ** 2
        for i, t in enumerate(t_grid):
            emp = float(np.mean(sq[:, i]))
            se = float(np.std(sq[:, i], ddof=1) / math.sqrt(paths))
            expected = ou_second_moment(k, t, scaling)
            z_score = (emp - expected) / se if se > 0 else 0.0
            ok = abs(z_score) <= 3.0 if se > 0 else emp == expected
            all_ok &= ok
            report["moments"].append({
                "k": int(k), "t": float(t), "empirical": emp, "expected": expected,
                "stderr": se, "z": float(z_score), "pass": bool(ok),
            })
        if k == 2:
            stationary = scaling.alpha(2) ** 2 / (2 * abs(symbol_lambda(2)))
            emp = float(np.mean(sq[:, -1]))
            rel = abs(emp - stationary) / stationary if stationary > 0 else 0.0
            ok = rel <= 0.05 if stationary > 0 else emp == 0.0
            all_ok &= ok
            report["stationary_k2"] = {
                "empirical": emp, "expected": stationary,
                "rel_err": float(rel), "pass": bool(ok),
            }

    for k in tail_modes:
        sup = _tail_sup_ensemble(k, tail_horizon, tail_dt, scaling, tail_paths, seed)
        for c in _tail_thresholds(k, tail_horizon, scaling):
            bound = tail_bound(k, tail_horizon, c, scaling)
            hits = int(np.sum(sup >= c))
            p_hat = hits / tail_paths
            se = math.sqrt(p_hat * (1 - p_hat) / tail_paths)
            ok = p_hat <= bound + 3 * se
            all_ok &= ok
            report["tails"].append({
                "k": int(k), "t": float(tail_horizon), "threshold": float(c),
                "bound": float(bound), "empirical": float(p_hat),
                "binom_se": float(se), "pass": bool(ok),
            })

    if weighted_paths:
        horizon = weighted_horizon
        if horizon is None:
            horizon = 1.0 / scaling.eps**2
        sup = weighted_sup_ensemble(
            scaling, truncation, horizon, weighted_dt, weighted_paths, seed,
            r_weight=r_weight,
        )
        p95 = float(np.quantile(sup, 0.95))
        report["weighted_sup"] = {
            "r": float(r_weight), "s": float(s_weight), "horizon": float(horizon),
            "paths": int(weighted_paths), "p95": p95, "c_z": math.sqrt(p95),
        }

    report["pass"] = bool(all_ok)
    return report
