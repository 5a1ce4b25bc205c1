"""Exponential-Euler solver for the regular part of the noisy mode system.

The solution is split as u = v + Z: Z collects the purely stochastic
mode processes (see :mod:`duksim.noise`) and the more regular part v obeys

    dv(k)/dt = lambda(k) v(k) + eps^2 v(k) + eps^2 Z(k)
               + i k ((v + Z) * (v + Z))(k),

with * the truncated discrete convolution.  One step of the integrator
treats the stiff linear part exactly and freezes the forcing at the step
start:

    v'(k) = e^{mu h} v(k) + h phi1(mu h) F(k),
    mu    = lambda(k) + eps^2,
    F(k)  = eps^2 Z(k) + i k ((v + Z) * (v + Z))(k),

where phi1(z) = (e^z - 1)/z with phi1(0) = 1.  Because lambda ~ -k^8 is
handled exactly there is no step-size stability restriction; the scheme is
first order in the forcing.

Z is advanced first within a step, but v always consumes the start-of-step
Z values (the evaluation convention of the mild formulation).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .landau import integrate_amplitudes, slaved_modes
from .noise import NoiseHistory, NoiseScaling, OULattice, SlowNoiseSample
from .spectrum import DEFAULT_TRUNCATION, SpectralField, convolve, symbol_lambda

#: Abort threshold for the blow-up guard: quadratic nonlinearities can run
#: away for large eps, and the guard turns silent NaNs into a diagnosable
#: event.
BLOWUP_THRESHOLD = 1e6

#: CSV header for exported trajectories (stable interface).
TRAJECTORY_CSV_HEADER = "t,k,re_u,im_u,re_v,im_v,re_Z,im_Z"


def phi1(z):
    """(e^z - 1) / z with the removable singularity phi1(0) = 1.

    Uses expm1, which keeps full precision for |z| down to 0 and saturates
    correctly at -1/z for large negative z.
    """
    z = np.asarray(z, dtype=float)
    out = np.where(z == 0.0, 1.0, np.expm1(np.where(z == 0.0, 1.0, z)) / np.where(z == 0.0, 1.0, z))
    return float(out) if out.ndim == 0 else out


def phi2(z):
    """(e^z - 1 - z) / z^2 with phi2(0) = 1/2 (trapezoidal weight)."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z == 0.0, 1.0, z)
    out = np.where(z == 0.0, 0.5, (np.expm1(safe) - safe) / (safe * safe))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SimConfig:
    """Run parameters for one full/amplitude simulation pair.

    The fast horizon is t0 / eps^2; samples are recorded every ``cadence``
    fast time units.  Both the total step count and the steps-per-sample
    count must come out integral, which holds for the canonical choices
    eps in {0.5, 0.25, 0.2, 0.125, 0.1, 0.05, ...} with dt = 0.01 and
    cadence = 1.
    """

    eps: float
    t0: float = 1.0
    truncation: int = DEFAULT_TRUNCATION
    dt: float = 0.01
    cadence: float = 1.0
    seed: int = 1
    a1_init: complex = 1.0 + 0j
    a3_init: complex = 0.5 + 0j
    scaling: NoiseScaling = None
    nonlinear: bool = True
    blowup_threshold: float = BLOWUP_THRESHOLD

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.5:
            raise ConfigurationError(f"eps={self.eps} outside (0, 0.5]")
        if self.t0 <= 0 or self.dt <= 0 or self.cadence <= 0:
            raise ConfigurationError("t0, dt and cadence must be > 0")
        if self.truncation < 8:
            raise ConfigurationError("truncation must retain the driven modes (N >= 8)")
        if self.seed < 0:
            raise ConfigurationError("seed must be >= 0")
        if self.scaling is None:
            object.__setattr__(self, "scaling", NoiseScaling(eps=self.eps))
        elif self.scaling.eps != self.eps:
            raise ConfigurationError("scaling.eps must match config.eps")
        object.__setattr__(self, "a1_init", complex(self.a1_init))
        object.__setattr__(self, "a3_init", complex(self.a3_init))
        # Grid bookkeeping: both counts must be integral.
        self._exact_int(self.cadence / self.dt, "cadence / dt")
        self._exact_int(self.t0 / (self.eps**2 * self.cadence), "horizon / cadence")

    @staticmethod
    def _exact_int(x, what):
        n = round(x)
        if n < 1 or abs(x - n) > 1e-9 * max(1.0, abs(x)):
            raise ConfigurationError(f"{what} = {x:g} is not a positive integer")
        return n

    @property
    def horizon(self):
        """Fast-time horizon t0 / eps^2."""
        return self.t0 / self.eps**2

    @property
    def steps_per_sample(self):
        return self._exact_int(self.cadence / self.dt, "cadence / dt")

    @property
    def n_samples(self):
        """Number of recorded samples after t = 0."""
        return self._exact_int(self.t0 / (self.eps**2 * self.cadence), "horizon / cadence")

    @property
    def n_steps(self):
        return self.n_samples * self.steps_per_sample

    def noise_off(self) -> "SimConfig":
        return replace(self, scaling=replace(self.scaling, amplitude=0.0))


@dataclass(frozen=True)
class Trajectory:
    """Sampled fast-time trajectory of one path: v, physical Z and u = v + Z.

    ``v[i]`` and ``z[i]`` hold full coefficient vectors over k = -N..N at
    fast time ``times[i]``.  Records are immutable once a run completes.
    """

    times: np.ndarray
    v: np.ndarray
    z: np.ndarray
    config: SimConfig
    seed: int
    path: int = 0

    @property
    def u(self):
        return self.v + self.z

    def v_field(self, index) -> SpectralField:
        return SpectralField.from_array(self.v[index], symmetrize=True)

    def z_field(self, index) -> SpectralField:
        return SpectralField.from_array(self.z[index], symmetrize=True)

    def u_field(self, index) -> SpectralField:
        return SpectralField.from_array(self.v[index] + self.z[index], symmetrize=True)

    def noise_history(self) -> NoiseHistory:
        cfull = self.config.scaling.c_array_full(self.config.truncation)
        return NoiseHistory(
            times=self.times,
            znorm=self.z / cfull,
            eps=self.config.eps,
            truncation=self.config.truncation,
        )

    def to_csv_lines(self):
        ks = np.arange(-self.config.truncation, self.config.truncation + 1)
        yield TRAJECTORY_CSV_HEADER
        for i, t in enumerate(self.times):
            u = self.v[i] + self.z[i]
            for j, k in enumerate(ks):
                yield ",".join(
                    f"{val:.17g}"
                    for val in (
                        t, k,
                        u[j].real, u[j].imag,
                        self.v[i][j].real, self.v[i][j].imag,
                        self.z[i][j].real, self.z[i][j].imag,
                    )
                )


def _conv_trunc(a, b, n):
    """Central slice of the full linear convolution (projection truncation)."""
    full = np.convolve(a, b)
    mid = full[n : 3 * n + 1]
    return 0.5 * (mid + np.conj(mid[::-1]))


def _forcing(vc, zc, eps, ik, n, nonlinear):
    f = (eps * eps) * zc
    if nonlinear:
        w = vc + zc
        f = f + ik * _conv_trunc(w, w, n)
    return f


def _step_v_arrays(vc, zc, eps, h, decay, hphi, ik, n, nonlinear):
    f = _forcing(vc, zc, eps, ik, n, nonlinear)
    return decay * vc + hphi * f


def _propagator(config, h):
    """Per-mode exact linear factors e^{mu h} and h*phi1(mu h)."""
    ks = np.arange(-config.truncation, config.truncation + 1)
    mu = symbol_lambda(ks) + config.eps**2
    return np.exp(mu * h), h * phi1(mu * h), 1j * ks.astype(float)


def step_v(v: SpectralField, zfield: SpectralField, eps, h, nonlinear=True) -> SpectralField:
    """One exponential-Euler step of the regular part against frozen noise.

    ``zfield`` carries the physical-scale noise coefficients c_k Z_k.
    """
    v._check_compatible(zfield)
    if h <= 0:
        raise ConfigurationError("step must be > 0")
    n = v.truncation
    ks = np.arange(-n, n + 1)
    mu = symbol_lambda(ks) + float(eps) ** 2
    new = _step_v_arrays(
        v.coeffs, zfield.coeffs, float(eps), float(h),
        np.exp(mu * h), h * phi1(mu * h), 1j * ks.astype(float), n, nonlinear,
    )
    return SpectralField(0.5 * (new + np.conj(new[::-1])), n)


def initial_v(config: SimConfig) -> np.ndarray:
    """Zero-error initial data: critical modes eps*A, slaved modes eps^2*A."""
    n = config.truncation
    eps = config.eps
    a2, a4, a6 = slaved_modes(config.a1_init, config.a3_init, SlowNoiseSample.zero())
    vc = np.zeros(2 * n + 1, dtype=complex)
    for k, val in ((1, eps * config.a1_init), (3, eps * config.a3_init),
                   (2, eps**2 * a2), (4, eps**2 * a4), (6, eps**2 * a6)):
        vc[n + k] = val
        vc[n - k] = np.conj(val)
    return vc


def simulate_path(config: SimConfig, seed=None, path=0) -> Trajectory:
    """Advance one coupled (Z, v) path to the fast horizon and record samples.

    Z starts at zero and is advanced by its exact update on the shared fast
    grid; v starts from the zero-error initial data.  Identical (seed,
    config, path) inputs reproduce bit-identical trajectories.  Raises
    :class:`DivergenceError` naming the first offending (k, t) on blow-up.
    """
    seed = config.seed if seed is None else int(seed)
    n = config.truncation
    eps = config.eps
    dt = config.dt
    nsteps = config.n_steps
    sps = config.steps_per_sample
    nsamples = config.n_samples + 1

    lattice = OULattice(n, seed, path)
    lattice.prefetch(min(nsteps, 16384))
    decay, hphi, ik = _propagator(config, dt)

    vc = initial_v(config)
    times = np.empty(nsamples)
    vout = np.empty((nsamples, 2 * n + 1), dtype=complex)
    zout = np.empty((nsamples, 2 * n + 1), dtype=complex)
    times[0] = 0.0
    vout[0] = vc
    zout[0] = lattice.field_array()

    threshold = config.blowup_threshold
    for step in range(nsteps):
        zc = lattice.field_array()
        lattice.advance(config.scaling, dt)
        vc = _step_v_arrays(vc, zc, eps, dt, decay, hphi, ik, n, config.nonlinear)
        vc = 0.5 * (vc + np.conj(vc[::-1]))
        uc_max = np.abs(vc + lattice.field_array())
        if not np.all(uc_max <= threshold):
            bad = int(np.argmax(~(uc_max <= threshold)))
            raise DivergenceError(bad - n, (step + 1) * dt, vc[bad])
        if (step + 1) % sps == 0:
            i = (step + 1) // sps
            times[i] = i * config.cadence
            vout[i] = vc
            zout[i] = lattice.field_array()
    return Trajectory(times=times, v=vout, z=zout, config=config, seed=seed, path=path)


def simulate_coupled(config: SimConfig, seed=None, path=0):
    """Run the full solver and the amplitude system on one shared realisation."""
    traj = simulate_path(config, seed=seed, path=path)
    amp = integrate_amplitudes(config.a1_init, config.a3_init, traj.noise_history())
    return traj, amp


def integrate_v_frozen_noise(v0, znodes, eps, dt, truncation, nonlinear=True,
                             sample_every=1):
    """Integrate v against a prerecorded physical noise path (diagnostic).

    ``znodes[j]`` is the full Z coefficient vector at step start j (so the
    array must have at least n_steps entries); a coarse run over the same
    realisation passes ``znodes[::stride]`` with dt scaled accordingly.
    Returns (times, v_samples).
    """
    n = truncation
    ks = np.arange(-n, n + 1)
    mu = symbol_lambda(ks) + float(eps) ** 2
    decay = np.exp(mu * dt)
    hphi = dt * phi1(mu * dt)
    ik = 1j * ks.astype(float)
    nsteps = znodes.shape[0]
    vc = np.asarray(v0, dtype=complex).copy()
    times = [0.0]
    out = [vc.copy()]
    for j in range(nsteps):
        vc = _step_v_arrays(vc, znodes[j], float(eps), float(dt), decay, hphi, ik, n, nonlinear)
        vc = 0.5 * (vc + np.conj(vc[::-1]))
        if (j + 1) % sample_every == 0:
            times.append((j + 1) * dt)
            out.append(vc.copy())
    return np.asarray(times), np.asarray(out)


def full_residual(vfield: SpectralField, zfield: SpectralField, eps,
                  dv_dt: SpectralField) -> SpectralField:
    """Defect of a candidate v in the evolution equation.

    Res(k) = -dv_dt(k) + lambda(k) v(k) + eps^2 v(k) + eps^2 Z(k)
             + i k ((v + Z) * (v + Z))(k).

    ``dv_dt`` is supplied by the caller (finite differences of trajectory
    samples, or analytically for constructed inputs).
    """
    vfield._check_compatible(zfield)
    vfield._check_compatible(dv_dt)
    n = vfield.truncation
    ks = np.arange(-n, n + 1)
    lam = symbol_lambda(ks)
    w = convolve(vfield + zfield, vfield + zfield)
    res = (
        -dv_dt.coeffs
        + lam * vfield.coeffs
        + (eps * eps) * vfield.coeffs
        + (eps * eps) * zfield.coeffs
        + 1j * ks.astype(float) * w.coeffs
    )
    return SpectralField(0.5 * (res + np.conj(res[::-1])), n)
