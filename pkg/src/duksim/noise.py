"""Per-mode complex Wiener and Ornstein-Uhlenbeck processes.

Each Fourier mode k >= 0 carries its own counter-based random stream keyed by
(global seed, path index, mode, purpose); negative modes are conjugate
partners.  For k > 0 the complex driver W(k, t) has independent real and
imaginary Wiener parts of variance t/2 each, so E|W(k,t)|^2 = t; k = 0 is
purely real with variance t.  This yields real space-time noise with
mode-independent intensity.

The damped-mode process Z(k, .) solves dZ = lambda(k) Z dt + alpha_k dW with
Z(k, 0) = 0 and is advanced by its exact distributional update, so there is
no step-size restriction:

    Z(k, t+h) = e^{lambda h} Z(k, t) + alpha_k * sigma(k, h) * G,
    sigma^2   = (e^{2 lambda h} - 1) / (2 lambda)   (lambda < 0)
              = h                                   (lambda = 0),

with G a standard complex (real at k = 0) Gaussian.  In particular
E|Z(k,t)|^2 = alpha_k^2 (1 - e^{2 lambda t}) / (2|lambda|) for damped modes
and alpha_k^2 t for the critical modes, where Z is a rescaled Wiener process.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, SequencingError
from .spectrum import SpectralField, symbol_lambda

#: Positive critical wavenumbers (the symbol vanishes at +-1 and +-3).
CRITICAL_MODES = (1, 3)

_PURPOSE_OU = 0
_PURPOSE_WIENER = 1

_SQRT_HALF = np.sqrt(0.5)


def mode_stream(seed, path, mode, purpose):
    """Counter-based generator for one (seed, path, mode, purpose) key."""
    ss = np.random.SeedSequence(
        entropy=(int(seed), int(path), int(mode), int(purpose))
    )
    return np.random.Generator(np.random.Philox(ss))


class _ModeDraws:
    """Standard-normal draws, two per step per mode, in fixed stream order.

    Per mode the stream is consumed strictly forward in (step, [re, im])
    order, so bulk prefetching and one-step draws yield identical values.
    """

    def __init__(self, seed, path, nmodes, purpose):
        self._gens = [mode_stream(seed, path, k, purpose) for k in range(nmodes)]
        self._buf = np.empty((nmodes, 0, 2))
        self._pos = 0
        self._block = 1

    def prefetch(self, nsteps):
        self._block = max(self._block, int(nsteps))

    def next_step(self):
        if self._pos >= self._buf.shape[1]:
            self._buf = np.stack(
                [g.standard_normal((self._block, 2)) for g in self._gens]
            )
            self._pos = 0
        g = self._buf[:, self._pos, :]
        self._pos += 1
        return g


def _standard_complex(g):
    """Map raw draws (nmodes, 2) to E|G|^2 = 1 Gaussians; index 0 stays real."""
    out = (g[:, 0] + 1j * g[:, 1]) * _SQRT_HALF
    out[0] = g[0, 0]
    return out


@dataclass(frozen=True)
class NoiseScaling:
    """Noise amplitudes alpha_k and normalisations c_k as powers of eps.

    Defaults: alpha_k = eps^2 for every mode, c_k = eps at the critical
    modes and eps^2 elsewhere.  The exponents (and an optional power-law
    decay of alpha in |k|) are configurable; ``amplitude = 0`` switches the
    noise off entirely.  Both maps are symmetric in k <-> -k.
    """

    eps: float
    amplitude: float = 1.0
    alpha_exponent: float = 2.0
    alpha_decay: float = 0.0
    c_critical_exponent: float = 1.0
    c_stable_exponent: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ConfigurationError(f"eps={self.eps} outside (0, 1)")
        if self.amplitude < 0.0:
            raise ConfigurationError("noise amplitude must be >= 0")

    def alpha(self, k):
        base = self.amplitude * self.eps ** self.alpha_exponent
        if self.alpha_decay:
            base *= float(max(abs(k), 1)) ** (-self.alpha_decay)
        return base

    def c(self, k):
        if abs(k) in CRITICAL_MODES:
            return self.eps ** self.c_critical_exponent
        return self.eps ** self.c_stable_exponent

    def alpha_array(self, truncation):
        """alpha_k for k = 0..N."""
        k = np.arange(truncation + 1, dtype=float)
        base = self.amplitude * self.eps ** self.alpha_exponent
        if self.alpha_decay:
            return base * np.maximum(k, 1.0) ** (-self.alpha_decay)
        return np.full(truncation + 1, base)

    def c_array(self, truncation):
        """c_k for k = 0..N."""
        k = np.arange(truncation + 1)
        out = np.full(truncation + 1, self.eps ** self.c_stable_exponent)
        out[np.isin(k, CRITICAL_MODES)] = self.eps ** self.c_critical_exponent
        return out

    def c_array_full(self, truncation):
        """c_k for k = -N..N."""
        half = self.c_array(truncation)
        return np.concatenate([half[:0:-1], half])


class WienerLattice:
    """Per-mode complex Wiener values W(k, t) for k = 0..N.

    Advanced in place; negative modes are defined by conjugation.
    """

    def __init__(self, truncation, seed, path=0):
        self.truncation = int(truncation)
        self.t = 0.0
        self.w = np.zeros(self.truncation + 1, dtype=complex)
        self._draws = _ModeDraws(seed, path, self.truncation + 1, _PURPOSE_WIENER)

    def prefetch(self, nsteps):
        self._draws.prefetch(nsteps)

    def advance(self, h):
        if h < 0:
            raise ConfigurationError("time step must be >= 0")
        if h == 0:
            return self
        g = self._draws.next_step()
        dw = _standard_complex(g) * np.sqrt(h)
        self.w = self.w + dw
        self.t += h
        return self

    def value(self, k):
        if k >= 0:
            return complex(self.w[k])
        return complex(np.conj(self.w[-k]))

    def field(self) -> SpectralField:
        return SpectralField(_mirror(self.w), self.truncation)


class OULattice:
    """Exactly-updated damped mode processes Z(k, t), k = 0..N, Z(k, 0) = 0.

    ``z`` holds the physical-scale values; ``znorm_array`` divides by c_k.
    One path is advanced strictly sequentially; distinct paths own distinct
    keyed streams and may run concurrently.
    """

    def __init__(self, truncation, seed, path=0):
        self.truncation = int(truncation)
        self.t = 0.0
        self.z = np.zeros(self.truncation + 1, dtype=complex)
        self._lam = symbol_lambda(np.arange(self.truncation + 1))
        self._draws = _ModeDraws(seed, path, self.truncation + 1, _PURPOSE_OU)

    def prefetch(self, nsteps):
        self._draws.prefetch(nsteps)

    def advance(self, scaling: NoiseScaling, h):
        if h < 0:
            raise ConfigurationError("time step must be >= 0")
        if h == 0:
            return self
        g = self._draws.next_step()
        gc = _standard_complex(g)
        lam = self._lam
        decay = np.exp(lam * h)
        denom = np.where(lam < 0.0, 2.0 * lam, 1.0)
        sig2 = np.where(lam < 0.0, np.expm1(2.0 * lam * h) / denom, h)
        alpha = scaling.alpha_array(self.truncation)
        self.z = decay * self.z + alpha * np.sqrt(sig2) * gc
        self.t += h
        return self

    def value(self, k):
        if k >= 0:
            return complex(self.z[k])
        return complex(np.conj(self.z[-k]))

    def field_array(self):
        """Physical-scale coefficients over k = -N..N."""
        return _mirror(self.z)

    def field(self) -> SpectralField:
        return SpectralField(self.field_array(), self.truncation)

    def znorm_array(self, scaling: NoiseScaling):
        """Rescaled values Z(k,t)/c_k over k = -N..N."""
        return self.field_array() / scaling.c_array_full(self.truncation)


def _mirror(half):
    """Extend (c_0..c_N) to the full Hermitian vector (c_{-N}..c_N)."""
    return np.concatenate([np.conj(half[:0:-1]), half])


def advance_wiener(state: WienerLattice, h) -> WienerLattice:
    """Advance all Wiener modes by one increment of variance h (in place)."""
    return state.advance(h)


def advance_ou(state: OULattice, scaling: NoiseScaling, h) -> OULattice:
    """Advance all damped-mode processes by the exact update (in place)."""
    return state.advance(scaling, h)


def ou_second_moment(k, t, scaling: NoiseScaling) -> float:
    """Closed-form E|Z(k,t)|^2 under the variance convention above."""
    if t < 0:
        raise ConfigurationError("time must be >= 0")
    a = scaling.alpha(k)
    lam = symbol_lambda(k)
    if lam == 0.0:
        return a * a * t
    return a * a * (-np.expm1(2.0 * lam * t)) / (2.0 * abs(lam))


def tail_bound(k, t, c, scaling: NoiseScaling) -> float:
    """Martingale-inequality bound on P(sup_{tau<=t} |Z(k,tau)| >= c), clipped at 1.

    alpha_k^2 / (2 |lambda(k)| c^2) for damped modes, alpha_k^2 t / c^2 at the
    critical modes.  An upper bound, typically far from tight.
    """
    if c <= 0:
        raise ValueError("threshold must be > 0")
    if t < 0:
        raise ConfigurationError("time must be >= 0")
    a = scaling.alpha(k)
    lam = symbol_lambda(k)
    if lam == 0.0:
        raw = a * a * t / (c * c)
    else:
        raw = a * a / (2.0 * abs(lam) * c * c)
    return float(min(1.0, raw))


class SlowNoiseSample(NamedTuple):
    """Rescaled noise values Z_k at the handful of modes the amplitude system sees.

    Negative modes are the conjugates: Z_{-k} = conj(Z_k).
    """

    z0: complex
    z1: complex
    z2: complex
    z3: complex
    z4: complex
    z6: complex

    @classmethod
    def zero(cls):
        return cls(0j, 0j, 0j, 0j, 0j, 0j)


@dataclass(frozen=True)
class NoiseHistory:
    """Recorded rescaled noise Z_k(t) on the fast sample grid of one path.

    ``znorm[i, truncation + k]`` is Z_k at fast time ``times[i]``.  The same
    realisation drives both the full solver and the amplitude system, which
    is what makes pathwise comparisons meaningful.
    """

    times: np.ndarray
    znorm: np.ndarray
    eps: float
    truncation: int

    def __post_init__(self):
        if self.znorm.shape != (self.times.size, 2 * self.truncation + 1):
            raise ConfigurationError("noise history shape mismatch")

    @property
    def cadence(self):
        if self.times.size < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    def sample(self, index) -> SlowNoiseSample:
        n = self.truncation
        row = self.znorm[index]
        return SlowNoiseSample(
            z0=complex(row[n]),
            z1=complex(row[n + 1]),
            z2=complex(row[n + 2]),
            z3=complex(row[n + 3]),
            z4=complex(row[n + 4]),
            z6=complex(row[n + 6]),
        )


def sample_slow_path(history: NoiseHistory, T) -> SlowNoiseSample:
    """Rescaled noise values at slow time T, i.e. at fast time T / eps^2.

    Uses the nearest recorded fast-grid point at or below T / eps^2 (the
    grids are aligned by construction, so no interpolation is involved).
    Raises if T lies beyond the recorded horizon.
    """
    fast_t = float(T) / history.eps**2
    t_end = float(history.times[-1])
    tol = 1e-9 * max(1.0, t_end)
    if fast_t > t_end + tol or fast_t < -tol:
        raise SequencingError(
            f"slow time T={T:g} maps to fast time {fast_t:g}, beyond the "
            f"recorded horizon {t_end:g}"
        )
    idx = int(np.searchsorted(history.times, fast_t + tol, side="right") - 1)
    idx = max(idx, 0)
    return history.sample(idx)
