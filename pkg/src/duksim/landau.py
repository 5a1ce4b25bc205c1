"""Coupled stochastic amplitude system for the two critical mode pairs.

The slow-time amplitudes (A1, A3) of the critical wavenumbers k = 1, 3 obey
a pair of coupled Landau-type equations forced by the rescaled noise values
Z_k; the linearly damped modes k = 2, 4, 6 are slaved, i.e. eliminated
algebraically by balancing their equations at leading order:

    A2 = -(2i Y1^2 + 4i Y3 conj(Y1)) / lambda(2)
    A4 = -8i Y3 Y1 / lambda(4)
    A6 = -6i Y3^2 / lambda(6),          Y_j = Z_j + A_j.

``rhs_amplitudes`` evaluates the drift through these slaved expressions (the
structurally simple route); ``rhs_amplitudes_expanded`` is an independent
transcription of the fully eliminated form and must agree to machine
precision - that agreement is an executable check on the elimination.

Because the forcing Z_k enters as a continuous path (not white noise), the
system is a random ODE and is integrated pathwise with Heun's method; no
Ito correction arises.  Negative-index amplitudes are the conjugates
A_{-j} = conj(A_j), so only positive indices are stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .noise import NoiseHistory, SlowNoiseSample, sample_slow_path
from .spectrum import SpectralField, symbol_lambda

LAMBDA_2 = symbol_lambda(2)
LAMBDA_4 = symbol_lambda(4)
LAMBDA_6 = symbol_lambda(6)

#: CSV header for exported amplitude trajectories (stable interface).
AMPLITUDE_CSV_HEADER = (
    "T,re_A1,im_A1,re_A3,im_A3,re_A2,im_A2,re_A4,im_A4,re_A6,im_A6"
)


def slaved_modes(a1, a3, zslow: SlowNoiseSample):
    """Amplitudes of the slaved modes k = 2, 4, 6 given (A1, A3) and the noise."""
    y1 = zslow.z1 + a1
    y3 = zslow.z3 + a3
    a2 = -(2j * y1 * y1 + 4j * y3 * np.conj(y1)) / LAMBDA_2
    a4 = -8j * y3 * y1 / LAMBDA_4
    a6 = -6j * y3 * y3 / LAMBDA_6
    return a2, a4, a6


def slaved_modes_rate(a1, a3, zslow: SlowNoiseSample, d1, d3):
    """Drift of the slaved amplitudes induced by (dA1/dT, dA3/dT) = (d1, d3).

    The noise arguments are held fixed: their time derivative is
    distributional and is deliberately excluded from the classical
    residual diagnostics that consume this rate.
    """
    y1 = zslow.z1 + a1
    y3 = zslow.z3 + a3
    d2 = -(4j * y1 * d1 + 4j * (d3 * np.conj(y1) + y3 * np.conj(d1))) / LAMBDA_2
    d4 = -8j * (d3 * y1 + y3 * d1) / LAMBDA_4
    d6 = -12j * y3 * d3 / LAMBDA_6
    return d2, d4, d6


def rhs_amplitudes(a1, a3, zslow: SlowNoiseSample):
    """Drift (dA1/dT, dA3/dT), evaluated through the slaved modes."""
    a2, a4, a6 = slaved_modes(a1, a3, zslow)
    y1 = zslow.z1 + a1
    y3 = zslow.z3 + a3
    ym1 = np.conj(y1)
    ym3 = np.conj(y3)
    y2 = zslow.z2 + a2
    y4 = zslow.z4 + a4
    y6 = zslow.z6 + a6
    ym2 = np.conj(y2)
    d1 = a1 + zslow.z1 + 2j * y2 * ym1 + 2j * zslow.z0 * y1 + 2j * y3 * ym2 + 2j * y4 * ym3
    d3 = a3 + zslow.z3 + 6j * y2 * y1 + 6j * zslow.z0 * y3 + 6j * y6 * ym3 + 6j * y4 * ym1
    return d1, d3


def rhs_amplitudes_expanded(a1, a3, zslow: SlowNoiseSample):
    """Drift in fully eliminated form (independent transcription, used as oracle)."""
    z0, z1, z2, z3, z4, z6 = zslow
    y1 = z1 + a1
    y3 = z3 + a3
    ym1 = np.conj(y1)
    ym3 = np.conj(y3)
    d1 = (
        a1
        + z1
        + 2j * (z2 - (2j * y1 * y1 + 4j * y3 * ym1) / LAMBDA_2) * ym1
        + 2j * z0 * y1
        + 2j * y3 * (np.conj(z2) - (-2j * ym1 * ym1 - 4j * ym3 * y1) / LAMBDA_2)
        + 2j * (z4 - 8j * y3 * y1 / LAMBDA_4) * ym3
    )
    d3 = (
        a3
        + z3
        + 6j * (z2 - (2j * y1 * y1 + 4j * y3 * ym1) / LAMBDA_2) * y1
        + 6j * z0 * y3
        + 6j * (z6 - 6j * y3 * y3 / LAMBDA_6) * ym3
        + 6j * (z4 - 8j * y3 * y1 / LAMBDA_4) * ym1
    )
    return d1, d3


@dataclass(frozen=True)
class AmplitudeState:
    """Slow-time state: the critical amplitudes plus the cached slaved modes."""

    T: float
    a1: complex
    a3: complex
    a2: complex
    a4: complex
    a6: complex

    @classmethod
    def from_unstable(cls, T, a1, a3, zslow: SlowNoiseSample):
        a2, a4, a6 = slaved_modes(a1, a3, zslow)
        return cls(float(T), complex(a1), complex(a3), a2, a4, a6)

    def amplitude(self, j):
        """A_j for j in {+-1, +-2, +-3, +-4, +-6} (conjugation for j < 0)."""
        table = {1: self.a1, 2: self.a2, 3: self.a3, 4: self.a4, 6: self.a6}
        if abs(j) not in table:
            raise ConfigurationError(f"no amplitude stored for mode {j}")
        val = table[abs(j)]
        return val if j > 0 else complex(np.conj(val))


def step_amplitudes(state: AmplitudeState, zpath: NoiseHistory, dT) -> AmplitudeState:
    """One Heun step with the noise treated as a continuous forcing path.

    Predictor uses the forcing at T, corrector averages the drift at
    (T, Z(T)) and (T + dT, predicted state, Z(T + dT)); the slaved cache is
    refreshed at the new time.
    """
    if dT <= 0:
        raise ConfigurationError("slow step must be > 0")
    z_now = sample_slow_path(zpath, state.T)
    z_next = sample_slow_path(zpath, state.T + dT)
    d1a, d3a = rhs_amplitudes(state.a1, state.a3, z_now)
    a1_pred = state.a1 + dT * d1a
    a3_pred = state.a3 + dT * d3a
    d1b, d3b = rhs_amplitudes(a1_pred, a3_pred, z_next)
    a1_new = state.a1 + 0.5 * dT * (d1a + d1b)
    a3_new = state.a3 + 0.5 * dT * (d3a + d3b)
    if not (math.isfinite(abs(a1_new)) and math.isfinite(abs(a3_new))):
        raise DivergenceError(1 if not math.isfinite(abs(a1_new)) else 3, state.T + dT,
                              a1_new if not math.isfinite(abs(a1_new)) else a3_new)
    return AmplitudeState.from_unstable(state.T + dT, a1_new, a3_new, z_next)


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Amplitudes on the slow sample grid, sharing a noise history with a full run."""

    T: np.ndarray
    a1: np.ndarray
    a3: np.ndarray
    a2: np.ndarray
    a4: np.ndarray
    a6: np.ndarray
    history: NoiseHistory

    def state(self, index) -> AmplitudeState:
        return AmplitudeState(
            float(self.T[index]),
            complex(self.a1[index]),
            complex(self.a3[index]),
            complex(self.a2[index]),
            complex(self.a4[index]),
            complex(self.a6[index]),
        )

    def to_csv_lines(self):
        yield AMPLITUDE_CSV_HEADER
        for i in range(self.T.size):
            vals = [self.T[i]]
            for arr in (self.a1, self.a3, self.a2, self.a4, self.a6):
                vals.extend([arr[i].real, arr[i].imag])
            yield ",".join(f"{v:.17g}" for v in vals)


def integrate_amplitudes(a1_init, a3_init, history: NoiseHistory) -> AmplitudeTrajectory:
    """Integrate the amplitude system over the recorded noise history.

    The slow grid is the recorded fast sample grid rescaled by eps^2, so the
    forcing needs no interpolation and the realisation is shared exactly
    with the full solver.
    """
    eps = history.eps
    nsamples = history.times.size
    if nsamples < 2:
        raise ConfigurationError("noise history must contain at least two samples")
    dT = eps * eps * history.cadence
    state = AmplitudeState.from_unstable(0.0, a1_init, a3_init, history.sample(0))
    out = {name: np.empty(nsamples, dtype=complex) for name in "a1 a3 a2 a4 a6".split()}
    T = np.empty(nsamples)
    for i in range(nsamples):
        if i > 0:
            state = step_amplitudes(state, history, dT)
        T[i] = i * dT
        out["a1"][i] = state.a1
        out["a3"][i] = state.a3
        out["a2"][i] = state.a2
        out["a4"][i] = state.a4
        out["a6"][i] = state.a6
    return AmplitudeTrajectory(T=T, history=history, **out)


def reconstruct_approximation(state: AmplitudeState, eps, order="first",
                              truncation=None) -> SpectralField:
    """Spectral field of the amplitude approximation at one slow time.

    order="first":  eps*A1 at k = +-1 and eps*A3 at k = +-3 only.
    order="second": additionally eps^2 * (A2, A4, A6) at k = +-2, +-4, +-6.
    """
    from .spectrum import DEFAULT_TRUNCATION

    n = DEFAULT_TRUNCATION if truncation is None else int(truncation)
    modes = {1: eps * state.a1, 3: eps * state.a3}
    if order == "second":
        e2 = eps * eps
        modes[2] = e2 * state.a2
        modes[4] = e2 * state.a4
        modes[6] = e2 * state.a6
    elif order != "first":
        raise ConfigurationError(f"unknown approximation order {order!r}")
    return SpectralField.from_modes(modes, n)
