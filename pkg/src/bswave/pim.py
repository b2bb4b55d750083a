"""Precise integration of the undamped semi-discrete system.

The system ``M u'' + K u = e_f g(t)`` is lifted to ``z' = H z + F(t)`` with
``z = [u; u']``, ``H = [[0, I], [-M^-1 K, 0]]`` and ``F = [0; M^-1 e_f g(t)]``.
Steps use the exact propagator ``T = exp(H tau)`` plus the closed-form
Duhamel term for harmonic loads, so a step is exact (to the accuracy of
``T``) regardless of its length as long as the load is a fixed sum of
harmonics over the whole step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .record import Snapshot, WaveRecord

__all__ = [
    "NumericalError",
    "ResonanceError",
    "DivergenceError",
    "StateSystem",
    "Propagator",
    "HarmonicSegment",
    "build_state",
    "precise_expm",
    "duhamel_coeffs",
    "step_harmonic",
    "simulate",
    "energy",
    "newmark",
]

RESONANCE_COND = 1e12


class NumericalError(ArithmeticError):
    pass


class ResonanceError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


@dataclass(frozen=True)
class StateSystem:
    """First-order form of ``M u'' + K u = e_f g(t)``.

    ``load`` is the lower half of the state force for a unit ``g``.
    """

    M: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    load: np.ndarray = field(repr=False)
    force_dof: int = 0

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def force_vector(self, amplitude: float = 1.0) -> np.ndarray:
        out = np.zeros(2 * self.n)
        out[self.n :] = amplitude * self.load
        return out


def build_state(M, K, force_dof: int = 0) -> StateSystem:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = M.shape[0]
    try:
        cho = la.cho_factor(M)
    except la.LinAlgError as exc:
        raise NumericalError("mass matrix is not positive definite") from exc
    e = np.zeros(n)
    e[force_dof] = 1.0
    A = la.cho_solve(cho, K)
    H = np.zeros((2 * n, 2 * n))
    H[:n, n:] = np.eye(n)
    H[n:, :n] = -A
    return StateSystem(M=M, K=K, H=H, load=la.cho_solve(cho, e), force_dof=force_dof)


@dataclass(frozen=True)
class Propagator:
    tau: float
    N: int
    T: np.ndarray = field(repr=False)

    @property
    def two_pow_N(self) -> int:
        return 2**self.N


def precise_expm(H, tau: float, N: int = 20) -> Propagator:
    """``exp(H tau)`` by 2**N-fold squaring of a 4th-order Taylor increment.

    Only the increment ``T_a = exp(H dt) - I`` is squared, ``T_a <- 2 T_a +
    T_a T_a``; the identity is added once at the end.
    """
    if not tau > 0:
        raise ValueError(f"time step must be positive, got {tau}")
    if not 1 <= N <= 40:
        raise ValueError(f"squaring exponent must lie in [1, 40], got {N}")
    H = np.atleast_2d(np.asarray(H, dtype=float))
    dt = tau / 2.0**N
    Hd = H * dt
    # Overflow is reported below as a NumericalError, not as a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        Hd2 = Hd @ Hd
        Ta = Hd + 0.5 * Hd2 @ (np.eye(H.shape[0]) + Hd / 3.0 + Hd2 / 12.0)
        for _ in range(N):
            Ta = 2.0 * Ta + Ta @ Ta
    if not np.all(np.isfinite(Ta)):
        raise NumericalError(f"non-finite propagator, ||H dt||_1 = {np.linalg.norm(Hd, 1):.3e}")
    return Propagator(tau=float(tau), N=N, T=np.eye(H.shape[0]) + Ta)


@dataclass(frozen=True)
class HarmonicSegment:
    """Load ``r1 sin(omega t) + r2 cos(omega t)`` active on ``[t_on, t_off]``.

    ``r1`` and ``r2`` are state-space vectors, or scalar force amplitudes to be
    lifted by :meth:`lift`.
    """

    r1: object
    r2: object
    omega: float
    t_on: float
    t_off: float

    def __post_init__(self):
        if not self.t_on < self.t_off:
            raise ValueError(f"segment window must satisfy t_on < t_off, got [{self.t_on}, {self.t_off}]")

    def lift(self, sys: StateSystem) -> "HarmonicSegment":
        if np.ndim(self.r1) == 0 and np.ndim(self.r2) == 0:
            return HarmonicSegment(
                sys.force_vector(float(self.r1)), sys.force_vector(float(self.r2)), self.omega, self.t_on, self.t_off
            )
        return self

    def scaled(self, factor: float) -> "HarmonicSegment":
        return HarmonicSegment(
            np.multiply(self.r1, factor), np.multiply(self.r2, factor), self.omega, self.t_on, self.t_off
        )


def _solve_shifted(H: np.ndarray, omega: float):
    H = np.atleast_2d(H)
    S = omega**2 * np.eye(H.shape[0]) + H @ H
    lu, piv, info = lapack.dgetrf(S)
    anorm = np.linalg.norm(S, 1)
    if info > 0:
        raise ResonanceError(f"omega = {omega} rad/s hits a natural frequency (singular omega^2 I + H^2)")
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    if rcond == 0.0 or 1.0 / rcond > RESONANCE_COND:
        raise ResonanceError(f"omega = {omega} rad/s is at or near resonance (cond ~ {1.0 / max(rcond, 1e-300):.2e})")
    return lu, piv


def duhamel_coeffs(H, omega: float, r1, r2):
    """Particular-solution coefficients; ``z_p(t) = -C1 sin(wt) - C2 cos(wt)``."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    r1 = np.asarray(r1, dtype=float).reshape(-1)
    r2 = np.asarray(r2, dtype=float).reshape(-1)
    lu, piv = _solve_shifted(H, omega)
    rhs = np.column_stack([H @ r1 - omega * r2, H @ r2 + omega * r1])
    sol, info = lapack.dgetrs(lu, piv, rhs)
    return sol[:, 0].copy(), sol[:, 1].copy()


def _particular(coeffs, t: float) -> np.ndarray:
    # Sum of C1 sin(wt) + C2 cos(wt) over active segments.
    out = 0.0
    for omega, C1, C2 in coeffs:
        out = out + C1 * np.sin(omega * t) + C2 * np.cos(omega * t)
    return out


def step_harmonic(prop: Propagator, H, seg: HarmonicSegment | Sequence[HarmonicSegment], z_k, t_k: float, coeffs=None):
    """One exact step from ``t_k`` to ``t_k + tau`` under harmonic load(s)."""
    segs = [seg] if isinstance(seg, HarmonicSegment) else list(seg)
    if coeffs is None:
        coeffs = [(s.omega, *duhamel_coeffs(H, s.omega, s.r1, s.r2)) for s in segs]
    z_k = np.asarray(z_k, dtype=float)
    if not coeffs:
        return prop.T @ z_k
    t1 = t_k + prop.tau
    return prop.T @ (z_k + _particular(coeffs, t_k)) - _particular(coeffs, t1)


def energy(M, K, z) -> float:
    n = M.shape[0]
    u, v = z[:n], z[n:]
    return 0.5 * float(v @ M @ v) + 0.5 * float(u @ K @ u)


def _step_index(t: float, tau: float, what: str, tol: float = 1e-6) -> int:
    k = round(t / tau)
    if abs(k * tau - t) > tol * tau:
        raise ValueError(f"{what} t={t} is not a multiple of the step {tau}")
    return k


def _merge_coeffs(H, segs: Sequence[HarmonicSegment]):
    """Duhamel coefficients per distinct frequency (one factorization each)."""
    by_omega: dict[float, list] = {}
    for s in segs:
        by_omega.setdefault(s.omega, []).append(s)
    out = []
    for omega, group in by_omega.items():
        r1 = sum(np.asarray(s.r1, dtype=float) for s in group)
        r2 = sum(np.asarray(s.r2, dtype=float) for s in group)
        out.append((omega, *duhamel_coeffs(H, omega, r1, r2)))
    return out


def simulate(
    sys: StateSystem,
    prop: Propagator,
    schedule: Iterable[HarmonicSegment],
    t_end: float,
    sensors: dict[str, int] | None = None,
    snapshot_times: Sequence[float] = (),
    snapshot_fields: dict[str, tuple] | None = None,
    z0=None,
    energy_trace: bool = False,
) -> WaveRecord:
    """Step ``z <- T z (+ Duhamel terms)`` from 0 to ``t_end``.

    ``sensors`` maps labels to displacement DOF indices.  ``snapshot_fields``
    maps a label to ``(dofs, x)``: the displacement DOFs stored at each
    snapshot time and their coordinates (default: every DOF as ``"u"``).
    Segment boundaries and snapshot times must fall on steps.
    """
    tau = prop.tau
    n_steps = _step_index(t_end, tau, "end time")
    segs = [s.lift(sys) for s in schedule]
    spans = [(_step_index(s.t_on, tau, "segment start"), _step_index(s.t_off, tau, "segment end"), s) for s in segs]
    # Group steps by the set of active segments so coefficients are reused.
    cache: dict[tuple, list] = {}

    def coeffs_for(k: int):
        key = tuple(i for i, (a, b, _) in enumerate(spans) if a <= k < b)
        if key not in cache:
            cache[key] = _merge_coeffs(sys.H, [spans[i][2] for i in key])
        return cache[key]

    sensors = dict(sensors or {})
    snap_steps = {_step_index(t, tau, "snapshot time"): t for t in snapshot_times}
    if snapshot_fields is None:
        snapshot_fields = {"u": (np.arange(sys.n), np.arange(sys.n, dtype=float))}
    fields = {lab: (np.asarray(d, dtype=int), np.asarray(x, dtype=float)) for lab, (d, x) in snapshot_fields.items()}

    z = np.zeros(2 * sys.n) if z0 is None else np.array(z0, dtype=float)
    sens_idx = np.array(list(sensors.values()), dtype=int)
    hist = np.empty((n_steps + 1, len(sens_idx)))
    energies = np.empty(n_steps + 1) if energy_trace else None
    snaps = []
    T = prop.T
    for k in range(n_steps + 1):
        hist[k] = z[sens_idx]
        if energy_trace:
            energies[k] = energy(sys.M, sys.K, z)
        if k in snap_steps:
            for lab, (d, x) in fields.items():
                snaps.append(Snapshot(time=k * tau, x=x, values=z[d].copy(), label=lab))
        if k == n_steps:
            break
        c = coeffs_for(k)
        if c:
            t_k = k * tau
            z = T @ (z + _particular(c, t_k)) - _particular(c, t_k + tau)
        else:
            z = T @ z
        if not np.all(np.isfinite(z)):
            raise DivergenceError(f"non-finite state at step {k + 1}")
    series = {lab: hist[:, i].copy() for i, lab in enumerate(sensors)}
    return WaveRecord(dt=tau, series=series, snapshots=snaps, energy=energies, final_state=z)


def newmark(
    M,
    K,
    force: Callable[[float], np.ndarray],
    dt: float,
    n_steps: int,
    u0=None,
    v0=None,
    beta: float = 0.25,
    gamma: float = 0.5,
    record_dofs: Sequence[int] | None = None,
):
    """Newmark-beta trajectory; returns ``(t, u)`` with ``u`` over ``record_dofs``.

    Defaults to the average-acceleration variant.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = M.shape[0]
    u = np.zeros(n) if u0 is None else np.array(u0, dtype=float)
    v = np.zeros(n) if v0 is None else np.array(v0, dtype=float)
    idx = np.arange(n) if record_dofs is None else np.asarray(record_dofs, dtype=int)
    try:
        m_fac = la.cho_factor(M)
        a = la.cho_solve(m_fac, force(0.0) - K @ u)
        k_eff = la.cho_factor(K + M / (beta * dt**2))
    except la.LinAlgError as exc:
        raise NumericalError("Newmark factorization failed") from exc
    c0 = 1.0 / (beta * dt**2)
    c1 = 1.0 / (beta * dt)
    c2 = 1.0 / (2.0 * beta) - 1.0
    out = np.empty((n_steps + 1, len(idx)))
    out[0] = u[idx]
    for k in range(1, n_steps + 1):
        t = k * dt
        rhs = force(t) + M @ (c0 * u + c1 * v + c2 * a)
        u_new = la.cho_solve(k_eff, rhs)
        a_new = c0 * (u_new - u) - c1 * v - c2 * a
        v = v + dt * ((1.0 - gamma) * a + gamma * a_new)
        u, a = u_new, a_new
        out[k] = u[idx]
    return np.arange(n_steps + 1) * dt, out
