"""Self-contained numerical kernels used by every physics module.

Bessel functions and their zeros, dense complex SVD / higher-order SVD,
Takagi (symmetric SVD) factorization, an adaptive embedded Runge-Kutta
propagator, and Fourier analysis of periodic signals.  All routines are pure
functions of their inputs and safe to call concurrently.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ResolutionError, StiffnessError

MAX_BESSEL_ORDER = 200
MAX_BESSEL_ARGUMENT = 1000.0


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x).

    Uses the power series for small arguments and Miller's downward
    recurrence normalized by the even-order sum rule otherwise.  Absolute
    error is below 1e-12 on the supported domain.
    """
    n = int(n)
    if abs(n) > MAX_BESSEL_ORDER:
        raise DomainError(f"Bessel order |n|={abs(n)} exceeds {MAX_BESSEL_ORDER}")
    if not np.isfinite(x) or abs(x) > MAX_BESSEL_ARGUMENT:
        raise DomainError(f"Bessel argument |x|={abs(x)} exceeds {MAX_BESSEL_ARGUMENT}")
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < 2.0:
        return sign * _bessel_series(n, x)
    return sign * _bessel_miller(n, x)


def _bessel_series(n: int, x: float) -> float:
    half = 0.5 * x
    try:
        term = half**n / math.factorial(n)
    except OverflowError:
        return 0.0
    if term == 0.0:
        return 0.0
    total = term
    q = -(half * half)
    for k in range(1, 400):
        term *= q / (k * (n + k))
        total += term
        if abs(term) <= 1e-18 * abs(total) + 1e-300:
            break
    return total


def _bessel_miller(n: int, x: float) -> float:
    top = max(n, int(x))
    m = top + 52 + int(11.0 * top ** (1.0 / 3.0))
    if m % 2:
        m += 1
    j_up = 0.0
    j_cur = 1e-30
    norm = 2.0 * j_cur  # m is even; seed participates in the sum rule
    captured = j_cur if n == m else 0.0
    for k in range(m, 0, -1):
        j_down = (2.0 * k / x) * j_cur - j_up
        j_up = j_cur
        j_cur = j_down
        order = k - 1
        if order == n:
            captured = j_cur
        if order == 0:
            norm += j_cur
        elif order % 2 == 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_up *= 1e-250
            norm *= 1e-250
            captured *= 1e-250
    return captured / norm


def bessel_j0_zero(k: int) -> float:
    """k-th positive root of J_0 (1-based), to absolute error below 1e-12."""
    k = int(k)
    if not 1 <= k <= 20:
        raise DomainError(f"J0 zero index {k} outside [1, 20]")
    guess = (k - 0.25) * math.pi
    lo, hi = guess - 0.5, guess + 0.5
    flo, fhi = bessel_j(0, lo), bessel_j(0, hi)
    if flo * fhi > 0:
        raise DomainError(f"failed to bracket J0 zero #{k}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = bessel_j(0, mid)
        if flo * fmid <= 0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition m = U diag(s) Vh.

    Returns (s, U, Vh) with the singular values sorted descending.  Only the
    values are contractually ordered; degenerate subspaces are free.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DomainError("svd expects a matrix")
    if not np.all(np.isfinite(m.view(float))):
        raise DomainError("svd input contains non-finite entries")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return s, u, vh


def _unfold(t: np.ndarray, axis: int) -> np.ndarray:
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1))


def hosvd(t: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Higher-order SVD of a complex tensor of order 2..5.

    Returns the all-orthogonal core tensor and one unitary factor matrix per
    axis, computed from the SVD of each mode unfolding, such that
    t = core x_1 U[0] ... x_M U[M-1].
    """
    t = np.asarray(t, dtype=complex)
    if not 2 <= t.ndim <= 5:
        raise DomainError(f"hosvd supports orders 2..5, got {t.ndim}")
    if not np.all(np.isfinite(t.view(float))):
        raise DomainError("hosvd input contains non-finite entries")
    factors = []
    for axis in range(t.ndim):
        u, _, _ = np.linalg.svd(_unfold(t, axis), full_matrices=True)
        factors.append(u)
    core = t
    for axis, u in enumerate(factors):
        core = np.moveaxis(np.tensordot(u.conj().T, core, axes=(1, axis)), 0, axis)
    return core, factors


def hosvd_reconstruct(core: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    """Invert :func:`hosvd`: apply the factor matrices to the core tensor."""
    t = np.asarray(core, dtype=complex)
    for axis, u in enumerate(factors):
        t = np.moveaxis(np.tensordot(u, t, axes=(1, axis)), 0, axis)
    return t


def takagi(m: np.ndarray, sym_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization m = U diag(s) U^T of a complex symmetric matrix.

    Returns (s, U) with s real non-negative descending and U unitary.
    Degenerate singular values are handled by jointly diagonalizing the
    symmetric unitary coupling block with a real orthogonal transform.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError("takagi expects a square matrix")
    scale = np.max(np.abs(m)) or 1.0
    if np.max(np.abs(m - m.T)) > sym_tol * scale:
        raise DomainError("takagi input is not symmetric")
    m = 0.5 * (m + m.T)
    w, s, vh = np.linalg.svd(m)
    v = vh.conj().T
    z = w.conj().T @ v.conj()
    u = np.zeros_like(w)
    groups = _cluster(s, 1e-8 * (s[0] if s.size and s[0] > 0 else 1.0))
    for idx in groups:
        zb = z[np.ix_(idx, idx)]
        zb = 0.5 * (zb + zb.T)
        f, phases = _symmetric_unitary_factor(zb)
        u[:, idx] = w[:, idx] @ f @ np.diag(np.exp(0.5j * phases))
    return s, u


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and abs(values[groups[-1][-1]] - v) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _symmetric_unitary_factor(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose a symmetric unitary as z = F diag(e^{i phases}) F^T, F real."""
    x, y = z.real, z.imag
    # x and y are commuting real symmetric matrices; diagonalize jointly.
    _, f = np.linalg.eigh(x)
    d = f.T @ x @ f
    groups = _cluster(-np.diag(d), 1e-10)
    for idx in groups:
        if len(idx) > 1:
            sub = f[:, idx]
            _, g = np.linalg.eigh(sub.T @ y @ sub)
            f[:, idx] = sub @ g
    phases = np.angle(np.diag(f.T @ z @ f))
    return f, phases


# Dormand-Prince 5(4) coefficients (FSAL form).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def ode_propagate(
    deriv: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t0: float,
    t1: float,
    rtol: float = 1e-9,
    atol: float = 1e-14,
    max_steps: int = 10_000_000,
    t_eval: Sequence[float] | None = None,
):
    """Propagate dy/dt = deriv(t, y) from t0 to t1 with an embedded RK 5(4) pair.

    Local error is controlled against atol + rtol * |y| per component.  The
    state may be any complex or real ndarray.  Returns the state at t1, or
    (if t_eval is given) the list of states at those times, which must be
    increasing within [t0, t1].  Raises StiffnessError on step underflow.
    """
    if rtol < 1e-12:
        raise DomainError("rtol below 1e-12 is not supported")
    if t1 < t0:
        raise DomainError("t1 must be >= t0")
    y = np.array(y0, dtype=complex)
    if t1 == t0:
        return [y.copy() for _ in t_eval] if t_eval is not None else y

    eval_times = None if t_eval is None else list(t_eval)
    if eval_times is not None:
        for te in eval_times:
            if te < t0 - 1e-12 * abs(t1 - t0) or te > t1 + 1e-12 * abs(t1 - t0):
                raise DomainError("t_eval times must lie inside [t0, t1]")
    outputs: list[np.ndarray] = []
    next_eval = 0

    t = t0
    span = t1 - t0
    k = [None] * 7
    k[0] = np.asarray(deriv(t, y), dtype=complex)
    # Initial step from the scale of y and its derivative.
    scale0 = atol + rtol * np.max(np.abs(y)) if y.size else atol
    d0 = np.max(np.abs(k[0])) if y.size else 0.0
    h = min(span, 0.01 * scale0 / d0) if d0 > 0 else span * 1e-3
    h = max(h, span * 1e-10)
    err_prev = 1.0
    steps = 0

    while t < t1:
        if steps >= max_steps:
            raise StiffnessError(f"step budget exhausted at t={t!r}", t=t, step=h)
        if h < 16 * np.finfo(float).eps * max(abs(t), abs(span)):
            raise StiffnessError(
                f"step size underflow at t={t!r} (h={h!r}); problem looks stiff",
                t=t,
                step=h,
            )
        h = min(h, t1 - t)
        hit_eval = None
        if eval_times is not None and next_eval < len(eval_times):
            te = eval_times[next_eval]
            if t < te <= t + h:
                h = te - t
                hit_eval = te
            elif te <= t:
                # Sample time coincides with the current point.
                outputs.append(y.copy())
                next_eval += 1
                continue
        for i in range(1, 7):
            yi = y
            for j, a in enumerate(_DP_A[i]):
                yi = yi + (h * a) * k[j]
            k[i] = np.asarray(deriv(t + _DP_C[i] * h, yi), dtype=complex)
        y5 = y
        for j in range(7):
            if _DP_B5[j]:
                y5 = y5 + (h * _DP_B5[j]) * k[j]
        err_vec = np.zeros_like(y)
        for j in range(7):
            db = _DP_B5[j] - _DP_B4[j]
            if db:
                err_vec = err_vec + (h * db) * k[j]
        tol = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(err_vec) / tol
        err = float(np.sqrt(np.mean(np.square(ratio)))) if y.size else 0.0
        steps += 1
        if err <= 1.0:
            t = t + h if hit_eval is None else hit_eval
            y = y5
            k[0] = k[6]  # FSAL
            if hit_eval is not None:
                outputs.append(y.copy())
                next_eval += 1
            factor = 0.9 * (err + 1e-16) ** -0.2 * (err_prev + 1e-16) ** 0.04
            err_prev = max(err, 1e-16)
        else:
            # Reject: k[0] still holds deriv(t, y); retry with a smaller step.
            factor = max(0.2, 0.9 * err**-0.2)
        h *= min(5.0, max(0.2, factor))

    if eval_times is not None:
        while next_eval < len(eval_times):
            outputs.append(y.copy())
            next_eval += 1
        return outputs
    return y


def periodic_fourier_harmonics(samples: np.ndarray, n_max: int) -> np.ndarray:
    """Fourier coefficients c_n of a uniformly sampled periodic signal.

    The signal is expanded as f(t) = sum_n c_n exp(-i n Omega t); the
    returned array holds c_n for n = -n_max..n_max.  The periodic trapezoid
    rule is spectrally accurate for smooth signals.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1:
        raise DomainError("expected a 1-d array of samples")
    m = samples.size
    if m < 4 * n_max:
        raise ResolutionError(
            f"{m} samples cannot resolve harmonics up to n_max={n_max}; need >= {4 * n_max}"
        )
    coeffs = np.fft.ifft(samples)
    return np.array([coeffs[n % m] for n in range(-n_max, n_max + 1)])


def harmonic_index(n: int, n_max: int) -> int:
    """Index of harmonic n inside an array ordered n = -n_max..n_max."""
    if abs(n) > n_max:
        raise DomainError(f"harmonic {n} outside window |n| <= {n_max}")
    return n + n_max
