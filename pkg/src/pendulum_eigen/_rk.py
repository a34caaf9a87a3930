"""Dormand-Prince 5(4) integrator with dense output.

The state may carry a trailing batch axis: ``y`` of shape ``(m,)`` or
``(m, B)``.  All batch members share one step sequence, the step being
controlled by the worst member, which lets a whole lambda scan advance in
a single vectorized sweep.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights (7 stages, FSAL)
E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920,
              17253 / 339200, -22 / 525, 1 / 40])
# continuous extension, y(x0 + t h) = y0 + h * sum_j (K^T P)[:, j] t^(j+1)
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423,
     69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@dataclass
class RKSolution:
    x: np.ndarray           # accepted step points (or empty if not recorded)
    y: np.ndarray           # states at x, shape (len(x), *y0.shape)
    x_end: float
    y_end: np.ndarray
    dense: np.ndarray       # states at requested dense points
    n_steps: int
    n_rejected: int


def _error_ratio(err, y, y_new, rtol, atol, vector_norm):
    if vector_norm:
        mag = np.maximum(np.max(np.abs(y), axis=0), np.max(np.abs(y_new), axis=0))
        scale = atol + rtol * mag
    else:
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    r = np.sqrt(np.mean((err / scale) ** 2, axis=0))
    return float(np.max(r))


def _initial_step(fun, x0, y0, f0, direction, rtol, atol, vector_norm):
    def rms(v, ref):
        if vector_norm:
            scale = atol + rtol * np.max(np.abs(ref), axis=0)
        else:
            scale = atol + rtol * np.abs(ref)
        return float(np.max(np.sqrt(np.mean((v / scale) ** 2, axis=0))))

    d0 = rms(y0, y0)
    d1 = rms(f0, y0)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = fun(x0 + direction * h0, y1)
    d2 = rms(f1 - f0, y0) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri54(fun, x0, x1, y0, *, rtol=1e-10, atol=1e-12, h_max=np.inf,
            dense_x=None, record=False, vector_norm=False, max_steps=1_000_000):
    """Integrate ``y' = fun(x, y)`` from ``x0`` to ``x1`` (either direction).

    ``dense_x`` must be ordered along the direction of integration and lie
    inside ``[x0, x1]``; the returned ``dense`` array holds the interpolated
    states there.
    """
    y = np.array(y0, dtype=float)
    x = float(x0)
    x1 = float(x1)
    direction = 1.0 if x1 >= x else -1.0
    span = abs(x1 - x)

    if dense_x is None:
        dense_x = np.empty(0)
    dense_x = np.asarray(dense_x, dtype=float)
    dense = np.empty((len(dense_x),) + y.shape)
    di = 0
    while di < len(dense_x) and direction * (dense_x[di] - x) <= 0:
        dense[di] = y
        di += 1

    xs = [x] if record else []
    ys = [y.copy()] if record else []
    if span == 0.0:
        dense[di:] = y
        return RKSolution(np.array(xs), np.array(ys), x, y, dense, 0, 0)

    f = fun(x, y)
    h = min(_initial_step(fun, x, y, f, direction, rtol, atol, vector_norm),
            h_max, span)
    K = np.empty((7,) + y.shape)
    n_steps = n_rej = 0
    err_exp = -1.0 / 5.0

    while direction * (x1 - x) > 0:
        if n_steps >= max_steps:
            raise IntegrationError("maximum number of steps exceeded", x)
        min_h = 10 * np.spacing(max(abs(x), 1.0))
        rejected = False
        while True:
            if h < min_h:
                raise IntegrationError("step size underflow", x)
            remaining = abs(x1 - x)
            if h >= remaining:
                h = remaining
                x_new = x1
            else:
                x_new = x + direction * h
            hs = direction * h
            K[0] = f
            for s in range(1, 6):
                dy = np.tensordot(A[s], K[:s], axes=(0, 0)) * hs
                K[s] = fun(x + C[s] * hs, y + dy)
            y_new = y + hs * np.tensordot(B, K[:6], axes=(0, 0))
            f_new = fun(x_new, y_new)
            K[6] = f_new
            err = hs * np.tensordot(E, K, axes=(0, 0))
            ratio = _error_ratio(err, y, y_new, rtol, atol, vector_norm)
            if not np.isfinite(ratio):
                h *= MIN_FACTOR
                rejected = True
                n_rej += 1
                continue
            if ratio <= 1.0:
                if ratio == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * ratio ** err_exp)
                if rejected:
                    factor = min(1.0, factor)
                h_next = min(h * factor, h_max)
                break
            h *= max(MIN_FACTOR, SAFETY * ratio ** err_exp)
            rejected = True
            n_rej += 1

        if di < len(dense_x):
            Q = np.tensordot(P, K, axes=(0, 0))  # (4, *shape)
            while di < len(dense_x) and direction * (dense_x[di] - x_new) <= 0:
                t = (dense_x[di] - x) / hs
                powers = t ** np.arange(1, 5)
                dense[di] = y + hs * np.tensordot(powers, Q, axes=(0, 0))
                di += 1

        x, y, f = x_new, y_new, f_new
        h = h_next
        n_steps += 1
        if record:
            xs.append(x)
            ys.append(y.copy())

    dense[di:] = y
    return RKSolution(np.array(xs), np.array(ys), x, y, dense, n_steps, n_rej)
