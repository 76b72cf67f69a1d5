"""Independent reference values used by the tests."""
import numpy as np
from scipy.integrate import simpson


def exact_pl_gagliardo(grid, u, s):
    """Closed-form double integral of (u(x)-u(y))^2 |x-y|^(-1-2s) over the
    line for the zero-extended piecewise-linear interpolant of ``u``.

    With u'' = sum_i c_i delta(x - x_i), integrating by parts twice in each
    variable gives sum_ij c_i c_j |x_i - x_j|^(3-2s) times
    2 / (2s (1-2s) (2-2s) (3-2s)). Valid for s != 1/2.
    """
    full = np.concatenate(([0.0], np.asarray(u, float), [0.0]))
    xs = np.concatenate(([-grid.half_width], grid.nodes, [grid.half_width]))
    slope = np.diff(full) / grid.h
    c = np.concatenate(([slope[0]], np.diff(slope), [-slope[-1]]))
    dist = np.abs(xs[:, None] - xs[None, :]) ** (3.0 - 2.0 * s)
    return float(c @ dist @ c) * 2.0 / (2 * s * (1 - 2 * s) * (2 - 2 * s) * (3 - 2 * s))


def origin_F_reciprocal(t, alpha, beta, a, W=4000.0, step=0.005):
    """F(t) for f = x^alpha (a + sin(x^-beta)), beta = 1, via the substitution
    w = 1/x: int_{1/t}^inf w^(-alpha-2) sin(w) dw, Simpson's rule up to W and
    a three-term integration-by-parts tail beyond W."""
    assert beta == 1.0
    k = alpha + 2.0
    w = np.arange(1.0 / t, W + step / 2, step)
    body = simpson(w ** -k * np.sin(w), x=w)
    Wend = w[-1]
    tail = (np.cos(Wend) * Wend ** -k - k * np.sin(Wend) * Wend ** (-k - 1)
            - k * (k + 1) * np.cos(Wend) * Wend ** (-k - 2))
    return a * t ** (alpha + 1) / (alpha + 1) + body + tail
