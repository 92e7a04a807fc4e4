"""Uniform cubic spline bases shared by keyframe interpolation and line smoothing."""
import numpy as np


def catmull_rom_weights(u):
    """Weights of ``P[i-1], P[i], P[i+1], P[i+2]`` at local parameter ``u``."""
    u = np.asarray(u, dtype=float)
    u2, u3 = u * u, u * u * u
    return np.stack(
        [
            (-u3 + 2 * u2 - u) / 2,
            (3 * u3 - 5 * u2 + 2) / 2,
            (-3 * u3 + 4 * u2 + u) / 2,
            (u3 - u2) / 2,
        ],
        axis=-1,
    )


def bspline_weights(u):
    """Uniform cubic B-spline weights; at ``u = 0`` they are ``(1, 4, 1, 0) / 6``."""
    u = np.asarray(u, dtype=float)
    u2, u3 = u * u, u * u * u
    return np.stack(
        [
            (1 - u) ** 3 / 6,
            (3 * u3 - 6 * u2 + 4) / 6,
            (-3 * u3 + 3 * u2 + 3 * u + 1) / 6,
            u3 / 6,
        ],
        axis=-1,
    )


def catmull_rom(p0, p1, p2, p3, u):
    w = catmull_rom_weights(u)
    return w[..., 0] * p0 + w[..., 1] * p1 + w[..., 2] * p2 + w[..., 3] * p3
