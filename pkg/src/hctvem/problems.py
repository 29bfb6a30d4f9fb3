"""Manufactured solutions with homogeneous Dirichlet data on the unit
square."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ManufacturedSolution:
    name: str
    u: callable
    grad_u: callable
    lap_u: callable

    def f(self, x, y):
        return -self.lap_u(x, y)


def _sin_sin():
    pi = np.pi

    def u(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def grad_u(x, y):
        return np.stack([pi * np.cos(pi * x) * np.sin(pi * y),
                         pi * np.sin(pi * x) * np.cos(pi * y)], axis=-1)

    def lap_u(x, y):
        return -2.0 * pi ** 2 * np.sin(pi * x) * np.sin(pi * y)

    return ManufacturedSolution("sinsin", u, grad_u, lap_u)


def _bubble_poly():
    # x(1-x)y(1-y): polynomial case, reproduced exactly for k >= 4
    def u(x, y):
        return x * (1 - x) * y * (1 - y)

    def grad_u(x, y):
        return np.stack([(1 - 2 * x) * y * (1 - y),
                         x * (1 - x) * (1 - 2 * y)], axis=-1)

    def lap_u(x, y):
        return -2.0 * y * (1 - y) - 2.0 * x * (1 - x)

    return ManufacturedSolution("bubble4", u, grad_u, lap_u)


_REGISTRY = {s.name: s for s in (_sin_sin(), _bubble_poly())}


def get_solution(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown manufactured solution {name!r}; "
                       f"available: {sorted(_REGISTRY)}") from None
