"""Black-box vectorized maps between coordinate spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BatchFn = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    pass


def _everywhere(x: np.ndarray) -> np.ndarray:
    return np.ones(x.shape[0], dtype=bool)


@dataclass(frozen=True)
class FunctionHandle:
    """A deterministic map R^dim_in -> R^dim_out evaluated on batches.

    ``func`` receives an ``(n, dim_in)`` array and returns ``(n, dim_out)``.
    ``domain`` maps the same batch to a boolean mask of open-domain membership.
    """

    dim_in: int
    dim_out: int
    func: BatchFn
    domain: BatchFn = field(default=_everywhere)
    label: str = "f"

    def _batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x.reshape(-1, self.dim_in) if self.dim_in > 1 or x.size == 1 else x.reshape(-1, 1)
        if x.shape[1] != self.dim_in:
            raise ValueError(f"{self.label}: expected points of dimension {self.dim_in}, got {x.shape[1]}")
        return x

    def in_domain(self, x) -> np.ndarray:
        x = self._batch(x)
        with np.errstate(all="ignore"):
            return np.asarray(self.domain(x), dtype=bool).reshape(x.shape[0])

    def eval(self, x) -> np.ndarray:
        x = self._batch(x)
        with np.errstate(all="ignore"):
            y = np.asarray(self.func(x), dtype=float)
        return y.reshape(x.shape[0], self.dim_out)

    def __call__(self, x) -> np.ndarray:
        """Evaluate at one point; returns a vector of length dim_out."""
        x = np.asarray(x, dtype=float).reshape(1, self.dim_in)
        if not self.in_domain(x)[0]:
            raise DomainError(f"{self.label}: point {x[0].tolist()} outside the domain")
        return self.eval(x)[0]

    def relabel(self, label: str) -> FunctionHandle:
        return FunctionHandle(self.dim_in, self.dim_out, self.func, self.domain, label)


def scalar_map(fn: Callable[[np.ndarray], np.ndarray], label: str,
               domain: Callable[[np.ndarray], np.ndarray] | None = None) -> FunctionHandle:
    """Lift an elementwise real function to a 1 -> 1 handle."""

    def func(x: np.ndarray) -> np.ndarray:
        return np.asarray(fn(x[:, 0]), dtype=float).reshape(-1, 1)

    if domain is None:
        return FunctionHandle(1, 1, func, label=label)

    def dom(x: np.ndarray) -> np.ndarray:
        return np.asarray(domain(x[:, 0]), dtype=bool)

    return FunctionHandle(1, 1, func, dom, label)


def constant(value, dim_in: int, label: str | None = None) -> FunctionHandle:
    c = np.atleast_1d(np.asarray(value, dtype=float))

    def func(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(c, (x.shape[0], c.size)).copy()

    return FunctionHandle(dim_in, c.size, func, label=label or f"const{c.tolist()}")


def zero(dim_in: int, dim_out: int = 1) -> FunctionHandle:
    return constant(np.zeros(dim_out), dim_in, label="0")


def linear(matrix, label: str | None = None) -> FunctionHandle:
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    A.setflags(write=False)

    def func(x: np.ndarray) -> np.ndarray:
        return x @ A.T

    return FunctionHandle(A.shape[1], A.shape[0], func, label=label or "linear")


def identity(dim: int = 1) -> FunctionHandle:
    return linear(np.eye(dim), label="id")


def _both(f: FunctionHandle, g: FunctionHandle) -> BatchFn:
    def dom(x: np.ndarray) -> np.ndarray:
        return f.in_domain(x) & g.in_domain(x)

    return dom


def compose(outer: FunctionHandle, inner: FunctionHandle) -> FunctionHandle:
    if inner.dim_out != outer.dim_in:
        raise ValueError("dimension mismatch in composition")

    def func(x: np.ndarray) -> np.ndarray:
        return outer.eval(inner.eval(x))

    def dom(x: np.ndarray) -> np.ndarray:
        ok = inner.in_domain(x)
        y = inner.eval(x)
        return ok & outer.in_domain(y)

    return FunctionHandle(inner.dim_in, outer.dim_out, func, dom, f"{outer.label}o{inner.label}")


def add(f: FunctionHandle, g: FunctionHandle) -> FunctionHandle:
    _same_shape(f, g)
    return FunctionHandle(f.dim_in, f.dim_out, lambda x: f.eval(x) + g.eval(x), _both(f, g),
                          f"({f.label}+{g.label})")


def sub(f: FunctionHandle, g: FunctionHandle) -> FunctionHandle:
    _same_shape(f, g)
    return FunctionHandle(f.dim_in, f.dim_out, lambda x: f.eval(x) - g.eval(x), _both(f, g),
                          f"({f.label}-{g.label})")


def scale(c: float, f: FunctionHandle) -> FunctionHandle:
    c = float(c)
    return FunctionHandle(f.dim_in, f.dim_out, lambda x: c * f.eval(x), f.in_domain, f"{c:g}*{f.label}")


def translate(f_at_a, a, h: FunctionHandle) -> FunctionHandle:
    """The affine-like map x -> f(a) + h(x - a)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    fa = np.asarray(f_at_a, dtype=float).reshape(-1)

    def func(x: np.ndarray) -> np.ndarray:
        return fa + h.eval(x - a)

    def dom(x: np.ndarray) -> np.ndarray:
        return h.in_domain(x - a)

    return FunctionHandle(h.dim_in, h.dim_out, func, dom, f"{h.label}@a")


def _same_shape(f: FunctionHandle, g: FunctionHandle) -> None:
    if (f.dim_in, f.dim_out) != (g.dim_in, g.dim_out):
        raise ValueError(f"shape mismatch: {f.label} vs {g.label}")
