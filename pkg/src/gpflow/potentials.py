"""Named catalog of trapping potentials evaluated at node coordinates."""

from __future__ import annotations

import numpy as np


def constant(c: float):
    if c < 0:
        raise ValueError(f"constant potential must be >= 0, got {c}")
    def V(coords: np.ndarray) -> np.ndarray:
        return np.full(len(coords), float(c))
    return V


def sin2_product(coords: np.ndarray) -> np.ndarray:
    """prod_i sin^2(pi x_i / 4)."""
    return np.prod(np.sin(np.pi * coords / 4.0) ** 2, axis=1)


def harmonic_lattice(coords: np.ndarray) -> np.ndarray:
    """|x|^2 + 100 sum_i sin^2(pi x_i / 4) (harmonic trap + optical lattice)."""
    return (np.sum(coords ** 2, axis=1)
            + 100.0 * np.sum(np.sin(np.pi * coords / 4.0) ** 2, axis=1))


def exact_case_potential(beta: float):
    """V = beta (1 - u*^2) for the manufactured ground state on [-1, 1]^d."""
    def V(coords: np.ndarray) -> np.ndarray:
        u = np.prod(np.sin(np.pi * (coords + 1.0) / 2.0), axis=1)
        return beta * (1.0 - u ** 2)
    return V


def from_file(path: str):
    """Whitespace-separated node values, one per interior node in C-order."""
    def V(coords: np.ndarray) -> np.ndarray:
        vals = np.loadtxt(path).reshape(-1)
        if len(vals) != len(coords):
            raise ValueError(
                f"{path}: {len(vals)} values for {len(coords)} nodes")
        return vals
    return V
