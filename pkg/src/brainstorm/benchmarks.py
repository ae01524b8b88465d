"""Classical test functions with seeded shift/rotation transforms.

Every base function has its global minimum 0 at the origin, so a transformed
instance ``f(x) = base(Q @ (x - o)) + bias`` has its minimum ``bias`` at ``o``.

Constants: ackley a=20, b=0.2, c=2*pi; rastrigin A=10; weierstrass a=0.5,
b=3, k_max=20. Rosenbrock and Schwefel 2.26 are translated internally so
their optimum sits at ``z = 0``.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass

import numpy as np

from .core import Bounds, ConfigurationError, ObjectiveFunction

__all__ = [
    "BASE_FUNCTIONS",
    "TRANSFORMS",
    "BenchmarkSpec",
    "random_rotation",
    "make_benchmark",
    "batch_catalog",
    "catalog_manifest",
    "benchmark_from_entry",
    "get_benchmark",
]

# z-batch functions: (n, D) -> (n,)


def sphere(z):
    return np.sum(z * z, axis=-1)


def rosenbrock(z):
    x = z + 1.0
    if x.shape[-1] < 2:
        return np.zeros(x.shape[:-1])
    return np.sum(100.0 * (x[..., 1:] - x[..., :-1] ** 2) ** 2 + (x[..., :-1] - 1.0) ** 2, axis=-1)


def rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


def ackley(z):
    d = z.shape[-1]
    r = np.sqrt(np.sum(z * z, axis=-1) / d)
    c = np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + np.e


def griewank(z):
    i = np.sqrt(np.arange(1, z.shape[-1] + 1, dtype=float))
    return np.sum(z * z, axis=-1) / 4000.0 - np.prod(np.cos(z / i), axis=-1) + 1.0


_SCHWEFEL_X0 = 420.9687462275036
_SCHWEFEL_C = _SCHWEFEL_X0 * np.sin(np.sqrt(_SCHWEFEL_X0))


def schwefel_226(z):
    # coordinates past +-500 are folded back and penalized quadratically so
    # the optimum stays global when the rotated point leaves the box
    x = z + _SCHWEFEL_X0
    d = x.shape[-1]
    inside = np.abs(x) <= 500.0
    folded = 500.0 - np.mod(np.abs(x), 500.0)
    outside = (np.sign(x) * folded * np.sin(np.sqrt(folded))
               - (np.abs(x) - 500.0) ** 2 / (10000.0 * d))
    g = np.where(inside, x * np.sin(np.sqrt(np.abs(x))), outside)
    return np.sum(_SCHWEFEL_C - g, axis=-1)


_W_K = np.arange(21, dtype=float)
_W_AK = 0.5 ** _W_K
_W_BK = 3.0 ** _W_K
_W_OFFSET = float(np.sum(_W_AK * np.cos(np.pi * _W_BK)))


def weierstrass(z):
    # b**k is an integer, so only the fractional part of the phase matters;
    # reducing it first avoids slow range reduction inside cos
    t = _W_BK * (z[..., None] + 0.5)
    t -= np.floor(t)
    terms = _W_AK * np.cos(2.0 * np.pi * t)
    return np.sum(terms, axis=(-1, -2)) - z.shape[-1] * _W_OFFSET


BASE_FUNCTIONS = {
    "sphere": (sphere, 100.0),
    "rosenbrock": (rosenbrock, 100.0),
    "rastrigin": (rastrigin, 100.0),
    "ackley": (ackley, 100.0),
    "griewank": (griewank, 100.0),
    "schwefel_226": (schwefel_226, 500.0),
    "weierstrass": (weierstrass, 100.0),
}

TRANSFORMS = ("identity", "shifted_rotated")

CATALOG_SEED = 20190101


@dataclass(frozen=True, eq=False)
class BenchmarkSpec:
    name: str
    dim: int
    shift: np.ndarray
    rotation: np.ndarray
    bias: float
    bounds: Bounds
    transform: str = "identity"
    seed: int = 0

    @property
    def id(self) -> str:
        return self.name if self.transform == "identity" else f"{self.name}_sr"

    @property
    def optimum(self) -> np.ndarray:
        return self.shift.copy()

    def evaluate_batch(self, xs):
        z = (np.atleast_2d(xs) - self.shift) @ self.rotation.T
        return BASE_FUNCTIONS[self.name][0](z) + self.bias

    def evaluate(self, x):
        return float(self.evaluate_batch(np.asarray(x, float)[None, :])[0])

    def objective(self) -> ObjectiveFunction:
        return ObjectiveFunction(self.evaluate, self.bounds, name=self.id,
                                 batch=self.evaluate_batch)

    def to_entry(self) -> dict:
        return {"id": self.id, "name": self.name, "dim": self.dim, "transform": self.transform,
                "seed": self.seed, "bias": self.bias,
                "lower": float(self.bounds.lower[0]), "upper": float(self.bounds.upper[0])}


def random_rotation(dim: int, rng) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR of a Gaussian matrix."""
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def _bias_for(name: str) -> float:
    return 100.0 * (list(BASE_FUNCTIONS).index(name) + 1)


def make_benchmark(name: str, dim: int, seed: int = 0, transform: str = "shifted_rotated"):
    """Build a benchmark and its objective.

    Parameters
    ----------
    name : str
        One of `BASE_FUNCTIONS`.
    dim : int
    seed : int
        Seeds the shift and rotation; ignored for the identity transform.
    transform : {"identity", "shifted_rotated"}

    Returns
    -------
    spec : BenchmarkSpec
    objective : ObjectiveFunction
    """
    if name not in BASE_FUNCTIONS:
        raise ConfigurationError(f"unknown benchmark {name!r}; known: {sorted(BASE_FUNCTIONS)}")
    if transform not in TRANSFORMS:
        raise ConfigurationError(f"unknown transform {transform!r}")
    if int(dim) != dim or dim < 1:
        raise ConfigurationError("dimension must be a positive integer")
    dim = int(dim)
    half = BASE_FUNCTIONS[name][1]
    bounds = Bounds.uniform(-half, half, dim)
    if transform == "identity":
        shift, rot, bias = np.zeros(dim), np.eye(dim), 0.0
    else:
        rng = np.random.default_rng([int(seed), zlib.crc32(name.encode()), dim])
        shift = rng.uniform(-0.8 * half, 0.8 * half, dim)
        rot = random_rotation(dim, rng)
        bias = _bias_for(name)
    spec = BenchmarkSpec(name, dim, shift, rot, bias, bounds, transform, int(seed))
    return spec, spec.objective()


def batch_catalog(seed: int = CATALOG_SEED, dims=(10, 30)) -> list:
    """Every base function at each dimension, identity and shifted-rotated."""
    out = []
    for dim in dims:
        for name in BASE_FUNCTIONS:
            for transform in TRANSFORMS:
                out.append(make_benchmark(name, dim, seed, transform)[0])
    return out


def catalog_manifest(seed: int = CATALOG_SEED, dims=(10, 30)) -> str:
    """JSON listing that reconstructs every catalog entry via `benchmark_from_entry`."""
    entries = [s.to_entry() for s in batch_catalog(seed, dims)]
    return json.dumps({"catalog_seed": seed, "entries": entries}, indent=2)


def benchmark_from_entry(entry: dict):
    return make_benchmark(entry["name"], entry["dim"], entry.get("seed", CATALOG_SEED),
                          entry.get("transform", "identity"))


def get_benchmark(function_id: str, dim: int, seed: int = CATALOG_SEED):
    """Look up ``"<name>"`` (identity) or ``"<name>_sr"`` (shifted-rotated)."""
    if function_id.endswith("_sr"):
        return make_benchmark(function_id[:-3], dim, seed, "shifted_rotated")
    return make_benchmark(function_id, dim, seed, "identity")
