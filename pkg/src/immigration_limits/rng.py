"""Splittable random streams and the stable variate generators.

Streams are addressed by ``(root, path)``; the pair is hashed by
:class:`numpy.random.SeedSequence`, so a child stream can be derived
without knowing how many siblings will eventually exist.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import gamma

from .errors import ParameterError

CONVENTIONS = ("gamma_scaled", "standard")


@dataclass(frozen=True)
class StreamSeed:
    root: int
    path: tuple = ()

    def __post_init__(self):
        if int(self.root) < 0:
            raise ParameterError("stream root must be a non-negative integer")
        object.__setattr__(self, "root", int(self.root))
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def derive(self, index: int) -> "StreamSeed":
        if index < 0:
            raise ParameterError("stream index must be non-negative")
        return StreamSeed(self.root, self.path + (int(index),))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.root, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


StreamLike = Union[StreamSeed, int]
RngLike = Union[StreamSeed, int, np.random.Generator]


def derive_stream(seed: StreamSeed, index: int) -> StreamSeed:
    return seed.derive(index)


def as_stream(stream: StreamLike) -> StreamSeed:
    if isinstance(stream, StreamSeed):
        return stream
    if isinstance(stream, (int, np.integer)):
        return StreamSeed(int(stream))
    raise TypeError(f"cannot build a StreamSeed from {type(stream).__name__}")


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return as_stream(rng).generator()


@dataclass(frozen=True)
class StableSpec:
    """Parameters of a one-sided stable law.

    ``positive_subordinator`` needs ``alpha`` in (0, 1); ``spectrally_negative``
    needs ``alpha`` in (1, 2], where 2 is the centred Gaussian (Brownian) case.
    The ``gamma_scaled`` convention uses Laplace exponent ``Gamma(1-alpha) z**alpha``
    for subordinators and characteristic exponent
    ``-|z|**alpha Gamma(1-alpha) (cos(pi alpha/2) + i sign(z) sin(pi alpha/2))``
    for the spectrally negative family.
    """

    alpha: float
    skew_mode: str = "positive_subordinator"
    scale_convention: str = "gamma_scaled"

    def __post_init__(self):
        a = float(self.alpha)
        if self.scale_convention not in CONVENTIONS:
            raise ParameterError(f"unknown scale convention {self.scale_convention!r}")
        if self.skew_mode == "positive_subordinator":
            if not 0.0 < a < 1.0:
                raise ParameterError(f"positive stable needs alpha in (0,1), got {a}")
        elif self.skew_mode == "spectrally_negative":
            if not 1.0 < a <= 2.0:
                raise ParameterError(f"spectrally negative stable needs alpha in (1,2], got {a}")
        else:
            raise ParameterError(f"unknown skew mode {self.skew_mode!r}")


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown scale convention {convention!r}")


def positive_stable_scale(alpha: float, convention: str = "gamma_scaled") -> float:
    """Factor turning a standard positive stable variate into the chosen convention."""
    _check_convention(convention)
    return gamma(1.0 - alpha) ** (1.0 / alpha) if convention == "gamma_scaled" else 1.0


def sample_positive_stable(alpha: float, rng: RngLike, size=None, convention: str = "gamma_scaled"):
    """Positive alpha-stable variates via Kanter's representation.

    In the standard convention ``E exp(-zS) = exp(-z**alpha)``; the gamma_scaled
    convention multiplies by ``Gamma(1-alpha)**(1/alpha)``.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"positive stable needs alpha in (0,1), got {alpha}")
    _check_convention(convention)
    gen = as_generator(rng)
    u = gen.uniform(0.0, np.pi, size)
    e = gen.standard_exponential(size)
    log_s = (
        np.log(np.sin(alpha * u))
        - np.log(np.sin(u)) / alpha
        + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e))
    )
    return np.exp(log_s) * positive_stable_scale(alpha, convention)


def spectrally_negative_scale(alpha: float, convention: str = "gamma_scaled") -> float:
    _check_convention(convention)
    if convention == "standard" or alpha == 2.0:
        return 1.0
    return float(gamma(1.0 - alpha) * np.cos(np.pi * alpha / 2.0)) ** (1.0 / alpha)


def _skewed_stable(alpha: float, beta: float, gen: np.random.Generator, size):
    # Chambers-Mallows-Stuck, characteristic exponent -|z|^a (1 - i b sign(z) tan(pi a / 2))
    v = gen.uniform(-np.pi / 2.0, np.pi / 2.0, size)
    w = gen.standard_exponential(size)
    tan_term = beta * np.tan(np.pi * alpha / 2.0)
    b = np.arctan(tan_term) / alpha
    s = (1.0 + tan_term**2) ** (1.0 / (2.0 * alpha))
    return (
        s
        * np.sin(alpha * (v + b))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_stable_increment(spec: StableSpec, dt: float, rng: RngLike, size=None):
    """Increment over a window of length ``dt`` of the Levy process described by ``spec``."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    gen = as_generator(rng)
    a = float(spec.alpha)
    if spec.skew_mode == "positive_subordinator":
        return dt ** (1.0 / a) * sample_positive_stable(a, gen, size, spec.scale_convention)
    if a == 2.0:
        return np.sqrt(dt) * gen.standard_normal(size)
    scale = spectrally_negative_scale(a, spec.scale_convention)
    return dt ** (1.0 / a) * scale * _skewed_stable(a, -1.0, gen, size)


def sample_increment(law, rng: RngLike, size=None):
    """One or more draws of the inter-arrival time ``xi``."""
    return law.sample(as_generator(rng), size)


def stable_char_function(z, alpha: float, convention: str = "gamma_scaled"):
    """Characteristic function of the spectrally negative unit-time variate."""
    z = np.asarray(z, dtype=float)
    if alpha == 2.0:
        return np.exp(-0.5 * z**2)
    sigma_a = spectrally_negative_scale(alpha, convention) ** alpha
    tan_term = np.tan(np.pi * alpha / 2.0)
    return np.exp(-sigma_a * np.abs(z) ** alpha * (1.0 + 1j * np.sign(z) * tan_term))


def gamma_scaled_char_exponent(z, alpha: float):
    """``-|z|^a Gamma(1-a) (cos(pi a/2) + i sign(z) sin(pi a/2))`` evaluated literally."""
    z = np.asarray(z, dtype=float)
    return -np.abs(z) ** alpha * gamma(1.0 - alpha) * (
        np.cos(np.pi * alpha / 2.0) + 1j * np.sign(z) * np.sin(np.pi * alpha / 2.0)
    )
