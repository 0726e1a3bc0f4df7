"""Target functions f : D -> [-1, 1] and the standard function families.

Every family is pre-scaled so that its range lies in [-1, 1] on its domain:

============  ===================================  ============================
tag           f(x)                                 domain
============  ===================================  ============================
``exp``       exp(-beta x) / exp(beta)             [-1, 1]
``sin``       sin(t x)                             [-1, 1]
``cos``       cos(t x)                             [-1, 1]
``log``       log(1 + beta x) / |log(1 - beta)|    [-1, 1], 0 < beta < 1
``inv``       1 / (kappa x)                        [-1, -1/kappa] U [1/kappa, 1]
``custom``    user polynomial or callable          user domain
============  ===================================  ============================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import mpmath
import numpy as np

from .errors import InvalidInput, RangeError
from .polynomial import Domain, Polynomial, poly_from_string

FAMILIES = ("exp", "sin", "cos", "log", "inv", "custom")

_RANGE_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class TargetFunction:
    eval: Callable[[np.ndarray], np.ndarray]
    domain: Domain
    family_tag: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    mp_eval: Callable | None = None
    label: str = ""

    def __post_init__(self):
        if self.family_tag not in FAMILIES:
            raise InvalidInput(f"unknown family {self.family_tag!r}")
        grid = self.domain.grid(2049)
        vals = np.asarray(self.eval(grid), dtype=float)
        if vals.shape != grid.shape or not np.all(np.isfinite(vals)):
            raise InvalidInput("target function must be finite and vectorised over its domain")
        peak = float(np.max(np.abs(vals)))
        if peak > 1.0 + _RANGE_SLACK:
            raise RangeError(f"|f| reaches {peak:.6g} > 1 on the domain; rescale the function")
        object.__setattr__(self, "params", dict(self.params))

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def describe(self) -> str:
        if self.label:
            return self.label
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family_tag}({args})"

    def to_json(self):
        return {
            "family": self.family_tag,
            "params": dict(self.params),
            "domain": self.domain.to_json(),
            "label": self.describe(),
        }


def exp_family(beta: float = 1.0) -> TargetFunction:
    if beta <= 0:
        raise InvalidInput("beta must be positive")
    return TargetFunction(
        eval=lambda x: np.exp(-beta * x - beta),
        domain=Domain.full(),
        family_tag="exp",
        params={"beta": beta},
        mp_eval=lambda x: mpmath.exp(-beta * x - beta),
    )


def sin_family(t: float = 3.0) -> TargetFunction:
    return TargetFunction(
        eval=lambda x: np.sin(t * x),
        domain=Domain.full(),
        family_tag="sin",
        params={"t": t},
        mp_eval=lambda x: mpmath.sin(t * x),
    )


def cos_family(t: float = 3.0) -> TargetFunction:
    return TargetFunction(
        eval=lambda x: np.cos(t * x),
        domain=Domain.full(),
        family_tag="cos",
        params={"t": t},
        mp_eval=lambda x: mpmath.cos(t * x),
    )


def log_family(beta: float = 0.9) -> TargetFunction:
    if not 0 < beta < 1:
        raise InvalidInput("log family needs 0 < beta < 1")
    scale = abs(math.log1p(-beta))
    return TargetFunction(
        eval=lambda x: np.log1p(beta * x) / scale,
        domain=Domain.full(),
        family_tag="log",
        params={"beta": beta},
        mp_eval=lambda x: mpmath.log(1 + beta * x) / mpmath.mpf(scale),
    )


def inv_family(kappa: float = 4.0) -> TargetFunction:
    if kappa <= 1:
        raise InvalidInput("kappa must exceed 1")
    gap = 1.0 / kappa
    return TargetFunction(
        eval=lambda x: 1.0 / (kappa * x),
        domain=Domain.of((-1.0, -gap), (gap, 1.0)),
        family_tag="inv",
        params={"kappa": kappa},
        mp_eval=lambda x: 1 / (kappa * x),
    )


def polynomial_function(poly: Polynomial | str, domain: Domain | None = None, label: str = "") -> TargetFunction:
    """Wrap a polynomial (object or power-basis string like ``"x^2"``) as a target."""
    text = poly if isinstance(poly, str) else ""
    if isinstance(poly, str):
        poly = poly_from_string(poly)
    coeffs = [mpmath.mpf(float(c)) for c in poly.to_monomial()]
    return TargetFunction(
        eval=lambda x: poly(x),
        domain=domain or Domain.full(),
        family_tag="custom",
        params={},
        mp_eval=lambda x: mpmath.polyval(coeffs[::-1], x),
        label=label or (f"poly({text})" if text else "poly"),
    )


def custom_function(fn: Callable, domain: Domain | None = None, mp_fn: Callable | None = None,
                    label: str = "custom") -> TargetFunction:
    return TargetFunction(eval=fn, domain=domain or Domain.full(), family_tag="custom",
                          mp_eval=mp_fn, label=label)


def make_family(tag: str, **params) -> TargetFunction:
    """Look a family up by its tag; unknown keyword arguments are rejected."""
    builders = {"exp": exp_family, "sin": sin_family, "cos": cos_family,
                "log": log_family, "inv": inv_family}
    if tag == "custom":
        return polynomial_function(params.pop("poly"))
    if tag not in builders:
        raise InvalidInput(f"unknown family {tag!r}")
    return builders[tag](**params)


def standard_families() -> list[TargetFunction]:
    """The four reference instances: exp(beta=1), sin(t=3), log(beta=0.9), inv(kappa=4)."""
    return [exp_family(1.0), sin_family(3.0), log_family(0.9), inv_family(4.0)]
