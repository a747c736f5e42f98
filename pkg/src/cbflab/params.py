"""Equation parameters and the user-supplied trilinear-estimate constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .fields import SpectralVelocity

#: Marker attached to every condition report built from default constants.
PROVISIONAL_LABEL = "provisional placeholders"


@dataclass(frozen=True)
class PhysicsParams:
    """
    Coefficients of the damped momentum equation
    du/dt + mu A u + B(u) + darcy u + beta |u|^(r-1) u = f.

    ``beta = 0`` disables the nonlinear damping (plain Navier-Stokes); the
    attractor-condition formulas themselves require ``beta > 0`` where they
    use it and enforce that separately.
    """

    mu: float
    beta: float
    r: float
    darcy: float = 0.0
    forcing: SpectralVelocity | None = None

    def __post_init__(self):
        problems = []
        if not (self.mu > 0):
            problems.append(f"physics.mu: must be positive, got {self.mu}")
        if self.beta < 0:
            problems.append(f"physics.beta: must be >= 0, got {self.beta}")
        if self.r < 1:
            problems.append(f"physics.r: absorption exponent must be >= 1, got {self.r}")
        if self.darcy < 0:
            problems.append(f"physics.darcy: must be >= 0, got {self.darcy}")
        if problems:
            raise ValidationError(problems)

    def validate_for_dim(self, dim: int) -> None:
        """3D well-posedness window: r >= 3, and 2 beta mu >= 1 at r = 3."""
        problems = []
        if dim == 3:
            if self.r < 3:
                problems.append(f"physics.r: 3D requires r >= 3, got {self.r}")
            elif self.r == 3 and 2.0 * self.beta * self.mu < 1.0:
                problems.append(
                    "physics.beta/mu: 3D with r = 3 requires 2*beta*mu >= 1, "
                    f"got {2.0 * self.beta * self.mu}"
                )
        if problems:
            raise ValidationError(problems)


@dataclass(frozen=True)
class EstimateConstants:
    """
    Constants of the interpolation estimates on the trilinear form.

    Exact values live in an external appendix, so they are configuration:
    the defaults are placeholders and every report that uses them says so.
    """

    c1: float = math.sqrt(2.0)
    c2: float = math.sqrt(2.0)
    c3: float = 2.0
    label: str = PROVISIONAL_LABEL

    def __post_init__(self):
        bad = [
            f"constants.{name}: must be positive, got {val}"
            for name, val in (("c1", self.c1), ("c2", self.c2), ("c3", self.c3))
            if not (val > 0)
        ]
        if bad:
            raise ValidationError(bad)
