"""Quintic spline primitives shared by the motion and force trajectories.

Coefficients are stored in descending degree order ``[c5, c4, c3, c2, c1, c0]``
so a coefficient vector ``c`` evaluates as ``c5*t**5 + ... + c1*t + c0``.
Every module in this package relies on that single layout.  The polynomial
argument is the schedule time itself: a piece whose domain is ``[t0, tf]`` is
evaluated with ``t`` in ``[t0, tf]``, not with a shifted local clock.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Monomial degrees matching the coefficient layout.
DEGREES = (5, 4, 3, 2, 1, 0)


class DomainError(ValueError):
    """Raised for out-of-domain evaluation times or degenerate domains."""


def basis_row(t: float, deriv: int = 0) -> np.ndarray:
    """Row of quintic monomials (or their derivatives) at time ``t``.

    ``deriv=0`` gives ``[t^5, t^4, t^3, t^2, t, 1]``; ``deriv=1`` and
    ``deriv=2`` differentiate term-wise.  The dot product of the returned row
    with a coefficient vector is the corresponding derivative of the scalar
    polynomial.
    """
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    row = np.zeros(6)
    for k, p in enumerate(DEGREES):
        factor = 1.0
        power = p
        for _ in range(deriv):
            factor *= power
            power -= 1
        if power >= 0:
            row[k] = factor * t**power
        # degrees that vanish under differentiation stay zero
    return row


def sample_times(t0: float, tf: float) -> np.ndarray:
    """Six evenly spaced sample times spanning ``[t0, tf]``, endpoints included."""
    if not tf > t0:
        raise DomainError(f"degenerate domain [{t0}, {tf}]")
    return np.linspace(t0, tf, 6)


def accel_gram(t0: float, tf: float) -> np.ndarray:
    """Closed-form Gram matrix of the second-derivative basis over ``[t0, tf]``.

    Entry ``(i, j)`` is the integral of the product of the second derivatives
    of the ``i``-th and ``j``-th monomials, so ``c @ G @ c`` equals the
    integral of the squared acceleration of the polynomial with coefficients
    ``c``.  Rows and columns for the linear and constant terms are zero, which
    makes the matrix symmetric positive semidefinite of rank 4.
    """
    if not tf > t0:
        raise DomainError(f"degenerate domain [{t0}, {tf}]")
    gram = np.zeros((6, 6))
    for i, p in enumerate(DEGREES):
        if p < 2:
            continue
        for j, q in enumerate(DEGREES):
            if q < 2:
                continue
            coeff = p * (p - 1) * q * (q - 1)
            n = p + q - 4
            gram[i, j] = coeff * (tf ** (n + 1) - t0 ** (n + 1)) / (n + 1)
    return gram


@dataclass(frozen=True)
class Spline3:
    """One quintic polynomial per axis over a common time domain.

    ``coeffs`` is a (3, 6) array; row order is x, y, z with descending-degree
    coefficient layout.  Used both for motion (position) and force splines.
    """

    coeffs: np.ndarray
    t0: float
    tf: float

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (3, 6):
            raise ValueError(f"coeffs must be (3, 6), got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite spline coefficients")
        if self.tf < self.t0:
            raise DomainError(f"invalid domain [{self.t0}, {self.tf}]")
        object.__setattr__(self, "coeffs", coeffs)

    def eval(self, t: float, deriv: int = 0) -> np.ndarray:
        """Evaluate the 3-vector value (or derivative) at time ``t``."""
        return self.coeffs @ basis_row(t, deriv)


@dataclass(frozen=True)
class PiecewiseTrajectory:
    """Ordered, contiguous sequence of :class:`Spline3` pieces.

    Piece boundaries resolve to the later piece (half-open domains); the final
    piece is closed at the trajectory end.
    """

    pieces: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("trajectory needs at least one piece")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.tf - b.t0) > 1e-9:
                raise ValueError(
                    f"piece domains not contiguous: {a.tf} vs {b.t0}"
                )
        object.__setattr__(self, "pieces", pieces)

    @property
    def start(self) -> float:
        return self.pieces[0].t0

    @property
    def end(self) -> float:
        return self.pieces[-1].tf

    def piece_index(self, t: float) -> int:
        if t < self.start - 1e-9 or t > self.end + 1e-9:
            raise DomainError(f"t={t} outside [{self.start}, {self.end}]")
        for i, piece in enumerate(self.pieces[:-1]):
            if t < piece.tf:
                return i
        return len(self.pieces) - 1

    def eval(self, t: float, deriv: int = 0) -> np.ndarray:
        return self.pieces[self.piece_index(t)].eval(t, deriv)

    def domains(self) -> list[tuple[float, float]]:
        return [(p.t0, p.tf) for p in self.pieces]
