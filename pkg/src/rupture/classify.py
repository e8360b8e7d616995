"""Structure of the positive solution set of the angular equation.

Two independent routes decide whether only the constant solution exists:
:func:`in_M_explicit` evaluates the four parameter regions directly, and
:func:`classify` counts integers in the open interval ``J(alpha, p)`` whose
reciprocals (times pi) are attainable half-periods.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

from .params import ProblemParams

#: integers this close to an interval endpoint count as outside it
BOUNDARY_TOL = 1e-12


class Kind(str, enum.Enum):
    TRIVIAL_ONLY = "TrivialOnly"
    FINITE_COMPONENTS = "FiniteComponents"
    CONTINUUM = "Continuum"


class UnassertedRangeWarning(UserWarning):
    """The connection rule is being applied where the theorem does not state it."""


@dataclass(frozen=True)
class StructureDescriptor:
    kind: Kind
    n0: int
    frequencies: tuple[int, ...]
    interval: tuple[float, float] | None
    boundary_tie: bool = False
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n0": self.n0,
            "frequencies": list(self.frequencies),
            "interval": list(self.interval) if self.interval is not None else None,
            "boundary_tie": self.boundary_tie,
        }


def _coords(params_or_pair) -> tuple[float, float]:
    if isinstance(params_or_pair, ProblemParams):
        return params_or_pair.alpha, params_or_pair.p
    alpha, p = params_or_pair
    return float(alpha), float(p)


def is_even_natural(alpha: float, tol: float = BOUNDARY_TOL) -> bool:
    """``alpha in {0, 2, 4, ...}`` up to ``tol``."""
    if alpha < -tol:
        return False
    k = round(alpha / 2.0)
    return abs(alpha - 2.0 * k) <= tol * max(1.0, abs(alpha))


def interval_J(params) -> tuple[float, float] | None:
    """Endpoints of ``J(alpha, p)``; ``None`` at ``p == 3`` where they coincide."""
    alpha, p = _coords(params)
    a2 = alpha + 2.0
    if p == 3.0:
        return None
    left_sqrt = a2 / math.sqrt(p + 1.0)
    if p < 1.0:
        return left_sqrt, a2
    if p < 3.0:
        return left_sqrt, 2.0 * a2 / (p + 1.0)
    return 2.0 * a2 / (p + 1.0), left_sqrt


def integers_in_open_interval(lo: float, hi: float, tol: float = BOUNDARY_TOL) -> tuple[list[int], bool]:
    """Integers strictly inside ``(lo, hi)`` and whether an endpoint tied an integer."""
    tie = False
    for end in (lo, hi):
        if abs(end - round(end)) <= tol * max(1.0, abs(end)):
            tie = True
    first = math.floor(lo) + 1
    out = []
    n = first
    while n < hi:
        if n - lo > tol * max(1.0, abs(n)) and hi - n > tol * max(1.0, abs(n)):
            out.append(n)
        n += 1
    return out, tie


def in_M_explicit(params) -> bool:
    """Membership in the union of the four explicit regions.

    The existential clauses are searched over ``1 <= j <= ceil(alpha + 2)``
    (first two regions) and ``1 <= j <= ceil((alpha + 2)**2)`` (last region).
    """
    alpha, p = _coords(params)
    a2 = alpha + 2.0
    if 0.0 < p < 1.0:
        if alpha <= -1.0:
            return True
        return any(
            alpha <= j - 1 and p <= (a2 / j) ** 2 - 1.0
            for j in range(1, math.ceil(a2) + 1)
        )
    if 1.0 <= p < 3.0:
        if p >= 2.0 * alpha + 3.0:
            return True
        return any(
            2.0 * a2 / (j + 1) - 1.0 <= p <= (a2 / j) ** 2 - 1.0
            for j in range(1, math.ceil(a2) + 1)
        )
    if p == 3.0:
        return not is_even_natural(alpha)
    if p >= a2**2 - 1.0:
        return True
    return any(
        (a2 / (j + 1)) ** 2 - 1.0 <= p <= 2.0 * a2 / j - 1.0
        for j in range(1, math.ceil(a2**2) + 1)
    )


def classify(params) -> StructureDescriptor:
    """Trivial-only, finitely many components, or the ``p == 3`` continuum."""
    alpha, p = _coords(params)
    if p == 3.0:
        kind = Kind.CONTINUUM if is_even_natural(alpha) else Kind.TRIVIAL_ONLY
        return StructureDescriptor(kind=kind, n0=0, frequencies=(), interval=None)
    lo, hi = interval_J((alpha, p))
    freqs, tie = integers_in_open_interval(lo, hi)
    if not freqs:
        return StructureDescriptor(
            kind=Kind.TRIVIAL_ONLY, n0=0, frequencies=(), interval=(lo, hi), boundary_tie=tie
        )
    return StructureDescriptor(
        kind=Kind.FINITE_COMPONENTS,
        n0=len(freqs),
        frequencies=tuple(freqs),
        interval=(lo, hi),
        boundary_tie=tie,
    )


def admissible_connection(p: float, m: int, n: int, n0: int) -> bool:
    """Whether a global solution may go from component ``m`` (origin) to ``n`` (infinity).

    Component 0 is the constant solution; component ``i >= 1`` has the
    ``i``-th admissible frequency.  For ``0 < p <= 1`` the ``m <= n`` rule is
    returned with an :class:`UnassertedRangeWarning`.
    """
    p = float(p)
    if p <= 0.0:
        raise ValueError(f"p must be > 0, got {p!r}")
    if p == 3.0:
        raise ValueError("p == 3 has a single connected component; no (m, n) rule")
    for name, v in (("m", m), ("n", n)):
        if not 0 <= v <= n0:
            raise IndexError(f"{name}={v} outside 0..{n0}")
    if p > 3.0:
        return (0 < m <= n) or n == 0
    if p <= 1.0:
        warnings.warn(
            f"connection rule for p={p} (<= 1) is not stated by the theorem; "
            "applying 0 <= m <= n from the energy ordering",
            UnassertedRangeWarning,
            stacklevel=2,
        )
    return m <= n
