"""
Complex-multiplication counts for one timing estimate.

The learned synchronizer is compared against three earlier designs by the
number of complex multiplications (CM) each needs per estimate.  Only the
counts are implemented here, not the competing estimators themselves.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Dict, Iterable, List, Optional

# Names accepted by `complexity_cm`.
METHODS = ("prop", "newts", "labelts", "ompalg")

# The counts published for N=128, Ns=160, Ng=32, L=28.  The NEWTS entry
# disagrees with its own closed form, which gives 61600.
PUBLISHED_EXAMPLES: Dict[str, int] = {
    "prop": 30720,
    "newts": 70240,
    "labelts": 410428,
    "ompalg": 2167396,
}
EXAMPLE_DIMENSIONS = {"N": 128, "Ns": 160, "Ng": 32, "L": 28}

DEFAULT_SWEEP_NS = tuple(range(160, 1025, 16))


class UnknownMethod(ValueError):
    """Raised for a method id nothing knows how to count."""


def _prop(N, Ns, Ng, L):
    # One cross-correlation (N·Ns) plus the network, counted as 0.5·N·Ns.
    return N * Ns + 0.5 * N * Ns

def _newts(N, Ns, Ng, L):
    return 0.5 * Ns ** 2 + 2 * N * Ns + 1.5 * Ng * Ns + Ns

def _labelts(N, Ns, Ng, L):
    return 1.5 * N + 4 * (Ns - 1) + 16 * Ns ** 2

def _ompalg(N, Ns, Ng, L):
    return L * N * Ns + sum(3 * l * Ns + l ** 3 + l ** 2 * Ns for l in range(1, L + 1))

_FORMULAS: Dict[str, Callable[..., float]] = {
    "prop": _prop,
    "newts": _newts,
    "labelts": _labelts,
    "ompalg": _ompalg,
}


def complexity_cm(method_id: str, N: int, Ns: int, Ng: int = 32, L: int = 28) -> float:
    """
    The CM count of `method_id` for the given frame dimensions.

    Ng only enters the NEWTS count and L only the OMPALG count.
    """
    formula = _FORMULAS.get(method_id.lower())
    if formula is None:
        raise UnknownMethod(f"Unknown method {method_id!r}, expected one of {', '.join(METHODS)}")
    for name, value in (("N", N), ("Ns", Ns), ("Ng", Ng), ("L", L)):
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")
    return float(formula(N, Ns, Ng, L))


@dataclasses.dataclass(frozen=True)
class ComplexityRow:
    method: str
    N: int
    Ns: int
    cm: float
    published: Optional[int] = None


def example_table() -> List[ComplexityRow]:
    """Every method at the published dimensions, alongside the published count."""
    dims = EXAMPLE_DIMENSIONS
    return [
        ComplexityRow(
            method=method,
            N=dims["N"],
            Ns=dims["Ns"],
            cm=complexity_cm(method, **dims),
            published=PUBLISHED_EXAMPLES[method],
        )
        for method in METHODS
    ]


def complexity_sweep(
        methods: Iterable[str] = METHODS,
        N: int = 128,
        Ng: int = 32,
        L: int = 28,
        ns_values: Iterable[int] = DEFAULT_SWEEP_NS,
    ) -> List[ComplexityRow]:
    """CM counts as the search length Ns grows, one row per (method, Ns)."""
    methods = list(methods)
    return [
        ComplexityRow(method=m, N=N, Ns=ns, cm=complexity_cm(m, N, ns, Ng, L))
        for ns in ns_values
        for m in methods
    ]
