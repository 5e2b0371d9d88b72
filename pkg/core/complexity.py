from __future__ import annotations

from dataclasses import dataclass

from core.formula import Formula, atoms, children, depth

# bucket presets: (label, inclusive lower edge), highest edge first
BUCKET_PRESETS: dict[str, list[tuple[str, int]]] = {
    "diagnostic": [("high", 30), ("medium", 20), ("low", 10), ("sub", 0)],
    "tertile": [("high", 33), ("medium", 22), ("low", 0)],
}


@dataclass(frozen=True)
class ComplexityReport:
    circuit: int
    original: int
    depth: int
    unique_vars: int


def circuit_complexity(f: Formula) -> int:
    """One gate per connective or quantifier application plus one per leaf."""
    return 1 + sum(circuit_complexity(c) for c in children(f))


def original_complexity(f: Formula) -> int:
    return circuit_complexity(f) + depth(f) + len(atoms(f))


def complexity_report(f: Formula) -> ComplexityReport:
    c, d, n = circuit_complexity(f), depth(f), len(atoms(f))
    return ComplexityReport(circuit=c, original=c + d + n, depth=d, unique_vars=n)


def complexity_bucket(original: int, preset: str = "diagnostic") -> str:
    try:
        edges = BUCKET_PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown bucket preset {preset!r}") from None
    for label, lower in edges:
        if original >= lower:
            return label
    return edges[-1][0]
