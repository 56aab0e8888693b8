from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..encver import Encoding
from ..hamcore import Hamiltonian


@dataclass
class ConstructionOutput:
    hamiltonian: Hamiltonian
    encoding: Encoding
    known_P_anc: np.ndarray | None = None
    notes: dict = field(default_factory=dict)


@dataclass
class GadgetPlan:
    kind: str
    target_terms: list
    delta: float
    ancilla_map: dict

    def __post_init__(self):
        if self.kind not in ("subdivision", "three_to_two", "fork"):
            raise ValueError(f"unknown gadget kind {self.kind!r}")
        if not self.delta > 0:
            raise ValueError("gadget strength must be positive")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "target_terms": [list(t) if isinstance(t, tuple) else t for t in self.target_terms],
            "delta": self.delta,
            "ancilla_map": {str(k): v for k, v in self.ancilla_map.items()},
        }


def zero_ancilla(n_anc: int, dim: int = 2) -> np.ndarray:
    v = np.zeros((dim**n_anc, 1))
    v[0, 0] = 1.0
    return v
