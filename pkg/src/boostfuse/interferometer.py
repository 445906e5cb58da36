"""Beam splitters, phase shifters and their action on labeled Fock states.

Every element is specified by its matrix on creation operators: an element
with mode matrix ``U`` maps ``a_k^dag -> sum_l U[l, k] a_l^dag``.  The
balanced beam splitter is the real Hadamard ``[[1, 1], [1, -1]] / sqrt(2)``
on ``(mode_i, mode_j)``; a tunable one with amplitude transmission ``t`` is
``[[t, r], [r, -t]]`` with ``r = sqrt(1 - t^2)``.  Both are involutions.  A
phase shifter multiplies its mode's creation operator by ``exp(i phi)``.

Fock action is computed per term by substituting the transformed creation
operators and expanding binomially; photon numbers here are tiny, so no
permanents are needed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .fock import LabeledFockState, ModeError

SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class BeamSplitter:
    """Two-mode beam splitter; ``t=None`` is the balanced (Hadamard) element."""

    mode_i: int
    mode_j: int
    t: Optional[float] = None

    def __post_init__(self) -> None:
        if self.mode_i == self.mode_j:
            raise ValueError("beam splitter needs two distinct modes")
        if self.t is not None and not (0.0 < self.t <= 1.0):
            raise ValueError(f"transmission amplitude must lie in (0, 1], got {self.t}")

    @property
    def modes(self) -> tuple[int, int]:
        return (self.mode_i, self.mode_j)

    def matrix(self) -> np.ndarray:
        if self.t is None:
            return SQRT1_2 * np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)
        r = math.sqrt(max(0.0, 1.0 - self.t * self.t))
        return np.array([[self.t, r], [r, -self.t]], dtype=complex)

    def inverse(self) -> "BeamSplitter":
        return self

    def to_text(self) -> str:
        if self.t is None:
            return f"BS {self.mode_i} {self.mode_j}"
        return f"BS {self.mode_i} {self.mode_j} {self.t!r}"


@dataclass(frozen=True)
class PhaseShift:
    mode: int
    phase: float

    @property
    def modes(self) -> tuple[int]:
        return (self.mode,)

    def matrix(self) -> np.ndarray:
        return np.array([[cmath.exp(1j * self.phase)]])

    def inverse(self) -> "PhaseShift":
        return PhaseShift(self.mode, -self.phase)

    def same_as(self, other: "PhaseShift", tol: float = 1e-12) -> bool:
        """Equality with the phase taken modulo 2 pi."""
        d = (self.phase - other.phase) % (2 * math.pi)
        return self.mode == other.mode and min(d, 2 * math.pi - d) <= tol

    def to_text(self) -> str:
        return f"PH {self.mode} {self.phase!r}"


Element = Union[BeamSplitter, PhaseShift]


@dataclass(frozen=True)
class Circuit:
    """Ordered list of elements, applied first to last."""

    elements: tuple[Element, ...] = ()

    def __init__(self, elements: Iterable[Element] = ()) -> None:
        object.__setattr__(self, "elements", tuple(elements))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(self.elements + tuple(other))

    def modes(self) -> set[int]:
        return {m for e in self.elements for m in e.modes}

    def inverse(self) -> "Circuit":
        return Circuit(e.inverse() for e in reversed(self.elements))

    def to_text(self) -> str:
        return "\n".join(e.to_text() for e in self.elements)

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        """Parse ``BS i j [t]`` / ``PH i phi`` lines; ``#`` starts a comment."""
        elements: list[Element] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            kind = parts[0].upper()
            try:
                if kind == "BS" and len(parts) in (3, 4):
                    t = float(parts[3]) if len(parts) == 4 else None
                    elements.append(BeamSplitter(int(parts[1]), int(parts[2]), t))
                elif kind == "PH" and len(parts) == 3:
                    elements.append(PhaseShift(int(parts[1]), float(parts[2])))
                else:
                    raise ValueError("unrecognized element")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {raw.strip()!r}: {exc}") from None
        return cls(elements)


# -- Fock action -------------------------------------------------------------


@lru_cache(maxsize=4096)
def _two_mode_map(m: tuple[complex, complex, complex, complex], ni: int, nj: int
                  ) -> tuple[tuple[int, int, complex], ...]:
    """Image of ``|ni, nj>`` under the 2x2 mode matrix ``m`` (row-major)."""
    m00, m01, m10, m11 = m
    # a_i^dag -> m00 a_i^dag + m10 a_j^dag ; a_j^dag -> m01 a_i^dag + m11 a_j^dag
    poly: dict[int, complex] = {}
    for p in range(ni + 1):
        c1 = math.comb(ni, p) * m00 ** p * m10 ** (ni - p)
        if c1 == 0:
            continue
        for q in range(nj + 1):
            c2 = math.comb(nj, q) * m01 ** q * m11 ** (nj - q)
            if c2 == 0:
                continue
            poly[p + q] = poly.get(p + q, 0j) + c1 * c2
    norm_in = math.sqrt(math.factorial(ni) * math.factorial(nj))
    n = ni + nj
    out = []
    for p, c in sorted(poly.items()):
        amp = c * math.sqrt(math.factorial(p) * math.factorial(n - p)) / norm_in
        if abs(amp) > 0:
            out.append((p, n - p, complex(amp)))
    return tuple(out)


def apply_element(s: LabeledFockState, e: Element) -> LabeledFockState:
    """Apply one optical element to every term of ``s``."""
    if isinstance(e, PhaseShift):
        k = s.mode_index(e.mode)
        ph = cmath.exp(1j * e.phase)
        return LabeledFockState(
            s.mode_names, {key: a * ph ** key[1][k] for key, a in s.terms.items()}
        )
    if not isinstance(e, BeamSplitter):
        raise TypeError(f"not an optical element: {e!r}")
    i, j = s.mode_index(e.mode_i), s.mode_index(e.mode_j)
    mat = e.matrix()
    m = (complex(mat[0, 0]), complex(mat[0, 1]), complex(mat[1, 0]), complex(mat[1, 1]))
    out: dict = {}
    for (label, occ), amp in s.terms.items():
        for p, q, c in _two_mode_map(m, occ[i], occ[j]):
            new = list(occ)
            new[i], new[j] = p, q
            key = (label, tuple(new))
            out[key] = out.get(key, 0j) + amp * c
    return LabeledFockState(s.mode_names, out)


def apply_circuit(s: LabeledFockState, c: Circuit | Sequence[Element]) -> LabeledFockState:
    for e in c:
        s = apply_element(s, e)
    return s


def circuit_to_matrix(c: Circuit | Sequence[Element], modes: Sequence[int]) -> np.ndarray:
    """Mode matrix of the whole circuit on ``modes`` (column k = image of a_k^dag)."""
    modes = list(modes)
    pos = {m: k for k, m in enumerate(modes)}
    u = np.eye(len(modes), dtype=complex)
    for e in c:
        missing = [m for m in e.modes if m not in pos]
        if missing:
            raise ModeError(f"element {e} touches unlisted modes {missing}")
        block = np.eye(len(modes), dtype=complex)
        idx = [pos[m] for m in e.modes]
        block[np.ix_(idx, idx)] = e.matrix()
        u = block @ u
    return u
