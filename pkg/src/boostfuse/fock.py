"""Labeled Fock states over named optical modes.

A :class:`LabeledFockState` is a sparse superposition of terms
``(label, occupations) -> amplitude``.  The label is a formal pair of
indices into two orthonormal bases ``{|A_i>}`` and ``{|B_j>}``; terms with
different labels never interfere, so every linear-optical operation acts on
the occupation part only.  Ancilla states carry no label (``None``).

Mode names are the 1-based integers used in circuit diagrams.  States are
immutable; every operation returns a new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence

PRUNE_TOL = 1e-14
NORM_TOL = 1e-10


class LabelPair(NamedTuple):
    """Formal label ``|A_a B_b>`` attached to a term."""

    a: int
    b: int

    def __str__(self) -> str:
        return f"A{self.a}B{self.b}"


Label = Optional[LabelPair]
Occupation = tuple[int, ...]
TermKey = tuple[Label, Occupation]


class ModeError(ValueError):
    """Raised for unknown, duplicated or overlapping mode names."""


def _label_sort_key(label: Label) -> tuple:
    return (-1, -1) if label is None else (label.a, label.b)


def _format_label(label: Label) -> str:
    return "-" if label is None else str(label)


@dataclass(frozen=True, eq=False)
class LabeledFockState:
    """Sparse pure state over ``mode_names``.

    Parameters
    ----------
    mode_names : tuple of int
        External (1-based) mode identifiers, one per occupation column.
    terms : mapping
        ``(label, occupation tuple) -> complex amplitude``.  Amplitudes below
        ``PRUNE_TOL`` are dropped on construction.
    """

    mode_names: tuple[int, ...]
    terms: Mapping[TermKey, complex]

    def __post_init__(self) -> None:
        names = tuple(int(m) for m in self.mode_names)
        if len(set(names)) != len(names):
            raise ModeError(f"duplicate mode names in {names}")
        cleaned: dict[TermKey, complex] = {}
        for (label, occ), amp in self.terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(names):
                raise ValueError(
                    f"occupation {occ} has {len(occ)} entries, expected {len(names)}"
                )
            if any(n < 0 for n in occ):
                raise ValueError(f"negative photon count in {occ}")
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                cleaned[(label, occ)] = amp
        object.__setattr__(self, "mode_names", names)
        object.__setattr__(self, "terms", cleaned)

    # -- construction -----------------------------------------------------

    @classmethod
    def basis(cls, mode_names: Sequence[int], occupation: Sequence[int],
              label: Label = None) -> "LabeledFockState":
        """Single Fock basis state with amplitude 1."""
        return cls(tuple(mode_names), {(label, tuple(occupation)): 1.0})

    @classmethod
    def vacuum(cls, mode_names: Sequence[int]) -> "LabeledFockState":
        return cls.basis(mode_names, (0,) * len(mode_names))

    # -- basic queries ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[TermKey, complex]]:
        return iter(self.terms.items())

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> "LabeledFockState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return LabeledFockState(self.mode_names, {k: a / n for k, a in self.terms.items()})

    def mode_index(self, mode: int) -> int:
        try:
            return self.mode_names.index(mode)
        except ValueError:
            raise ModeError(f"mode {mode} not in state modes {self.mode_names}") from None

    def labels(self) -> set[Label]:
        return {label for label, _ in self.terms}

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for _, occ in self.terms}

    def occupations_of(self, modes: Iterable[int]) -> set[Occupation]:
        """Distinct occupation sub-tuples found on ``modes`` across all terms."""
        idx = [self.mode_index(m) for m in modes]
        return {tuple(occ[i] for i in idx) for _, occ in self.terms}

    def amplitude(self, label: Label, occupation: Sequence[int]) -> complex:
        return self.terms.get((label, tuple(occupation)), 0.0j)

    # -- algebra ----------------------------------------------------------

    def scaled(self, factor: complex) -> "LabeledFockState":
        return LabeledFockState(self.mode_names, {k: a * factor for k, a in self.terms.items()})

    def __add__(self, other: "LabeledFockState") -> "LabeledFockState":
        if other.mode_names != self.mode_names:
            other = other.reordered(self.mode_names)
        out = dict(self.terms)
        for k, a in other.terms.items():
            out[k] = out.get(k, 0.0j) + a
        return LabeledFockState(self.mode_names, out)

    def inner(self, other: "LabeledFockState") -> complex:
        """``<self|other>`` for states over the same mode set."""
        if set(self.mode_names) != set(other.mode_names):
            raise ModeError(
                f"mode mismatch: {self.mode_names} vs {other.mode_names}"
            )
        if other.mode_names != self.mode_names:
            other = other.reordered(self.mode_names)
        return sum(
            (a.conjugate() * other.terms[k] for k, a in self.terms.items() if k in other.terms),
            0.0j,
        )

    def reordered(self, mode_names: Sequence[int]) -> "LabeledFockState":
        """Same state with occupation columns permuted to ``mode_names``."""
        mode_names = tuple(mode_names)
        if sorted(mode_names) != sorted(self.mode_names):
            raise ModeError(f"cannot reorder {self.mode_names} as {mode_names}")
        perm = [self.mode_index(m) for m in mode_names]
        return LabeledFockState(
            mode_names,
            {(lab, tuple(occ[i] for i in perm)): a for (lab, occ), a in self.terms.items()},
        )

    def renamed(self, mapping: Mapping[int, int]) -> "LabeledFockState":
        """Rename modes; unmapped modes keep their names."""
        names = tuple(mapping.get(m, m) for m in self.mode_names)
        return LabeledFockState(names, self.terms)

    def isclose(self, other: "LabeledFockState", tol: float = 1e-10) -> bool:
        """Amplitude-wise equality, ignoring column order (not global phase)."""
        if set(self.mode_names) != set(other.mode_names):
            return False
        other = other.reordered(self.mode_names)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) <= tol for k in keys)

    # -- serialization ----------------------------------------------------

    def sorted_terms(self) -> list[tuple[TermKey, complex]]:
        return sorted(self.terms.items(), key=lambda kv: (_label_sort_key(kv[0][0]), kv[0][1]))

    def to_text(self, header: bool = True, digits: int = 12) -> str:
        """Canonical text form: one ``A<i>B<j> |n1 ... nm> re im`` line per term."""
        lines = []
        if header:
            lines.append("# modes " + " ".join(str(m) for m in self.mode_names))
        for (label, occ), amp in self.sorted_terms():
            re = _clean_float(amp.real, digits)
            im = _clean_float(amp.imag, digits)
            occ_txt = " ".join(str(n) for n in occ)
            lines.append(f"{_format_label(label)} |{occ_txt}> {re} {im}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, mode_names: Optional[Sequence[int]] = None) -> "LabeledFockState":
        terms: dict[TermKey, complex] = {}
        names = tuple(mode_names) if mode_names is not None else None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts and parts[0] == "modes" and names is None:
                    names = tuple(int(p) for p in parts[1:])
                continue
            lab_txt, rest = line.split(" ", 1)
            occ_txt, amp_txt = rest.strip()[1:].split(">", 1)
            re, im = (float(x) for x in amp_txt.split())
            terms[(_parse_label(lab_txt), tuple(int(n) for n in occ_txt.split()))] = complex(re, im)
        if names is None:
            raise ValueError("mode names missing: no '# modes' header and none given")
        return cls(names, terms)

    def __repr__(self) -> str:
        body = "; ".join(
            f"{_format_label(lab)}|{''.join(map(str, occ))}>:{amp:.4g}"
            for (lab, occ), amp in self.sorted_terms()
        )
        return f"LabeledFockState(modes={self.mode_names}, {body})"


def _clean_float(x: float, digits: int) -> str:
    x = round(x, digits)
    if x == 0.0:
        x = 0.0  # drop negative zero
    return repr(x)


def _parse_label(text: str) -> Label:
    if text == "-":
        return None
    if not (text.startswith("A") and "B" in text):
        raise ValueError(f"bad label {text!r}")
    a, b = text[1:].split("B")
    return LabelPair(int(a), int(b))


# -- module-level operations ---------------------------------------------


def make_dual_rail_pair(n_labels_a: int = 2, n_labels_b: int = 2) -> LabeledFockState:
    """Two maximally entangled label/dual-rail pairs on modes 1-4.

    Qubit ``a`` lives on modes (1, 2), qubit ``b`` on modes (3, 4); logical
    zero is a photon in the first rail.  All four terms carry amplitude 1/2.
    Only two labels per side make sense for a qubit, so other sizes are
    rejected.
    """
    if (n_labels_a, n_labels_b) != (2, 2):
        raise ValueError("dual-rail pairs need exactly two labels per side")
    rail = {0: (1, 0), 1: (0, 1)}
    terms = {
        (LabelPair(i, j), rail[i] + rail[j]): 0.5
        for i in (0, 1)
        for j in (0, 1)
    }
    return LabeledFockState((1, 2, 3, 4), terms)


def tensor(s1: LabeledFockState, s2: LabeledFockState) -> LabeledFockState:
    """Tensor product over disjoint modes.

    At most one factor may carry labels; the other must be label-free
    (merging two label structures is left to the caller).
    """
    overlap = set(s1.mode_names) & set(s2.mode_names)
    if overlap:
        raise ModeError(f"overlapping modes {sorted(overlap)}")
    if s1.labels() - {None} and s2.labels() - {None}:
        raise ValueError("both factors carry labels; merge them explicitly")
    terms = {}
    for (l1, o1), a1 in s1.terms.items():
        for (l2, o2), a2 in s2.terms.items():
            terms[(l1 if l1 is not None else l2, o1 + o2)] = a1 * a2
    return LabeledFockState(s1.mode_names + s2.mode_names, terms)


def fidelity(s1: LabeledFockState, s2: LabeledFockState) -> float:
    """``|<s1|s2>|^2`` of the normalized states, insensitive to global phase."""
    if set(s1.mode_names) != set(s2.mode_names):
        raise ModeError(f"mode mismatch: {s1.mode_names} vs {s2.mode_names}")
    n1, n2 = s1.norm(), s2.norm()
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("fidelity with the zero vector is undefined")
    f = abs(s1.inner(s2)) ** 2 / (n1 * n2) ** 2
    return min(1.0, f)


def discard_modes(s: LabeledFockState, modes: Iterable[int]) -> LabeledFockState:
    """Drop columns whose occupation is identical across every term.

    Removing a mode whose photon number varies between terms would be a
    partial trace over an entangled mode, which a pure state cannot express.
    """
    modes = list(modes)
    idx = [s.mode_index(m) for m in modes]
    for m, i in zip(modes, idx):
        values = {occ[i] for _, occ in s.terms}
        if len(values) > 1:
            raise ValueError(f"mode {m} occupation differs across terms: {sorted(values)}")
    keep = [i for i in range(len(s.mode_names)) if i not in idx]
    names = tuple(s.mode_names[i] for i in keep)
    terms: dict[TermKey, complex] = {}
    for (label, occ), amp in s.terms.items():
        key = (label, tuple(occ[i] for i in keep))
        terms[key] = terms.get(key, 0j) + amp
    return LabeledFockState(names, terms)


def swap_modes(s: LabeledFockState, m1: int, m2: int) -> LabeledFockState:
    """Exchange the contents of two modes, keeping column order."""
    return s.renamed({m1: m2, m2: m1}).reordered(s.mode_names)


def from_terms(mode_names: Sequence[int],
               terms: Iterable[tuple[Label, Sequence[int], complex]]) -> LabeledFockState:
    """Build a state from ``(label, occupation, amplitude)`` triples, summing repeats."""
    out: dict[TermKey, complex] = {}
    for label, occ, amp in terms:
        key = (label, tuple(occ))
        out[key] = out.get(key, 0j) + amp
    return LabeledFockState(tuple(mode_names), out)
