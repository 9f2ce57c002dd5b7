"""Sparse Fock vectors over the polarization modes of the apparatus."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, sqrt
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

SPATIAL = ("a", "a1", "a2", "a3", "b", "b1", "b2", "b3")
POLS = ("H", "V")
MODES = tuple((s, p) for s in SPATIAL for p in POLS)
MODE_INDEX = {m: i for i, m in enumerate(MODES)}

ALICE_STATIONS = ("a1", "a2", "a3")
PARTNER_STATIONS = ("b1", "b2", "b3")
EXIT_STATIONS = ALICE_STATIONS + PARTNER_STATIONS
# detector order used everywhere for click patterns and CSV masks
DETECTORS = tuple((s, p) for s in EXIT_STATIONS for p in POLS)
DETECTOR_MODE_INDEX = np.array([MODE_INDEX[d] for d in DETECTORS])

Occupation = Tuple[int, ...]


def mode_index(spatial: str, pol: str) -> int:
    try:
        return MODE_INDEX[(spatial, pol)]
    except KeyError:
        raise ValueError(f"unknown optical mode {spatial}{pol}") from None


def check_spatial(label: str) -> str:
    if label not in SPATIAL:
        raise ValueError(f"unknown spatial mode {label!r}; expected one of {SPATIAL}")
    return label


@dataclass(frozen=True, eq=False)
class FockVector:
    """Sparse superposition of occupation-number kets.

    ``terms`` maps occupation tuples (ordered as :data:`MODES`) to complex
    amplitudes and must not be mutated after construction. ``deficit`` is the
    squared norm known to be missing because of truncation or conditioning.
    """

    terms: Dict[Occupation, complex]
    photon_cap: int = 8
    deficit: float = 0.0

    def __post_init__(self):
        for occ in self.terms:
            if len(occ) != len(MODES):
                raise ValueError("occupation tuple has the wrong number of modes")
            if sum(occ) > self.photon_cap:
                raise ValueError(f"term with {sum(occ)} photons exceeds cap {self.photon_cap}")
        if self.norm_squared() > 1 + 1e-12:
            raise ValueError(f"squared norm {self.norm_squared()!r} exceeds 1")

    @classmethod
    def vacuum(cls, photon_cap: int = 8) -> "FockVector":
        return cls({(0,) * len(MODES): 1.0 + 0j}, photon_cap)

    @classmethod
    def from_photons(cls, photons: Mapping[Tuple[str, str], int], amplitude: complex = 1.0,
                     photon_cap: int = 8) -> "FockVector":
        occ = [0] * len(MODES)
        for (s, p), n in photons.items():
            occ[mode_index(s, p)] += int(n)
        return cls({tuple(occ): complex(amplitude)}, photon_cap)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, photons: Mapping[Tuple[str, str], int]) -> complex:
        occ = [0] * len(MODES)
        for (s, p), n in photons.items():
            occ[mode_index(s, p)] = int(n)
        return complex(self.terms.get(tuple(occ), 0.0))

    def photon_numbers(self) -> set:
        return {sum(occ) for occ in self.terms}

    def restrict(self, total_photons: int) -> "FockVector":
        """Component with exactly ``total_photons`` photons (unnormalized)."""
        kept = {o: a for o, a in self.terms.items() if sum(o) == total_photons}
        return FockVector(kept, self.photon_cap, self.deficit + self.norm_squared()
                          - sum(abs(a) ** 2 for a in kept.values()))

    def scaled(self, c: complex) -> "FockVector":
        return FockVector({o: c * a for o, a in self.terms.items()}, self.photon_cap)

    def __add__(self, other: "FockVector") -> "FockVector":
        terms = dict(self.terms)
        for o, a in other.terms.items():
            terms[o] = terms.get(o, 0.0) + a
        return FockVector(terms, max(self.photon_cap, other.photon_cap))

    def __len__(self):
        return len(self.terms)


def _poly_power(linear: Tuple[Tuple[int, complex], ...], n: int, n_out: int):
    """Expand ``(sum_j c_j x_j)^n`` into ``{exponent tuple: coefficient}``."""
    result = {(0,) * n_out: 1.0 + 0j}
    for _ in range(n):
        nxt: Dict[tuple, complex] = {}
        for exps, c in result.items():
            for j, cj in linear:
                e = list(exps)
                e[j] += 1
                e = tuple(e)
                nxt[e] = nxt.get(e, 0.0) + c * cj
        result = nxt
    return result


class LinearModeMap:
    """Linear map of creation operators ``a_i^dag -> sum_j c_ij a_j^dag``.

    Modes not listed as inputs are left untouched. Output modes may include
    input modes, since inputs are emptied before the outputs are filled.
    """

    def __init__(self, mapping: Mapping[int, Sequence[Tuple[int, complex]]]):
        self.inputs = tuple(sorted(mapping))
        outs = sorted({j for targets in mapping.values() for j, _ in targets})
        self.outputs = tuple(outs)
        pos = {j: k for k, j in enumerate(outs)}
        self.linear = {
            i: tuple((pos[j], complex(c)) for j, c in mapping[i] if c != 0) for i in self.inputs
        }
        self._cache: Dict[tuple, list] = {}

    def expansion(self, counts: tuple):
        cached = self._cache.get(counts)
        if cached is not None:
            return cached
        n_out = len(self.outputs)
        poly = {(0,) * n_out: 1.0 + 0j}
        norm = 1.0
        for i, n in zip(self.inputs, counts):
            if n == 0:
                continue
            norm *= factorial(n)
            factor = _poly_power(self.linear[i], n, n_out)
            merged: Dict[tuple, complex] = {}
            for e1, c1 in poly.items():
                for e2, c2 in factor.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    merged[e] = merged.get(e, 0.0) + c1 * c2
            poly = merged
        scale = 1 / sqrt(norm)
        cached = [(e, c * scale) for e, c in poly.items() if abs(c) > 0]
        self._cache[counts] = cached
        return cached

    def __call__(self, fv: FockVector) -> FockVector:
        out: Dict[Occupation, complex] = {}
        for occ, amp in fv.terms.items():
            counts = tuple(occ[i] for i in self.inputs)
            rest = list(occ)
            for i in self.inputs:
                rest[i] = 0
            for exps, c in self.expansion(counts):
                new = list(rest)
                factor = 1.0
                for j, k in zip(self.outputs, exps):
                    if k:
                        m = new[j]
                        factor *= sqrt(factorial(m + k) / factorial(m))
                        new[j] = m + k
                key = tuple(new)
                out[key] = out.get(key, 0.0) + amp * c * factor
        out = {o: a for o, a in out.items() if abs(a) > 1e-15}
        return FockVector(out, fv.photon_cap, fv.deficit)


@lru_cache(maxsize=None)
def beam_splitter_map(input: str, out_t: str, out_r: str, t: float) -> LinearModeMap:
    r = sqrt(max(0.0, 1 - t * t))
    mapping = {
        mode_index(input, p): [(mode_index(out_t, p), t), (mode_index(out_r, p), r)] for p in POLS
    }
    return LinearModeMap(mapping)


def apply_beam_splitter(fv: FockVector, input: str, out_t: str, out_r: str, t: float) -> FockVector:
    """Polarization-independent splitter: ``a_in^dag -> t a_t^dag + sqrt(1-t^2) a_r^dag``."""
    for label in (input, out_t, out_r):
        check_spatial(label)
    if out_t == out_r:
        raise ValueError("transmitted and reflected outputs must differ")
    if not 0 < t <= 1:
        raise ValueError(f"transmissivity must lie in (0, 1], got {t!r}")
    return beam_splitter_map(input, out_t, out_r, float(t))(fv)


@lru_cache(maxsize=None)
def polarization_map(spatial: str, u_key: tuple) -> LinearModeMap:
    u = np.array(u_key, dtype=complex).reshape(2, 2)
    h, v = mode_index(spatial, "H"), mode_index(spatial, "V")
    return LinearModeMap({h: [(h, u[0, 0]), (v, u[1, 0])], v: [(h, u[0, 1]), (v, u[1, 1])]})


def apply_polarization_unitary(fv: FockVector, spatial: str, u) -> FockVector:
    """Rotate the polarization of one spatial mode: ``|p> -> u|p>`` per photon."""
    u = np.asarray(u, dtype=complex)
    if np.allclose(u, np.eye(2), atol=1e-15, rtol=0):
        return fv
    key = tuple(u.ravel().tolist())
    return polarization_map(check_spatial(spatial), key)(fv)
