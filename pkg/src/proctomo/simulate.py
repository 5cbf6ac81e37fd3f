"""Ideal outcome probabilities and finite-shot measurement records.

Copies assigned to one input state are split evenly across the J POVM sets
(N/J shots per set), and every (state, set) cell is one multinomial draw.
For non-trace-preserving processes the missing trace is modeled as an
explicit no-click outcome per cell: its counts are retained in the record but
excluded from the frequency matrix, so frequencies stay unbiased estimates of
Tr(E(rho_m) P_l).

Cell draws use a counter-based generator keyed by (seed, state, set), making
the record independent of evaluation order and safe to produce in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, ProcessMatrix
from .ensembles import InputEnsemble
from .linalg import vec
from .povms import PovmCollection

PROB_ATOL = 1e-12


@dataclass(eq=False)
class MeasurementRecord:
    """Empirical frequency matrix P-hat with its sampling metadata."""

    freq: np.ndarray
    set_sizes: tuple
    shots_per_set: int | None = None
    seed: int | None = None
    counts: np.ndarray | None = None
    lost_counts: np.ndarray | None = None
    ideal: np.ndarray | None = None

    def __post_init__(self):
        self.freq = np.asarray(self.freq, dtype=float)
        if self.freq.ndim != 2:
            raise ValueError("frequency matrix must be 2-D (states x operators)")
        if not np.all(np.isfinite(self.freq)):
            raise ValueError("frequency matrix contains non-finite entries")
        if self.freq.min() < -PROB_ATOL or self.freq.max() > 1.0 + PROB_ATOL:
            raise ValueError("frequencies must lie in [0, 1]")
        if sum(self.set_sizes) != self.freq.shape[1]:
            raise ValueError("set sizes do not match the number of frequency columns")

    @property
    def num_states(self) -> int:
        return self.freq.shape[0]

    @property
    def num_operators(self) -> int:
        return self.freq.shape[1]

    @property
    def num_sets(self) -> int:
        return len(self.set_sizes)

    @property
    def copies_per_state(self) -> int | None:
        if self.shots_per_set is None:
            return None
        return self.shots_per_set * self.num_sets

    def survival_fractions(self) -> np.ndarray:
        """Per-(state, set) sums of recorded frequencies (1 for TP sampling)."""
        out = np.empty((self.num_states, self.num_sets))
        start = 0
        for j, n in enumerate(self.set_sizes):
            out[:, j] = self.freq[:, start : start + n].sum(axis=1)
            start += n
        return out


def ideal_probabilities(process, ensemble: InputEnsemble, povm: PovmCollection) -> np.ndarray:
    """M x L matrix of Born probabilities Tr(E(rho_m) P_l)."""
    if not isinstance(process, (KrausChannel, ProcessMatrix)):
        raise TypeError(f"cannot compute probabilities for {type(process).__name__}")
    if process.d != ensemble.d or process.d != povm.d:
        raise ValueError(
            f"dimension mismatch: process d={process.d}, ensemble d={ensemble.d}, povm d={povm.d}"
        )
    outputs = np.column_stack([vec(process.apply(rho)) for rho in ensemble.states])
    probs = (povm.parameterization() @ outputs).T
    if np.abs(probs.imag).max() > 1e-10:
        raise ValueError("probabilities acquired a non-negligible imaginary part")
    return probs.real


def _cell_generator(seed: int, state: int, set_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(state, set_index))
    return np.random.Generator(np.random.Philox(ss))


def sample_record(
    probs: np.ndarray,
    copies: int,
    povm: PovmCollection,
    seed: int = 0,
    keep_ideal: bool = True,
) -> MeasurementRecord:
    """Draw a finite-shot record from ideal probabilities.

    ``copies`` is the number of copies per input state; each of the J sets
    receives floor(copies/J) shots.
    """
    probs = np.asarray(probs, dtype=float)
    m, ell = probs.shape
    if ell != povm.num_elements:
        raise ValueError("probability columns do not match the POVM elements")
    if probs.min() < -PROB_ATOL:
        raise ValueError(f"negative probability {probs.min():.3e}")
    j = povm.num_sets
    shots = int(copies) // j
    if shots < 1:
        raise ValueError(f"{copies} copies leave no shots for {j} POVM sets")
    counts = np.zeros((m, ell), dtype=np.int64)
    lost = np.zeros((m, j), dtype=np.int64)
    slices = povm.set_slices()
    for im in range(m):
        for ij, sl in enumerate(slices):
            p = np.clip(probs[im, sl], 0.0, None)
            residual = max(1.0 - p.sum(), 0.0)
            pfull = np.append(p, residual)
            pfull /= pfull.sum()
            draw = _cell_generator(seed, im, ij).multinomial(shots, pfull)
            counts[im, sl] = draw[:-1]
            lost[im, ij] = draw[-1]
    return MeasurementRecord(
        freq=counts / shots,
        set_sizes=povm.set_sizes,
        shots_per_set=shots,
        seed=seed,
        counts=counts,
        lost_counts=lost,
        ideal=probs.copy() if keep_ideal else None,
    )


def exact_record(probs: np.ndarray, povm: PovmCollection) -> MeasurementRecord:
    """Infinite-shot record: frequencies equal the ideal probabilities."""
    probs = np.asarray(probs, dtype=float)
    return MeasurementRecord(freq=probs.copy(), set_sizes=povm.set_sizes, ideal=probs.copy())
