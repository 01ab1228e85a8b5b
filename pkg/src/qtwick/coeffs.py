"""Commutation coefficient tables, the two-point sampler, and normal ordering.

A table stores one base value mu(i, j) per index pair i < j together with a
positive scale t.  Every other coefficient mu_{e,e'}(i, j) over the letters
{1, *} follows from three rules: swapping the two slots inverts the value,
conjugating both letters inverts the value, and the (*, 1) entry is t times
the (*, *) entry for i < j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonPairClassError, ValidationError
from .pairings import PairPartition, class_of, cross_nest
from .wickpoly import LETTERS, QTPolynomial, check_eps

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """Finalizer of the splitmix64 generator; a fixed 64-bit mixing function."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, k: int) -> int:
    """Seed of sub-task k: splitmix64 applied to master + (k+1) steps of the
    golden-ratio increment.  Stable across versions and platforms."""
    return _splitmix64((master + (k + 1) * _GAMMA) & _MASK64)


def _uniform01(bits: int) -> float:
    # top 53 bits -> [0, 1)
    return (bits >> 11) * 2.0**-53


def _pair_rank(i: int, j: int) -> int:
    """Rank of the pair (i, j), i < j, in an ordering independent of any cutoff:
    pairs are ranked by j first, then i."""
    return (j - 1) * (j - 2) // 2 + (i - 1)


def sample_base(n: int, q: float, t: float, seed: int) -> dict[tuple[int, int], float]:
    """Draw the base coefficient for every pair i < j <= n.

    Each value is +1 or -1 with P(+1) = (1 + q/t)/2, so the mean is q/t and
    the second moment is exactly 1.  Every pair consumes its own sub-seed
    derived from its rank, which makes the sample for a smaller n a strict
    restriction of the sample for a larger one.
    """
    if t <= 0:
        raise ValidationError("need t > 0")
    if abs(q) > t:
        raise ValidationError(f"two-point law needs |q| <= t, got q={q}, t={t}")
    if n < 1:
        raise ValidationError("need n >= 1")
    p_plus = 0.5 * (1.0 + q / t)
    base = {}
    for j in range(2, n + 1):
        for i in range(1, j):
            u = _uniform01(derive_seed(seed, _pair_rank(i, j)))
            base[(i, j)] = 1.0 if u < p_plus else -1.0
    return base


class CoefficientTable:
    """Lazy family of commutation coefficients over a base map and scale t."""

    def __init__(self, base: dict[tuple[int, int], float], t: float):
        if t <= 0:
            raise ValidationError("need t > 0")
        for (i, j), v in base.items():
            if not (0 < i < j):
                raise ValidationError(f"base key ({i},{j}) must satisfy 0 < i < j")
            if v == 0:
                raise ValidationError(f"base value for ({i},{j}) must be nonzero")
        self._base = dict(base)
        self.t = float(t)

    @property
    def max_index(self) -> int:
        return max((j for _, j in self._base), default=1)

    def covers(self, n: int) -> bool:
        """True when every pair i < j <= n has a base value."""
        return all((i, j) in self._base for j in range(2, n + 1) for i in range(1, j))

    def base_value(self, i: int, j: int) -> float:
        return self._base[(i, j)]

    def lookup(self, left: str, right: str, i: int, j: int) -> float:
        """Coefficient mu_{left,right}(i, j) for i != j."""
        if left not in LETTERS or right not in LETTERS:
            raise ValueError(f"letters must be '1' or '*', got ({left!r},{right!r})")
        if i == j:
            raise ValueError("coefficients are only defined for distinct indices")
        lo, hi = (i, j) if i < j else (j, i)
        try:
            m = self._base[(lo, hi)]
        except KeyError:
            raise ValidationError(f"table has no base value for pair ({lo},{hi})") from None
        if i < j:
            if left == "*":
                return m if right == "*" else self.t * m
            return 1.0 / m if right == "1" else 1.0 / (self.t * m)
        if left == "*":
            return 1.0 / m if right == "*" else self.t * m
        return m if right == "1" else 1.0 / (self.t * m)

    def base_matrix(self, n: int) -> np.ndarray:
        """(n, n) array with entry [i-1, j-1] = base(i, j) for i < j, zeros elsewhere."""
        if not self.covers(n):
            raise ValidationError(f"table does not cover all pairs up to {n}")
        out = np.zeros((n, n))
        for j in range(2, n + 1):
            for i in range(1, j):
                out[i - 1, j - 1] = self._base[(i, j)]
        return out


def build_table(base: dict[tuple[int, int], float], t: float) -> CoefficientTable:
    return CoefficientTable(base, t)


def sampled_table(n: int, q: float, t: float, seed: int) -> CoefficientTable:
    return CoefficientTable(sample_base(n, q, t, seed), t)


@dataclass(frozen=True)
class NormalOrderResult:
    """Outcome of ordering a pair-class word into adjacent (opener, closer) blocks."""

    beta: float
    pairing: PairPartition
    pattern: str  # letters reordered pairwise: opener, closer, opener, closer, ...


def _beta_closed_form(
    values: Sequence[int], eps: str, pairing: PairPartition, table: CoefficientTable
) -> float:
    """Product over crossings and nestings of the coefficients the reordering incurs."""
    report = cross_nest(pairing)
    beta = 1.0
    for _, b, c, _ in report.crossings:
        # first pair's closer moves past the second pair's opener
        beta *= table.lookup(eps[c - 1], eps[b - 1], values[c - 1], values[b - 1])
    for _, b, c, d in report.nestings:
        # outer closer moves past the inner closer, then the inner opener
        beta *= table.lookup(eps[d - 1], eps[c - 1], values[d - 1], values[c - 1])
        beta *= table.lookup(eps[d - 1], eps[b - 1], values[d - 1], values[b - 1])
    return beta


def normal_order(
    values: Sequence[int], eps: str, table: CoefficientTable
) -> NormalOrderResult:
    """Reorder a word whose class is a pairing into adjacent pairs, collecting
    one commutation coefficient per transposition.

    Repeatedly take the leftmost remaining position and walk its partner left
    until the two are adjacent; each element passed contributes the
    coefficient of swapping (passed, partner) into (partner, passed).  The
    accumulated product is cross-checked against the closed form indexed by
    crossings and nestings, which must agree.
    """
    values = tuple(values)
    check_eps(eps)
    if len(values) != len(eps):
        raise ValueError(f"{len(values)} values but pattern of length {len(eps)}")
    partition = class_of(values)
    pairing = partition.as_pair_partition()
    if pairing is None:
        raise NonPairClassError(
            f"tuple {values!r} has class {partition}, not a perfect pairing"
        )
    work = [(values[k], eps[k]) for k in range(len(values))]
    beta = 1.0
    while work:
        head_val, _ = work[0]
        rest = work[1:]
        p = next(k for k, (v, _) in enumerate(rest) if v == head_val)
        part_val, part_eps = rest[p]
        for passed_val, passed_eps in rest[:p]:
            beta *= table.lookup(part_eps, passed_eps, part_val, passed_val)
        del rest[p]
        work = rest
    closed = _beta_closed_form(values, eps, pairing, table)
    if abs(beta - closed) > 1e-9 * max(1.0, abs(beta), abs(closed)):
        raise ArithmeticError(
            f"transposition product {beta} disagrees with crossing/nesting form {closed}"
        )
    pattern = "".join(eps[w - 1] + eps[z - 1] for w, z in pairing.pairs)
    return NormalOrderResult(beta=beta, pairing=pairing, pattern=pattern)


def pair_pattern_is_default(pairing: PairPartition, eps: str) -> bool:
    """True when every pair opens with '1' and closes with '*'."""
    check_eps(eps)
    return all(eps[w - 1] == "1" and eps[z - 1] == "*" for w, z in pairing.pairs)


def pair_limit_monomial(pairing: PairPartition, eps: str) -> QTPolynomial:
    """Limiting monomial q^cross * t^nest of a pairing class under the default
    covariance; zero unless every pair has the ('1','*') pattern."""
    check_eps(eps)
    if len(eps) != pairing.size:
        raise ValueError(
            f"pattern of length {len(eps)} for a pairing of {pairing.size} positions"
        )
    if not pair_pattern_is_default(pairing, eps):
        return QTPolynomial.zero()
    report = cross_nest(pairing)
    return QTPolynomial.monomial(report.cross, report.nest)
