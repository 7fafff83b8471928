"""Exact power counting for integrals of products of powers of linear functionals"""

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ParameterError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]


def _frac(value: Number) -> Fraction:
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@dataclass(frozen=True)
class Exponent:
    """Affine form sum(c_i * param_i) + constant with rational coefficients"""

    terms: Tuple[Tuple[str, Fraction], ...] = ()
    constant: Fraction = Fraction(0)

    @classmethod
    def const(cls, value: Number) -> "Exponent":
        return cls((), _frac(value))

    @classmethod
    def symbol(cls, name: str, coefficient: Number = 1) -> "Exponent":
        return cls(((name, _frac(coefficient)),), Fraction(0))

    def _as_dict(self) -> Dict[str, Fraction]:
        return dict(self.terms)

    def __add__(self, other: Union["Exponent", Number]) -> "Exponent":
        if not isinstance(other, Exponent):
            other = Exponent.const(other)
        merged = self._as_dict()
        for name, c in other.terms:
            merged[name] = merged.get(name, Fraction(0)) + c
        terms = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        return Exponent(terms, self.constant + other.constant)

    __radd__ = __add__

    def __mul__(self, k: Number) -> "Exponent":
        k = _frac(k)
        return Exponent(tuple((n, c * k) for n, c in self.terms if c * k != 0), self.constant * k)

    __rmul__ = __mul__

    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        missing = [n for n, _ in self.terms if n not in values]
        if missing:
            raise ParameterError(f"no value for exponent parameters {missing}")
        return self.constant + sum((c * _frac(values[n]) for n, c in self.terms), Fraction(0))

    def __str__(self) -> str:
        parts = [str(self.constant)] if self.constant or not self.terms else []
        parts += [f"{c}*{n}" for n, c in self.terms]
        return " + ".join(parts)


def _integer_row(row: Sequence[Number]) -> List[int]:
    fracs = [_frac(v) for v in row]
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // gcd(scale, f.denominator)
    return [int(f * scale) for f in fracs]


class _Echelon:
    """Fraction-free row echelon basis over the integers (rank over Q is preserved)"""

    def __init__(self):
        self.rows: List[Tuple[int, List[int]]] = []

    def reduce(self, row: Sequence[int]) -> List[int]:
        v = list(row)
        for col, b in self.rows:
            if v[col]:
                lead, factor = b[col], v[col]
                v = [lead * x - factor * y for x, y in zip(v, b)]
                g = reduce(gcd, v, 0)
                if g > 1:
                    v = [x // g for x in v]
        return v

    def add(self, row: Sequence[int]) -> bool:
        v = self.reduce(row)
        col = next((i for i, x in enumerate(v) if x), None)
        if col is None:
            return False
        self.rows.append((col, v))
        return True

    def spans(self, row: Sequence[int]) -> bool:
        return not any(self.reduce(row))


def exact_rank(rows: Sequence[Sequence[Number]]) -> int:
    """Rank over the rationals by fraction-free elimination"""
    basis = _Echelon()
    return sum(basis.add(_integer_row(r)) for r in rows)


@dataclass(frozen=True)
class PowerCountingProblem:
    """
    Integrand prod_k |L_k(u)|^gamma_k over u in Q^n, with labelled functionals.

    Functionals with exponent -1 usually stand for (1 + |L_k|)^-1 factors,
    which only matter at infinity.
    """

    functionals: Tuple[Tuple[Fraction, ...], ...]
    exponents: Tuple[Exponent, ...]
    variables: Tuple[str, ...]
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.functionals) != len(self.exponents):
            raise ParameterError(
                f"{len(self.functionals)} functionals but {len(self.exponents)} exponents"
            )
        for row in self.functionals:
            if len(row) != len(self.variables):
                raise ParameterError(f"functional {row} does not have {len(self.variables)} coefficients")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"L{k + 1}" for k in range(len(self.functionals))))
        object.__setattr__(self, "_int_rows", tuple(_integer_row(r) for r in self.functionals))

    @property
    def size(self) -> int:
        return len(self.functionals)

    def _basis(self, subset: Iterable[int]) -> Tuple[_Echelon, int]:
        basis = _Echelon()
        rank = sum(basis.add(self._int_rows[k]) for k in subset)
        return basis, rank

    def rank(self, subset: Iterable[int] = None) -> int:
        idx = range(self.size) if subset is None else subset
        return self._basis(idx)[1]

    def indices(self, *labels: str) -> FrozenSet[int]:
        lookup = {label: k for k, label in enumerate(self.labels)}
        try:
            return frozenset(lookup[label] for label in labels)
        except KeyError as e:
            raise IndexError(f"unknown functional {e.args[0]}") from e

    def closure(self, subset: Iterable[int]) -> FrozenSet[int]:
        """span(W) ∩ T"""
        basis, _ = self._basis(sorted(set(subset)))
        return frozenset(k for k in range(self.size) if basis.spans(self._int_rows[k]))

    def is_padded(self, subset: Iterable[int]) -> bool:
        """Every member is a combination of the others"""
        members = sorted(set(subset))
        for k in members:
            basis, _ = self._basis(j for j in members if j != k)
            if not basis.spans(self._int_rows[k]):
                return False
        return True


def _check_subset(problem: PowerCountingProblem, subset: Iterable[int]) -> FrozenSet[int]:
    members = frozenset(int(k) for k in subset)
    bad = [k for k in members if not 0 <= k < problem.size]
    if bad:
        raise IndexError(f"functionals {sorted(bad)} are not in T (size {problem.size})")
    return members


def d_inf(problem: PowerCountingProblem, subset: Iterable[int]) -> Exponent:
    """Symbolic d_inf(W) = rank(T) - rank(W) + sum of gamma_k over T - W"""
    members = _check_subset(problem, subset)
    total = Exponent.const(problem.rank() - problem.rank(sorted(members)))
    for k in range(problem.size):
        if k not in members:
            total = total + problem.exponents[k]
    return total


def power_counting_d_inf(
    problem: PowerCountingProblem,
    subset: Iterable[int],
    values: Optional[Mapping[str, Number]] = None,
) -> Union[Exponent, Fraction]:
    """
    d_inf(W) for W a subset of T, given as 0-based functional indices.

    Returns the symbolic affine form, or its exact value when parameter
    values are supplied.

    Raises:
        IndexError: W is not a subset of T
    """
    form = d_inf(problem, subset)
    return form if values is None else form.evaluate(values)


def padded_flats(problem: PowerCountingProblem, max_size: int = 20) -> List[FrozenSet[int]]:
    """All span-closed padded subsets of T, found by closure search from the empty flat"""
    if problem.size > max_size:
        raise ParameterError(f"flat enumeration is limited to |T| <= {max_size}, got {problem.size}")
    start = problem.closure([])
    seen = {start}
    queue = deque([start])
    while queue:
        flat = queue.popleft()
        covered = set(flat)
        for k in range(problem.size):
            if k in covered:
                continue
            nxt = problem.closure(flat | {k})
            covered |= nxt
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    flats = sorted((f for f in seen if problem.is_padded(f)), key=lambda f: (len(f), sorted(f)))
    logger.debug("%d flats, %d padded", len(seen), len(flats))
    return flats


def max_d_inf(
    problem: PowerCountingProblem, values: Mapping[str, Number]
) -> Tuple[FrozenSet[int], Fraction]:
    """
    Worst padded span-closed proper subset and its d_inf.

    The integral converges at infinity iff the returned value is negative.
    """
    everything = frozenset(range(problem.size))
    worst, worst_value = None, None
    for flat in padded_flats(problem):
        if flat == everything:
            continue
        value = d_inf(problem, flat).evaluate(values)
        if worst_value is None or value > worst_value:
            worst, worst_value = flat, value
    if worst is None:
        raise ParameterError("problem has no proper padded subset")
    return worst, worst_value


def _row(variables: Sequence[str], **coefficients: Number) -> Tuple[Fraction, ...]:
    return tuple(_frac(coefficients.get(v, 0)) for v in variables)


def two_line_problem(p: Number, q: Number) -> PowerCountingProblem:
    """
    The 16 functionals of the condition (H) integral for the two-line model.

    Variables u = (x1, x2, y1, y2, t1, t2, s1, s2). L1..L4 carry the filter
    singularities, L5..L8 the symbol |t1 t2|^beta |s1 s2|^beta, L9..L16 the
    (1 + |.|)^-1 factors.
    """
    v = ("x1", "x2", "y1", "y2", "t1", "t2", "s1", "s2")
    ap, aq, beta = Exponent.symbol("alpha_p", 2), Exponent.symbol("alpha_q", 2), Exponent.symbol("beta")
    rows = [
        (_row(v, x1=1, x2=p), ap),
        (_row(v, x1=1, x2=q), aq),
        (_row(v, y1=1, y2=p), ap),
        (_row(v, y1=1, y2=q), aq),
        (_row(v, t1=1), beta),
        (_row(v, t2=1), beta),
        (_row(v, s1=1), beta),
        (_row(v, s2=1), beta),
    ]
    minus_one = Exponent.const(-1)
    for k in ("1", "2"):
        rows += [
            (_row(v, **{f"x{k}": 1, f"t{k}": 1}), minus_one),
            (_row(v, **{f"y{k}": 1, f"t{k}": -1}), minus_one),
            (_row(v, **{f"x{k}": 1, f"s{k}": 1}), minus_one),
            (_row(v, **{f"y{k}": 1, f"s{k}": -1}), minus_one),
        ]
    return PowerCountingProblem(tuple(r for r, _ in rows), tuple(g for _, g in rows), v)


def product_bound_problem(dimension: int) -> PowerCountingProblem:
    """
    One coordinate of the condition (H) integral for a product-type filter.

    Variables (x, y, t, s); exponents 2 alpha / d on x and y, 2 beta / d on t
    and s, and -1 on x + t, y - t, x + s, y - s. The coordinate integral
    converges at infinity iff alpha + beta < -d/4.
    """
    v = ("x", "y", "t", "s")
    a = Exponent.symbol("alpha", Fraction(2, dimension))
    b = Exponent.symbol("beta", Fraction(2, dimension))
    minus_one = Exponent.const(-1)
    rows = [
        (_row(v, x=1), a),
        (_row(v, y=1), a),
        (_row(v, t=1), b),
        (_row(v, s=1), b),
        (_row(v, x=1, t=1), minus_one),
        (_row(v, y=1, t=-1), minus_one),
        (_row(v, x=1, s=1), minus_one),
        (_row(v, y=1, s=-1), minus_one),
    ]
    return PowerCountingProblem(tuple(r for r, _ in rows), tuple(g for _, g in rows), v)
