"""
Multivariate polynomials and monomial bases.

Monomials are stored sparsely as sorted tuples of ``(variable, power)`` pairs;
the dense exponent vector is produced on demand (``Poly.exponents``) and is what
the JSON form carries.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, gcd, lcm
from numbers import Number
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import ParseError, ShapeError
from src.utils.helpers import format_fraction, parse_fraction

Monomial = Tuple[Tuple[int, int], ...]
Coefficient = Union[Fraction, int, float]


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    """Product of two sparse monomials"""
    if not a:
        return b
    if not b:
        return a
    powers = dict(a)
    for var, exp in b:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_from_dense(exponents: Sequence[int]) -> Monomial:
    return tuple((i, int(e)) for i, e in enumerate(exponents) if e)


def mono_to_dense(m: Monomial, n_vars: int) -> List[int]:
    dense = [0] * n_vars
    for var, exp in m:
        dense[var] = exp
    return dense


def _normalise(c: Coefficient) -> Coefficient:
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, (int, np.integer)):
        return int(c)
    return float(c)


@dataclass(frozen=True)
class Poly:
    """Polynomial in ``n_vars`` variables with exact or binary64 coefficients"""

    n_vars: int
    terms: Dict[Monomial, Coefficient] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for mono, coef in self.terms.items():
            if coef == 0:
                continue
            if mono and mono[-1][0] >= self.n_vars:
                raise ShapeError(f"monomial uses variable {mono[-1][0]} but n_vars={self.n_vars}")
            cleaned[mono] = _normalise(coef)
        object.__setattr__(self, 'terms', cleaned)

    # Constructors

    @classmethod
    def zero(cls, n_vars: int) -> "Poly":
        return cls(n_vars, {})

    @classmethod
    def constant(cls, value: Coefficient, n_vars: int) -> "Poly":
        return cls(n_vars, {(): value})

    @classmethod
    def variable(cls, index: int, n_vars: int) -> "Poly":
        return cls(n_vars, {((index, 1),): 1})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coef: Coefficient = 1) -> "Poly":
        return cls(len(exponents), {mono_from_dense(exponents): coef})

    @classmethod
    def linear(cls, coefs: Sequence[Coefficient], constant: Coefficient = 0) -> "Poly":
        """Affine form sum_i coefs[i] x_i + constant"""
        terms: Dict[Monomial, Coefficient] = {((i, 1),): c for i, c in enumerate(coefs) if c != 0}
        if constant != 0:
            terms[()] = constant
        return cls(len(coefs), terms)

    @classmethod
    def from_quadratic(cls, Q: np.ndarray, linear: Optional[np.ndarray] = None,
                       constant: Coefficient = 0) -> "Poly":
        """x^T Q x + linear^T x + constant, with Q symmetric"""
        n = Q.shape[0]
        terms: Dict[Monomial, Coefficient] = {}
        rows, cols = np.nonzero(np.triu(Q))
        for i, j in zip(rows.tolist(), cols.tolist()):
            if i == j:
                terms[((i, 2),)] = Q[i, i].item() if hasattr(Q[i, i], 'item') else Q[i, i]
            else:
                terms[((i, 1), (j, 1))] = 2 * Q[i, j]
        if linear is not None:
            for i in np.nonzero(linear)[0].tolist():
                terms[((i, 1),)] = linear[i]
        if constant != 0:
            terms[()] = constant
        return cls(n, terms)

    # Structure

    @property
    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    @property
    def is_exact(self) -> bool:
        return all(not isinstance(c, float) for c in self.terms.values())

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def exponents(self) -> Iterator[Tuple[List[int], Coefficient]]:
        """Dense (exponent vector, coefficient) pairs in sorted monomial order"""
        for mono in sorted(self.terms):
            yield mono_to_dense(mono, self.n_vars), self.terms[mono]

    def homogeneous_part(self, degree: int) -> "Poly":
        return Poly(self.n_vars, {m: c for m, c in self.terms.items() if mono_degree(m) == degree})

    def quadratic_parts(self) -> Tuple[np.ndarray, np.ndarray, Coefficient]:
        """Return (Q, l, c) with p(x) = x^T Q x + l^T x + c, as object arrays"""
        if self.degree > 2:
            raise ShapeError(f"quadratic_parts needs degree <= 2, got {self.degree}")
        n = self.n_vars
        Q = np.zeros((n, n), dtype=object)
        lin = np.zeros(n, dtype=object)
        const: Coefficient = 0
        for mono, coef in self.terms.items():
            if not mono:
                const = coef
            elif len(mono) == 1 and mono[0][1] == 1:
                lin[mono[0][0]] = coef
            elif len(mono) == 1:
                Q[mono[0][0], mono[0][0]] = coef
            else:
                (i, _), (j, _) = mono
                half = Fraction(coef) / 2 if not isinstance(coef, float) else coef / 2
                Q[i, j] = half
                Q[j, i] = half
        return Q, lin, const

    # Arithmetic

    def _check(self, other: "Poly") -> None:
        if self.n_vars != other.n_vars:
            raise ShapeError(f"n_vars mismatch: {self.n_vars} vs {other.n_vars}")

    def __add__(self, other: Union["Poly", Number]) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.constant(other, self.n_vars)
        self._check(other)
        terms = dict(self.terms)
        for mono, coef in other.terms.items():
            terms[mono] = terms.get(mono, 0) + coef
        return Poly(self.n_vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.n_vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Union["Poly", Number]) -> "Poly":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Poly":
        return (-self) + other

    def __mul__(self, other: Union["Poly", Number]) -> "Poly":
        if not isinstance(other, Poly):
            if other == 0:
                return Poly.zero(self.n_vars)
            return Poly(self.n_vars, {m: c * other for m, c in self.terms.items()})
        self._check(other)
        terms: Dict[Monomial, Coefficient] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                key = mono_mul(ma, mb)
                terms[key] = terms.get(key, 0) + ca * cb
        return Poly(self.n_vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        result = Poly.constant(1, self.n_vars)
        for _ in range(k):
            result = result * self
        return result

    def primitive(self) -> "Poly":
        """Exact polynomial scaled to coprime integer coefficients with positive leading term"""
        if not self.is_exact or not self.terms:
            return self
        coefs = [Fraction(c) for c in self.terms.values()]
        den = lcm(*[c.denominator for c in coefs])
        ints = [int(c * den) for c in coefs]
        g = gcd(*ints)
        lead_mono = max(self.terms, key=lambda m: (mono_degree(m), tuple(-v for v, _ in m)))
        sign = 1 if Fraction(self.terms[lead_mono]) > 0 else -1
        return self * Fraction(sign * den, g)

    # Evaluation

    def evaluate(self, point: Sequence) -> Coefficient:
        """Evaluate at a point; exact when coefficients and point are exact"""
        if len(point) != self.n_vars:
            raise ShapeError(f"point has {len(point)} coordinates, polynomial has {self.n_vars} variables")
        total: Coefficient = 0
        for mono, coef in self.terms.items():
            value = coef
            for var, exp in mono:
                value = value * point[var] ** exp
            total = total + value
        return total

    def _batch_layout(self):
        constant = 0.0
        coefs, variables, powers, starts = [], [], [], []
        for mono, coef in self.terms.items():
            if not mono:
                constant += float(coef)
                continue
            starts.append(len(variables))
            for var, exp in mono:
                variables.append(var)
                powers.append(exp)
            coefs.append(float(coef))
        return constant, np.array(coefs), np.array(variables, dtype=np.intp), \
            np.array(powers, dtype=float), np.array(starts, dtype=np.intp)

    def evaluate_batch(self, points: np.ndarray, with_scale: bool = False):
        """
        Evaluate at every row of ``points`` in binary64.

        With ``with_scale`` also return the sum of absolute term values per point,
        the natural denominator for relative residuals.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n_vars:
            raise ShapeError(f"points have {points.shape[1]} coordinates, polynomial has {self.n_vars} variables")
        constant, coefs, variables, powers, starts = self._batch_layout()
        if len(coefs):
            factors = points[:, variables] ** powers
            products = np.multiply.reduceat(factors, starts, axis=1)
            values = products @ coefs + constant
            scale = np.abs(products) @ np.abs(coefs) + abs(constant)
        else:
            values = np.full(points.shape[0], constant)
            scale = np.full(points.shape[0], abs(constant))
        return (values, scale) if with_scale else values

    # Serialisation

    def to_dict(self) -> Dict:
        """Poly JSON document"""
        terms = []
        for exps, coef in self.exponents():
            if isinstance(coef, float):
                terms.append({'exp': exps, 'coef': coef})
            else:
                terms.append({'exp': exps, 'coef': format_fraction(Fraction(coef))})
        return {'n_vars': self.n_vars, 'terms': terms}

    @classmethod
    def from_dict(cls, doc: Dict) -> "Poly":
        try:
            n_vars = int(doc['n_vars'])
            terms: Dict[Monomial, Coefficient] = {}
            for term in doc['terms']:
                exps = term['exp']
                if len(exps) != n_vars:
                    raise ParseError(f"exponent vector of length {len(exps)} for n_vars={n_vars}")
                if any(int(e) < 0 for e in exps):
                    raise ParseError("negative exponent")
                coef = term['coef']
                value = float(coef) if isinstance(coef, float) else parse_fraction(coef)
                key = mono_from_dense(exps)
                terms[key] = terms.get(key, 0) + value
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed Poly document: {e}") from e
        return cls(n_vars, terms)

    def to_string(self, var_prefix: str = 'z', one_based: bool = True) -> str:
        """Human-readable form, e.g. 'z14 - z18 + z23 - z29'"""
        if not self.terms:
            return '0'
        parts = []
        for mono in sorted(self.terms, key=lambda m: (-mono_degree(m), m)):
            coef = self.terms[mono]
            names = []
            for var, exp in mono:
                name = f"{var_prefix}{var + 1 if one_based else var}"
                names.append(name if exp == 1 else f"{name}^{exp}")
            body = '*'.join(names)
            if not body:
                text = str(coef)
            elif coef == 1:
                text = body
            elif coef == -1:
                text = f"-{body}"
            else:
                text = f"{coef}*{body}"
            parts.append(text)
        return ' + '.join(parts).replace('+ -', '- ')

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class MonomialBasis:
    """All monomials of degree 0..max_degree in graded-lex order"""

    n_vars: int
    max_degree: int

    @property
    def size(self) -> int:
        return comb(self.n_vars + self.max_degree, self.max_degree)

    def monomials(self) -> List[Monomial]:
        monos: List[Monomial] = []
        for degree in range(self.max_degree + 1):
            for combo in combinations_with_replacement(range(self.n_vars), degree):
                powers: Dict[int, int] = {}
                for var in combo:
                    powers[var] = powers.get(var, 0) + 1
                monos.append(tuple(sorted(powers.items())))
        return monos

    def exponent_vectors(self) -> List[List[int]]:
        return [mono_to_dense(m, self.n_vars) for m in self.monomials()]

    def index(self) -> Dict[Monomial, int]:
        return {m: i for i, m in enumerate(self.monomials())}

    def vandermonde(self, points: np.ndarray) -> np.ndarray:
        """Rows = points, columns = monomials evaluated at each point"""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.n_vars:
            raise ShapeError(f"expected points with {self.n_vars} columns, got shape {points.shape}")
        columns = []
        for mono in self.monomials():
            col = np.ones(points.shape[0])
            for var, exp in mono:
                col = col * points[:, var] ** exp
            columns.append(col)
        return np.column_stack(columns)

    def poly_from_vector(self, coefs: Iterable[Coefficient]) -> Poly:
        terms = {m: c for m, c in zip(self.monomials(), coefs)}
        return Poly(self.n_vars, terms)

    def vector_from_poly(self, p: Poly) -> List[Coefficient]:
        if p.n_vars != self.n_vars:
            raise ShapeError("basis and polynomial disagree on n_vars")
        index = self.index()
        vec: List[Coefficient] = [0] * len(index)
        for mono, coef in p.terms.items():
            if mono not in index:
                raise ShapeError(f"polynomial degree {mono_degree(mono)} exceeds basis degree {self.max_degree}")
            vec[index[mono]] = coef
        return vec
