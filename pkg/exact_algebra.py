"""Exact algebra kernel: rationals, linear forms, homogeneous polynomials, sparse matrices.

Everything here is computed over Q. The compatibility constraints of a GKM graph
have integer coefficients, so graded dimensions over Q and over C coincide and no
extension of the ground field is ever needed.

Conventions:
- Variables are x1..xn, one per coordinate of the weight lattice.
- Monomials of a fixed degree are ordered graded-lexicographically (x1^k first);
  this order is global, so bases and file output are reproducible.
- Restricting to the hyperplane alpha = 0 eliminates the pivot variable of alpha:
  the coordinate with the largest absolute coefficient, smallest index on ties.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from gkm_errors import ZeroForm

logger = logging.getLogger(__name__)

Rational = Fraction
Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse "p/q" or "p" into a Fraction. Decimal and exponent notation are refused."""
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text)
    match = _RATIONAL_PATTERN.match(str(text))
    if not match:
        raise ValueError(f"not an exact rational: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) else 1
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def render_rational(value: Scalar) -> str:
    """Render as "p/q", or "p" for integers."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ============================================================================
# LINEAR FORMS
# ============================================================================

@dataclass(frozen=True)
class LinearForm:
    """Integer covector in the weight lattice; the value alpha_e of an axial function."""
    coefficients: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))

    @classmethod
    def of(cls, *coefficients: int) -> "LinearForm":
        return cls(tuple(coefficients))

    @classmethod
    def basis(cls, rank: int, index: int) -> "LinearForm":
        """The coordinate form x_{index+1} in the given rank."""
        return cls(tuple(1 if i == index else 0 for i in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def __getitem__(self, index: int) -> int:
        return self.coefficients[index]

    def __neg__(self) -> "LinearForm":
        return LinearForm(tuple(-c for c in self.coefficients))

    def __add__(self, other: "LinearForm") -> "LinearForm":
        self._check_rank(other)
        return LinearForm(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def evaluate(self, point: Sequence[Scalar]) -> Scalar:
        if len(point) != self.rank:
            raise ValueError(f"point has length {len(point)}, form has rank {self.rank}")
        return sum(c * x for c, x in zip(self.coefficients, point))

    def pivot_index(self) -> int:
        """Coordinate eliminated when restricting to ker(self)."""
        if self.is_zero:
            raise ZeroForm("the zero form has no pivot")
        best = max(abs(c) for c in self.coefficients)
        return next(i for i, c in enumerate(self.coefficients) if abs(c) == best)

    def ratio_to(self, other: "LinearForm") -> Optional[Fraction]:
        """Return c with other == c * self, or None. self must be nonzero."""
        self._check_rank(other)
        pivot = self.pivot_index()
        ratio = Fraction(other[pivot], self[pivot])
        if all(ratio * a == b for a, b in zip(self.coefficients, other.coefficients)):
            return ratio
        return None

    def is_proportional(self, other: "LinearForm") -> bool:
        """True when the two nonzero forms span the same line."""
        if self.is_zero or other.is_zero:
            return False
        return self.ratio_to(other) is not None

    def as_polynomial(self) -> "HomogPolynomial":
        return HomogPolynomial(
            self.rank, 1,
            {_unit_exponent(self.rank, i): Fraction(c) for i, c in enumerate(self.coefficients) if c},
        )

    def render(self) -> str:
        return self.as_polynomial().render()

    def _check_rank(self, other: "LinearForm"):
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")


def _unit_exponent(n: int, index: int) -> Exponent:
    return tuple(1 if i == index else 0 for i in range(n))


# ============================================================================
# MONOMIALS AND GRADED DIMENSIONS
# ============================================================================

def graded_dim(n: int, k: int) -> int:
    """Number of degree-k monomials in n variables, C(k+n-1, n-1)."""
    if n < 1 or k < 0:
        raise ValueError(f"graded_dim needs n >= 1 and k >= 0, got n={n}, k={k}")
    return math.comb(k + n - 1, n - 1)


@lru_cache(maxsize=None)
def monomials(n: int, k: int) -> Tuple[Exponent, ...]:
    """All degree-k exponent vectors in n variables, graded-lex order (x1^k first).

    n = 0 is allowed: one empty monomial in degree 0, none above.
    """
    if k < 0:
        return ()
    if n == 0:
        return ((),) if k == 0 else ()
    if n == 1:
        return ((k,),)
    result = []
    for first in range(k, -1, -1):
        for rest in monomials(n - 1, k - first):
            result.append((first,) + rest)
    return tuple(result)


@lru_cache(maxsize=None)
def monomial_index(n: int, k: int) -> Dict[Exponent, int]:
    return {exps: i for i, exps in enumerate(monomials(n, k))}


# ============================================================================
# HOMOGENEOUS POLYNOMIALS
# ============================================================================

@dataclass(frozen=True)
class HomogPolynomial:
    """Element of S(t*)^k: a homogeneous polynomial of fixed degree with rational coefficients.

    Absent monomials have coefficient zero; zero coefficients are never stored.
    Treat instances as immutable.
    """
    nvars: int
    degree: int
    coefficients: Dict[Exponent, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.nvars < 0 or self.degree < 0:
            raise ValueError(f"invalid polynomial shape nvars={self.nvars}, degree={self.degree}")
        cleaned = {}
        for exps, coef in self.coefficients.items():
            exps = tuple(exps)
            if len(exps) != self.nvars or sum(exps) != self.degree or min(exps, default=0) < 0:
                raise ValueError(f"monomial {exps} does not have degree {self.degree} in {self.nvars} variables")
            coef = Fraction(coef)
            if coef:
                cleaned[exps] = coef
        object.__setattr__(self, "coefficients", cleaned)

    @classmethod
    def zero(cls, nvars: int, degree: int) -> "HomogPolynomial":
        return cls(nvars, degree, {})

    @classmethod
    def constant(cls, nvars: int, value: Scalar = 1) -> "HomogPolynomial":
        return cls(nvars, 0, {(0,) * nvars: Fraction(value)})

    @classmethod
    def monomial(cls, exps: Exponent, coefficient: Scalar = 1) -> "HomogPolynomial":
        return cls(len(exps), sum(exps), {tuple(exps): Fraction(coefficient)})

    @classmethod
    def from_vector(cls, nvars: int, degree: int, vector: Sequence[Scalar]) -> "HomogPolynomial":
        """Inverse of to_vector: coefficients listed in the global monomial order."""
        basis = monomials(nvars, degree)
        if len(vector) != len(basis):
            raise ValueError(f"expected {len(basis)} coefficients, got {len(vector)}")
        return cls(nvars, degree, dict(zip(basis, vector)))

    def to_vector(self) -> List[Fraction]:
        return [self.coefficients.get(exps, Fraction(0)) for exps in monomials(self.nvars, self.degree)]

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, exps: Exponent) -> Fraction:
        return self.coefficients.get(tuple(exps), Fraction(0))

    def terms(self) -> List[Tuple[Exponent, Fraction]]:
        """Nonzero terms in the global monomial order."""
        index = monomial_index(self.nvars, self.degree)
        return sorted(self.coefficients.items(), key=lambda item: index[item[0]])

    def _check_shape(self, other: "HomogPolynomial"):
        if other.nvars != self.nvars or other.degree != self.degree:
            raise ValueError(
                f"shape mismatch: ({self.nvars} vars, deg {self.degree}) vs ({other.nvars} vars, deg {other.degree})"
            )

    def __add__(self, other: "HomogPolynomial") -> "HomogPolynomial":
        self._check_shape(other)
        merged = dict(self.coefficients)
        for exps, coef in other.coefficients.items():
            merged[exps] = merged.get(exps, Fraction(0)) + coef
        return HomogPolynomial(self.nvars, self.degree, merged)

    def __neg__(self) -> "HomogPolynomial":
        return HomogPolynomial(self.nvars, self.degree, {e: -c for e, c in self.coefficients.items()})

    def __sub__(self, other: "HomogPolynomial") -> "HomogPolynomial":
        return self + (-other)

    def scale(self, factor: Scalar) -> "HomogPolynomial":
        factor = Fraction(factor)
        return HomogPolynomial(self.nvars, self.degree, {e: factor * c for e, c in self.coefficients.items()})

    def __mul__(self, other: Union["HomogPolynomial", Scalar]) -> "HomogPolynomial":
        if not isinstance(other, HomogPolynomial):
            return self.scale(other)
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        product: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.coefficients.items():
            for e2, c2 in other.coefficients.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                product[exps] = product.get(exps, Fraction(0)) + c1 * c2
        return HomogPolynomial(self.nvars, self.degree + other.degree, product)

    def __rmul__(self, other: Scalar) -> "HomogPolynomial":
        return self.scale(other)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"point has length {len(point)}, polynomial has {self.nvars} variables")
        total = Fraction(0)
        for exps, coef in self.coefficients.items():
            term = coef
            for x, e in zip(point, exps):
                if e:
                    term *= Fraction(x) ** e
            total += term
        return total

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        """Human-readable form, e.g. "x1^2 - 1/2*x2*x3"."""
        if not self.coefficients:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        pieces = []
        for exps, coef in self.terms():
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            magnitude = abs(coef)
            if not factors:
                body = render_rational(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = render_rational(magnitude) + "*" + "*".join(factors)
            sign = "-" if coef < 0 else "+"
            if not pieces:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f"{sign} {body}")
        return " ".join(pieces)

    def __str__(self) -> str:
        return self.render()


# ============================================================================
# RESTRICTION TO ker(alpha)
# ============================================================================

@lru_cache(maxsize=4096)
def _substitution_powers(alpha: LinearForm, power: int) -> HomogPolynomial:
    """(x_pivot expressed on ker alpha) ** power, in the n-1 remaining variables."""
    n = alpha.rank
    pivot = alpha.pivot_index()
    if power == 0:
        return HomogPolynomial.constant(n - 1)
    substitute = HomogPolynomial(
        n - 1, 1,
        {
            _unit_exponent(n - 1, j if j < pivot else j - 1): Fraction(-alpha[j], alpha[pivot])
            for j in range(n) if j != pivot and alpha[j]
        },
    )
    return _substitution_powers(alpha, power - 1) * substitute


@lru_cache(maxsize=65536)
def restrict_monomial(exps: Exponent, alpha: LinearForm) -> HomogPolynomial:
    """Restriction of a single monomial to the hyperplane alpha = 0."""
    if alpha.is_zero:
        raise ZeroForm("cannot restrict to the kernel of the zero form")
    pivot = alpha.pivot_index()
    rest = exps[:pivot] + exps[pivot + 1:]
    return HomogPolynomial.monomial(rest) * _substitution_powers(alpha, exps[pivot])


def restrict_mod_form(p: HomogPolynomial, alpha: LinearForm) -> HomogPolynomial:
    """Restrict p to ker(alpha), a polynomial in n-1 variables.

    The result is zero exactly when alpha divides p. The remaining variables keep
    their relative order with the pivot variable removed.
    """
    if alpha.is_zero:
        raise ZeroForm("cannot restrict to the kernel of the zero form")
    if p.nvars != alpha.rank:
        raise ValueError(f"polynomial has {p.nvars} variables, form has rank {alpha.rank}")
    accumulated: Dict[Exponent, Fraction] = {}
    for exps, coef in p.coefficients.items():
        for image_exps, image_coef in restrict_monomial(exps, alpha).coefficients.items():
            accumulated[image_exps] = accumulated.get(image_exps, Fraction(0)) + coef * image_coef
    return HomogPolynomial(p.nvars - 1, p.degree, accumulated)


# ============================================================================
# SPARSE RATIONAL MATRICES
# ============================================================================

IntRow = Dict[int, int]


def _primitive(row: IntRow) -> IntRow:
    content = math.gcd(*row.values()) if row else 1
    if content > 1:
        return {c: v // content for c, v in row.items()}
    return row


def _integer_row(row: Mapping[int, Fraction]) -> IntRow:
    denominator = math.lcm(*(v.denominator for v in row.values())) if row else 1
    return _primitive({c: int(v * denominator) for c, v in row.items()})


def _eliminate(row: IntRow, pivot_row: IntRow, column: int) -> IntRow:
    """Fraction-free step: a*row - b*pivot_row clears `column`; result made primitive."""
    a = pivot_row[column]
    b = row[column]
    g = math.gcd(a, b)
    a, b = a // g, b // g
    combined: IntRow = {c: a * v for c, v in row.items()}
    for c, v in pivot_row.items():
        value = combined.get(c, 0) - b * v
        if value:
            combined[c] = value
        else:
            combined.pop(c, None)
    return _primitive(combined)


class RationalMatrix:
    """Sparse rows x cols matrix over Q; absent entries are zero.

    Rank and kernel use fraction-free elimination on integer rows (denominators
    cleared per row, each row kept primitive), so intermediate coefficients
    stay bounded and results are exact.
    """

    def __init__(self, rows: int, cols: int, entries: Optional[Mapping[Tuple[int, int], Scalar]] = None):
        if rows < 0 or cols < 0:
            raise ValueError(f"invalid shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self._data: Dict[int, Dict[int, Fraction]] = {}
        for (i, j), value in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            value = Fraction(value)
            if value:
                self._data.setdefault(i, {})[j] = value

    @classmethod
    def from_rows(cls, dense_rows: Sequence[Sequence[Scalar]], cols: Optional[int] = None) -> "RationalMatrix":
        if cols is None:
            cols = len(dense_rows[0]) if dense_rows else 0
        entries = {}
        for i, row in enumerate(dense_rows):
            if len(row) != cols:
                raise ValueError(f"row {i} has length {len(row)}, expected {cols}")
            for j, value in enumerate(row):
                if value:
                    entries[(i, j)] = value
        return cls(len(dense_rows), cols, entries)

    @classmethod
    def from_sparse_rows(cls, cols: int, sparse_rows: Iterable[Mapping[int, Scalar]]) -> "RationalMatrix":
        entries = {}
        count = 0
        for i, row in enumerate(sparse_rows):
            count = i + 1
            for j, value in row.items():
                entries[(i, j)] = value
        return cls(count, cols, entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self._data.values())

    def entry(self, i: int, j: int) -> Fraction:
        return self._data.get(i, {}).get(j, Fraction(0))

    def to_dense(self) -> List[List[Fraction]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def apply(self, vector: Sequence[Scalar]) -> List[Fraction]:
        if len(vector) != self.cols:
            raise ValueError(f"vector has length {len(vector)}, matrix has {self.cols} columns")
        return [
            sum((v * vector[j] for j, v in self._data.get(i, {}).items()), Fraction(0))
            for i in range(self.rows)
        ]

    def _reduced_echelon(self, column_order: Optional[Sequence[int]] = None) -> Dict[int, IntRow]:
        """Integer reduced row echelon form keyed by pivot column."""
        order = list(column_order) if column_order is not None else list(range(self.cols))
        if sorted(order) != list(range(self.cols)):
            raise ValueError("column_order must be a permutation of the columns")
        position = {col: idx for idx, col in enumerate(order)}

        pivots: Dict[int, IntRow] = {}
        for i in sorted(self._data):
            row = _integer_row(self._data[i])
            while row:
                lead = min(row, key=position.__getitem__)
                if lead not in pivots:
                    break
                row = _eliminate(row, pivots[lead], lead)
            if not row:
                continue
            lead = min(row, key=position.__getitem__)
            if row[lead] < 0:
                row = {c: -v for c, v in row.items()}
            pivots[lead] = row

        # back substitution, last pivot first
        for col in sorted(pivots, key=position.__getitem__, reverse=True):
            pivot_row = pivots[col]
            for other_col, other_row in pivots.items():
                if other_col != col and col in other_row:
                    reduced = _eliminate(other_row, pivot_row, col)
                    if reduced[other_col] < 0:
                        reduced = {c: -v for c, v in reduced.items()}
                    pivots[other_col] = reduced
        return pivots

    def rank(self, column_order: Optional[Sequence[int]] = None) -> int:
        return len(self._reduced_echelon(column_order))

    def kernel_basis(self, column_order: Optional[Sequence[int]] = None) -> List[List[Fraction]]:
        """One basis vector per free column (ascending column index)."""
        pivots = self._reduced_echelon(column_order)
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for f in free:
            vector = [Fraction(0)] * self.cols
            vector[f] = Fraction(1)
            for col, row in pivots.items():
                if f in row:
                    vector[col] = -Fraction(row[f], row[col])
            basis.append(vector)
        return basis

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def kernel_dim(matrix: RationalMatrix, column_order: Optional[Sequence[int]] = None) -> Tuple[int, List[List[Fraction]]]:
    """Kernel dimension (cols - rank) together with an exact kernel basis."""
    basis = matrix.kernel_basis(column_order)
    logger.debug(f"kernel of {matrix!r}: dim {len(basis)}")
    return len(basis), basis


def rank_of_forms(forms: Sequence[LinearForm]) -> int:
    """Rank of the span of the given linear forms."""
    if not forms:
        return 0
    return RationalMatrix.from_rows([f.coefficients for f in forms]).rank()


def normalize_leading(vector: Sequence[Fraction]) -> List[Fraction]:
    """Scale so that the first nonzero entry is 1."""
    lead = next((v for v in vector if v), None)
    if lead is None:
        return list(vector)
    return [v / lead for v in vector]
