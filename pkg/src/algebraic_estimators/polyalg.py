"""Sparse multivariate polynomials over exact rationals or complex floats."""

from __future__ import annotations
import re
import math
import enum
from typing import Union, Mapping, Iterable, Iterator, Sequence
from fractions import Fraction
from dataclasses import dataclass


Exponents = tuple[int, ...]
Scalar = Union[int, Fraction, complex]

ETA_PATTERN = re.compile(r"eta\d+")
DATA_PATTERN = re.compile(r"x\d+")
NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

# Degree reported for the zero polynomial.
ZERO_DEGREE = -math.inf


class PolynomialError(ValueError):
    """Raised on domain/table mismatches, unbound variables and malformed polynomial text."""


class Domain(enum.Enum):
    """Coefficient domain of a polynomial."""

    QQ = "exact-rational"
    CC = "complex-float"


@dataclass(frozen=True)
class VariableTable:
    """Ordered variable names shared by every polynomial of one system.

    Table order doubles as lex priority: the first name is the largest variable.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        """Validate names and the η/X block pairing."""
        if len(set(self.names)) != len(self.names):
            raise PolynomialError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not NAME_PATTERN.fullmatch(name):
                raise PolynomialError(f"invalid variable name {name!r}")
        eta, data = self.eta_block, self.data_block
        if eta and data and len(eta) != len(data):
            raise PolynomialError(f"eta block has {len(eta)} names but x block has {len(data)}")

    @classmethod
    def standard(cls, d: int, aux: Sequence[str] = ()) -> VariableTable:
        """Return eta1..etad, x1..xd followed by auxiliary names."""
        return cls(tuple(f"eta{i}" for i in range(1, d + 1)) + tuple(f"x{i}" for i in range(1, d + 1)) + tuple(aux))

    @property
    def eta_block(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if ETA_PATTERN.fullmatch(n))

    @property
    def data_block(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if DATA_PATTERN.fullmatch(n))

    @property
    def aux_block(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if not ETA_PATTERN.fullmatch(n) and not DATA_PATTERN.fullmatch(n))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        """Return the position of ``name``."""
        try:
            return self.names.index(name)
        except ValueError:
            raise PolynomialError(f"unknown variable {name!r}; table has {self.names}") from None

    def extend(self, *names: str) -> VariableTable:
        """Append names that are not present yet."""
        return VariableTable(self.names + tuple(n for n in names if n not in self.names))

    def reordered(self, priority: Sequence[str]) -> VariableTable:
        """Move ``priority`` names to the front, keeping the rest in place."""
        head = tuple(priority)
        for name in head:
            self.index(name)
        return VariableTable(head + tuple(n for n in self.names if n not in head))


@dataclass(frozen=True)
class Monomial:
    """Sparse monomial: (variable index, exponent) pairs, no zero exponent stored."""

    exponents: tuple[tuple[int, int], ...]

    @classmethod
    def from_dense(cls, exps: Exponents) -> Monomial:
        return cls(tuple((i, e) for i, e in enumerate(exps) if e))

    def to_dense(self, nvars: int) -> Exponents:
        out = [0] * nvars
        for i, e in self.exponents:
            out[i] = e
        return tuple(out)

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def render(self, table: VariableTable) -> str:
        """Render in exchange grammar, ``1`` for the unit monomial."""
        if not self.exponents:
            return "1"
        return " * ".join(table.names[i] if e == 1 else f"{table.names[i]}^{e}" for i, e in self.exponents)


def monomial_mul(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


def monomial_div(a: Exponents, b: Exponents) -> Exponents | None:
    """Return a/b, or None when b does not divide a."""
    out = tuple(x - y for x, y in zip(a, b))
    return out if min(out, default=0) >= 0 else None


def monomial_lcm(a: Exponents, b: Exponents) -> Exponents:
    return tuple(max(x, y) for x, y in zip(a, b))


def monomial_gcd(a: Exponents, b: Exponents) -> Exponents:
    return tuple(min(x, y) for x, y in zip(a, b))


def monomial_divides(a: Exponents, b: Exponents) -> bool:
    """Return True when a divides b."""
    return all(x <= y for x, y in zip(a, b))


@dataclass(frozen=True)
class MonomialOrder:
    """Pure lex order over a variable table with an explicit priority (highest first)."""

    table: VariableTable
    priority: tuple[int, ...]
    kind: str = "pure-lex"

    @classmethod
    def lex(cls, table: VariableTable, priority: Sequence[str] | None = None) -> MonomialOrder:
        """Lex order; ``priority`` defaults to table order and may name a prefix of it."""
        if priority is None:
            return cls(table, tuple(range(len(table))))
        head = [table.index(n) for n in priority]
        return cls(table, tuple(head) + tuple(i for i in range(len(table)) if i not in head))

    @property
    def is_table_order(self) -> bool:
        return self.priority == tuple(range(len(self.table)))

    @property
    def priority_names(self) -> tuple[str, ...]:
        return tuple(self.table.names[i] for i in self.priority)

    def key(self, exps: Exponents) -> Exponents:
        """Sort key: larger key means larger monomial."""
        if self.is_table_order:
            return exps
        return tuple(exps[i] for i in self.priority)

    def compare(self, a: Exponents, b: Exponents) -> int:
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def header(self) -> str:
        return "# order lex " + " > ".join(self.priority_names)


def _coerce(value: object, domain: Domain) -> Fraction | complex:
    if domain is Domain.QQ:
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise PolynomialError(f"coefficient {value!r} is not exact; use int or Fraction")
        return Fraction(value)
    if isinstance(value, (int, float, Fraction, complex)):
        return complex(value)
    raise PolynomialError(f"coefficient {value!r} is not a number")


class Polynomial:
    """Immutable polynomial in canonical sparse form.

    ``terms`` maps dense exponent tuples (aligned with ``table``) to nonzero coefficients.
    Equality is structural, so two polynomials are equal iff their term maps are.
    """

    __slots__ = ("table", "terms", "domain")

    table: VariableTable
    terms: Mapping[Exponents, Fraction | complex]
    domain: Domain

    def __init__(
        self,
        table: VariableTable,
        terms: Mapping[Exponents, object] | None = None,
        domain: Domain = Domain.QQ,
    ) -> None:
        """Build a polynomial, dropping zero coefficients and validating exponents."""
        clean: dict[Exponents, Fraction | complex] = {}
        n = len(table)
        for exps, coeff in (terms or {}).items():
            if len(exps) != n or min(exps, default=0) < 0:
                raise PolynomialError(f"exponent vector {exps} does not fit table {table.names}")
            value = _coerce(coeff, domain)
            if value != 0:
                key = tuple(int(e) for e in exps)
                total = clean.get(key, 0) + value
                if total != 0:
                    clean[key] = total
                else:
                    clean.pop(key, None)
        self._init(table, clean, domain)

    def _init(self, table: VariableTable, terms: dict[Exponents, Fraction | complex], domain: Domain) -> None:
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "domain", domain)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def _raw(cls, table: VariableTable, terms: dict[Exponents, Fraction | complex], domain: Domain) -> Polynomial:
        out = cls.__new__(cls)
        out._init(table, terms, domain)
        return out

    # constructors

    @classmethod
    def zero(cls, table: VariableTable, domain: Domain = Domain.QQ) -> Polynomial:
        return cls._raw(table, {}, domain)

    @classmethod
    def constant(cls, table: VariableTable, value: Scalar, domain: Domain = Domain.QQ) -> Polynomial:
        return cls(table, {(0,) * len(table): value}, domain)

    @classmethod
    def variable(cls, table: VariableTable, name: str, domain: Domain = Domain.QQ) -> Polynomial:
        exps = [0] * len(table)
        exps[table.index(name)] = 1
        return cls(table, {tuple(exps): 1}, domain)

    @classmethod
    def variables(cls, table: VariableTable, *names: str) -> tuple[Polynomial, ...]:
        return tuple(cls.variable(table, n) for n in names)

    # basic properties

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Exponents, Fraction | complex]]:
        return iter(self.terms.items())

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, complex)) and not isinstance(other, bool):
            return self == Polynomial.constant(self.table, other, self.domain)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.table == other.table and self.domain is other.domain and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.table, self.domain, frozenset(self.terms.items())))

    @property
    def degree(self) -> int | float:
        """Total degree, ``ZERO_DEGREE`` for zero."""
        return max((sum(e) for e in self.terms), default=ZERO_DEGREE)

    def degree_in(self, names: Iterable[str]) -> int | float:
        idx = [self.table.index(n) for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=ZERO_DEGREE)

    def free_variables(self) -> tuple[str, ...]:
        used = [False] * len(self.table)
        for exps in self.terms:
            for i, e in enumerate(exps):
                used[i] = used[i] or e > 0
        return tuple(n for n, u in zip(self.table.names, used) if u)

    def constant_term(self) -> Fraction | complex:
        return self.terms.get((0,) * len(self.table), Fraction(0) if self.domain is Domain.QQ else 0j)

    # arithmetic

    def _lift(self, other: object) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.table != self.table:
                raise PolynomialError(f"variable table mismatch: {self.table.names} vs {other.table.names}")
            if other.domain is not self.domain:
                raise PolynomialError(f"domain mismatch: {self.domain.value} vs {other.domain.value}")
            return other
        if isinstance(other, (int, Fraction, complex, float)) and not isinstance(other, bool):
            return Polynomial.constant(self.table, other, self.domain)  # type: ignore[arg-type]
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    def __add__(self, other: object) -> Polynomial:
        q = self._lift(other)
        out = dict(self.terms)
        for exps, c in q.terms.items():
            total = out.get(exps, 0) + c
            if total != 0:
                out[exps] = total
            else:
                out.pop(exps, None)
        return Polynomial._raw(self.table, out, self.domain)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw(self.table, {e: -c for e, c in self.terms.items()}, self.domain)

    def __sub__(self, other: object) -> Polynomial:
        return self + (-self._lift(other))

    def __rsub__(self, other: object) -> Polynomial:
        return self._lift(other) - self

    def __mul__(self, other: object) -> Polynomial:
        q = self._lift(other)
        out: dict[Exponents, Fraction | complex] = {}
        for ea, ca in self.terms.items():
            for eb, cb in q.terms.items():
                exps = monomial_mul(ea, eb)
                total = out.get(exps, 0) + ca * cb
                if total != 0:
                    out[exps] = total
                else:
                    out.pop(exps, None)
        return Polynomial._raw(self.table, out, self.domain)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> Polynomial:
        """Divide by a nonzero scalar."""
        if isinstance(other, Polynomial) or isinstance(other, bool):
            raise TypeError("polynomial division needs divide_with_remainder or exact_quotient")
        value = _coerce(other, self.domain)
        if value == 0:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self.scale(1 / value if self.domain is Domain.CC else Fraction(1) / value)

    def __pow__(self, n: int) -> Polynomial:
        if n < 0:
            raise PolynomialError("negative powers are not polynomials")
        result = Polynomial.constant(self.table, 1, self.domain)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, factor: Scalar) -> Polynomial:
        value = _coerce(factor, self.domain)
        if value == 0:
            return Polynomial.zero(self.table, self.domain)
        return Polynomial._raw(self.table, {e: c * value for e, c in self.terms.items()}, self.domain)

    def mul_term(self, exps: Exponents, coeff: Fraction | complex) -> Polynomial:
        """Multiply by a single term ``coeff * x^exps``."""
        if coeff == 0:
            return Polynomial.zero(self.table, self.domain)
        return Polynomial._raw(
            self.table, {monomial_mul(e, exps): c * coeff for e, c in self.terms.items()}, self.domain
        )

    # order-dependent views

    def leading_exponents(self, order: MonomialOrder) -> Exponents:
        if not self.terms:
            raise PolynomialError("the zero polynomial has no leading term")
        return max(self.terms, key=order.key)

    def leading_term(self, order: MonomialOrder) -> tuple[Fraction | complex, Monomial]:
        exps = self.leading_exponents(order)
        return self.terms[exps], Monomial.from_dense(exps)

    def leading_coefficient(self, order: MonomialOrder) -> Fraction | complex:
        return self.terms[self.leading_exponents(order)]

    def monic(self, order: MonomialOrder) -> Polynomial:
        if not self.terms:
            return self
        lc = self.leading_coefficient(order)
        return self.scale(1 / lc if self.domain is Domain.CC else Fraction(1) / lc)

    def sorted_terms(self, order: MonomialOrder | None = None) -> list[tuple[Exponents, Fraction | complex]]:
        """Terms from largest to smallest."""
        key = order.key if order is not None else None
        return sorted(self.terms.items(), key=(lambda t: key(t[0])) if key else (lambda t: t[0]), reverse=True)

    # calculus and substitution

    def diff(self, name: str) -> Polynomial:
        i = self.table.index(name)
        out: dict[Exponents, Fraction | complex] = {}
        for exps, c in self.terms.items():
            if exps[i]:
                lowered = exps[:i] + (exps[i] - 1,) + exps[i + 1 :]
                out[lowered] = c * exps[i]
        return Polynomial._raw(self.table, out, self.domain)

    def eval(self, assignment: Mapping[str, Scalar]) -> Fraction | complex:
        """Evaluate with every used variable bound; exact in the rational domain."""
        used = self.free_variables()
        missing = [n for n in used if n not in assignment]
        if missing:
            raise PolynomialError(f"missing bindings for {missing}")
        values = {self.table.index(n): assignment[n] for n in used}
        if self.domain is Domain.QQ:
            values = {i: _coerce(v, Domain.QQ) for i, v in values.items()}
        return _horner(self.terms, values, 0, len(self.table), self.domain)

    def substitute(self, assignment: Mapping[str, Polynomial | Scalar]) -> Polynomial:
        """Replace variables by scalars or polynomials over the same table and domain."""
        subs = {self.table.index(n): v for n, v in assignment.items()}
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, e: int) -> Polynomial:
            if (i, e) not in powers:
                powers[(i, e)] = self._lift(subs[i]) ** e
            return powers[(i, e)]

        result = Polynomial.zero(self.table, self.domain)
        for exps, c in self.terms.items():
            kept = tuple(0 if i in subs else e for i, e in enumerate(exps))
            term = Polynomial._raw(self.table, {kept: c}, self.domain)
            for i, e in enumerate(exps):
                if e and i in subs:
                    term = term * power(i, e)
            result = result + term
        return result

    # conversions

    def to_table(self, table: VariableTable) -> Polynomial:
        """Re-embed into another table that contains every used variable."""
        if table == self.table:
            return self
        mapping = []
        for i, name in enumerate(self.table.names):
            mapping.append(table.names.index(name) if name in table else -1)
        out: dict[Exponents, Fraction | complex] = {}
        for exps, c in self.terms.items():
            new = [0] * len(table)
            for i, e in enumerate(exps):
                if e:
                    if mapping[i] < 0:
                        raise PolynomialError(f"variable {self.table.names[i]!r} missing from target table")
                    new[mapping[i]] = e
            out[tuple(new)] = c
        return Polynomial._raw(table, out, self.domain)

    def to_complex(self) -> Polynomial:
        if self.domain is Domain.CC:
            return self
        return Polynomial._raw(self.table, {e: complex(c) for e, c in self.terms.items()}, Domain.CC)

    def coefficients_as_fractions(self) -> dict[Exponents, Fraction]:
        if self.domain is not Domain.QQ:
            raise PolynomialError("complex-float polynomial has no exact coefficients")
        return dict(self.terms)  # type: ignore[arg-type]

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r}, domain={self.domain.name})"


def _horner(
    terms: Mapping[Exponents, Fraction | complex],
    values: Mapping[int, Fraction | complex | int],
    var: int,
    nvars: int,
    domain: Domain,
) -> Fraction | complex:
    """Nested Horner evaluation, one variable per recursion level."""
    if var == nvars or not terms:
        return sum(terms.values(), Fraction(0) if domain is Domain.QQ else 0j)
    if var not in values:
        return _horner(terms, values, var + 1, nvars, domain)
    groups: dict[int, dict[Exponents, Fraction | complex]] = {}
    for exps, c in terms.items():
        groups.setdefault(exps[var], {})[exps] = c
    x = values[var]
    acc: Fraction | complex = Fraction(0) if domain is Domain.QQ else 0j
    top = max(groups)
    for e in range(top, -1, -1):
        acc = acc * x
        if e in groups:
            acc = acc + _horner(groups[e], values, var + 1, nvars, domain)
    return acc


# operation-level API


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    """Apply ``add``, ``sub`` or ``mul``."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise PolynomialError(f"unknown operation {op!r}")


def poly_eval(p: Polynomial, assignment: Mapping[str, Scalar]) -> Fraction | complex:
    return p.eval(assignment)


def poly_diff(p: Polynomial, name: str) -> Polynomial:
    return p.diff(name)


def leading_term(p: Polynomial, order: MonomialOrder) -> tuple[Fraction | complex, Monomial]:
    return p.leading_term(order)


def degree_in(p: Polynomial, names: Iterable[str]) -> int | float:
    return p.degree_in(names)


def divide_with_remainder(
    f: Polynomial, divisors: Sequence[Polynomial], order: MonomialOrder
) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division: f = sum(q_i * g_i) + r, no term of r divisible by any LT(g_i)."""
    if any(g.is_zero for g in divisors):
        raise PolynomialError("division by the zero polynomial")
    leads = [(g.leading_exponents(order), g.leading_coefficient(order)) for g in divisors]
    quotients: list[dict[Exponents, Fraction | complex]] = [{} for _ in divisors]
    remainder: dict[Exponents, Fraction | complex] = {}
    p = dict(f.terms)
    exact = f.domain is Domain.QQ
    while p:
        exps = max(p, key=order.key)
        coeff = p[exps]
        for i, (lead, lc) in enumerate(leads):
            quotient = monomial_div(exps, lead)
            if quotient is None:
                continue
            factor = coeff / lc if not exact else Fraction(coeff) / lc  # type: ignore[arg-type]
            quotients[i][quotient] = quotients[i].get(quotient, 0) + factor
            for ge, gc in divisors[i].terms.items():
                key = monomial_mul(ge, quotient)
                total = p.get(key, 0) - factor * gc
                if total != 0:
                    p[key] = total
                else:
                    p.pop(key, None)
            p.pop(exps, None)
            break
        else:
            remainder[exps] = coeff
            del p[exps]
    qs = [Polynomial._raw(f.table, {e: c for e, c in q.items() if c != 0}, f.domain) for q in quotients]
    return qs, Polynomial._raw(f.table, remainder, f.domain)


def exact_quotient(f: Polynomial, g: Polynomial, order: MonomialOrder | None = None) -> Polynomial:
    """Return f/g, raising when g does not divide f."""
    order = order or MonomialOrder.lex(f.table)
    (q,), r = divide_with_remainder(f, [g], order)
    if not r.is_zero:
        raise PolynomialError(f"{g} does not divide {f}")
    return q


# content and proportionality


def content(p: Polynomial) -> Fraction:
    """Positive rational content: gcd of numerators over lcm of denominators."""
    coeffs = list(p.coefficients_as_fractions().values())
    if not coeffs:
        return Fraction(0)
    num = 0
    den = 1
    for c in coeffs:
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den)


def monomial_content(polys: Iterable[Polynomial]) -> Exponents | None:
    """Largest monomial dividing every term of every nonzero polynomial."""
    common: Exponents | None = None
    for p in polys:
        for exps in p.terms:
            common = exps if common is None else monomial_gcd(common, exps)
    return common


def primitive_part(p: Polynomial, order: MonomialOrder | None = None) -> Polynomial:
    """Divide by the rational content, leading coefficient made positive."""
    if p.is_zero:
        return p
    order = order or MonomialOrder.lex(p.table)
    q = p.scale(1 / content(p))
    return -q if q.leading_coefficient(order) < 0 else q  # type: ignore[operator]


def proportionality_factor(f: Polynomial, g: Polynomial) -> Fraction | None:
    """Return λ with f = λ·g, or None when f and g are not proportional."""
    if f.is_zero or g.is_zero or set(f.terms) != set(g.terms):
        return None
    ratio: Fraction | None = None
    for exps, c in f.terms.items():
        r = Fraction(c) / Fraction(g.terms[exps])  # type: ignore[arg-type]
        if ratio is None:
            ratio = r
        elif r != ratio:
            return None
    return ratio


def univariate_gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Monic gcd of two polynomials in at most one common variable."""
    names = set(f.free_variables()) | set(g.free_variables())
    if len(names) > 1:
        raise PolynomialError(f"univariate_gcd needs a single variable, got {sorted(names)}")
    order = MonomialOrder.lex(f.table)
    a, b = f, g
    while not b.is_zero:
        _, r = divide_with_remainder(a, [b], order)
        a, b = b, r
    return a.monic(order) if not a.is_zero else a


# exchange grammar

_TOKEN_SPLIT = re.compile(r"\s+")


def format_coefficient(c: Fraction | complex) -> str:
    if isinstance(c, complex):
        return f"({c.real!r}{c.imag:+.17g}j)"
    return str(c)


def format_polynomial(p: Polynomial, order: MonomialOrder | None = None) -> str:
    """Render ``coeff * var^exp * …`` terms, largest first."""
    if p.is_zero:
        return "0"
    pieces: list[str] = []
    for exps, c in p.sorted_terms(order):
        mono = Monomial.from_dense(exps).render(p.table)
        negative = isinstance(c, Fraction) and c < 0
        mag = -c if negative else c
        if mono == "1":
            body = format_coefficient(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_coefficient(mag)} * {mono}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces)


def _split_terms(text: str) -> list[str]:
    terms: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and text[i - 1] not in "^*":
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    return [t for t in terms if t]


def _parse_number(token: str, domain: Domain) -> Fraction | complex:
    if token.startswith("("):
        if domain is Domain.QQ:
            raise PolynomialError(f"complex coefficient {token} in exact polynomial")
        return complex(token.strip("()"))
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise PolynomialError(f"invalid coefficient {token!r}") from exc
    return value if domain is Domain.QQ else complex(value)


def parse_polynomial(text: str, table: VariableTable, domain: Domain = Domain.QQ) -> Polynomial:
    """Parse the exchange grammar; ``**`` is accepted as a synonym of ``^``."""
    compact = _TOKEN_SPLIT.sub("", text).replace("**", "^")
    if not compact:
        raise PolynomialError("empty polynomial text")
    terms: dict[Exponents, object] = {}
    one: Fraction | complex = Fraction(1) if domain is Domain.QQ else 1 + 0j
    for raw in _split_terms(compact):
        sign = -1 if raw[0] == "-" else 1
        body = raw[1:] if raw[0] in "+-" else raw
        if not body:
            raise PolynomialError(f"dangling sign in {text!r}")
        coeff: Fraction | complex = one * sign
        exps = [0] * len(table)
        for factor in body.split("*"):
            if not factor:
                raise PolynomialError(f"empty factor in term {raw!r}")
            if factor[0].isdigit() or factor[0] == "(":
                coeff = coeff * _parse_number(factor, domain)
                continue
            name, _, power = factor.partition("^")
            if not NAME_PATTERN.fullmatch(name):
                raise PolynomialError(f"invalid factor {factor!r}")
            if power and not power.isdigit():
                raise PolynomialError(f"invalid exponent in {factor!r}")
            exps[table.index(name)] += int(power) if power else 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff  # type: ignore[operator]
    return Polynomial(table, terms, domain)


def parse_many(texts: Iterable[str], table: VariableTable, domain: Domain = Domain.QQ) -> list[Polynomial]:
    return [parse_polynomial(t, table, domain) for t in texts]
