"""Sparse multivariate polynomials in z, conj(z), and real variables.

Holomorphic variables (``z``, ``w``) and their conjugates are formally
independent indeterminates, so ``Poly.derive`` is the Wirtinger derivative.
Real variables (``u``, ``s``, ``t``, and the internal graph height ``v``)
are self-conjugate.

Coefficients are normally :class:`~crlab.gaussian.GaussianRational`; the
class only relies on ``+``, ``*``, ``conjugate()`` and comparison with 0, so
plain ``complex`` coefficients also work (used for floating cross-checks).
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, NamedTuple, Tuple

from .gaussian import ONE, ZERO, GaussianRational, as_gaussian

__all__ = [
    "Variable", "Poly", "PointAssignment", "RationalExpr",
    "z", "zbar", "w", "wbar", "real_var",
]

HOLOMORPHIC_KINDS = ("z", "w")
REAL_KINDS = ("u", "v", "s", "t")
_PRINT_RANK = {"z": 0, "w": 1, "u": 2, "v": 3, "s": 4, "t": 5}


class Variable(NamedTuple):
    """A coordinate symbol.  ``conj`` is only ever True for z/w kinds."""

    kind: str
    index: int
    conj: bool = False

    @property
    def is_real(self) -> bool:
        return self.kind in REAL_KINDS

    @property
    def base(self) -> "Variable":
        return Variable(self.kind, self.index, False)

    def conjugate(self) -> "Variable":
        if self.is_real:
            return self
        return Variable(self.kind, self.index, not self.conj)

    def __str__(self) -> str:
        if self.is_real:
            name = self.kind if (self.index == 1 and self.kind in ("u", "v", "t")) else f"{self.kind}{self.index}"
            return name
        name = f"{self.kind}{self.index}"
        return f"conj({name})" if self.conj else name

    def print_key(self):
        return (_PRINT_RANK[self.kind], self.index, self.conj)


def z(j: int) -> Variable:
    return Variable("z", j)


def zbar(j: int) -> Variable:
    return Variable("z", j, True)


def w(j: int) -> Variable:
    return Variable("w", j)


def wbar(j: int) -> Variable:
    return Variable("w", j, True)


def real_var(kind: str, j: int = 1) -> Variable:
    if kind not in REAL_KINDS:
        raise ValueError(f"{kind!r} is not a real variable kind")
    return Variable(kind, j)


Monomial = Tuple[Tuple[Variable, int], ...]
_ONE_MONO: Monomial = ()


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _is_zero(c) -> bool:
    return c == 0


class Poly:
    """Immutable sparse polynomial ``{monomial: coefficient}``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self._terms: Dict[Monomial, object] = {}
        if terms:
            for m, c in terms.items():
                if not _is_zero(c):
                    self._terms[m] = c
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, object]) -> "Poly":
        p = object.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        if not isinstance(c, (GaussianRational, complex, float)):
            c = as_gaussian(c)
        return cls({_ONE_MONO: c})

    @classmethod
    def var(cls, v: Variable) -> "Poly":
        return cls._raw({((v, 1),): ONE})

    @classmethod
    def zero(cls) -> "Poly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "Poly":
        return cls._raw({_ONE_MONO: ONE})

    # structure ------------------------------------------------------------

    @property
    def terms(self) -> Dict[Monomial, object]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _ONE_MONO in self._terms)

    def constant_term(self):
        return self._terms.get(_ONE_MONO, ZERO)

    def variables(self) -> set:
        return {v for m in self._terms for v, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=-1)

    def degree_in(self, v: Variable) -> int:
        return max((e for m in self._terms for u, e in m if u == v), default=0)

    def __len__(self) -> int:
        return len(self._terms)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, Variable):
            return Poly.var(other)
        return Poly.const(other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if _is_zero(s):
                out.pop(m, None)
            else:
                out[m] = s
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, (Poly, Variable)):
            if not isinstance(other, (GaussianRational, complex, float)):
                other = as_gaussian(other)
            if _is_zero(other):
                return Poly.zero()
            return Poly._raw({m: c * other for m, c in self._terms.items()})
        other = self._coerce(other)
        out: Dict[Monomial, object] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return Poly._raw({m: c for m, c in out.items() if not _is_zero(c)})

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Poly":
        if isinstance(other, Poly):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("polynomial division only by nonzero constants")
            other = other.constant_term()
        if not isinstance(other, (GaussianRational, complex, float)):
            other = as_gaussian(other)
        inv = 1 / other
        return self * inv

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Poly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus ---------------------------------------------------------------

    def derive(self, v: Variable) -> "Poly":
        """Formal partial derivative; z and conj(z) are independent."""
        out: Dict[Monomial, object] = {}
        for m, c in self._terms.items():
            for k, (u, e) in enumerate(m):
                if u == v:
                    nm = m[:k] + ((u, e - 1),) + m[k + 1:] if e > 1 else m[:k] + m[k + 1:]
                    s = out.get(nm)
                    val = c * e
                    out[nm] = val if s is None else s + val
                    break
        return Poly._raw({m: c for m, c in out.items() if not _is_zero(c)})

    def conj(self) -> "Poly":
        out = {}
        for m, c in self._terms.items():
            nm = tuple(sorted((v.conjugate(), e) for v, e in m))
            out[nm] = c.conjugate()
        return Poly._raw(out)

    def substitute(self, mapping: Mapping[Variable, "Poly"]) -> "Poly":
        """Replace variables by polynomials (variables not in ``mapping`` stay)."""
        if not mapping:
            return self
        powers: Dict[Tuple[Variable, int], Poly] = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                powers[key] = mapping[v] ** e
            return powers[key]

        result = Poly.zero()
        acc: Dict[Monomial, object] = {}
        for m, c in self._terms.items():
            kept = tuple((v, e) for v, e in m if v not in mapping)
            replaced = [(v, e) for v, e in m if v in mapping]
            if not replaced:
                s = acc.get(kept)
                acc[kept] = c if s is None else s + c
                continue
            term = Poly._raw({kept: c})
            for v, e in replaced:
                term = term * power(v, e)
            result = result + term
        if acc:
            result = result + Poly({m: c for m, c in acc.items()})
        return result

    def evaluate(self, at) -> object:
        """Evaluate at a :class:`PointAssignment` (or a plain mapping)."""
        if not isinstance(at, PointAssignment):
            at = PointAssignment(at)
        total = None
        cache = {}
        for m, c in self._terms.items():
            val = c
            for v, e in m:
                key = (v, e)
                if key not in cache:
                    cache[key] = at[v] ** e
                val = val * cache[key]
            total = val if total is None else total + val
        return ZERO if total is None else total

    def map_coefficients(self, fn) -> "Poly":
        return Poly({m: fn(c) for m, c in self._terms.items()})

    def to_complex(self) -> "Poly":
        return self.map_coefficients(complex)

    def is_real_valued(self) -> bool:
        return self == self.conj()

    # printing ---------------------------------------------------------------

    def sorted_terms(self):
        """Terms in graded lexicographic order (highest degree first)."""
        def key(item):
            m = item[0]
            deg = sum(e for _, e in m)
            lex = tuple((v.print_key(), -e) for v, e in sorted(m, key=lambda t: t[0].print_key()))
            return (-deg, lex)
        return sorted(self._terms.items(), key=key)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            parts.append(_term_str(m, c))
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    def __repr__(self) -> str:
        return f"Poly('{self}')"


def _mono_str(m: Monomial) -> str:
    bits = []
    for v, e in sorted(m, key=lambda t: t[0].print_key()):
        bits.append(str(v) if e == 1 else f"{v}^{e}")
    return "*".join(bits)


def _coeff_str(c) -> Tuple[str, bool]:
    """Return (text, is_atomic) for a coefficient."""
    if isinstance(c, GaussianRational):
        if c.im == 0:
            return str(c.re), True
        if c.re == 0:
            s = str(c)
            return s, True
        return f"({c})", True
    return f"({c})", True


def _term_str(m: Monomial, c) -> str:
    if not m:
        text, _ = _coeff_str(c)
        return text
    mono = _mono_str(m)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    text, _ = _coeff_str(c)
    return f"{text}*{mono}"


class PointAssignment:
    """Exact values for variables, conjugate-consistent by construction.

    Only base variables are stored; ``conj(z_j)`` is read as the conjugate of
    the value of ``z_j``.  Real variables must receive real values.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[Variable, object] | Iterable = ()):
        vals: Dict[Variable, object] = {}
        items = values.items() if isinstance(values, Mapping) else values
        pending_conj = {}
        for v, x in items:
            if not isinstance(x, (GaussianRational, complex, float)):
                x = as_gaussian(x)
            if v.conj:
                pending_conj[v.base] = x.conjugate()
                continue
            if v.is_real and isinstance(x, GaussianRational) and not x.is_real():
                raise ValueError(f"real variable {v} assigned non-real value {x}")
            vals[v] = x
        for v, x in pending_conj.items():
            if v in vals and vals[v] != x:
                raise ValueError(f"inconsistent values for {v} and its conjugate")
            vals.setdefault(v, x)
        self._values = vals

    def __getitem__(self, v: Variable):
        try:
            if v.conj:
                return self._values[v.base].conjugate()
            return self._values[v]
        except KeyError:
            raise KeyError(f"unassigned variable {v}") from None

    def __contains__(self, v: Variable) -> bool:
        return v.base in self._values

    def items(self):
        return self._values.items()

    def variables(self):
        return set(self._values)

    def conjugate(self) -> "PointAssignment":
        """The assignment sending every variable to its conjugated value."""
        return PointAssignment({v: x.conjugate() for v, x in self._values.items()})

    def updated(self, other: Mapping[Variable, object]) -> "PointAssignment":
        vals = dict(self._values)
        vals.update(PointAssignment(other)._values)
        out = object.__new__(PointAssignment)
        out._values = vals
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, PointAssignment) and self._values == other._values

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}={x}" for v, x in sorted(self._values.items(), key=lambda t: t[0].print_key()))
        return f"PointAssignment({inner})"


class RationalExpr:
    """``numerator / denominator`` with no gcd cancellation."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = Poly.one() if den is None else (den if isinstance(den, Poly) else Poly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("RationalExpr with zero denominator")
        if den.is_constant() and den.constant_term() != 1:
            num = num / den.constant_term()
            den = Poly.one()
        self.num = num
        self.den = den

    @classmethod
    def of(cls, x) -> "RationalExpr":
        return x if isinstance(x, RationalExpr) else cls(x)

    def is_polynomial(self) -> bool:
        return self.den == Poly.one()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other):
        o = RationalExpr.of(other)
        if self.den == o.den:
            return RationalExpr(self.num + o.num, self.den)
        return RationalExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalExpr.of(other))

    def __rsub__(self, other):
        return RationalExpr.of(other) + (-self)

    def __mul__(self, other):
        o = RationalExpr.of(other)
        return RationalExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RationalExpr.of(other)
        return RationalExpr(self.num * o.den, self.den * o.num)

    def derive(self, v: Variable) -> "RationalExpr":
        if self.is_polynomial():
            return RationalExpr(self.num.derive(v))
        return RationalExpr(self.num.derive(v) * self.den - self.num * self.den.derive(v),
                            self.den * self.den)

    def conj(self) -> "RationalExpr":
        return RationalExpr(self.num.conj(), self.den.conj())

    def substitute(self, mapping) -> "RationalExpr":
        return RationalExpr(self.num.substitute(mapping), self.den.substitute(mapping))

    def evaluate(self, at):
        d = self.den.evaluate(at)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(at) / d

    def equals(self, other) -> bool:
        """Equality as rational functions (cross-multiplication)."""
        o = RationalExpr.of(other)
        return self.num * o.den == o.num * self.den

    def __eq__(self, other) -> bool:
        if isinstance(other, (RationalExpr, Poly)) or other is not None:
            try:
                return self.equals(other)
            except TypeError:
                return NotImplemented
        return NotImplemented

    __hash__ = None

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RationalExpr('{self}')"


def divide_exact(p: Poly, d: Poly) -> Poly:
    """Return ``q`` with ``q * d == p``; raise ``ValueError`` if ``d`` does not divide ``p``."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if d.is_constant():
        return p / d.constant_term()
    if p.is_zero():
        return Poly.zero()
    order = sorted(p.variables() | d.variables())

    def key(m):
        dm = dict(m)
        exps = tuple(dm.get(v, 0) for v in order)
        return (sum(exps), exps)

    d_items = list(d.items())
    lm_d, lc_d = max(d_items, key=lambda t: key(t[0]))
    lead_d = dict(lm_d)
    inv_lc = 1 / lc_d
    rem: Dict[Monomial, object] = dict(p.items())
    quot: Dict[Monomial, object] = {}
    while rem:
        m = max(rem, key=key)
        c = rem[m]
        dm = dict(m)
        qm_d = {}
        for v, e in lead_d.items():
            r = dm.get(v, 0) - e
            if r < 0:
                raise ValueError("polynomial division is not exact")
        for v, e in dm.items():
            r = e - lead_d.get(v, 0)
            if r:
                qm_d[v] = r
        qm = tuple(sorted(qm_d.items()))
        qc = c * inv_lc
        quot[qm] = qc
        for md, cd in d_items:
            mm = _mono_mul(qm, md)
            s = rem.get(mm)
            val = -(qc * cd)
            s = val if s is None else s + val
            if _is_zero(s):
                rem.pop(mm, None)
            else:
                rem[mm] = s
    return Poly._raw(quot)
