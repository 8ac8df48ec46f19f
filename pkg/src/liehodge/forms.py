"""Invariant (p,q)-form algebra over a Lie presentation.

Monomials are pairs (I, J) of strictly increasing 1-based index tuples,
standing for tau^I wedge taubar^J in the canonical order (all holomorphic
legs first).  Signs follow the Koszul rule for reordering one-form legs.

The module also houses contraction by vector-valued forms, the
exponential contraction operators, simultaneous contraction by coframe
endomorphisms, the Schouten bracket of Beltrami differentials, and the
frame-change machinery behind the deformation extension map.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    DegreeMismatch,
    PresentationMismatch,
    SingularFrame,
    SingularOperator,
)
from .linalg import ExactMatrix, Vector, as_vector
from .scalars import GR, GaussianRational

Monomial = tuple[tuple[int, ...], tuple[int, ...]]
CoeffMap = dict[Monomial, GaussianRational]


# ---------------------------------------------------------------------------
# monomial combinatorics
# ---------------------------------------------------------------------------

def merge_indices(a: tuple[int, ...], b: tuple[int, ...]):
    """Merge two increasing tuples; returns (sign, merged) or None on repeat."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    i = j = 0
    sign = 1
    la = len(a)
    while i < la and j < len(b):
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        elif a[i] > b[j]:
            # b[j] jumps over the remaining entries of a
            if (la - i) & 1:
                sign = -sign
            out.append(b[j])
            j += 1
        else:
            return None
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def mono_wedge(m1: Monomial, m2: Monomial):
    """Wedge two canonical monomials; (sign, monomial) or None if degenerate."""
    i1, j1 = m1
    i2, j2 = m2
    ri = merge_indices(i1, i2)
    if ri is None:
        return None
    rj = merge_indices(j1, j2)
    if rj is None:
        return None
    sign = ri[0] * rj[0]
    # move the holomorphic block of m2 across the antiholomorphic block of m1
    if (len(i2) * len(j1)) & 1:
        sign = -sign
    return sign, (ri[1], rj[1])


def mono_conjugate(m: Monomial):
    """Conjugate monomial with its reordering sign: (I,J) -> (J,I)."""
    i, j = m
    sign = -1 if (len(i) * len(j)) & 1 else 1
    return sign, (j, i)


def interior_hol(k: int, m: Monomial):
    """Contraction of the monomial by the holomorphic frame vector theta_k."""
    i, j = m
    if k not in i:
        return None
    pos = i.index(k)
    sign = -1 if pos & 1 else 1
    return sign, (i[:pos] + i[pos + 1:], j)


def _same(p1, p2):
    if p1 is p2:
        return True
    return getattr(p1, "signature", None) == getattr(p2, "signature", object())


def _check_same(p1, p2):
    if not _same(p1, p2):
        raise PresentationMismatch("operands belong to different presentations")


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

class PQForm:
    """Invariant form of a pure bidegree with exact coefficients."""

    __slots__ = ("presentation", "p", "q", "coeffs")

    def __init__(self, presentation, p: int, q: int, coeffs: Optional[CoeffMap] = None):
        self.presentation = presentation
        self.p = p
        self.q = q
        clean: CoeffMap = {}
        for m, c in (coeffs or {}).items():
            c = GR.coerce(c)
            if not c:
                continue
            if len(m[0]) != p or len(m[1]) != q:
                raise DegreeMismatch(f"monomial {m} is not of bidegree ({p},{q})")
            clean[m] = clean.get(m, GR(0)) + c if m in clean else c
        self.coeffs = {m: c for m, c in clean.items() if c}

    # -- constructors ---------------------------------------------------

    @staticmethod
    def monomial(presentation, i_idx: Sequence[int], j_idx: Sequence[int], coeff=1) -> "PQForm":
        i, j = tuple(i_idx), tuple(j_idx)
        if tuple(sorted(set(i))) != i or tuple(sorted(set(j))) != j:
            raise DegreeMismatch("monomial indices must be strictly increasing")
        return PQForm(presentation, len(i), len(j), {(i, j): GR.coerce(coeff)})

    @staticmethod
    def zero(presentation, p: int, q: int) -> "PQForm":
        return PQForm(presentation, p, q, {})

    @staticmethod
    def one(presentation) -> "PQForm":
        return PQForm(presentation, 0, 0, {((), ()): GR(1)})

    # -- structure ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, PQForm):
            return (
                _same(self.presentation, other.presentation)
                and (self.coeffs == other.coeffs)
                and (self.is_zero() or (self.p, self.q) == (other.p, other.q))
            )
        if isinstance(other, MixedForm):
            return MixedForm.wrap(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.q, tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0]))))

    def __add__(self, other: "PQForm") -> "PQForm":
        _check_same(self.presentation, other.presentation)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if (self.p, self.q) != (other.p, other.q):
            raise DegreeMismatch("cannot add forms of different bidegrees")
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, GR(0)) + c
        return PQForm(self.presentation, self.p, self.q, out)

    def __sub__(self, other: "PQForm") -> "PQForm":
        return self + other.scale(GR(-1))

    def __neg__(self) -> "PQForm":
        return self.scale(GR(-1))

    def scale(self, c) -> "PQForm":
        c = GR.coerce(c)
        if not c:
            return PQForm.zero(self.presentation, self.p, self.q)
        return PQForm(self.presentation, self.p, self.q, {m: c * v for m, v in self.coeffs.items()})

    def coefficient(self, i_idx: Sequence[int], j_idx: Sequence[int]) -> GaussianRational:
        return self.coeffs.get((tuple(i_idx), tuple(j_idx)), GR(0))

    def conjugate(self) -> "PQForm":
        out: CoeffMap = {}
        for m, c in self.coeffs.items():
            sign, mc = mono_conjugate(m)
            out[mc] = c.conjugate() if sign == 1 else -c.conjugate()
        return PQForm(self.presentation, self.q, self.p, out)

    def wedge(self, other) -> "MixedForm":
        return wedge(self, other)

    def to_vector(self, basis: Sequence[Monomial]) -> Vector:
        return tuple(self.coeffs.get(m, GR(0)) for m in basis)

    @staticmethod
    def from_vector(presentation, p: int, q: int, basis: Sequence[Monomial], vec) -> "PQForm":
        return PQForm(
            presentation, p, q,
            {m: GR.coerce(c) for m, c in zip(basis, vec) if GR.coerce(c)},
        )

    def __repr__(self):
        if not self.coeffs:
            return f"PQForm({self.p},{self.q}; 0)"
        parts = []
        for (i, j), c in sorted(self.coeffs.items()):
            legs = [f"t{k}" for k in i] + [f"~t{k}" for k in j]
            parts.append(f"({c})*" + ("^".join(legs) if legs else "1"))
        return f"PQForm({self.p},{self.q}; " + " + ".join(parts) + ")"


class MixedForm:
    """A finite sum of pure-bidegree components."""

    __slots__ = ("presentation", "components")

    def __init__(self, presentation, components: Optional[dict[tuple[int, int], PQForm]] = None):
        self.presentation = presentation
        comps = {}
        for (p, q), f in (components or {}).items():
            if f and not f.is_zero():
                comps[(p, q)] = f
        self.components = comps

    @staticmethod
    def wrap(form) -> "MixedForm":
        if isinstance(form, MixedForm):
            return form
        return MixedForm(form.presentation, {(form.p, form.q): form})

    @staticmethod
    def zero(presentation) -> "MixedForm":
        return MixedForm(presentation, {})

    @staticmethod
    def from_coeffs(presentation, coeffs: CoeffMap) -> "MixedForm":
        split: dict[tuple[int, int], CoeffMap] = {}
        for m, c in coeffs.items():
            if c:
                split.setdefault((len(m[0]), len(m[1])), {})[m] = c
        return MixedForm(
            presentation,
            {pq: PQForm(presentation, pq[0], pq[1], cs) for pq, cs in split.items()},
        )

    def coeffs(self) -> CoeffMap:
        out: CoeffMap = {}
        for f in self.components.values():
            out.update(f.coeffs)
        return out

    def component(self, p: int, q: int) -> PQForm:
        return self.components.get((p, q), PQForm.zero(self.presentation, p, q))

    def single(self) -> PQForm:
        """The unique component of a pure mixed form."""
        if len(self.components) == 1:
            return next(iter(self.components.values()))
        if not self.components:
            raise DegreeMismatch("zero mixed form has no distinguished bidegree")
        raise DegreeMismatch("mixed form has several bidegrees")

    def is_zero(self) -> bool:
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __eq__(self, other):
        if isinstance(other, PQForm):
            other = MixedForm.wrap(other)
        if not isinstance(other, MixedForm):
            return NotImplemented
        return _same(self.presentation, other.presentation) and self.coeffs() == other.coeffs()

    def __add__(self, other) -> "MixedForm":
        other = MixedForm.wrap(other)
        _check_same(self.presentation, other.presentation)
        out = dict(self.components)
        for pq, f in other.components.items():
            out[pq] = out[pq] + f if pq in out else f
        return MixedForm(self.presentation, out)

    def __sub__(self, other) -> "MixedForm":
        return self + MixedForm.wrap(other).scale(GR(-1))

    def __neg__(self) -> "MixedForm":
        return self.scale(GR(-1))

    def scale(self, c) -> "MixedForm":
        c = GR.coerce(c)
        return MixedForm(self.presentation, {pq: f.scale(c) for pq, f in self.components.items()})

    def conjugate(self) -> "MixedForm":
        return MixedForm(
            self.presentation,
            {(q, p): f.conjugate() for (p, q), f in self.components.items()},
        )

    def wedge(self, other) -> "MixedForm":
        return wedge(self, other)

    def __repr__(self):
        if not self.components:
            return "MixedForm(0)"
        return "MixedForm(" + " + ".join(repr(f) for _, f in sorted(self.components.items())) + ")"


def wedge(a, b) -> MixedForm:
    """Graded exterior product; accepts pure or mixed operands."""
    am, bm = MixedForm.wrap(a), MixedForm.wrap(b)
    _check_same(am.presentation, bm.presentation)
    out: CoeffMap = {}
    for fa in am.components.values():
        for fb in bm.components.values():
            for m1, c1 in fa.coeffs.items():
                for m2, c2 in fb.coeffs.items():
                    r = mono_wedge(m1, m2)
                    if r is None:
                        continue
                    sign, m = r
                    c = c1 * c2
                    if sign < 0:
                        c = -c
                    out[m] = out.get(m, GR(0)) + c
    return MixedForm.from_coeffs(am.presentation, out)


def conjugate(form):
    return form.conjugate()


# ---------------------------------------------------------------------------
# bidegree bases and the exterior differential
# ---------------------------------------------------------------------------

def _subsets(n: int, k: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    return [tuple(c) for c in combinations(range(1, n + 1), k)]


def bidegree_basis(P, p: int, q: int) -> list[Monomial]:
    """Lexicographically ordered monomial basis of Lambda^{p,q}; [] out of range."""
    n = P.n
    if p < 0 or q < 0 or p > n or q > n:
        return []
    key = ("basis", p, q)
    cached = P.cache.get(key)
    if cached is None:
        cached = [(i, j) for i in _subsets(n, p) for j in _subsets(n, q)]
        P.cache[key] = cached
    return cached


def d_monomial(P, m: Monomial) -> CoeffMap:
    """Exterior differential of a basis monomial, as a coefficient map."""
    key = ("dmono", m)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    i_idx, j_idx = m
    legs = [(k, True) for k in i_idx] + [(k, False) for k in j_idx]
    out: CoeffMap = {}
    for a, (k, hol) in enumerate(legs):
        dleg = P.d_gen(k if hol else -k)
        if not dleg:
            continue
        before = (i_idx[:a], ()) if hol else (i_idx, j_idx[: a - len(i_idx)])
        after = (i_idx[a + 1:], j_idx) if hol else ((), j_idx[a - len(i_idx) + 1:])
        sign_a = -1 if a & 1 else 1
        for m2, c2 in dleg.items():
            r1 = mono_wedge(before, m2)
            if r1 is None:
                continue
            s1, mm = r1
            r2 = mono_wedge(mm, after)
            if r2 is None:
                continue
            s2, mono = r2
            c = c2 if sign_a * s1 * s2 > 0 else -c2
            acc = out.get(mono, GR(0)) + c
            if acc:
                out[mono] = acc
            elif mono in out:
                del out[mono]
    P.cache[key] = out
    return out


def differential(form) -> MixedForm:
    """d = del + dbar extended as an anti-derivation."""
    mf = MixedForm.wrap(form)
    out: CoeffMap = {}
    for f in mf.components.values():
        for m, c in f.coeffs.items():
            for mono, c2 in d_monomial(f.presentation, m).items():
                acc = out.get(mono, GR(0)) + c * c2
                if acc:
                    out[mono] = acc
                elif mono in out:
                    del out[mono]
    return MixedForm.from_coeffs(mf.presentation, out)


def _d_projected(form, dp: int, dq: int) -> MixedForm:
    """Per-component projection of d(form) onto the (p+dp, q+dq) shift."""
    mf = MixedForm.wrap(form)
    out = MixedForm.zero(mf.presentation)
    for (p, q), comp in mf.components.items():
        piece = differential(comp).component(p + dp, q + dq)
        if piece:
            out = out + piece
    return out


def del_part(form) -> MixedForm:
    """The (p+1,q)-part of d, component by component."""
    return _d_projected(form, 1, 0)


def dbar_part(form) -> MixedForm:
    """The (p,q+1)-part of d, component by component."""
    return _d_projected(form, 0, 1)


def operator_matrix(P, op: str, p: int, q: int) -> ExactMatrix:
    """Matrix of del / dbar / deldbar on the ordered monomial bases.

    Out-of-range bidegrees give matrices with zero rows or columns, so the
    callers never special-case boundary slots.
    """
    key = ("opmat", op, p, q)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    src = bidegree_basis(P, p, q)
    if op == "del":
        tp, tq = p + 1, q
    elif op == "dbar":
        tp, tq = p, q + 1
    elif op == "deldbar":
        tp, tq = p + 1, q + 1
    else:
        raise ValueError(f"unknown operator {op!r}")
    tgt = bidegree_basis(P, tp, tq)
    index = {m: i for i, m in enumerate(tgt)}
    zero = GR(0)
    cols = []
    for m in src:
        if op == "deldbar":
            inner = PQForm(P, p, q, {m: GR(1)})
            img = del_part(dbar_part(inner)).component(tp, tq)
            col = [zero] * len(tgt)
            for mono, c in img.coeffs.items():
                col[index[mono]] = c
        else:
            col = [zero] * len(tgt)
            for mono, c in d_monomial(P, m).items():
                pos = index.get(mono)
                if pos is not None:
                    col[pos] = c
        cols.append(col)
    mat = (
        ExactMatrix.from_columns(cols, rows=len(tgt))
        if cols
        else ExactMatrix.zeros(len(tgt), 0)
    )
    P.cache[key] = mat
    return mat


# ---------------------------------------------------------------------------
# vector-valued forms and contraction
# ---------------------------------------------------------------------------

class VectorForm:
    """Element of Lambda^{0,s} tensor g^{1,0}: sum of c * taubar^J (x) theta_i.

    s = 1 is a Beltrami differential; s = 2 arises from brackets and from
    dbar of Beltrami differentials.  Larger s is supported by the same
    decomposable contraction rule but has no dedicated test anchor.
    """

    __slots__ = ("presentation", "s", "coeffs")

    def __init__(self, presentation, s: int, coeffs=None):
        self.presentation = presentation
        self.s = s
        clean = {}
        for (i, jj), c in (coeffs or {}).items():
            c = GR.coerce(c)
            if not c:
                continue
            jj = tuple(jj)
            if len(jj) != s or tuple(sorted(set(jj))) != jj:
                raise DegreeMismatch(f"bad antiholomorphic index tuple {jj}")
            if not (1 <= i <= presentation.n):
                raise DegreeMismatch(f"bad vector index {i}")
            clean[(i, jj)] = c
        self.coeffs = clean

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, VectorForm):
            return NotImplemented
        return (
            _same(self.presentation, other.presentation)
            and self.s == other.s
            and self.coeffs == other.coeffs
        )

    def __add__(self, other: "VectorForm") -> "VectorForm":
        _check_same(self.presentation, other.presentation)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.s != other.s:
            raise DegreeMismatch("cannot add vector forms of different degrees")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, GR(0)) + c
        return VectorForm(self.presentation, self.s, out)

    def __sub__(self, other: "VectorForm") -> "VectorForm":
        return self + other.scale(GR(-1))

    def __neg__(self):
        return self.scale(GR(-1))

    def scale(self, c) -> "VectorForm":
        c = GR.coerce(c)
        return VectorForm(self.presentation, self.s, {k: c * v for k, v in self.coeffs.items()})

    def __repr__(self):
        if not self.coeffs:
            return f"VectorForm(s={self.s}; 0)"
        parts = []
        for (i, jj), c in sorted(self.coeffs.items()):
            legs = "^".join(f"~t{k}" for k in jj) or "1"
            parts.append(f"({c})*{legs}(x)e{i}")
        return f"VectorForm(s={self.s}; " + " + ".join(parts) + ")"


class BeltramiDifferential(VectorForm):
    """A (0,1)-form with (1,0)-vector values; drives all deformations."""

    def __init__(self, presentation, coeffs=None):
        super().__init__(presentation, 1, coeffs)

    @staticmethod
    def from_matrix(presentation, entries) -> "BeltramiDifferential":
        """entries[(i, j)] or entries[i][j] is the coefficient of taubar^j (x) theta_i."""
        coeffs = {}
        if isinstance(entries, dict):
            items = entries.items()
            coeffs = {(i, (j,)): GR.coerce(c) for (i, j), c in items}
        else:
            for i, row in enumerate(entries, start=1):
                for j, c in enumerate(row, start=1):
                    c = GR.coerce(c)
                    if c:
                        coeffs[(i, (j,))] = c
        return BeltramiDifferential(presentation, coeffs)

    def entry(self, i: int, j: int) -> GaussianRational:
        return self.coeffs.get((i, (j,)), GR(0))

    def matrix(self) -> ExactMatrix:
        n = self.presentation.n
        return ExactMatrix(
            [[self.entry(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]
        )

    def conj_matrix(self) -> ExactMatrix:
        return self.matrix().conjugate()

    @staticmethod
    def from_vectorform(v: VectorForm) -> "BeltramiDifferential":
        if v.s != 1:
            raise DegreeMismatch("not a (0,1) vector form")
        return BeltramiDifferential(v.presentation, v.coeffs)


def contract(phi: VectorForm, form) -> MixedForm:
    """i_phi: replaces one holomorphic leg, term by term.

    On a decomposable eta (x) Y the contraction acts as eta wedge (i_Y form),
    sending (p,q) to (p-1, q+s).
    """
    mf = MixedForm.wrap(form)
    _check_same(phi.presentation, mf.presentation)
    out: CoeffMap = {}
    for f in mf.components.values():
        for m, c in f.coeffs.items():
            for (i, jj), cv in phi.coeffs.items():
                r = interior_hol(i, m)
                if r is None:
                    continue
                s1, m1 = r
                r2 = mono_wedge(((), jj), m1)
                if r2 is None:
                    continue
                s2, mono = r2
                cc = c * cv
                if s1 * s2 < 0:
                    cc = -cc
                acc = out.get(mono, GR(0)) + cc
                if acc:
                    out[mono] = acc
                elif mono in out:
                    del out[mono]
    return MixedForm.from_coeffs(mf.presentation, out)


def exp_contract(phi: VectorForm, form) -> MixedForm:
    """e^{i_phi} = sum_k i_phi^k / k!; the sum terminates in finite degree."""
    mf = MixedForm.wrap(form)
    total = mf
    term = mf
    k = 0
    factorial = 1
    while True:
        k += 1
        factorial *= k
        term = contract(phi, term)
        if term.is_zero():
            break
        total = total + term.scale(GR(Fraction(1, factorial)))
        if k > 4 * phi.presentation.n:
            raise AssertionError("exp_contract failed to terminate")
    return total


def lie_derivative_10(phi: VectorForm, form) -> MixedForm:
    """(-1)^s del(i_phi .) + i_phi(del .), the holomorphic Lie-derivative part."""
    mf = MixedForm.wrap(form)
    sign = GR(-1) if phi.s & 1 else GR(1)
    return del_part(contract(phi, mf)).scale(sign) + contract(phi, del_part(mf))


# ---------------------------------------------------------------------------
# frame vectors: brackets and dbar on the vector leg
# ---------------------------------------------------------------------------

def _pair_leg(leg_idx: int, hol_leg: bool, vec: int) -> bool:
    """Whether the coframe leg pairs with the signed frame vector."""
    if vec > 0:
        return hol_leg and leg_idx == vec
    return (not hol_leg) and leg_idx == -vec


def _eval_two_form(two_form: CoeffMap, u: int, v: int) -> GaussianRational:
    """Evaluate a 2-form coefficient map on signed frame vectors (u, v)."""
    total = GR(0)
    for (i_idx, j_idx), c in two_form.items():
        legs = [(k, True) for k in i_idx] + [(k, False) for k in j_idx]
        x, y = legs
        xu = _pair_leg(x[0], x[1], u)
        yv = _pair_leg(y[0], y[1], v)
        xv = _pair_leg(x[0], x[1], v)
        yu = _pair_leg(y[0], y[1], u)
        if xu and yv:
            total = total + c
        if xv and yu:
            total = total - c
    return total


def frame_bracket(P, u: int, v: int) -> dict[int, GaussianRational]:
    """Lie bracket of signed frame vectors, from d(omega)(U,V) = -omega([U,V])."""
    key = ("bracket", u, v)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    out: dict[int, GaussianRational] = {}
    for k in range(1, P.n + 1):
        for gen in (k, -k):
            c = _eval_two_form(P.d_gen(gen), u, v)
            if c:
                out[gen] = -c
    P.cache[key] = out
    return out


def dbar_frame_vector(P, i: int) -> dict[tuple[int, int], GaussianRational]:
    """dbar(theta_i) = sum_j taubar^j (x) [thetabar_j, theta_i]^{1,0}."""
    key = ("dbarvec", i)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    out: dict[tuple[int, int], GaussianRational] = {}
    for j in range(1, P.n + 1):
        br = frame_bracket(P, -j, i)
        for gen, c in br.items():
            if gen > 0:
                out[(gen, j)] = out.get((gen, j), GR(0)) + c
    out = {k: v for k, v in out.items() if v}
    P.cache[key] = out
    return out


def del_bar_beltrami(phi: VectorForm) -> VectorForm:
    """dbar(phi) for a vector-valued (0,s)-form; value degree (0,s+1).

    dbar(eta (x) Y) = dbar(eta) (x) Y + (-1)^s eta wedge dbar(Y), with
    dbar(Y) read off the frame brackets.
    """
    P = phi.presentation
    out: dict[tuple[int, tuple[int, ...]], GaussianRational] = {}

    def put(i, jj, c):
        if not c:
            return
        k = (i, jj)
        acc = out.get(k, GR(0)) + c
        if acc:
            out[k] = acc
        elif k in out:
            del out[k]

    sign_s = -1 if phi.s & 1 else 1
    for (i, jj), c in phi.coeffs.items():
        # (0, s+1)-part of d(taubar^J)
        for mono, c2 in d_monomial(P, ((), jj)).items():
            if not mono[0]:
                put(i, mono[1], c * c2)
        # eta wedge dbar(theta_i)
        for (vec, j), c2 in dbar_frame_vector(P, i).items():
            r = merge_indices(jj, (j,))
            if r is None:
                continue
            sgn, merged = r
            cc = c * c2
            if sign_s * sgn < 0:
                cc = -cc
            put(vec, merged, cc)
    return VectorForm(P, phi.s + 1, out)


def schouten_bracket(phi: VectorForm, psi: VectorForm) -> VectorForm:
    """Schouten bracket of two Beltrami differentials; value degree (0,2).

    On decomposables,
      [w (x) V, w' (x) V'] = w ^ w' (x) [V,V']^{1,0}
                           + w ^ (i_V d w')^{0,1} (x) V'
                           + w' ^ (i_{V'} d w)^{0,1} (x) V,
    where the frame Lie bracket comes from the structure equations.
    """
    _check_same(phi.presentation, psi.presentation)
    if phi.s != 1 or psi.s != 1:
        raise DegreeMismatch("Schouten bracket implemented for (0,1)-inputs")
    P = phi.presentation
    out: dict[tuple[int, tuple[int, ...]], GaussianRational] = {}

    def put(i, jj, c):
        if not c:
            return
        k = (i, jj)
        acc = out.get(k, GR(0)) + c
        if acc:
            out[k] = acc
        elif k in out:
            del out[k]

    def hol_contraction_01(vec: int, gen_conj: int) -> dict[int, GaussianRational]:
        # (0,1)-part of i_{theta_vec} d(taubar^gen_conj)
        res: dict[int, GaussianRational] = {}
        for (i_idx, j_idx), c in P.d_gen(-gen_conj).items():
            if len(i_idx) == 1 and len(j_idx) == 1 and i_idx[0] == vec:
                res[j_idx[0]] = res.get(j_idx[0], GR(0)) + c
        return res

    for (i1, (a,)), c1 in phi.coeffs.items():
        for (i2, (b,)), c2 in psi.coeffs.items():
            c12 = c1 * c2
            # Lie bracket term
            r = merge_indices((a,), (b,))
            if r is not None:
                sgn, merged = r
                br = frame_bracket(P, i1, i2)
                for gen, cb in br.items():
                    if gen > 0:
                        put(gen, merged, c12 * cb if sgn > 0 else -(c12 * cb))
            # w ^ (i_V d w') (x) V'
            for j, cc in hol_contraction_01(i1, b).items():
                r2 = merge_indices((a,), (j,))
                if r2 is None:
                    continue
                sgn2, merged2 = r2
                put(i2, merged2, c12 * cc if sgn2 > 0 else -(c12 * cc))
            # w' ^ (i_{V'} d w) (x) V
            for j, cc in hol_contraction_01(i2, a).items():
                r3 = merge_indices((b,), (j,))
                if r3 is None:
                    continue
                sgn3, merged3 = r3
                put(i1, merged3, c12 * cc if sgn3 > 0 else -(c12 * cc))
    return VectorForm(P, 2, out)


def integrability_defect(phi: BeltramiDifferential) -> VectorForm:
    """dbar(phi) - (1/2)[phi, phi]; zero iff phi is integrable."""
    half = GR(1) / GR(2)
    return del_bar_beltrami(phi) - schouten_bracket(phi, phi).scale(half)


# ---------------------------------------------------------------------------
# coframe operators and simultaneous contraction
# ---------------------------------------------------------------------------

class CoframeOperator:
    """Endomorphism of the 2n-dimensional coframe span {tau, taubar}.

    Column k of the matrix is the image of the k-th coframe element in flat
    indexing: 0..n-1 are tau^1..tau^n, n..2n-1 are taubar^1..taubar^n.
    """

    __slots__ = ("presentation", "matrix")

    def __init__(self, presentation, matrix: ExactMatrix):
        n2 = 2 * presentation.n
        if matrix.rows != n2 or matrix.cols != n2:
            raise DegreeMismatch("coframe operator must be 2n x 2n")
        self.presentation = presentation
        self.matrix = matrix

    @staticmethod
    def identity(presentation) -> "CoframeOperator":
        return CoframeOperator(presentation, ExactMatrix.identity(2 * presentation.n))

    @staticmethod
    def from_beltrami(phi: BeltramiDifferential) -> "CoframeOperator":
        """The contraction action: tau^i -> phi . tau^i, taubar -> 0."""
        n = phi.presentation.n
        zero = GR(0)
        rows = [[zero] * (2 * n) for _ in range(2 * n)]
        for (i, (j,)), c in phi.coeffs.items():
            rows[n + j - 1][i - 1] = c
        return CoframeOperator(phi.presentation, ExactMatrix(rows))

    def frame_conjugate(self) -> "CoframeOperator":
        """Conjugate operator: swaps the tau and taubar blocks and conjugates."""
        n = self.presentation.n
        m = self.matrix

        def flip(k):
            return k + n if k < n else k - n

        rows = [[GR(0)] * (2 * n) for _ in range(2 * n)]
        for r in range(2 * n):
            for c in range(2 * n):
                x = m[r, c]
                if x:
                    rows[flip(r)][flip(c)] = x.conjugate()
        return CoframeOperator(self.presentation, ExactMatrix(rows))

    def __add__(self, other: "CoframeOperator") -> "CoframeOperator":
        _check_same(self.presentation, other.presentation)
        return CoframeOperator(self.presentation, self.matrix + other.matrix)

    def __sub__(self, other: "CoframeOperator") -> "CoframeOperator":
        _check_same(self.presentation, other.presentation)
        return CoframeOperator(self.presentation, self.matrix - other.matrix)

    def compose(self, other: "CoframeOperator") -> "CoframeOperator":
        """self after other."""
        _check_same(self.presentation, other.presentation)
        return CoframeOperator(self.presentation, self.matrix @ other.matrix)

    def inverse(self) -> "CoframeOperator":
        try:
            inv = self.matrix.inverse()
        except SingularOperator:
            raise SingularOperator("coframe operator is singular") from None
        return CoframeOperator(self.presentation, inv)

    def is_invertible(self) -> bool:
        return not self.matrix.det_is_zero()

    def column_image(self, flat: int) -> list[tuple[int, GaussianRational]]:
        return [
            (r, self.matrix[r, flat])
            for r in range(2 * self.presentation.n)
            if self.matrix[r, flat]
        ]


def _flat_of_leg(k: int, hol: bool, n: int) -> int:
    return (k - 1) if hol else (n + k - 1)


def _leg_mono(flat: int, n: int) -> Monomial:
    if flat < n:
        return ((flat + 1,), ())
    return ((), (flat - n + 1,))


def simul_contract(op: CoframeOperator, form) -> MixedForm:
    """M (simultaneous contraction) form: apply M to every one-form slot."""
    mf = MixedForm.wrap(form)
    _check_same(op.presentation, mf.presentation)
    n = op.presentation.n
    images = [op.column_image(f) for f in range(2 * n)]
    out: CoeffMap = {}
    for f in mf.components.values():
        for m, c in f.coeffs.items():
            legs = [(k, True) for k in m[0]] + [(k, False) for k in m[1]]
            partial: CoeffMap = {((), ()): c}
            for k, hol in legs:
                img = images[_flat_of_leg(k, hol, n)]
                if not img:
                    partial = {}
                    break
                nxt: CoeffMap = {}
                for mono0, c0 in partial.items():
                    for flat, cc in img:
                        r = mono_wedge(mono0, _leg_mono(flat, n))
                        if r is None:
                            continue
                        sgn, mono1 = r
                        val = c0 * cc
                        if sgn < 0:
                            val = -val
                        acc = nxt.get(mono1, GR(0)) + val
                        if acc:
                            nxt[mono1] = acc
                        elif mono1 in nxt:
                            del nxt[mono1]
                partial = nxt
                if not partial:
                    break
            for mono, cc in partial.items():
                acc = out.get(mono, GR(0)) + cc
                if acc:
                    out[mono] = acc
                elif mono in out:
                    del out[mono]
    return MixedForm.from_coeffs(mf.presentation, out)


# canonical operator grids used by the deformation calculus


def op_phibar_phi(phi: BeltramiDifferential) -> CoframeOperator:
    """The taubar-block operator with matrix (conj(phi) . phi)."""
    a = CoframeOperator.from_beltrami(phi)
    return a.compose(a.frame_conjugate())


def op_phi_phibar(phi: BeltramiDifferential) -> CoframeOperator:
    """The tau-block operator with matrix (phi . conj(phi))."""
    a = CoframeOperator.from_beltrami(phi)
    return a.frame_conjugate().compose(a)


def one_minus_phibar_phi(phi: BeltramiDifferential) -> CoframeOperator:
    return CoframeOperator.identity(phi.presentation) - op_phibar_phi(phi)


def extension_operator(phi: BeltramiDifferential) -> CoframeOperator:
    """1 + phi + conj(phi): the slotwise form of the extension map."""
    a = CoframeOperator.from_beltrami(phi)
    return CoframeOperator.identity(phi.presentation) + a + a.frame_conjugate()


def frame_determinant_ok(phi: BeltramiDifferential) -> bool:
    """Smallness gate: det(1 - conj(phi) phi) != 0."""
    n = phi.presentation.n
    m = phi.conj_matrix() @ phi.matrix()
    return not (ExactMatrix.identity(n) - m).det_is_zero()


def extension_map(phi: BeltramiDifferential, form) -> MixedForm:
    """e^{i_phi | i_phibar}(form) as a base-frame mixed form.

    Each tau-slot goes through e^{i_phi} and each taubar-slot through
    e^{i_phibar}; equivalently (1 + phi + phibar) acts slotwise.  Its
    coefficients over the deformed coframe equal the input's coefficients.
    """
    if not frame_determinant_ok(phi):
        raise SingularFrame("det(1 - phibar phi) = 0")
    return simul_contract(extension_operator(phi), form)


def inverse_extension_map(phi: BeltramiDifferential, form) -> MixedForm:
    """e^{-i_phi | -i_phibar}: the exact slotwise inverse of the extension map."""
    if not frame_determinant_ok(phi):
        raise SingularFrame("det(1 - phibar phi) = 0")
    return simul_contract(extension_operator(phi).inverse(), form)


def deformed_frame_coefficients(phi: BeltramiDifferential, form) -> CoeffMap:
    """Coefficients of a base-frame form over the deformed coframe monomials."""
    return inverse_extension_map(phi, form).coeffs()
