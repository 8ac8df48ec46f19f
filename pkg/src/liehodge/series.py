"""Truncated power series in formal deformation parameters.

Coefficients are forms (PQForm / MixedForm) or vector-valued forms; the
parameters are holomorphic formal symbols.  Where a computation needs the
conjugate of a series, the conjugated series lives in an explicitly doubled
parameter ring (each parameter paired with a formal conjugate symbol), so
all arithmetic stays between holomorphic series.
"""

from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Optional, Sequence

from .errors import DegreeMismatch
from .scalars import GR, GaussianRational

Multidegree = tuple[int, ...]


def _total(deg: Multidegree) -> int:
    return sum(deg)


def degrees_up_to(num_params: int, order: int) -> list[Multidegree]:
    """All multidegrees with total degree <= order, graded-lexicographic."""
    out: list[Multidegree] = []
    for total in range(order + 1):
        if num_params == 0:
            if total == 0:
                out.append(())
            continue
        block: list[Multidegree] = []

        def rec(prefix, remaining, left):
            if remaining == 1:
                block.append(tuple(prefix + [left]))
                return
            for k in range(left + 1):
                rec(prefix + [k], remaining - 1, left - k)

        rec([], num_params, total)
        out.extend(sorted(block))
    return out


def splits(deg: Multidegree):
    """All ordered pairs (J, L) of multidegrees with J + L = deg."""
    ranges = [range(k + 1) for k in deg]
    for j in product(*ranges):
        yield tuple(j), tuple(k - a for k, a in zip(deg, j))


class FormSeries:
    """Mapping multidegree -> coefficient, truncated at a total order."""

    __slots__ = ("params", "order", "coeffs")

    def __init__(self, params: Sequence[str], order: int, coeffs: Optional[dict] = None):
        self.params = tuple(params)
        if len(set(self.params)) != len(self.params):
            raise DegreeMismatch("duplicate parameter names")
        self.order = order
        clean = {}
        for deg, payload in (coeffs or {}).items():
            deg = tuple(deg)
            if len(deg) != len(self.params):
                raise DegreeMismatch(f"multidegree {deg} does not match parameters")
            if _total(deg) > order:
                continue
            if payload is None or (hasattr(payload, "is_zero") and payload.is_zero()):
                continue
            clean[deg] = payload
        self.coeffs = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def constant(params: Sequence[str], order: int, payload) -> "FormSeries":
        zero_deg = tuple(0 for _ in params)
        return FormSeries(params, order, {zero_deg: payload})

    @staticmethod
    def zero(params: Sequence[str], order: int) -> "FormSeries":
        return FormSeries(params, order, {})

    def unit_degree(self, name: str) -> Multidegree:
        idx = self.params.index(name)
        return tuple(1 if i == idx else 0 for i in range(len(self.params)))

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, deg: Multidegree):
        return self.coeffs.get(tuple(deg))

    def degrees(self) -> list[Multidegree]:
        return sorted(self.coeffs, key=lambda d: (_total(d), d))

    def __eq__(self, other):
        if not isinstance(other, FormSeries):
            return NotImplemented
        if self.params != other.params:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        for k in keys:
            a, b = self.coeffs.get(k), other.coeffs.get(k)
            if a is None:
                if b is not None and not b.is_zero():
                    return False
            elif b is None:
                if not a.is_zero():
                    return False
            elif not (a == b):
                return False
        return True

    def __add__(self, other: "FormSeries") -> "FormSeries":
        self._check_ring(other)
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for deg, payload in other.coeffs.items():
            out[deg] = out[deg] + payload if deg in out else payload
        return FormSeries(self.params, order, out)

    def __sub__(self, other: "FormSeries") -> "FormSeries":
        return self + other.scale(GR(-1))

    def __neg__(self) -> "FormSeries":
        return self.scale(GR(-1))

    def scale(self, c) -> "FormSeries":
        c = GR.coerce(c)
        return FormSeries(
            self.params, self.order, {d: v.scale(c) for d, v in self.coeffs.items()}
        )

    def shift(self, deg: Multidegree) -> "FormSeries":
        """Multiply by the monomial t^deg, truncating at the order."""
        deg = tuple(deg)
        out = {}
        for d, v in self.coeffs.items():
            nd = tuple(a + b for a, b in zip(d, deg))
            if _total(nd) <= self.order:
                out[nd] = v
        return FormSeries(self.params, self.order, out)

    def map_coefficients(self, func: Callable) -> "FormSeries":
        """Apply a linear map to every coefficient (degrees unchanged)."""
        return FormSeries(
            self.params, self.order, {d: func(v) for d, v in self.coeffs.items()}
        )

    def conjugate_into(self, params: Sequence[str], param_map: dict) -> "FormSeries":
        """Formal conjugate: conjugate coefficients, send each parameter to
        its declared conjugate symbol inside the (larger) target ring."""
        params = tuple(params)
        index = {name: i for i, name in enumerate(params)}
        out = {}
        for d, v in self.coeffs.items():
            nd = [0] * len(params)
            for name, k in zip(self.params, d):
                if k:
                    nd[index[param_map[name]]] += k
            out[tuple(nd)] = v.conjugate()
        return FormSeries(params, self.order, out)

    def extend_ring(self, params: Sequence[str]) -> "FormSeries":
        """Reinterpret over a larger parameter tuple (old ones must appear)."""
        params = tuple(params)
        index = {name: i for i, name in enumerate(params)}
        out = {}
        for d, v in self.coeffs.items():
            nd = [0] * len(params)
            for name, k in zip(self.params, d):
                nd[index[name]] = k
            out[tuple(nd)] = v
        return FormSeries(params, self.order, out)

    def evaluate(self, bindings: dict):
        """Exact evaluation at parameter values; returns a summed payload."""
        values = [GR.coerce(bindings[name]) for name in self.params]
        total = None
        for d, payload in self.coeffs.items():
            c = GR(1)
            for v, k in zip(values, d):
                for _ in range(k):
                    c = c * v
            term = payload.scale(c)
            total = term if total is None else total + term
        return total

    def _check_ring(self, other: "FormSeries"):
        if self.params != other.params:
            raise DegreeMismatch("series live in different parameter rings")

    def __repr__(self):
        if not self.coeffs:
            return f"FormSeries({self.params}, order={self.order}; 0)"
        parts = [f"t^{d}: {v!r}" for d, v in sorted(self.coeffs.items())]
        return f"FormSeries({self.params}, order={self.order}; " + "; ".join(parts) + ")"


def bilinear_series(
    a: FormSeries, b: FormSeries, pairing: Callable
) -> FormSeries:
    """Series extension of a bilinear operation on coefficients."""
    a._check_ring(b)
    order = min(a.order, b.order)
    out: dict = {}
    for da, va in a.coeffs.items():
        for db, vb in b.coeffs.items():
            deg = tuple(x + y for x, y in zip(da, db))
            if _total(deg) > order:
                continue
            term = pairing(va, vb)
            if term is None or (hasattr(term, "is_zero") and term.is_zero()):
                continue
            out[deg] = out[deg] + term if deg in out else term
    return FormSeries(a.params, order, out)
