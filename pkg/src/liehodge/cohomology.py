"""Cohomology of a presentation: Dolbeault, del, Bott-Chern, Aeppli, and
de Rham groups, the comparison maps between them, the solvability condition
classes, the deformation-invariance predictor, and the Aeppli/Bott-Chern
duality pairing.

Everything reduces to exact subspace arithmetic: kernels and images of the
operator matrices on the ordered monomial bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import DegreeMismatch, InvalidArrow, NotCocycle
from .forms import (
    MixedForm,
    Monomial,
    PQForm,
    bidegree_basis,
    d_monomial,
    operator_matrix,
    wedge,
)
from .linalg import ExactMatrix, Vector, subspace_rank, vstack
from .scalars import GR, GaussianRational

THEORIES = ("dolbeault", "del", "bott_chern", "aeppli", "de_rham")

# the five comparison arrows of the standard diagram
ARROWS = (
    ("bott_chern", "del"),
    ("bott_chern", "dolbeault"),
    ("bott_chern", "aeppli"),
    ("del", "aeppli"),
    ("dolbeault", "aeppli"),
)


# ---------------------------------------------------------------------------
# cocycle and coboundary spaces as column lists
# ---------------------------------------------------------------------------

def _space_dim(P, p: int, q: int) -> int:
    return len(bidegree_basis(P, p, q))


def cocycle_space(P, theory: str, p: int, q: int) -> list[Vector]:
    """Basis of the cocycle subspace Z at (p,q) for the given theory."""
    key = ("Z", theory, p, q)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    if theory == "dolbeault":
        z = operator_matrix(P, "dbar", p, q).kernel_basis()
    elif theory == "del":
        z = operator_matrix(P, "del", p, q).kernel_basis()
    elif theory == "bott_chern":
        stacked = vstack(
            [operator_matrix(P, "del", p, q), operator_matrix(P, "dbar", p, q)]
        )
        z = stacked.kernel_basis()
    elif theory == "aeppli":
        z = operator_matrix(P, "deldbar", p, q).kernel_basis()
    else:
        raise ValueError(f"no bigraded cocycles for theory {theory!r}")
    P.cache[key] = z
    return z


def coboundary_space(P, theory: str, p: int, q: int) -> list[Vector]:
    """Spanning set of the coboundary subspace B at (p,q)."""
    key = ("Bd", theory, p, q)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    if theory == "dolbeault":
        m = operator_matrix(P, "dbar", p, q - 1)
        b = [m.column(j) for j in range(m.cols)]
    elif theory == "del":
        m = operator_matrix(P, "del", p - 1, q)
        b = [m.column(j) for j in range(m.cols)]
    elif theory == "bott_chern":
        m = operator_matrix(P, "deldbar", p - 1, q - 1)
        b = [m.column(j) for j in range(m.cols)]
    elif theory == "aeppli":
        m1 = operator_matrix(P, "del", p - 1, q)
        m2 = operator_matrix(P, "dbar", p, q - 1)
        b = [m1.column(j) for j in range(m1.cols)] + [
            m2.column(j) for j in range(m2.cols)
        ]
    else:
        raise ValueError(f"no bigraded coboundaries for theory {theory!r}")
    P.cache[key] = b
    return b


def _quotient_representatives(
    P, p: int, q: int, zbasis: list[Vector], bspan: list[Vector]
) -> list[Vector]:
    """Deterministic minimum-norm representatives of a basis of Z/B.

    Kernel vectors completing B to a basis of Z are selected in order, then
    each is replaced by its component orthogonal to span(B) (the unique
    minimum-norm representative of its class).
    """
    dim = _space_dim(P, p, q)
    if not zbasis:
        return []
    rank_b = subspace_rank(bspan, dim)
    chosen: list[Vector] = []
    current = list(bspan)
    rank_cur = rank_b
    for z in zbasis:
        r = subspace_rank(current + [z], dim)
        if r > rank_cur:
            chosen.append(z)
            current.append(z)
            rank_cur = r
    if not bspan:
        return chosen
    bmat = ExactMatrix.from_columns(bspan, rows=dim)
    proj = bmat @ bmat.pinv()
    out = []
    for z in chosen:
        pz = proj.apply(z)
        out.append(tuple(a - b for a, b in zip(z, pz)))
    return out


@dataclass(frozen=True)
class CohomologyTable:
    """Dimensions and representative cocycles for one theory."""

    theory: str
    dims: dict
    representatives: dict

    def dim(self, *slot) -> int:
        key = slot[0] if len(slot) == 1 else tuple(slot)
        return self.dims.get(key, 0)


def cohomology(P, theory: str, p: int, q: int) -> tuple[int, list[PQForm]]:
    """Dimension and representative basis of H at (p,q) for one theory."""
    if theory == "de_rham":
        raise ValueError("de Rham slots are indexed by total degree; use betti_number")
    if theory not in THEORIES:
        raise ValueError(f"unknown theory {theory!r}")
    key = ("H", theory, p, q)
    cached = P.cache.get(key)
    if cached is None:
        basis = bidegree_basis(P, p, q)
        z = cocycle_space(P, theory, p, q)
        b = coboundary_space(P, theory, p, q)
        reps_vec = _quotient_representatives(P, p, q, z, b)
        reps = [PQForm.from_vector(P, p, q, basis, v) for v in reps_vec]
        dim_z = subspace_rank(z, len(basis))
        dim_b = subspace_rank(b, len(basis))
        cached = (dim_z - dim_b, reps)
        P.cache[key] = cached
    return cached


def betti_number(P, k: int) -> tuple[int, int]:
    """(dim ker d, rank of previous d) on the full complexified complex."""
    key = ("betti", k)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    a = de_rham_matrix(P, k)
    b = de_rham_matrix(P, k - 1)
    cached = ((a.cols - a.rank()), b.rank())
    P.cache[key] = cached
    return cached


def total_basis(P, k: int) -> list[tuple[int, int, Monomial]]:
    out = []
    for p in range(P.n + 1):
        q = k - p
        if 0 <= q <= P.n:
            out.extend((p, q, m) for m in bidegree_basis(P, p, q))
    return out


def de_rham_matrix(P, k: int) -> ExactMatrix:
    key = ("drmat", k)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    src = total_basis(P, k)
    tgt = total_basis(P, k + 1)
    index = {m: i for i, m in enumerate(tgt)}
    cols = []
    for (_, _, m) in src:
        col = [GR(0)] * len(tgt)
        for mono, c in d_monomial(P, m).items():
            pos = index.get((len(mono[0]), len(mono[1]), mono))
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


def cohomology_table(P, theory: str) -> CohomologyTable:
    if theory == "de_rham":
        dims = {}
        for k in range(2 * P.n + 1):
            kz, kb = betti_number(P, k)
            dims[k] = kz - kb
        return CohomologyTable("de_rham", dims, {})
    dims = {}
    reps = {}
    for p in range(P.n + 1):
        for q in range(P.n + 1):
            d, r = cohomology(P, theory, p, q)
            dims[(p, q)] = d
            reps[(p, q)] = r
    return CohomologyTable(theory, dims, reps)


def euler_characteristics(P) -> tuple[int, int]:
    """(sum (-1)^{p+q} h^{p,q}_dbar, sum (-1)^k b_k): must agree."""
    chi_dbar = 0
    for p in range(P.n + 1):
        for q in range(P.n + 1):
            chi_dbar += (-1) ** (p + q) * cohomology(P, "dolbeault", p, q)[0]
    chi_dr = 0
    for k in range(2 * P.n + 1):
        kz, kb = betti_number(P, k)
        chi_dr += (-1) ** k * (kz - kb)
    return chi_dbar, chi_dr


# ---------------------------------------------------------------------------
# comparison maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InducedMapReport:
    map_id: str
    source: str
    target: str
    p: int
    q: int
    source_dim: int
    target_dim: int
    kernel_dim: int
    cokernel_dim: int

    @property
    def injective(self) -> bool:
        return self.kernel_dim == 0

    @property
    def surjective(self) -> bool:
        return self.cokernel_dim == 0


def induced_map(P, source: str, target: str, p: int, q: int) -> InducedMapReport:
    """Identity-induced comparison map between two cohomologies at (p,q)."""
    if (source, target) not in ARROWS:
        raise InvalidArrow(f"{source} -> {target} is not a diagram arrow")
    dim = _space_dim(P, p, q)
    z_src = cocycle_space(P, source, p, q)
    b_src = coboundary_space(P, source, p, q)
    b_tgt = coboundary_space(P, target, p, q)
    h_src = cohomology(P, source, p, q)[0]
    h_tgt = cohomology(P, target, p, q)[0]
    # kernel of the induced map: classes of source cocycles that become
    # target coboundaries: dim((Z_src cap B_tgt) + B_src) - dim B_src
    inter = _intersection_span(z_src, b_tgt, dim)
    k_dim = subspace_rank(inter + b_src, dim) - subspace_rank(b_src, dim)
    image_dim = h_src - k_dim
    coker = h_tgt - image_dim
    return InducedMapReport(
        map_id=f"iota^{{{p},{q}}}_{{{source},{target}}}",
        source=source,
        target=target,
        p=p,
        q=q,
        source_dim=h_src,
        target_dim=h_tgt,
        kernel_dim=k_dim,
        cokernel_dim=coker,
    )


def _intersection_span(
    u: Sequence[Vector], w: Sequence[Vector], dim: int
) -> list[Vector]:
    """Spanning set of span(u) intersect span(w)."""
    if not u or not w:
        return []
    mu = ExactMatrix.from_columns(list(u), rows=dim)
    mw = ExactMatrix.from_columns(list(w), rows=dim)
    stacked = ExactMatrix(
        [
            list(mu.entries[i]) + [-x for x in mw.entries[i]]
            for i in range(dim)
        ],
        cols=mu.cols + mw.cols,
    )
    out = []
    for vec in stacked.kernel_basis():
        coeffs = vec[: mu.cols]
        point = mu.apply(coeffs)
        if any(point):
            out.append(point)
    return out


# ---------------------------------------------------------------------------
# condition classes
# ---------------------------------------------------------------------------

CONDITION_CLASSES = ("B", "S", "Bc", "Sc")


def condition(P, cls: str, p: int, q: int) -> bool:
    """Solvability condition classes at (p,q).

    B  : the comparison map bott_chern -> del at (p,q) is injective;
    S  : the comparison map dolbeault -> aeppli at (p,q) is injective;
    Bc : the comparison map bott_chern -> dolbeault at (p-1,q) is surjective;
    Sc : dbar x = del g is solvable for every dbar-closed g in A^{p-1,q}.

    Bc and Sc are vacuously true when p - 1 < 0.
    """
    if cls == "B":
        return induced_map(P, "bott_chern", "del", p, q).injective
    if cls == "S":
        return induced_map(P, "dolbeault", "aeppli", p, q).injective
    if cls == "Bc":
        if p - 1 < 0:
            return True
        return induced_map(P, "bott_chern", "dolbeault", p - 1, q).surjective
    if cls == "Sc":
        if p - 1 < 0:
            return True
        dim = _space_dim(P, p, q)
        dmat = operator_matrix(P, "del", p - 1, q)
        candidates = [dmat.apply(v) for v in cocycle_space(P, "dolbeault", p - 1, q)]
        candidates = [v for v in candidates if any(v)]
        dbar_im = coboundary_space(P, "dolbeault", p, q)
        return subspace_rank(dbar_im, dim) == subspace_rank(
            dbar_im + candidates, dim
        )
    raise ValueError(f"unknown condition class {cls!r}")


def sgg_check(P) -> bool:
    """True iff the (0,1) comparison map bott_chern -> dolbeault is onto."""
    return induced_map(P, "bott_chern", "dolbeault", 0, 1).surjective


# ---------------------------------------------------------------------------
# invariance predictor
# ---------------------------------------------------------------------------

VERDICTS = (
    "guaranteed-by-inv-pq",
    "guaranteed-by-inv-p0",
    "guaranteed-by-inv-0q",
    "guaranteed-q-equals-n",
    "guaranteed-by-vanishing",
    "no-conclusion",
)


@dataclass(frozen=True)
class PredictorVerdict:
    p: int
    q: int
    verdict: str
    certificate: dict

    @property
    def guaranteed(self) -> bool:
        return self.verdict != "no-conclusion"


def invariance_predict(P, p: int, q: int) -> PredictorVerdict:
    """Recursive application of the invariance theorems with certificates.

    Route order at each slot: the (p,0) special case, the (0,q) special
    case, the general route, the top-degree reduction, and finally the
    vanishing route through h^{p,q+1} = 0.  The base slot q = -1 is
    vacuously guaranteed.
    """
    memo = P.cache.setdefault(("predictor",), {})

    def go(pp: int, qq: int) -> PredictorVerdict:
        if qq < 0:
            return PredictorVerdict(pp, qq, "vacuously-guaranteed", {"base": "q = -1 is vacuous"})
        if (pp, qq) in memo:
            return memo[(pp, qq)]
        # seed to cut cycles; overwritten below
        memo[(pp, qq)] = PredictorVerdict(pp, qq, "no-conclusion", {"note": "in progress"})
        result = None
        if qq == 0:
            c1 = condition(P, "S", pp + 1, 0)
            c2 = condition(P, "S", pp, 1)
            if c1 and c2:
                result = PredictorVerdict(
                    pp, 0, "guaranteed-by-inv-p0",
                    {f"S^{{{pp + 1},0}}": c1, f"S^{{{pp},1}}": c2},
                )
        if result is None and pp == 0 and qq >= 1:
            c = condition(P, "Bc", 1, qq)
            if c:
                prev = go(0, qq - 1)
                if prev.guaranteed:
                    result = PredictorVerdict(
                        0, qq, "guaranteed-by-inv-0q",
                        {f"Bc^{{1,{qq}}}": True, "depends": {"slot": (0, qq - 1), "verdict": prev.verdict}},
                    )
        if result is None:
            c1 = condition(P, "B", pp + 1, qq)
            c2 = condition(P, "S", pp, qq + 1)
            if c1 and c2:
                prev = go(pp, qq - 1)
                if prev.guaranteed:
                    result = PredictorVerdict(
                        pp, qq, "guaranteed-by-inv-pq",
                        {
                            f"B^{{{pp + 1},{qq}}}": True,
                            f"S^{{{pp},{qq + 1}}}": True,
                            "depends": {"slot": (pp, qq - 1), "verdict": prev.verdict},
                        },
                    )
        if result is None and qq == P.n:
            prev = go(pp, qq - 1)
            if prev.guaranteed:
                result = PredictorVerdict(
                    pp, qq, "guaranteed-q-equals-n",
                    {"depends": {"slot": (pp, qq - 1), "verdict": prev.verdict}},
                )
        if result is None:
            if cohomology(P, "dolbeault", pp, qq + 1)[0] == 0:
                prev = go(pp, qq - 1)
                if prev.guaranteed:
                    result = PredictorVerdict(
                        pp, qq, "guaranteed-by-vanishing",
                        {
                            f"h^{{{pp},{qq + 1}}}_dbar": 0,
                            "depends": {"slot": (pp, qq - 1), "verdict": prev.verdict},
                        },
                    )
        if result is None:
            result = PredictorVerdict(
                pp, qq, "no-conclusion",
                {
                    f"B^{{{pp + 1},{qq}}}": condition(P, "B", pp + 1, qq),
                    f"S^{{{pp},{qq + 1}}}": condition(P, "S", pp, qq + 1),
                    **(
                        {f"S^{{{pp + 1},0}}": condition(P, "S", pp + 1, 0),
                         f"S^{{{pp},1}}": condition(P, "S", pp, 1)}
                        if qq == 0
                        else {}
                    ),
                    **(
                        {f"Bc^{{1,{qq}}}": condition(P, "Bc", 1, qq)}
                        if pp == 0 and qq >= 1
                        else {}
                    ),
                    f"h^{{{pp},{qq + 1}}}_dbar": cohomology(P, "dolbeault", pp, qq + 1)[0],
                },
            )
        memo[(pp, qq)] = result
        return result

    return go(p, q)


# ---------------------------------------------------------------------------
# duality pairing
# ---------------------------------------------------------------------------

def duality_pairing(P, a: PQForm, b: PQForm) -> GaussianRational:
    """Pairing of an Aeppli class with a Bott-Chern class of complementary
    bidegree: the coefficient of the volume monomial in a wedge b."""
    n = P.n
    if (a.p + b.p, a.q + b.q) != (n, n):
        raise DegreeMismatch(
            f"bidegrees ({a.p},{a.q}) and ({b.p},{b.q}) are not complementary"
        )
    from .forms import dbar_part, del_part, differential

    if not del_part(dbar_part(a)).is_zero():
        raise NotCocycle("first argument is not deldbar-closed")
    if not differential(b).is_zero():
        raise NotCocycle("second argument is not d-closed")
    top = wedge(a, b).component(n, n)
    vol = (tuple(range(1, n + 1)), tuple(range(1, n + 1)))
    return top.coeffs.get(vol, GR(0))


def pairing_matrix(P, p: int, q: int) -> ExactMatrix:
    """Pairing matrix between H_A^{n-p,n-q} and H_BC^{p,q} representative bases."""
    n = P.n
    _, reps_a = cohomology(P, "aeppli", n - p, n - q)
    _, reps_bc = cohomology(P, "bott_chern", p, q)
    rows = []
    for a in reps_a:
        rows.append([duality_pairing(P, a, b) for b in reps_bc])
    if not rows:
        return ExactMatrix.zeros(0, len(reps_bc))
    return ExactMatrix(rows, cols=len(reps_bc))
