"""Everything parameterized by deformation parameters: frame matrices and
their block inverse, deformed structure equations and deformed-fiber
cohomology at exact parameter values, the canonical Beltrami power series
and its obstructions, extension obstructions, and the power-series
extension solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cohomology import cohomology, condition
from .errors import (
    DegreeMismatch,
    HypothesisFailed,
    NotCocycle,
    NotIntegrable,
    NotSolvable,
    SingularFrame,
)
from .forms import (
    BeltramiDifferential,
    CoframeOperator,
    MixedForm,
    PQForm,
    VectorForm,
    bidegree_basis,
    contract,
    dbar_part,
    del_bar_beltrami,
    del_part,
    differential,
    extension_operator,
    frame_determinant_ok,
    integrability_defect,
    one_minus_phibar_phi,
    operator_matrix,
    schouten_bracket,
    simul_contract,
)
from .harmonic import MetricContext
from .linalg import ExactMatrix, Vector
from .presentation import LiePresentation
from .scalars import GR, GaussianRational
from .series import FormSeries, Multidegree, bilinear_series, degrees_up_to, splits


# ---------------------------------------------------------------------------
# frame matrices and the block inverse
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameMatrix:
    """Holomorphic frame Jacobian J together with a Beltrami grid."""

    J: ExactMatrix
    phi: BeltramiDifferential

    def __post_init__(self):
        n = self.phi.presentation.n
        if self.J.rows != n or self.J.cols != n:
            raise DegreeMismatch("frame Jacobian must be n x n")

    def assembled(self) -> ExactMatrix:
        """The full 2n x 2n frame matrix [[J, J phi], [conj(J phi), conj J]]."""
        J = self.J
        JPhi = J @ self.phi.matrix()
        top = [list(J.entries[i]) + list(JPhi.entries[i]) for i in range(J.rows)]
        Jc = J.conjugate()
        JPhic = JPhi.conjugate()
        bottom = [list(JPhic.entries[i]) + list(Jc.entries[i]) for i in range(J.rows)]
        return ExactMatrix(top + bottom, cols=2 * J.rows)


def block_inverse(frame: FrameMatrix) -> ExactMatrix:
    """Closed-form inverse of the assembled frame matrix, block by block:

        [ (1 - phi phibar)^-1 J^-1        -phi (1 - phibar phi)^-1 Jbar^-1 ]
        [ -(1 - phibar phi)^-1 phibar J^-1  (1 - phibar phi)^-1 Jbar^-1    ]
    """
    n = frame.phi.presentation.n
    phi_m = frame.phi.matrix()
    phibar_m = phi_m.conjugate()
    ident = ExactMatrix.identity(n)
    one_minus_pp = ident - phi_m @ phibar_m
    one_minus_bp = ident - phibar_m @ phi_m
    if one_minus_pp.det_is_zero() or one_minus_bp.det_is_zero():
        raise SingularFrame("det(1 - phi phibar) = 0")
    if frame.J.det_is_zero():
        raise SingularFrame("frame Jacobian is singular")
    Jinv = frame.J.inverse()
    Jbar_inv = frame.J.conjugate().inverse()
    tl = one_minus_pp.inverse() @ Jinv
    tr = (phi_m @ one_minus_bp.inverse() @ Jbar_inv).scale(GR(-1))
    bl = (one_minus_bp.inverse() @ phibar_m @ Jinv).scale(GR(-1))
    br = one_minus_bp.inverse() @ Jbar_inv
    rows = [list(tl.entries[i]) + list(tr.entries[i]) for i in range(n)]
    rows += [list(bl.entries[i]) + list(br.entries[i]) for i in range(n)]
    return ExactMatrix(rows, cols=2 * n)


# ---------------------------------------------------------------------------
# deformed structure equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeformedPresentation:
    base: LiePresentation
    phi: BeltramiDifferential
    derived: LiePresentation


def deform_structure(P: LiePresentation, phi: BeltramiDifferential) -> DeformedPresentation:
    """Structure equations in the deformed coframe tau^k + phi . tau^k.

    d of each deformed coframe element is computed in the base frame and
    rewritten over the deformed frame; integrability of phi guarantees the
    rewrite has no (0,2)-component (asserted exactly).
    """
    defect = integrability_defect(phi)
    if not defect.is_zero():
        raise NotIntegrable(defect)
    if not frame_determinant_ok(phi):
        raise SingularFrame("det(1 - phibar phi) = 0")
    ext = extension_operator(phi)
    ext_inv = ext.inverse()
    table = {}
    for k in range(1, P.n + 1):
        tau_k = PQForm.monomial(P, (k,), ())
        rho_k = MixedForm.wrap(tau_k) + contract(phi, tau_k)
        rewritten = simul_contract(ext_inv, differential(rho_k))
        coeffs = rewritten.coeffs()
        bad = {m: c for m, c in coeffs.items() if len(m[0]) == 0 and len(m[1]) == 2}
        if bad:
            raise AssertionError(
                f"(0,2)-component survived in d of deformed coframe element {k}: {bad}"
            )
        if coeffs:
            table[k] = coeffs
    derived = LiePresentation(
        P.n,
        table,
        names=[f"{nm}(t)" for nm in P.names],
        name=(P.name + "(t)") if P.name else "deformed",
        note=f"deformation of {P.name or 'presentation'} by an exact Beltrami grid",
        nilpotent=P.nilpotent,
        check_jacobi=P.jacobi_ok,
    )
    return DeformedPresentation(base=P, phi=phi, derived=derived)


def deformed_hodge(P: LiePresentation, phi: BeltramiDifferential, theory: str, p: int, q: int) -> int:
    return cohomology(deform_structure(P, phi).derived, theory, p, q)[0]


# ---------------------------------------------------------------------------
# vector-valued form spaces (for the canonical Beltrami series)
# ---------------------------------------------------------------------------

def vf_basis(P, s: int) -> list[tuple[int, tuple[int, ...]]]:
    """Ordered basis (vector index, index tuple) of Lambda^{0,s} (x) g^{1,0}."""
    from itertools import combinations

    key = ("vfbasis", s)
    cached = P.cache.get(key)
    if cached is None:
        if s < 0 or s > P.n:
            cached = []
        else:
            cached = [
                (i, jj)
                for jj in combinations(range(1, P.n + 1), s)
                for i in range(1, P.n + 1)
            ]
        P.cache[key] = cached
    return cached


def vf_to_vector(v: VectorForm, basis) -> Vector:
    return tuple(v.coeffs.get(key, GR(0)) for key in basis)


def vf_from_vector(P, s: int, basis, vec) -> VectorForm:
    return VectorForm(P, s, {key: GR.coerce(c) for key, c in zip(basis, vec) if GR.coerce(c)})


def vf_dbar_matrix(P, s: int) -> ExactMatrix:
    """Matrix of dbar from Lambda^{0,s} (x) g^{1,0} to degree s+1."""
    key = ("vfdbar", s)
    cached = P.cache.get(key)
    if cached is not None:
        return cached
    src = vf_basis(P, s)
    tgt = vf_basis(P, s + 1)
    index = {k: i for i, k in enumerate(tgt)}
    cols = []
    for (i, jj) in src:
        image = del_bar_beltrami(VectorForm(P, s, {(i, jj): GR(1)}))
        col = [GR(0)] * len(tgt)
        for kk, c in image.coeffs.items():
            col[index[kk]] = c
        cols.append(col)
    mat = (
        ExactMatrix.from_columns(cols, rows=len(tgt))
        if cols
        else ExactMatrix.zeros(len(tgt), 0)
    )
    P.cache[key] = mat
    return mat


def vf_laplacian(P, s: int) -> ExactMatrix:
    key = ("vfbox", s)
    cached = P.cache.get(key)
    if cached is None:
        a = vf_dbar_matrix(P, s)
        b = vf_dbar_matrix(P, s - 1) if s >= 1 else ExactMatrix.zeros(len(vf_basis(P, s)), 0)
        cached = a.H @ a + b @ b.H
        P.cache[key] = cached
    return cached


def vf_green(P, s: int) -> tuple[ExactMatrix, ExactMatrix]:
    key = ("vfgreen", s)
    cached = P.cache.get(key)
    if cached is None:
        box = vf_laplacian(P, s)
        g = box.pinv()
        h = ExactMatrix.identity(box.rows) - box @ g
        cached = (g, h)
        P.cache[key] = cached
    return cached


def harmonic_beltrami_basis(P) -> list[BeltramiDifferential]:
    """Deterministic kernel basis of the Laplacian on (0,1) vector forms."""
    basis = vf_basis(P, 1)
    box = vf_laplacian(P, 1)
    return [
        BeltramiDifferential(P, dict(vf_from_vector(P, 1, basis, vec).coeffs))
        for vec in box.kernel_basis()
    ]


# ---------------------------------------------------------------------------
# the canonical Beltrami power series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KuranishiResult:
    phi: FormSeries
    obstruction: FormSeries
    basis: tuple
    notes: tuple

    @property
    def parameter_count(self) -> int:
        return len(self.basis)

    def obstruction_free(self) -> bool:
        return self.obstruction.is_zero()


def kuranishi_series(
    P: LiePresentation,
    ctx: Optional[MetricContext] = None,
    order: int = 2,
    directions: Optional[Sequence[VectorForm]] = None,
) -> KuranishiResult:
    """Canonical Beltrami power series and its harmonic obstructions.

    First-order term runs over a deterministic harmonic basis (or the given
    directions, each verified harmonic); higher coefficients follow the
    half-preimage recursion through the Green operator on (0,2) vector
    forms.  The obstruction report collects the harmonic projections of the
    self-bracket per multidegree.
    """
    if order < 1:
        raise DegreeMismatch("series order must be at least 1")
    notes = [
        "metric: coframe-orthonormal inner product on vector-valued forms",
        "first-order basis: deterministic kernel basis of the (0,1) Laplacian",
    ]
    if directions is None:
        etas = harmonic_beltrami_basis(P)
    else:
        etas = []
        box = vf_laplacian(P, 1)
        basis1 = vf_basis(P, 1)
        for v in directions:
            if v.s != 1:
                raise DegreeMismatch("directions must be (0,1) vector forms")
            if any(box.apply(vf_to_vector(v, basis1))):
                raise DegreeMismatch("direction is not harmonic")
            etas.append(BeltramiDifferential(P, dict(v.coeffs)))
        notes.append("first-order basis restricted to user-supplied directions")
    m = len(etas)
    params = tuple(f"t{i+1}" for i in range(m))
    if m == 0:
        notes.append("rigid: no harmonic (0,1) vector forms; empty series")
        return KuranishiResult(
            FormSeries.zero(params, order),
            FormSeries.zero(params, order),
            (),
            tuple(notes),
        )
    basis2 = vf_basis(P, 2)
    g2, h2 = vf_green(P, 2)
    dbar1 = vf_dbar_matrix(P, 1)

    coeffs: dict[Multidegree, VectorForm] = {}
    for i, eta in enumerate(etas):
        deg = tuple(1 if j == i else 0 for j in range(m))
        coeffs[deg] = eta
    obstruction: dict[Multidegree, VectorForm] = {}
    half = GR(1) / GR(2)
    for deg in degrees_up_to(m, order):
        total = sum(deg)
        if total < 2:
            continue
        bracket_sum = None
        for j, l in splits(deg):
            if sum(j) == 0 or sum(l) == 0:
                continue
            a = coeffs.get(j)
            b = coeffs.get(l)
            if a is None or b is None:
                continue
            term = schouten_bracket(a, b)
            bracket_sum = term if bracket_sum is None else bracket_sum + term
        if bracket_sum is None or bracket_sum.is_zero():
            continue
        yvec = vf_to_vector(bracket_sum, basis2)
        obs = vf_from_vector(P, 2, basis2, h2.apply(yvec))
        if not obs.is_zero():
            obstruction[deg] = obs
        xvec = dbar1.H.apply(g2.apply(yvec))
        x = vf_from_vector(P, 1, vf_basis(P, 1), xvec).scale(half)
        if not x.is_zero():
            coeffs[deg] = BeltramiDifferential(P, dict(x.coeffs))
    phi_series = FormSeries(params, order, coeffs)
    obs_series = FormSeries(params, order, obstruction)
    return KuranishiResult(phi_series, obs_series, tuple(etas), tuple(notes))


def kuranishi_integrability_defect(P, result: KuranishiResult) -> FormSeries:
    """dbar phi(t) - (1/2)[phi(t),phi(t)] + (1/2) * reported obstructions.

    Vanishes identically (as a truncated series) by construction of the
    recursion whenever the non-harmonic remainder of the self bracket has a
    dbar-closed Green image; asserted exactly by the test suite on the
    shipped examples.
    """
    phi = result.phi
    dbar_phi = phi.map_coefficients(del_bar_beltrami)
    bracket = bilinear_series(phi, phi, schouten_bracket)
    half = GR(1) / GR(2)
    return dbar_phi - bracket.scale(half) + result.obstruction.scale(half)


# ---------------------------------------------------------------------------
# extension obstruction
# ---------------------------------------------------------------------------

def obstruction(P: LiePresentation, phi: BeltramiDifferential, sigma) -> MixedForm:
    """([del, i_phi] + dbar)((1 - phibar phi) simul-contracted into sigma).

    Zero exactly when the extension image of sigma is dbar-closed on the
    deformed fiber.
    """
    if not frame_determinant_ok(phi):
        raise SingularFrame("det(1 - phibar phi) = 0")
    psi = simul_contract(one_minus_phibar_phi(phi), sigma)
    return del_part(contract(phi, psi)) - contract(phi, del_part(psi)) + dbar_part(psi)


@dataclass(frozen=True)
class EquivalenceReport:
    obstruction_zero: bool
    deformed_dbar_zero: bool

    @property
    def agree(self) -> bool:
        return self.obstruction_zero == self.deformed_dbar_zero


def obstruction_equivalence_check(
    P: LiePresentation, phi: BeltramiDifferential, sigma: PQForm
) -> EquivalenceReport:
    """Compare the obstruction equation against dbar-closedness of the
    extension image computed inside the deformed presentation."""
    obs_zero = obstruction(P, phi, sigma).is_zero()
    deformed = deform_structure(P, phi).derived
    transported = PQForm(deformed, sigma.p, sigma.q, dict(sigma.coeffs))
    dbar_zero = dbar_part(transported).is_zero()
    return EquivalenceReport(obs_zero, dbar_zero)


# ---------------------------------------------------------------------------
# operator series (simultaneous contraction with series coefficients)
# ---------------------------------------------------------------------------

class OperatorSeries:
    """Truncated series of coframe operators in formal parameters."""

    __slots__ = ("presentation", "params", "order", "coeffs")

    def __init__(self, presentation, params, order, coeffs=None):
        self.presentation = presentation
        self.params = tuple(params)
        self.order = order
        self.coeffs = {
            tuple(d): op
            for d, op in (coeffs or {}).items()
            if sum(d) <= order and not op.matrix.is_zero()
        }

    @staticmethod
    def identity(presentation, params, order) -> "OperatorSeries":
        zero_deg = tuple(0 for _ in params)
        return OperatorSeries(
            presentation, params, order, {zero_deg: CoframeOperator.identity(presentation)}
        )

    @staticmethod
    def from_beltrami_series(
        phi_series: FormSeries, presentation, params, order, conjugate=False,
        param_map: Optional[dict] = None,
    ) -> "OperatorSeries":
        index = {name: i for i, name in enumerate(params)}
        coeffs = {}
        for d, v in phi_series.coeffs.items():
            op = CoframeOperator.from_beltrami(BeltramiDifferential(presentation, dict(v.coeffs)))
            if conjugate:
                op = op.frame_conjugate()
                nd = [0] * len(params)
                for name, k in zip(phi_series.params, d):
                    nd[index[param_map[name]]] += k
                deg = tuple(nd)
            else:
                nd = [0] * len(params)
                for name, k in zip(phi_series.params, d):
                    nd[index[name]] = k
                deg = tuple(nd)
            coeffs[deg] = op
        return OperatorSeries(presentation, params, order, coeffs)

    def __add__(self, other: "OperatorSeries") -> "OperatorSeries":
        out = dict(self.coeffs)
        for d, op in other.coeffs.items():
            out[d] = out[d] + op if d in out else op
        return OperatorSeries(self.presentation, self.params, min(self.order, other.order), out)

    def __sub__(self, other: "OperatorSeries") -> "OperatorSeries":
        neg = {
            d: CoframeOperator(other.presentation, op.matrix.scale(GR(-1)))
            for d, op in other.coeffs.items()
        }
        return self + OperatorSeries(other.presentation, other.params, other.order, neg)

    def compose(self, other: "OperatorSeries") -> "OperatorSeries":
        order = min(self.order, other.order)
        out = {}
        for d1, op1 in self.coeffs.items():
            for d2, op2 in other.coeffs.items():
                deg = tuple(a + b for a, b in zip(d1, d2))
                if sum(deg) > order:
                    continue
                term = op1.compose(op2)
                out[deg] = out[deg] + term if deg in out else term
        return OperatorSeries(self.presentation, self.params, order, out)

    def neumann_inverse(self) -> "OperatorSeries":
        """Inverse of a series whose constant term is invertible."""
        zero_deg = tuple(0 for _ in self.params)
        const = self.coeffs.get(zero_deg)
        if const is None:
            raise SingularFrame("operator series has no constant term")
        c_inv = const.inverse()
        # write self = C (I - X) and invert the unit part by a Neumann sum
        x_coeffs = {}
        for d, op in self.coeffs.items():
            if d == zero_deg:
                continue
            x_coeffs[d] = CoframeOperator(
                self.presentation, (c_inv.compose(op)).matrix.scale(GR(-1))
            )
        inv = {zero_deg: CoframeOperator.identity(self.presentation)}
        for deg in degrees_up_to(len(self.params), self.order):
            if sum(deg) == 0:
                continue
            acc = None
            for j, l in splits(deg):
                if sum(j) == 0:
                    continue
                xj = x_coeffs.get(j)
                bl = inv.get(l)
                if xj is None or bl is None:
                    continue
                term = xj.compose(bl)
                acc = term if acc is None else acc + term
            if acc is not None and not acc.matrix.is_zero():
                inv[deg] = acc
        unit_inv = OperatorSeries(self.presentation, self.params, self.order, inv)
        c_inv_series = OperatorSeries(
            self.presentation, self.params, self.order,
            {zero_deg: c_inv},
        )
        return unit_inv.compose(c_inv_series)

    def apply(self, series: FormSeries) -> FormSeries:
        order = min(self.order, series.order)
        out = {}
        for d1, op in self.coeffs.items():
            for d2, payload in series.coeffs.items():
                deg = tuple(a + b for a, b in zip(d1, d2))
                if sum(deg) > order:
                    continue
                term = simul_contract(op, payload)
                if term.is_zero():
                    continue
                out[deg] = out[deg] + term if deg in out else term
        return FormSeries(series.params, order, out)


def doubled_ring(params: Sequence[str]) -> tuple[tuple[str, ...], dict]:
    """Parameters together with formal conjugates; returns (ring, conj map)."""
    params = tuple(params)
    conj = {name: f"{name}~" for name in params}
    return params + tuple(conj[name] for name in params), conj


def obstruction_series(
    P: LiePresentation, phi_series: FormSeries, sigma_series: FormSeries
) -> FormSeries:
    """The extension obstruction as a series over the doubled ring."""
    if phi_series.params != sigma_series.params:
        raise DegreeMismatch("phi and sigma series use different parameters")
    order = min(phi_series.order, sigma_series.order)
    ring, conj_map = doubled_ring(phi_series.params)
    phi2 = phi_series.extend_ring(ring)
    sigma2 = sigma_series.extend_ring(ring)
    op_phi = OperatorSeries.from_beltrami_series(phi2, P, ring, order)
    op_phibar = OperatorSeries.from_beltrami_series(
        phi_series, P, ring, order, conjugate=True, param_map=conj_map
    )
    ident = OperatorSeries.identity(P, ring, order)
    one_minus = ident - op_phi.compose(op_phibar)
    psi = one_minus.apply(sigma2)
    contracted = bilinear_series(phi2, psi, contract)
    del_psi = psi.map_coefficients(del_part)
    term1 = contracted.map_coefficients(del_part)
    term2 = bilinear_series(phi2, del_psi, contract)
    term3 = psi.map_coefficients(dbar_part)
    return term1 - term2 + term3


# ---------------------------------------------------------------------------
# power-series dbar-extension solvers
# ---------------------------------------------------------------------------

EXTENSION_MODES = ("pq", "p0", "0q", "vanishing")


@dataclass(frozen=True)
class ExtensionResult:
    mode: str
    series: FormSeries
    residuals: dict
    hypotheses: dict
    notes: tuple

    def residuals_zero(self) -> bool:
        return all(f.is_zero() for per in self.residuals.values() for f in per.values())


def _check_hypotheses(P, mode: str, p: int, q: int, strict: bool):
    hyps = {}
    notes = []
    if mode == "pq":
        hyps[f"B^{{{p + 1},{q}}}"] = condition(P, "B", p + 1, q)
        hyps[f"S^{{{p},{q + 1}}}"] = condition(P, "S", p, q + 1)
    elif mode == "p0":
        hyps[f"S^{{{p + 1},0}}"] = condition(P, "S", p + 1, 0)
        s_p1 = condition(P, "S", p, 1)
        hyps[f"S^{{{p},1}}"] = s_p1
        if not s_p1 and p == 1:
            weak = condition(P, "Sc", 1, 1)
            hyps["Sc^{1,1}"] = weak
            if weak:
                notes.append("route: weakened (1,0) hypothesis via Sc^{1,1}")
    elif mode == "0q":
        hyps[f"Bc^{{1,{q}}}"] = condition(P, "Bc", 1, q)
    elif mode == "vanishing":
        h = cohomology(P, "dolbeault", p, q + 1)[0]
        hyps[f"h^{{{p},{q + 1}}}_dbar = 0"] = h == 0
    else:
        raise ValueError(f"unknown extension mode {mode!r}")
    ok = _mode_hypotheses_hold(mode, p, hyps)
    if strict and not ok:
        failing = [name for name, val in hyps.items() if not val]
        raise HypothesisFailed(" and ".join(failing))
    return hyps, notes


def _mode_hypotheses_hold(mode: str, p: int, hyps: dict) -> bool:
    if mode == "p0":
        strong = hyps.get(f"S^{{{p},1}}", False)
        weak = hyps.get("Sc^{1,1}", False)
        return hyps.get(f"S^{{{p + 1},0}}", False) and (strong or weak)
    return all(hyps.values())


def extend_series(
    P: LiePresentation,
    ctx: MetricContext,
    phi_series: FormSeries,
    sigma0: PQForm,
    mode: str,
    order: int,
    strict: bool = True,
) -> ExtensionResult:
    """Solve the dbar-extension systems order by order.

    Mode-specific hypotheses are verified first (HypothesisFailed when
    strict); the canonical Green-operator solution formulas are used at
    every order and the exact per-order defects are reported.
    """
    if mode not in EXTENSION_MODES:
        raise ValueError(f"unknown extension mode {mode!r}")
    p, q = sigma0.p, sigma0.q
    hyps, notes = _check_hypotheses(P, mode, p, q, strict)
    if not dbar_part(sigma0).is_zero():
        raise NotCocycle("sigma0 must be dbar-closed")
    for d, v in phi_series.coeffs.items():
        if sum(d) == 0 and not v.is_zero():
            raise DegreeMismatch("phi series must have no constant term")
    params = phi_series.params
    order = min(order, phi_series.order) if phi_series.coeffs else order

    if mode == "0q":
        return _extend_0q(P, ctx, phi_series, sigma0, order, hyps, notes)

    if mode == "pq":
        base = ctx.canonical_rep(sigma0)
        notes.append("order-0 term: canonical d-closed representative")
    elif mode == "p0":
        base = sigma0
        notes.append("order-0 term: the given holomorphic form")
    else:
        base = ctx.harmonic_projection("dolbeault", sigma0)
        notes.append("order-0 term: harmonic representative")

    coeffs: dict[Multidegree, PQForm] = {}
    zero_deg = tuple(0 for _ in params)
    coeffs[zero_deg] = base
    residuals: dict = {
        zero_deg: {
            "d_closed": differential(base)
            if mode in ("pq", "p0")
            else dbar_part(base)
        }
    }

    def phi_at(deg):
        v = phi_series.coeffs.get(deg)
        if v is None:
            return None
        return BeltramiDifferential(P, dict(v.coeffs))

    for deg in degrees_up_to(len(params), order):
        if sum(deg) == 0:
            continue
        rhs_src = None
        tau_extra = None
        for j, l in splits(deg):
            if sum(j) == 0:
                continue
            pj = phi_at(j)
            sl = coeffs.get(l)
            if pj is None or sl is None or sl.is_zero():
                continue
            term = contract(pj, sl)
            rhs_src = term if rhs_src is None else rhs_src + term
            if mode == "vanishing":
                extra = contract(pj, del_part(sl))
                tau_extra = extra if tau_extra is None else tau_extra + extra
        rhs = (
            del_part(rhs_src).component(p, q + 1)
            if rhs_src is not None
            else PQForm.zero(P, p, q + 1)
        )
        if mode == "vanishing":
            tau = -rhs
            if tau_extra is not None:
                tau = tau + tau_extra.component(p, q + 1)
            target = tau
        else:
            target = -rhs
        if target.is_zero():
            continue
        x1 = ctx.dbar_min_norm_preimage(target)
        if x1 is None:
            raise NotSolvable(
                f"dbar-equation unsolvable at multidegree {deg}",
                obstruction=target,
            )
        if mode == "pq":
            dx1 = del_part(x1).component(p + 1, q)
            if dx1.is_zero():
                sigma_deg = x1
            else:
                tgt_basis = bidegree_basis(P, p + 1, q)
                ddb = operator_matrix(P, "deldbar", p, q - 1)
                g_bc, _ = ctx.green("bott_chern", p + 1, q)
                beta_vec = tuple(
                    -x for x in ddb.H.apply(g_bc.apply(dx1.to_vector(tgt_basis)))
                )
                check = ddb.apply(beta_vec)
                if any(a + b for a, b in zip(check, dx1.to_vector(tgt_basis))):
                    raise NotSolvable(
                        f"deldbar-correction unsolvable at multidegree {deg}",
                        obstruction=dx1,
                    )
                beta = PQForm.from_vector(
                    P, p, q - 1, bidegree_basis(P, p, q - 1), beta_vec
                )
                sigma_deg = x1 + dbar_part(beta).component(p, q)
        else:
            sigma_deg = x1
        if not sigma_deg.is_zero():
            coeffs[deg] = sigma_deg
        per = {}
        if mode == "vanishing":
            per["dbar_equation"] = dbar_part(sigma_deg).component(p, q + 1) - target
        else:
            per["dbar_equation"] = dbar_part(sigma_deg).component(p, q + 1) + rhs
            per["del_closed"] = del_part(sigma_deg)
        residuals[deg] = per
    series = FormSeries(params, order, coeffs)
    return ExtensionResult(mode, series, residuals, hyps, tuple(notes))


def _extend_0q(P, ctx, phi_series, sigma0, order, hyps, notes):
    base = ctx.canonical_rep(sigma0)
    notes.append("order-0 term: canonical d-closed representative")
    ring, conj_map = doubled_ring(phi_series.params)
    op_phi = OperatorSeries.from_beltrami_series(
        phi_series.extend_ring(ring), P, ring, order
    )
    op_phibar = OperatorSeries.from_beltrami_series(
        phi_series, P, ring, order, conjugate=True, param_map=conj_map
    )
    ident = OperatorSeries.identity(P, ring, order)
    one_minus = ident - op_phi.compose(op_phibar)
    inverse_op = one_minus.neumann_inverse()
    base_series = FormSeries.constant(ring, order, MixedForm.wrap(base))
    sigma_series = inverse_op.apply(base_series)
    # residuals: the full obstruction of the solved series, per multidegree
    phi2 = phi_series.extend_ring(ring)
    psi = one_minus.apply(sigma_series)
    contracted = bilinear_series(phi2, psi, contract)
    resid_series = (
        contracted.map_coefficients(del_part)
        - bilinear_series(phi2, psi.map_coefficients(del_part), contract)
        + psi.map_coefficients(dbar_part)
    )
    residuals = {deg: {"obstruction": val} for deg, val in resid_series.coeffs.items()}
    if not residuals:
        residuals = {tuple(0 for _ in ring): {"obstruction": MixedForm.zero(P)}}
    notes.append("series ring doubled with formal conjugate parameters")
    pq_coeffs = {}
    for deg, payload in sigma_series.coeffs.items():
        pq_coeffs[deg] = payload
    series = FormSeries(ring, order, pq_coeffs)
    return ExtensionResult("0q", series, residuals, hyps, tuple(notes))
