"""Harmonic theory for the coframe-orthonormal metric: adjoints, the two
Laplacians, exact Green operators and harmonic projections, and canonical
d-closed representatives of Dolbeault classes.

The metric declares the monomial basis orthonormal, so adjoints are plain
conjugate transposes and Green operators are exact pseudo-inverses.  The
same convention is used on vector-valued forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import NotCocycle, NotSolvable
from .forms import (
    MixedForm,
    PQForm,
    bidegree_basis,
    dbar_part,
    del_part,
    differential,
    operator_matrix,
)
from .linalg import ExactMatrix, Vector
from .scalars import GR

LAPLACIAN_KINDS = ("dolbeault", "bott_chern")


class MetricContext:
    """Fixed coframe-orthonormal inner product on a presentation."""

    def __init__(self, presentation):
        self.presentation = presentation

    @property
    def _cache(self):
        return self.presentation.cache

    # -- adjoints ---------------------------------------------------------

    def adjoint(self, op: str, p: int, q: int) -> ExactMatrix:
        """Conjugate transpose of del / dbar / deldbar leaving (p,q)."""
        return operator_matrix(self.presentation, op, p, q).H

    # -- Laplacians --------------------------------------------------------

    def laplacian(self, kind: str, p: int, q: int) -> ExactMatrix:
        P = self.presentation
        key = ("laplacian", kind, p, q)
        cached = P.cache.get(key)
        if cached is not None:
            return cached
        if kind == "dolbeault":
            a = operator_matrix(P, "dbar", p, q)
            b = operator_matrix(P, "dbar", p, q - 1)
            box = a.H @ a + b @ b.H
        elif kind == "bott_chern":
            ddb = operator_matrix(P, "dbar", p - 1, q - 1)  # (p-1,q-1) -> (p-1,q)
            dl_up = operator_matrix(P, "del", p - 1, q)     # (p-1,q)  -> (p,q)
            db_out = operator_matrix(P, "dbar", p, q)       # (p,q)    -> (p,q+1)
            dl_out = operator_matrix(P, "del", p, q)        # (p,q)    -> (p+1,q)
            dl_top = operator_matrix(P, "del", p, q + 1)    # (p,q+1)  -> (p+1,q+1)
            dl_mid = operator_matrix(P, "del", p - 1, q + 1)
            db_mid = operator_matrix(P, "dbar", p + 1, q - 1)
            box = (
                dl_up @ ddb @ ddb.H @ dl_up.H
                + db_out.H @ dl_top.H @ dl_top @ db_out
                + db_out.H @ dl_mid @ dl_mid.H @ db_out
                + dl_out.H @ db_mid @ db_mid.H @ dl_out
                + db_out.H @ db_out
                + dl_out.H @ dl_out
            )
        else:
            raise ValueError(f"unknown Laplacian kind {kind!r}")
        P.cache[key] = box
        return box

    # -- Green operators ----------------------------------------------------

    def green(self, kind: str, p: int, q: int) -> tuple[ExactMatrix, ExactMatrix]:
        """(G, H) with G the exact pseudo-inverse of the Laplacian and H the
        orthogonal projector onto its kernel; box G + H = id exactly."""
        P = self.presentation
        key = ("green", kind, p, q)
        cached = P.cache.get(key)
        if cached is not None:
            return cached
        box = self.laplacian(kind, p, q)
        g = box.pinv()
        h = ExactMatrix.identity(box.rows) - box @ g
        cached = (g, h)
        P.cache[key] = cached
        return cached

    def harmonic_dim(self, kind: str, p: int, q: int) -> int:
        box = self.laplacian(kind, p, q)
        return box.cols - box.rank()

    def harmonic_projection(self, kind: str, form: PQForm) -> PQForm:
        P = self.presentation
        basis = bidegree_basis(P, form.p, form.q)
        _, h = self.green(kind, form.p, form.q)
        return PQForm.from_vector(P, form.p, form.q, basis, h.apply(form.to_vector(basis)))

    # -- canonical d-closed representatives ---------------------------------

    def canonical_rep(self, sigma: PQForm) -> PQForm:
        """d-closed form representing the Dolbeault class of sigma.

        Returns gamma = H(sigma) + dbar(beta) with
        beta = -(deldbar)* G_BC del H(sigma); requires del H(sigma) to be a
        deldbar-coboundary, otherwise NotSolvable carries the defect.
        """
        P = self.presentation
        p, q = sigma.p, sigma.q
        if not dbar_part(sigma).is_zero():
            raise NotCocycle("canonical_rep input must be dbar-closed")
        basis = bidegree_basis(P, p, q)
        harm = self.harmonic_projection("dolbeault", sigma)
        y = del_part(harm)
        if y.is_zero():
            return harm
        y_pq = y.component(p + 1, q)
        tgt_basis = bidegree_basis(P, p + 1, q)
        yvec = y_pq.to_vector(tgt_basis)
        ddb = operator_matrix(P, "deldbar", p, q - 1)  # (p,q-1) -> (p+1,q)
        g_bc, _ = self.green("bott_chern", p + 1, q)
        beta_vec = tuple(-x for x in ddb.H.apply(g_bc.apply(yvec)))
        check = ddb.apply(beta_vec)
        if tuple(a + b for a, b in zip(check, yvec)) != tuple(GR(0) for _ in yvec):
            defect = PQForm.from_vector(
                P, p + 1, q, tgt_basis,
                tuple(a + b for a, b in zip(check, yvec)),
            )
            raise NotSolvable(
                "del of the harmonic part is not a deldbar-coboundary",
                obstruction=defect,
            )
        beta = PQForm.from_vector(P, p, q - 1, bidegree_basis(P, p, q - 1), beta_vec)
        gamma = harm + dbar_part(beta).component(p, q)
        if not differential(gamma).is_zero():
            raise AssertionError("canonical representative failed to be d-closed")
        return gamma

    # -- minimum-norm preimages through Green operators ----------------------

    def dbar_min_norm_preimage(self, y: PQForm) -> Optional[PQForm]:
        """Minimum-norm x with dbar x = y, via dbar* G; None if unsolvable."""
        P = self.presentation
        p, q = y.p, y.q
        basis_y = bidegree_basis(P, p, q)
        basis_x = bidegree_basis(P, p, q - 1)
        dbar = operator_matrix(P, "dbar", p, q - 1)
        g, _ = self.green("dolbeault", p, q)
        x = dbar.H.apply(g.apply(y.to_vector(basis_y)))
        if dbar.apply(x) != y.to_vector(basis_y):
            return None
        return PQForm.from_vector(P, p, q - 1, basis_x, x)
