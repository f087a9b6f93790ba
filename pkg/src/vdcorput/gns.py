"""GNS construction at finite dimension: quotient Hilbert space from a
positive sesquilinear form, induced contractions, left regular
representation.

Coordinates on the quotient H absorb Lambda^(1/2), so the H inner product
is the standard one and induced operators are plain matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cstar
from ._linalg import complex_to_pairs, eigh_desc, pairs_to_complex, spectral_norm
from .errors import NotPSD, NullSpaceNotInvariant, NotInvariantState, ShapeMismatch

DEFAULT_GNS_TOL = 1e-10
DEFAULT_OP_TOL = 1e-9


@dataclass(frozen=True)
class GnsSpace:
    """Quotient Hilbert space of a PSD form on an ambient C^ambient_dim.

    quotient (h x ambient) maps y to the coordinates of its class [y];
    basis (ambient x h) maps coordinates back to ambient representatives,
    so quotient @ basis = I_h.  The quotient map is an isometry from the
    form onto the standard inner product.
    """

    ambient_dim: int
    gram: np.ndarray
    quotient: np.ndarray
    basis: np.ndarray
    h: int
    tol_used: float
    unit: np.ndarray | None = None
    kind: str = "generic"

    def __post_init__(self):
        for name in ("gram", "quotient", "basis"):
            getattr(self, name).setflags(write=False)

    def project(self, y) -> np.ndarray:
        """Coordinates of the class [y]."""
        y = np.asarray(y, dtype=complex).reshape(-1)
        if y.shape[0] != self.ambient_dim:
            raise ShapeMismatch(f"expected ambient vector of length {self.ambient_dim}")
        return self.quotient @ y

    def form(self, y, z) -> complex:
        """The ambient form (y, z) -> z* G y."""
        y = np.asarray(y, dtype=complex).reshape(-1)
        z = np.asarray(z, dtype=complex).reshape(-1)
        return complex(z.conj() @ (self.gram @ y))


@dataclass(frozen=True)
class InducedOperator:
    """Matrix of the map [y] -> [phi y] on quotient coordinates."""

    matrix: np.ndarray
    norm_bound: float
    unitary_defect: float

    def __post_init__(self):
        self.matrix.setflags(write=False)


def gns_space(
    gram,
    tol: float = DEFAULT_GNS_TOL,
    unit=None,
    kind: str = "generic",
) -> GnsSpace:
    """Build the quotient space of a PSD Gram matrix.

    Eigenpairs with eigenvalue > tol * lambda_max are kept; the quotient is
    q = Lambda^(1/2) U* on the kept pairs.  An eigenvalue below
    -tol * lambda_max raises NotPSD.  h = 0 is allowed.
    """
    gram = np.asarray(gram, dtype=complex)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ShapeMismatch("gram must be square")
    n = gram.shape[0]
    asym = spectral_norm(gram - gram.conj().T)
    if asym > 1e-10 * max(1.0, spectral_norm(gram)):
        raise NotPSD(f"gram is not Hermitian: asymmetry {asym:.3e}")
    vals, vecs = eigh_desc(gram)
    lam_max = float(vals[0]) if n and vals[0] > 0 else 0.0
    cutoff = tol * lam_max
    if n and float(vals[-1]) < -cutoff:
        raise NotPSD(f"gram eigenvalue {vals[-1]:.3e} below -{cutoff:.3e}")
    keep = vals > cutoff
    kept_vals = vals[keep]
    kept_vecs = vecs[:, keep]
    h = int(keep.sum())
    if h:
        sq = np.sqrt(kept_vals)
        quotient = sq[:, None] * kept_vecs.conj().T
        basis = kept_vecs / sq[None, :]
    else:
        quotient = np.zeros((0, n), dtype=complex)
        basis = np.zeros((n, 0), dtype=complex)
    unit_vec = None
    if unit is not None:
        unit_vec = np.asarray(unit, dtype=complex).reshape(-1).copy()
        unit_vec.setflags(write=False)
    return GnsSpace(n, gram.copy(), quotient, basis, h, tol, unit_vec, kind)


def state_space(
    algebra: cstar.FiniteCStarAlgebra,
    mu: cstar.State,
    tol: float = DEFAULT_GNS_TOL,
) -> GnsSpace:
    """GNS space of the C*-state form (y, z) -> mu(z* y)."""
    gram = cstar.gram_matrix(algebra, mu)
    unit = algebra.flatten(algebra.identity())
    return gns_space(gram, tol=tol, unit=unit, kind="cstar")


def _null_leakage(phi_matrix, g: GnsSpace) -> float:
    """Max norm of q(phi v) over unit null-eigenvectors v."""
    vals, vecs = eigh_desc(g.gram)
    lam_max = float(vals[0]) if g.ambient_dim and vals[0] > 0 else 0.0
    null_vecs = vecs[:, vals <= g.tol_used * lam_max]
    if null_vecs.shape[1] == 0:
        return 0.0
    images = g.quotient @ (phi_matrix @ null_vecs)
    return float(np.linalg.norm(images, axis=0).max(initial=0.0))


def _as_map_matrix(phi, ambient_dim: int) -> np.ndarray:
    mat = np.asarray(getattr(phi, "matrix", phi), dtype=complex)
    if mat.shape != (ambient_dim, ambient_dim):
        raise ShapeMismatch(f"map matrix must be {ambient_dim}x{ambient_dim}")
    return mat


def _induce(mat, g: GnsSpace, tol: float) -> InducedOperator:
    lam_max = max(float(np.linalg.eigvalsh(0.5 * (g.gram + g.gram.conj().T)).max()), 0.0)
    leak_tol = 10.0 * np.sqrt(max(tol, g.tol_used) * max(lam_max, 1e-300))
    leak = _null_leakage(mat, g)
    if leak > leak_tol:
        raise NullSpaceNotInvariant(
            f"null-space leakage {leak:.3e} exceeds {leak_tol:.3e}", leakage=leak
        )
    m = g.quotient @ mat @ g.basis
    norm = spectral_norm(m)
    if g.h:
        unit_defect = spectral_norm(m.conj().T @ m - np.eye(g.h))
    else:
        unit_defect = 0.0
    return InducedOperator(m, norm, unit_defect)


def induce_operator(phi, g: GnsSpace, tol: float = DEFAULT_OP_TOL) -> InducedOperator:
    """Induce [y] -> [phi y] on the quotient of an invariant-state form.

    Preconditions: the form is contracted by phi (the checkable consequence
    of Schwarz/domination plus state invariance), and phi maps the null
    space into itself.  Both are hard checks with leakage diagnostics.
    """
    mat = _as_map_matrix(phi, g.ambient_dim)
    lam_max = max(float(np.linalg.eigvalsh(0.5 * (g.gram + g.gram.conj().T)).max()), 0.0)
    pulled = mat.conj().T @ g.gram @ mat
    defect = g.gram - pulled
    lo = float(np.linalg.eigvalsh(0.5 * (defect + defect.conj().T)).min()) if g.ambient_dim else 0.0
    if lo < -max(tol, g.tol_used) * max(lam_max, 1.0):
        raise NotInvariantState(
            f"form is expanded by the map: min eig of G - Phi*G Phi is {lo:.3e}",
            violation=-lo,
        )
    return _induce(mat, g, tol)


def left_regular(x: cstar.AlgebraElement, g: GnsSpace, tol: float = DEFAULT_OP_TOL) -> InducedOperator:
    """Left multiplication L_x [y] = [x y] on a C*-state GNS space.

    Null-space invariance is automatic (x*x <= |x|^2 1) but still verified;
    the returned operator satisfies |L_x| <= |x| + tol.
    """
    if g.kind != "cstar":
        raise ShapeMismatch("left_regular needs a GNS space built from a C*-state form")
    return _induce(cstar.left_mult_matrix(x), g, tol)


def vector_of_unit(g: GnsSpace) -> np.ndarray:
    """q(1) for spaces whose ambient carries a designated unit; unit norm."""
    if g.unit is None:
        raise ShapeMismatch("this GNS space has no designated ambient unit")
    vec = g.project(g.unit)
    nrm = float(np.linalg.norm(vec))
    if abs(nrm - 1.0) > 1e-10:
        raise NotInvariantState(
            f"|[1]| = {nrm!r} differs from 1 (state not unital?)", violation=abs(nrm - 1)
        )
    return vec


# ---------------------------------------------------------------------------
# JSON serialization (golden-file tests)
# ---------------------------------------------------------------------------

def gns_to_json(g: GnsSpace) -> dict:
    data = {
        "ambient_dim": g.ambient_dim,
        "h": g.h,
        "tol_used": g.tol_used,
        "kind": g.kind,
        "gram": complex_to_pairs(g.gram),
        "quotient": complex_to_pairs(g.quotient),
        "basis": complex_to_pairs(g.basis),
    }
    if g.unit is not None:
        data["unit"] = complex_to_pairs(g.unit)
    return data


def gns_from_json(data: dict) -> GnsSpace:
    unit = pairs_to_complex(data["unit"]) if "unit" in data else None
    quotient = pairs_to_complex(data["quotient"])
    basis = pairs_to_complex(data["basis"])
    h = int(data["h"])
    n = int(data["ambient_dim"])
    quotient = quotient.reshape(h, n)
    basis = basis.reshape(n, h)
    return GnsSpace(
        n,
        pairs_to_complex(data["gram"]).reshape(n, n),
        quotient,
        basis,
        h,
        float(data["tol_used"]),
        unit,
        str(data.get("kind", "generic")),
    )
