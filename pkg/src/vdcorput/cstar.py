"""Finite-dimensional C*-algebras (direct sums of matrix blocks), states,
and Markov/Markov-Schwarz operator verification.

Elements, states and maps are immutable; every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._linalg import (
    complex_to_pairs,
    eigh_desc,
    hermitize,
    min_eig,
    pairs_to_complex,
    spectral_norm,
)
from .errors import NotAState, NotIsometry, ShapeMismatch

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
STATE_PSD_TOL = 1e-10
DEFAULT_TOL = 1e-9
DEFAULT_TRIALS = 200


@dataclass(frozen=True)
class FiniteCStarAlgebra:
    """Direct sum of full matrix blocks M_{d_1} + ... + M_{d_m}."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("block_dims must be a nonempty list of positive ints")
        object.__setattr__(self, "block_dims", dims)

    @property
    def dim(self) -> int:
        """Vector-space dimension sum of d_b^2."""
        return sum(d * d for d in self.block_dims)

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.block_dims)

    def element(self, blocks) -> "AlgebraElement":
        blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
        if len(blocks) != len(self.block_dims) or any(
            b.shape != (d, d) for b, d in zip(blocks, self.block_dims)
        ):
            raise ShapeMismatch(
                f"blocks do not match block_dims {self.block_dims}"
            )
        return AlgebraElement(blocks)

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(tuple(np.eye(d, dtype=complex) for d in self.block_dims))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(
            tuple(np.zeros((d, d), dtype=complex) for d in self.block_dims)
        )

    def flatten(self, x: "AlgebraElement") -> np.ndarray:
        """Row-major coordinates, blocks concatenated in order."""
        return np.concatenate([b.reshape(-1) for b in x.blocks])

    def unflatten(self, v) -> "AlgebraElement":
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape[0] != self.dim:
            raise ShapeMismatch(f"expected a vector of length {self.dim}")
        blocks, pos = [], 0
        for d in self.block_dims:
            blocks.append(v[pos:pos + d * d].reshape(d, d))
            pos += d * d
        return AlgebraElement(tuple(blocks))

    def from_values(self, values) -> "AlgebraElement":
        """Commutative convenience: a function on K as a diagonal element."""
        if not self.is_commutative:
            raise ShapeMismatch("from_values needs a commutative algebra")
        values = np.asarray(values, dtype=complex).reshape(-1)
        if values.shape[0] != len(self.block_dims):
            raise ShapeMismatch("value list must have one entry per point")
        return AlgebraElement(tuple(np.array([[z]]) for z in values))


@dataclass(frozen=True)
class AlgebraElement:
    """Blockwise matrix element of a FiniteCStarAlgebra."""

    blocks: tuple[np.ndarray, ...]

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(b.shape[0] for b in self.blocks)

    def norm(self) -> float:
        """C*-norm: max spectral norm over blocks."""
        return max(spectral_norm(b) for b in self.blocks)

    def scaled(self, a: complex) -> "AlgebraElement":
        return AlgebraElement(tuple(complex(a) * b for b in self.blocks))

    def plus(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(tuple(x + y for x, y in zip(self.blocks, other.blocks)))


def _check_same(x: AlgebraElement, y: AlgebraElement):
    if x.block_dims != y.block_dims:
        raise ShapeMismatch(f"block shapes differ: {x.block_dims} vs {y.block_dims}")


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Blockwise matrix product."""
    _check_same(x, y)
    return AlgebraElement(tuple(a @ b for a, b in zip(x.blocks, y.blocks)))


def adjoint(x: AlgebraElement) -> AlgebraElement:
    """Blockwise conjugate transpose."""
    return AlgebraElement(tuple(b.conj().T for b in x.blocks))


class PositivityWitness(NamedTuple):
    block: int
    value: float
    kind: str  # "eigenvalue" or "asymmetry"


def is_positive(x: AlgebraElement, tol: float = DEFAULT_TOL):
    """Positivity check: every block Hermitian within tol and eigenvalues
    >= -tol.  Returns (ok, witness); witness names the offending block.

    Eigenvalues are taken of the Hermitian-symmetrized block; the measured
    asymmetry is what is compared against tol.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    for b, blk in enumerate(x.blocks):
        asym = spectral_norm(blk - blk.conj().T)
        if asym > tol:
            return False, PositivityWitness(b, float(asym), "asymmetry")
        lo = min_eig(blk)
        if lo < -tol:
            return False, PositivityWitness(b, float(lo), "eigenvalue")
    return True, None


@dataclass(frozen=True)
class State:
    """Positive unital functional x -> sum_b tr(rho_b x_b)."""

    block_densities: tuple[np.ndarray, ...]

    def __post_init__(self):
        rhos = tuple(np.asarray(r, dtype=complex) for r in self.block_densities)
        object.__setattr__(self, "block_densities", rhos)
        total = 0.0
        for b, rho in enumerate(rhos):
            if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
                raise NotAState(f"density {b} is not square")
            if spectral_norm(rho - rho.conj().T) > HERMITIAN_TOL * max(
                1.0, spectral_norm(rho)
            ):
                raise NotAState(f"density {b} is not Hermitian within {HERMITIAN_TOL}")
            lo = min_eig(rho)
            if lo < -STATE_PSD_TOL:
                raise NotAState(f"density {b} has eigenvalue {lo:.3e} < -{STATE_PSD_TOL}")
            total += float(np.trace(rho).real)
        if abs(total - 1.0) > TRACE_TOL * 10:
            raise NotAState(f"total trace {total!r} differs from 1")

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(r.shape[0] for r in self.block_densities)

    @classmethod
    def point_mass(cls, algebra: FiniteCStarAlgebra, k: int) -> "State":
        """Dirac state delta_k on a commutative algebra (k is 1-based)."""
        if not algebra.is_commutative:
            raise NotAState("point masses live on commutative algebras")
        if not (1 <= k <= len(algebra.block_dims)):
            raise ValueError("point index out of range")
        return cls(
            tuple(
                np.array([[1.0 + 0j]]) if b == k - 1 else np.array([[0.0 + 0j]])
                for b in range(len(algebra.block_dims))
            )
        )

    @classmethod
    def from_weights(cls, weights) -> "State":
        """Commutative state from a probability vector over K."""
        wts = np.asarray(weights, dtype=float).reshape(-1)
        return cls(tuple(np.array([[complex(w)]]) for w in wts))

    @classmethod
    def tracial(cls, algebra: FiniteCStarAlgebra) -> "State":
        """Normalized trace, blocks weighted by d_b / sum d_b."""
        total = sum(algebra.block_dims)
        return cls(
            tuple(np.eye(d, dtype=complex) / total for d in algebra.block_dims)
        )


def state_eval(mu: State, x: AlgebraElement) -> complex:
    """sum_b tr(rho_b x_b)."""
    if mu.block_dims != x.block_dims:
        raise ShapeMismatch("state and element have different block shapes")
    return complex(
        sum(np.trace(r @ b) for r, b in zip(mu.block_densities, x.blocks))
    )


def functional_vector(mu: State) -> np.ndarray:
    """Coefficients m with mu(x) = m . flatten(x) (linear pairing)."""
    return np.concatenate([r.T.reshape(-1) for r in mu.block_densities])


def state_from_functional(algebra: FiniteCStarAlgebra, m, tol: float = STATE_PSD_TOL) -> State:
    """Rebuild a State from functional coefficients; validates invariants."""
    m = np.asarray(m, dtype=complex).reshape(-1)
    if m.shape[0] != algebra.dim:
        raise ShapeMismatch("functional vector has wrong length")
    rhos, pos = [], 0
    for d in algebra.block_dims:
        rhos.append(m[pos:pos + d * d].reshape(d, d).T)
        pos += d * d
    lo = min(min_eig(r) for r in rhos)
    if lo < -tol:
        raise NotAState(f"functional has density eigenvalue {lo:.3e} < -{tol}")
    # drop Hermitian float dust, keep genuine asymmetry visible to State checks
    rhos = [r if spectral_norm(r - r.conj().T) > HERMITIAN_TOL else hermitize(r) for r in rhos]
    return State(tuple(rhos))


@dataclass(frozen=True)
class AlgebraMap:
    """Linear map on the algebra, stored on flattened coordinates."""

    algebra: FiniteCStarAlgebra
    matrix: np.ndarray
    unital: bool = False
    schwarz_verified: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.algebra.dim, self.algebra.dim):
            raise ShapeMismatch(
                f"map matrix must be {self.algebra.dim}x{self.algebra.dim}"
            )
        object.__setattr__(self, "matrix", mat)

    def apply(self, x: AlgebraElement) -> AlgebraElement:
        return self.algebra.unflatten(self.matrix @ self.algebra.flatten(x))

    @classmethod
    def identity(cls, algebra: FiniteCStarAlgebra) -> "AlgebraMap":
        return cls(algebra, np.eye(algebra.dim, dtype=complex), unital=True,
                   schwarz_verified=True)


class SchwarzVerdict(NamedTuple):
    ok: bool
    reason: str
    unital_defect: float
    worst_deficit: float
    witness: AlgebraElement | None


def random_element(algebra: FiniteCStarAlgebra, rng, norm_cap: float = 1.0) -> AlgebraElement:
    """Seeded random element with C*-norm <= norm_cap."""
    blocks = []
    for d in algebra.block_dims:
        b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        blocks.append(b)
    x = AlgebraElement(tuple(blocks))
    nrm = x.norm()
    if nrm > norm_cap:
        x = x.scaled(norm_cap / nrm)
    return x


def is_markov_schwarz(
    phi: AlgebraMap,
    tol: float = DEFAULT_TOL,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> SchwarzVerdict:
    """Sampling-based Markov-Schwarz verdict.

    Checks phi(1) = 1 within tol, then phi(x*x) - (phi x)*(phi x) >= -tol on
    `trials` seeded random x with norm <= 1.  On commutative algebras also
    checks positivity preservation (Markov and Markov-Schwarz coincide
    there).  The first failing x is returned as witness.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    alg = phi.algebra
    one = alg.identity()
    unital_defect = phi.apply(one).plus(one.scaled(-1)).norm()
    if unital_defect > tol:
        return SchwarzVerdict(False, "not unital", unital_defect, 0.0, None)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = random_element(alg, rng)
        px = phi.apply(x)
        defect = phi.apply(multiply(adjoint(x), x)).plus(
            multiply(adjoint(px), px).scaled(-1)
        )
        ok, wit = is_positive(defect, tol)
        if not ok:
            return SchwarzVerdict(
                False, "Schwarz inequality fails", unital_defect,
                float(wit.value), x,
            )
        worst = min(worst, min(min_eig(b) for b in defect.blocks))
        if alg.is_commutative:
            pos = multiply(adjoint(x), x)
            ok, wit = is_positive(phi.apply(pos), tol)
            if not ok:
                return SchwarzVerdict(
                    False, "positivity not preserved", unital_defect,
                    float(wit.value), pos,
                )
    return SchwarzVerdict(True, "ok", unital_defect, float(worst), None)


def implemented_operator(v) -> AlgebraMap:
    """Conjugation map T -> V* T V on M_d for an isometry V."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise NotIsometry("V must be a square matrix")
    d = v.shape[0]
    defect = spectral_norm(v.conj().T @ v - np.eye(d))
    if defect > 1e-10:
        raise NotIsometry(f"V*V - I has norm {defect:.3e} > 1e-10")
    algebra = FiniteCStarAlgebra((d,))
    # row-major flattening: X -> V* X V has matrix kron(V*, V^T)
    return AlgebraMap(algebra, np.kron(v.conj().T, v.T), unital=True,
                      schwarz_verified=True)


def dual_state(phi: AlgebraMap, mu: State) -> State:
    """The state nu with nu(x) = mu(phi x); raises NotAState if the
    resulting densities fail PSD/trace checks beyond 1e-10."""
    if mu.block_dims != phi.algebra.block_dims:
        raise ShapeMismatch("state does not live on the map's algebra")
    m = functional_vector(mu)
    return state_from_functional(phi.algebra, phi.matrix.T @ m)


def cesaro_map(phi: AlgebraMap, N: int) -> AlgebraMap:
    """(1/N) * sum_{n=0}^{N-1} phi^n."""
    if N < 1:
        raise ValueError("N must be >= 1")
    acc = np.eye(phi.algebra.dim, dtype=complex)
    power = np.eye(phi.algebra.dim, dtype=complex)
    for _ in range(N - 1):
        power = phi.matrix @ power
        acc = acc + power
    return AlgebraMap(phi.algebra, acc / N, unital=phi.unital, schwarz_verified=False)


def invariant_state(phi: AlgebraMap, mu0: State, tol: float = STATE_PSD_TOL) -> State:
    """Exact Cesàro limit of the averaged dual orbit (1/N) sum (phi')^n mu0.

    Computed spectrally: project the functional onto ker(D - I) along
    range(D - I) where D is the dual matrix.  This is the N -> infinity
    limit of averaging, so the result is invariant to float precision.
    """
    dual = phi.matrix.T
    dim = dual.shape[0]
    diff = dual - np.eye(dim)
    u, s, vh = np.linalg.svd(diff)
    smax = s.max(initial=0.0)
    null_mask = s <= 1e-12 * max(1.0, smax)
    fix_basis = vh.conj().T[:, null_mask]  # ker(D - I)
    rank = int((~null_mask).sum())
    range_basis = u[:, :rank] if rank else np.zeros((dim, 0))
    m0 = functional_vector(mu0)
    basis = np.hstack([fix_basis, range_basis * s[:rank]]) if rank else fix_basis
    coeffs, *_ = np.linalg.lstsq(basis, m0, rcond=None)
    m = fix_basis @ coeffs[: fix_basis.shape[1]]
    # re-normalize the unit mass (projection preserves it only up to float dust)
    one = np.concatenate(
        [np.eye(d, dtype=complex).reshape(-1) for d in phi.algebra.block_dims]
    )
    mass = complex(m @ one)
    if abs(mass) < 1e-8:
        raise NotAState("averaged functional has vanishing mass")
    return state_from_functional(phi.algebra, m / mass, tol=tol)


def left_mult_matrix(x: AlgebraElement) -> np.ndarray:
    """Matrix of y -> x.y on flattened coordinates (blockwise kron(x_b, I))."""
    mats = [np.kron(b, np.eye(b.shape[0])) for b in x.blocks]
    dim = sum(m.shape[0] for m in mats)
    out = np.zeros((dim, dim), dtype=complex)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos:pos + k, pos:pos + k] = m
        pos += k
    return out


def gram_matrix(algebra: FiniteCStarAlgebra, mu: State) -> np.ndarray:
    """Gram of the GNS form (y, z) -> mu(z* y) on flattened coordinates.

    G[i, j] = mu(e_i* e_j); within a block, mu(E_qp E_rs) = delta_pr rho[s, q].
    """
    if mu.block_dims != algebra.block_dims:
        raise ShapeMismatch("state does not live on the algebra")
    g = np.zeros((algebra.dim, algebra.dim), dtype=complex)
    pos = 0
    for d, rho in zip(algebra.block_dims, mu.block_densities):
        # index (p, q) -> pos + p*d + q
        for p in range(d):
            for q in range(d):
                for s in range(d):
                    g[pos + p * d + q, pos + p * d + s] = rho[s, q]
        pos += d * d
    return g


# ---------------------------------------------------------------------------
# JSON literals: dense complex matrices as [[re, im], ...] row-major
# ---------------------------------------------------------------------------

def algebra_to_json(algebra: FiniteCStarAlgebra) -> dict:
    return {"block_dims": list(algebra.block_dims)}


def algebra_from_json(data: dict) -> FiniteCStarAlgebra:
    return FiniteCStarAlgebra(tuple(data["block_dims"]))


def element_to_json(x: AlgebraElement) -> dict:
    return {"blocks": [complex_to_pairs(b) for b in x.blocks]}


def element_from_json(algebra: FiniteCStarAlgebra, data: dict) -> AlgebraElement:
    return algebra.element([pairs_to_complex(b) for b in data["blocks"]])


def state_to_json(mu: State) -> dict:
    return {"block_densities": [complex_to_pairs(r) for r in mu.block_densities]}


def state_from_json(data: dict) -> State:
    return State(tuple(pairs_to_complex(r) for r in data["block_densities"]))


def map_to_json(phi: AlgebraMap) -> dict:
    return {
        "block_dims": list(phi.algebra.block_dims),
        "matrix": complex_to_pairs(phi.matrix),
        "unital": phi.unital,
        "schwarz_verified": phi.schwarz_verified,
    }


def map_from_json(data: dict) -> AlgebraMap:
    algebra = FiniteCStarAlgebra(tuple(data["block_dims"]))
    return AlgebraMap(
        algebra,
        pairs_to_complex(data["matrix"]),
        unital=bool(data.get("unital", False)),
        schwarz_verified=bool(data.get("schwarz_verified", False)),
    )
