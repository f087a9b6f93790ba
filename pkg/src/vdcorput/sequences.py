"""Bounded vector sequences, Cesàro-type averages, and windowed
limsup/liminf surrogates.

Sequences are 1-indexed maps n -> C^dim with a known sup-norm bound.  All
values are immutable after construction and every operation here is pure,
so objects can be shared freely between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonUnimodular, SequenceSpecError

#: Window grids switch from exhaustive to geometric beyond this many integers.
GRID_CAP = 4096

UNIMODULAR_TOL = 1e-12


@dataclass(frozen=True)
class VectorSequence:
    """Lazily evaluated bounded sequence n -> C^dim (n >= 1).

    ``rule`` maps an int64 index array (m,) to a complex array (m, dim) and
    must be deterministic: identical indices give bit-identical values.
    """

    dim: int
    bound: float
    rule: Callable[[np.ndarray], np.ndarray]
    descriptor: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.bound < 0:
            raise ValueError("bound must be nonnegative")

    def eval(self, n: int) -> np.ndarray:
        """Value at index n (n >= 1), shape (dim,)."""
        return self.values(n, n)[0]

    def values(self, n_from: int, n_to: int) -> np.ndarray:
        """Values at n_from..n_to inclusive, shape (n_to-n_from+1, dim)."""
        if n_from < 1 or n_to < n_from:
            raise ValueError("need 1 <= n_from <= n_to")
        ns = np.arange(n_from, n_to + 1, dtype=np.int64)
        out = np.asarray(self.rule(ns), dtype=complex).reshape(len(ns), self.dim)
        if __debug__:
            norms = np.linalg.norm(out, axis=1)
            assert norms.max(initial=0.0) <= self.bound * (1 + 1e-9) + 1e-12, (
                f"sequence {self.descriptor!r} exceeds its bound: "
                f"{norms.max():.3e} > {self.bound:.3e}"
            )
        return out


@dataclass(frozen=True)
class WindowSpec:
    """Finite truncation window standing in for N -> infinity limits.

    The window covers integers [n0, n_max] with n0 = ceil((1-frac)*n_max),
    clamped to >= 1.  The same fraction defines the J-tail used by the
    harness when estimating the liminf over J of partial averages.
    """

    n_max: int
    window_frac: float = 0.5
    j_max: int = 1

    def __post_init__(self):
        if self.n_max < 1 or self.j_max < 1:
            raise ValueError("n_max and j_max must be positive")
        if not (0.0 < self.window_frac <= 1.0):
            raise ValueError("window_frac must be in (0, 1]")

    @property
    def n0(self) -> int:
        return max(1, math.ceil((1.0 - self.window_frac) * self.n_max))

    @property
    def j_tail_start(self) -> int:
        return max(1, math.ceil((1.0 - self.window_frac) * self.j_max))


@dataclass(frozen=True)
class LimsupEstimate:
    """Maximum of a sampled tail, the finite surrogate of a limsup.

    ``value`` is the max over ``samples``; ``argmax_index`` is the first
    index attaining it.  (liminf_window reuses this type with min/argmin.)
    """

    value: float
    argmax_index: int
    samples: tuple[tuple[int, float], ...]


def window_grid(lo: int, hi: int) -> np.ndarray:
    """Deterministic integer sample grid for [lo, hi].

    All integers when hi <= GRID_CAP, otherwise GRID_CAP geometrically
    spaced integers, deduplicated, always including lo and hi.
    """
    if lo < 1 or hi < lo:
        raise ValueError("need 1 <= lo <= hi")
    if hi <= GRID_CAP:
        return np.arange(lo, hi + 1, dtype=np.int64)
    pts = np.rint(np.geomspace(lo, hi, GRID_CAP)).astype(np.int64)
    pts[0], pts[-1] = lo, hi
    return np.unique(pts)


def limsup_from_samples(indices, values) -> LimsupEstimate:
    values = np.asarray(values, dtype=float)
    k = int(np.argmax(values))  # first attainment on ties
    samples = tuple((int(i), float(v)) for i, v in zip(indices, values))
    return LimsupEstimate(float(values[k]), int(indices[k]), samples)


def liminf_from_samples(indices, values) -> LimsupEstimate:
    values = np.asarray(values, dtype=float)
    k = int(np.argmin(values))
    samples = tuple((int(i), float(v)) for i, v in zip(indices, values))
    return LimsupEstimate(float(values[k]), int(indices[k]), samples)


def limsup_window(f: Callable[[int], float], w: WindowSpec) -> LimsupEstimate:
    """Max of f over the window grid of [w.n0, w.n_max]."""
    grid = window_grid(w.n0, w.n_max)
    return limsup_from_samples(grid, [float(f(int(n))) for n in grid])


def liminf_window(f: Callable[[int], float], w: WindowSpec) -> LimsupEstimate:
    """Min of f over the window grid (the analogous liminf surrogate)."""
    grid = window_grid(w.n0, w.n_max)
    return liminf_from_samples(grid, [float(f(int(n))) for n in grid])


# ---------------------------------------------------------------------------
# Averages
# ---------------------------------------------------------------------------

def cesaro_avg(u: VectorSequence, N: int) -> np.ndarray:
    """(1/N) * sum_{n=1}^{N} u_n."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return u.values(1, N).sum(axis=0) / N


def shifted_cesaro(u: VectorSequence, M: int, N: int) -> np.ndarray:
    """(1/N) * sum_{n=M+1}^{M+N} u_n."""
    if M < 0:
        raise ValueError("M must be >= 0")
    if N < 1:
        raise ValueError("N must be >= 1")
    return u.values(M + 1, M + N).sum(axis=0) / N


def twisted_cesaro(u: VectorSequence, lam: complex, N: int) -> np.ndarray:
    """(1/N) * sum_{n=1}^{N} lam^n u_n for |lam| = 1."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if abs(abs(lam) - 1.0) > UNIMODULAR_TOL:
        raise NonUnimodular(f"|lambda| = {abs(lam)!r} is not 1 within {UNIMODULAR_TOL}")
    ns = np.arange(1, N + 1, dtype=np.int64)
    twist = np.power(complex(lam), ns)
    return (twist[:, None] * u.values(1, N)).sum(axis=0) / N


def correlation_avg(u: VectorSequence, j: int, N: int) -> complex:
    """(1/N) * sum_{n=1}^{N} (u_n | u_{n+j}), conjugate-linear in the
    second slot (scalar case: u_n * conj(u_{n+j}))."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if N < 1:
        raise ValueError("N must be >= 1")
    vals = u.values(1, N + j)
    return complex((vals[:N] * vals[j:N + j].conj()).sum() / N)


# ---------------------------------------------------------------------------
# Corpus constructors
# ---------------------------------------------------------------------------

def _as_vectors(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("need a nonempty list of equal-length vectors")
    return arr


def _fmt_complex(z: complex) -> str:
    return f"({z.real!r},{z.imag!r})"


def _fmt_vector(v) -> str:
    return ",".join(_fmt_complex(complex(z)) for z in v)


def periodic(vectors) -> VectorSequence:
    """u_n cycles through the given vectors (u_1 is the first)."""
    table = _as_vectors(vectors)
    p = table.shape[0]
    bound = float(np.linalg.norm(table, axis=1).max())
    desc = "periodic:[" + ";".join(_fmt_vector(v) for v in table) + "]"

    def rule(ns, _table=table, _p=p):
        return _table[(ns - 1) % _p]

    return VectorSequence(table.shape[1], bound, rule, desc)


def constant(c) -> VectorSequence:
    """Constant sequence u_n = c (period-1 convenience wrapper)."""
    return periodic([np.atleast_1d(np.asarray(c, dtype=complex))])


def geometric(lam: complex, c) -> VectorSequence:
    """u_n = lam^n * c with |lam| <= 1."""
    lam = complex(lam)
    if abs(lam) > 1 + UNIMODULAR_TOL:
        raise ValueError("geometric sequences need |lambda| <= 1 to stay bounded")
    cvec = np.atleast_1d(np.asarray(c, dtype=complex))
    bound = float(min(abs(lam), 1.0) * np.linalg.norm(cvec)) if abs(lam) <= 1 else 0.0
    desc = f"geometric:lambda={lam.real!r}+{lam.imag!r}i,c=[{_fmt_vector(cvec)}]"

    def rule(ns, _lam=lam, _c=cvec):
        return np.power(_lam, ns)[:, None] * _c

    return VectorSequence(cvec.shape[0], bound, rule, desc)


def weyl(alpha: float, degree: int) -> VectorSequence:
    """Scalar u_n = exp(2*pi*i * alpha * n^degree)."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    alpha = float(alpha)
    desc = f"weyl:alpha={alpha!r},deg={degree}"

    def rule(ns, _a=alpha, _k=degree):
        phases = 2.0 * np.pi * (_a * np.power(ns.astype(float), _k) % 1.0)
        return np.exp(1j * phases)[:, None]

    return VectorSequence(1, 1.0, rule, desc)


def iid_random(seed: int, distribution: str, dim: int) -> VectorSequence:
    """Per-index pseudorandom vectors, reproducible independent of call order.

    distribution: 'unit-circle' (componentwise uniform phases, bound sqrt(dim))
    or 'gaussian-normalized' (complex normal vector scaled to norm 1).
    """
    if distribution not in ("unit-circle", "gaussian-normalized"):
        raise ValueError(f"unknown distribution {distribution!r}")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    bound = math.sqrt(dim) if distribution == "unit-circle" else 1.0
    desc = f"iid:dist={distribution},seed={int(seed)},dim={dim}"

    def rule(ns, _seed=int(seed), _dim=dim, _dist=distribution):
        out = np.empty((len(ns), _dim), dtype=complex)
        for row, n in enumerate(ns):
            rng = np.random.default_rng((_seed, int(n)))
            if _dist == "unit-circle":
                out[row] = np.exp(2j * np.pi * rng.random(_dim))
            else:
                v = rng.standard_normal(_dim) + 1j * rng.standard_normal(_dim)
                out[row] = v / np.linalg.norm(v)
        return out

    return VectorSequence(dim, bound, rule, desc)


def rotation_orbit(thetas, c) -> VectorSequence:
    """u_n = U^n c with U = diag(exp(i*theta_l)) unitary diagonal."""
    th = np.atleast_1d(np.asarray(thetas, dtype=float))
    cvec = np.atleast_1d(np.asarray(c, dtype=complex))
    if th.shape[0] != cvec.shape[0]:
        raise ValueError("theta list and c must have equal length")
    bound = float(np.linalg.norm(cvec))
    desc = (
        "rotation:theta=[" + ",".join(repr(float(t)) for t in th) + "],"
        f"c=[{_fmt_vector(cvec)}]"
    )

    def rule(ns, _th=th, _c=cvec):
        return np.exp(1j * np.outer(ns.astype(float), _th)) * _c

    return VectorSequence(cvec.shape[0], bound, rule, desc)


# ---------------------------------------------------------------------------
# Sequence mini-language
# ---------------------------------------------------------------------------
#   periodic:[(re,im);...]           vectors ';'-separated, components ','
#   geometric:lambda=a+bi,c=[...]
#   weyl:alpha=<decimal>,deg=<int>
#   iid:dist=<name>,seed=<u64>,dim=<int>
#   rotation:theta=[...],c=[...]

_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def _parse_component(text: str) -> complex:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise SequenceSpecError(f"component {text!r} is not of the form (re,im)")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise SequenceSpecError(f"bad component {text!r}: {exc}") from None


def _parse_vector(text: str) -> np.ndarray:
    comps = _TUPLE_RE.findall(text)
    if not comps:
        raise SequenceSpecError(f"vector {text!r} has no (re,im) components")
    leftover = _TUPLE_RE.sub("", text).replace(",", "").strip()
    if leftover:
        raise SequenceSpecError(f"trailing garbage {leftover!r} in vector {text!r}")
    return np.array([_parse_component(c) for c in comps], dtype=complex)


def _parse_vector_list(text: str) -> np.ndarray:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise SequenceSpecError(f"expected a [...] vector list, got {text!r}")
    body = text[1:-1].strip()
    if not body:
        raise SequenceSpecError("empty vector list")
    vecs = [_parse_vector(v) for v in body.split(";")]
    if len({v.shape[0] for v in vecs}) != 1:
        raise SequenceSpecError("vectors in a list must have equal length")
    return np.stack(vecs)


def _split_args(text: str) -> list[str]:
    """Split on commas that are not inside () or []."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _parse_kwargs(text: str, expected: set[str]) -> dict[str, str]:
    out = {}
    for part in _split_args(text):
        if "=" not in part:
            raise SequenceSpecError(f"expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        key = key.strip()
        if key not in expected:
            raise SequenceSpecError(f"unknown key {key!r} (expected {sorted(expected)})")
        if key in out:
            raise SequenceSpecError(f"duplicate key {key!r}")
        out[key] = val.strip()
    missing = expected - out.keys()
    if missing:
        raise SequenceSpecError(f"missing keys {sorted(missing)}")
    return out


def _parse_scalar_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace("i", "j"))
    except ValueError as exc:
        raise SequenceSpecError(f"bad complex literal {text!r}: {exc}") from None


def _parse_float_list(text: str) -> np.ndarray:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise SequenceSpecError(f"expected a [...] number list, got {text!r}")
    try:
        return np.array([float(v) for v in text[1:-1].split(",") if v.strip()])
    except ValueError as exc:
        raise SequenceSpecError(f"bad number list {text!r}: {exc}") from None


def parse_sequence(spec: str) -> VectorSequence:
    """Parse a sequence mini-language string into a VectorSequence."""
    spec = spec.strip()
    if ":" not in spec:
        raise SequenceSpecError(f"missing ':' in sequence spec {spec!r}")
    name, rest = spec.split(":", 1)
    name = name.strip()
    try:
        if name == "periodic":
            return periodic(_parse_vector_list(rest))
        if name == "geometric":
            kw = _parse_kwargs(rest, {"lambda", "c"})
            vecs = _parse_vector_list(kw["c"])
            if vecs.shape[0] != 1:
                raise SequenceSpecError("geometric c must be a single vector")
            return geometric(_parse_scalar_complex(kw["lambda"]), vecs[0])
        if name == "weyl":
            kw = _parse_kwargs(rest, {"alpha", "deg"})
            return weyl(float(kw["alpha"]), int(kw["deg"]))
        if name == "iid":
            kw = _parse_kwargs(rest, {"dist", "seed", "dim"})
            return iid_random(int(kw["seed"]), kw["dist"], int(kw["dim"]))
        if name == "rotation":
            kw = _parse_kwargs(rest, {"theta", "c"})
            vecs = _parse_vector_list(kw["c"])
            if vecs.shape[0] != 1:
                raise SequenceSpecError("rotation c must be a single vector")
            return rotation_orbit(_parse_float_list(kw["theta"]), vecs[0])
    except SequenceSpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SequenceSpecError(f"bad sequence spec {spec!r}: {exc}") from None
    raise SequenceSpecError(f"unknown sequence kind {name!r}")
