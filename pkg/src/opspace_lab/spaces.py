"""Concrete Hilbertian operator spaces and certified matrix-level norms.

An element of ``M_n(X)`` for a ``k``-dimensional space ``X`` is stored as a
``(k, n, n)`` coefficient tensor: ``x = sum_s A_s (x) e_s`` in the canonical
orthonormal basis ``e_1..e_k``.

Closed forms (R, C, OH, R∩C, Fermionic) return exact certificates.  The
remaining kinds return an interval ``[lower, upper]``: upper ends come from
explicit decompositions or interpolation/triangle bounds, lower ends from
duality pairings against witnesses whose dual norm is bounded above, or from
the minimal structure, which every operator space structure on l2 dominates.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fermion
from .matcore import DomainError, is_unitary, spectral_norm

DEFAULT_TOL = 1e-9


class Kind(str, enum.Enum):
    ROW = "row"
    COLUMN = "column"
    MIN_L2 = "min-l2"
    MAX_L2 = "max-l2"
    OH = "oh"
    RC_INTERP = "rc-interp"
    R_CAP_C = "r-cap-c"
    R_PLUS_C = "r-plus-c"
    FERMIONIC = "fermionic"


_ALIASES = {
    "r": Kind.ROW,
    "c": Kind.COLUMN,
    "col": Kind.COLUMN,
    "min": Kind.MIN_L2,
    "minl2": Kind.MIN_L2,
    "max": Kind.MAX_L2,
    "maxl2": Kind.MAX_L2,
    "row-col-interp": Kind.RC_INTERP,
    "rowcolinterp": Kind.RC_INTERP,
    "r-intersect-c": Kind.R_CAP_C,
    "rintersectc": Kind.R_CAP_C,
    "rplusc": Kind.R_PLUS_C,
    "fermi": Kind.FERMIONIC,
}


def parse_kind(name) -> Kind:
    if isinstance(name, Kind):
        return name
    key = str(name).strip().lower().replace("_", "-")
    try:
        return Kind(key)
    except ValueError:
        pass
    for cand in (key, key.replace("-", "")):
        if cand in _ALIASES:
            return _ALIASES[cand]
    raise DomainError(f"unknown space kind {name!r}")


@dataclass(frozen=True)
class SpaceSpec:
    kind: Kind
    dim: int
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind))
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.kind is Kind.RC_INTERP:
            if self.theta is None or not 0.0 <= float(self.theta) <= 1.0:
                raise DomainError(f"rc-interp needs theta in [0, 1], got {self.theta}")
            object.__setattr__(self, "theta", float(self.theta))
        elif self.theta is not None:
            object.__setattr__(self, "theta", None)
        if self.kind is Kind.FERMIONIC and self.dim > fermion.MAX_GENERATORS:
            raise DomainError(f"fermionic spaces support dim <= {fermion.MAX_GENERATORS}")

    def with_dim(self, dim: int) -> "SpaceSpec":
        return SpaceSpec(self.kind, dim, self.theta)

    @property
    def label(self) -> str:
        if self.kind is Kind.RC_INTERP:
            return f"{self.kind.value}({self.theta:g})"
        return self.kind.value


@dataclass(frozen=True, eq=False)
class MatElem:
    """An element of M_n(X) given by its (k, n, n) coefficient tensor."""

    space: SpaceSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise DomainError(f"coefficients must have shape (k, n, n), got {c.shape}")
        if c.shape[0] != self.space.dim:
            raise DomainError(f"coefficient count {c.shape[0]} != space dim {self.space.dim}")
        if c.shape[1] == 0:
            raise DomainError("matrix side must be at least 1")
        if not np.all(np.isfinite(c)):
            raise DomainError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def __sub__(self, other: "MatElem") -> "MatElem":
        return MatElem(self.space, self.coeffs - other.coeffs)

    def __add__(self, other: "MatElem") -> "MatElem":
        return MatElem(self.space, self.coeffs + other.coeffs)

    def scaled(self, alpha) -> "MatElem":
        return MatElem(self.space, alpha * self.coeffs)

    def entry(self, i: int, j: int) -> np.ndarray:
        """Coefficient vector of the (i, j) entry."""
        return self.coeffs[:, i, j]

    def to_dict(self) -> dict:
        flat = self.coeffs.reshape(-1)
        return {
            "kind": self.space.kind.value,
            "dim": self.space.dim,
            "theta": self.space.theta,
            "n": self.n,
            "coeffs": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MatElem":
        try:
            space = SpaceSpec(d["kind"], int(d["dim"]), d.get("theta"))
            n = int(d["n"])
            raw = np.asarray(d["coeffs"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed MatElem object: {exc}") from exc
        if raw.shape != (space.dim * n * n, 2):
            raise DomainError(
                f"expected {space.dim * n * n} [re, im] pairs, got array of shape {raw.shape}"
            )
        return cls(space, (raw[:, 0] + 1j * raw[:, 1]).reshape(space.dim, n, n))

    @classmethod
    def from_json(cls, text: str) -> "MatElem":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise DomainError("MatElem JSON must be an object")
        return cls.from_dict(d)


@dataclass(frozen=True)
class NormCert:
    lower: float
    upper: float
    method: tuple = field(default_factory=tuple)
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        object.__setattr__(self, "tol", float(self.tol))
        object.__setattr__(self, "method", tuple(self.method))
        if self.lower < 0 or self.lower > self.upper + self.tol:
            raise ValueError(f"inconsistent certificate [{self.lower}, {self.upper}] tol={self.tol}")

    @property
    def exact(self) -> bool:
        return self.upper - self.lower <= self.tol

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - self.tol - slack <= value <= self.upper + self.tol + slack

    def scaled(self, alpha: float) -> "NormCert":
        a = abs(alpha)
        return NormCert(a * self.lower, a * self.upper, self.method, self.tol * max(a, 1.0))

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "method": list(self.method), "tol": self.tol}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "NormCert":
        return cls(float(d["lower"]), float(d["upper"]), tuple(d["method"]), float(d["tol"]))


def _exact(value: float, tag: str, tol: float) -> NormCert:
    return NormCert(value, value, (tag,), tol)


# -- closed-form evaluators --------------------------------------------------

def row_norm(c: np.ndarray) -> float:
    """||sum A_s A_s^*||^{1/2}: norm of the horizontal block [A_1 ... A_k]."""
    return spectral_norm(np.concatenate(list(c), axis=1))


def column_norm(c: np.ndarray) -> float:
    """||sum A_s^* A_s||^{1/2}: norm of the vertical block [A_1; ...; A_k]."""
    return spectral_norm(np.concatenate(list(c), axis=0))


def oh_norm(c: np.ndarray) -> float:
    n = c.shape[1]
    acc = np.einsum("sij,skl->ikjl", c, c.conj()).reshape(n * n, n * n)
    return math.sqrt(spectral_norm(acc))


def pair_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """The (nm x nm) matrix [<x_ij, y_kl>] = sum_s A_s (x) B_s."""
    n, m = a.shape[1], b.shape[1]
    return np.einsum("sij,skl->ikjl", a, b).reshape(n * m, n * m)


def interp_product_upper(norm0: float, norm1: float, theta: float) -> float:
    if norm0 < 0 or norm1 < 0:
        raise DomainError("norms must be nonnegative")
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    if theta == 0.0:
        return float(norm0)
    if theta == 1.0:
        return float(norm1)
    return float(norm0 ** (1.0 - theta) * norm1 ** theta)


def _interp_upper(c: np.ndarray, theta: float) -> float:
    return interp_product_upper(row_norm(c), column_norm(c), theta)


def _min_upper(c: np.ndarray) -> float:
    return min(row_norm(c), column_norm(c))


def _abs_parts(c: np.ndarray):
    """Per-coefficient |A_s^*| = (A A^*)^{1/2} and |A_s| = (A^* A)^{1/2}."""
    u, s, vh = np.linalg.svd(c)
    left = np.einsum("sik,sk,sjk->sij", u, s, u.conj())
    right = np.einsum("ski,sk,skj->sij", vh.conj(), s, vh)
    return left, right, s[:, 0]


def max_factorization_upper(c: np.ndarray) -> float:
    """Upper bound for M_n(max l2) from x = alpha diag(e_s) beta.

    Splitting each A_s through its SVD gives ||x|| <= ||sum w_s |A_s^*| ||^{1/2}
    ||sum |A_s| / w_s||^{1/2} for any positive weights w_s.
    """
    left, right, top = _abs_parts(c)
    live = top > 0
    if not live.any():
        return 0.0
    left, right = left[live], right[live]
    best = math.sqrt(spectral_norm(left.sum(0)) * spectral_norm(right.sum(0)))
    lw = np.array([spectral_norm(p) for p in left])
    rw = np.array([spectral_norm(q) for q in right])
    w = np.sqrt(rw / lw)
    cand = math.sqrt(spectral_norm(np.tensordot(w, left, 1)) * spectral_norm(np.tensordot(1 / w, right, 1)))
    return min(best, cand)


# -- optimizer-backed lower bounds -------------------------------------------

def _top_triplet(m: np.ndarray):
    u, s, vh = np.linalg.svd(m)
    return s[0], u[:, 0], vh[0].conj()


def min_norm_ascent(c: np.ndarray, rng: np.random.Generator, starts: int = 32,
                    iters: int = 300, stop_at: float = np.inf):
    """Lower bound sup_{|xi|=1} ||sum xi_s A_s|| by projected ascent on the sphere.

    Returns ``(value, converged)``.  Each step moves xi toward the gradient
    direction conj(u^* A_s v) and renormalizes, halving the step until the
    objective does not decrease; the full step never decreases it.
    """
    k, n, _ = c.shape
    ent = np.sqrt(np.sum(np.abs(c) ** 2, axis=0))
    order = np.argsort(-ent, axis=None, kind="stable")
    inits = []
    for idx in order[: min(4, order.size)]:
        i, j = divmod(int(idx), n)
        v = c[:, i, j].conj()
        if np.linalg.norm(v) > 0:
            inits.append(v / np.linalg.norm(v))
    while len(inits) < starts:
        z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        inits.append(z / np.linalg.norm(z))

    def f(xi):
        return _top_triplet(np.tensordot(xi, c, 1))

    best, all_conv = 0.0, True
    for xi in inits:
        val, u, v = f(xi)
        conv = False
        for _ in range(iters):
            w = np.einsum("i,sij,j->s", u.conj(), c, v)
            nw = np.linalg.norm(w)
            if nw == 0:
                conv = True
                break
            target = w.conj() / nw
            tau = 1.0
            while tau > 1e-6:
                z = (1 - tau) * xi + tau * target
                nz = np.linalg.norm(z)
                if nz > 0:
                    z = z / nz
                    nval, nu, nv = f(z)
                    if nval >= val:
                        break
                tau *= 0.5
            else:
                conv = True
                break
            gain = nval - val
            xi, val, u, v = z, nval, nu, nv
            if gain <= 1e-14 * max(val, 1e-300):
                conv = True
                break
        all_conv &= conv
        best = max(best, val)
        if best >= stop_at:
            break
    return best, all_conv


def _witness_candidates(c: np.ndarray):
    k, n, _ = c.shape
    yield c.conj()
    yield c
    yield np.swapaxes(c, 1, 2).conj()
    yield np.swapaxes(c, 1, 2)
    if k <= n:
        col = np.zeros((k, n, n), dtype=np.complex128)
        row = np.zeros((k, n, n), dtype=np.complex128)
        for s in range(k):
            col[s, s, 0] = 1
            row[s, 0, s] = 1
        yield col
        yield row


def pairing_lower(c: np.ndarray, dual_upper, rng: np.random.Generator, stop_at: float = np.inf,
                  random_trials: int = 4, climb_steps: int = 30, extra=()):
    """Lower bound max_y ||<<x, y>>|| / U(y) with U an upper bound of ||y|| in M_m(X*)."""

    def ratio(b):
        den = dual_upper(b)
        if den <= 0:
            return 0.0
        return spectral_norm(pair_matrix(c, b)) / den

    best, best_b = 0.0, None
    for b in list(extra) + list(_witness_candidates(c)):
        r = ratio(b)
        if r > best:
            best, best_b = r, b
        if best >= stop_at:
            return best
    k, n, _ = c.shape
    for _ in range(random_trials):
        b = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
        r = ratio(b)
        if r > best:
            best, best_b = r, b
    if best_b is None or best >= stop_at:
        return best
    step = 0.3 * np.sqrt(np.mean(np.abs(best_b) ** 2))
    for _ in range(climb_steps):
        trial = best_b + step * (rng.standard_normal(best_b.shape) + 1j * rng.standard_normal(best_b.shape))
        r = ratio(trial)
        if r > best:
            best, best_b = r, trial
            if best >= stop_at:
                break
        else:
            step *= 0.7
    return best


# -- R + C decomposition solver ----------------------------------------------

def _rplusc_objective(b: np.ndarray, a: np.ndarray) -> float:
    return row_norm(b) + column_norm(a - b)


def _lse_grad(g: np.ndarray, mu: float):
    lam, vec = np.linalg.eigh(g)
    top = lam[-1]
    w = np.exp((lam - top) / mu)
    val = top + mu * math.log(w.sum())
    w /= w.sum()
    return val, (vec * w) @ vec.conj().T


def rplusc_upper(c: np.ndarray, rng: np.random.Generator, stop_at: float = -np.inf,
                 restarts: int = 5, iters: int = 500, smooth_eps: float = 1e-9):
    """min over A_s = B_s + C_s of ||sum B B^*||^{1/2} + ||sum C^* C||^{1/2}.

    Descends a smoothed surrogate (log-sum-exp of eigenvalues, sqrt(. + eps))
    jointly in B, starting from (A, 0), (0, A), the balanced split and random
    splits; every iterate is scored with the exact objective, so the returned
    value is always attained by an explicit decomposition.
    Returns ``(upper, converged, witness_stack)``.
    """
    k, n, _ = c.shape
    inits = [c.copy(), np.zeros_like(c), 0.5 * c]
    while len(inits) < restarts:
        r = rng.uniform(size=(k, 1, 1))
        inits.append(r * c)
    best = np.inf
    best_b = inits[0]
    converged = True
    witness = None
    for b0 in inits[:restarts]:
        val = _rplusc_objective(b0, c)
        if val < best:
            best, best_b = val, b0
        if best <= stop_at:
            return best, True, None
    for b0 in inits[:restarts]:
        b = b0.copy()
        mu = 0.05
        step = 0.5
        hist = []
        for it in range(iters):
            cc = c - b
            g1 = np.einsum("sij,skj->ik", b, b.conj())
            g2 = np.einsum("sji,sjk->ik", cc.conj(), cc)
            v1, w1 = _lse_grad(g1, mu)
            v2, w2 = _lse_grad(g2, mu)
            s1 = math.sqrt(max(v1, 0) + smooth_eps)
            s2 = math.sqrt(max(v2, 0) + smooth_eps)
            surr = s1 + s2
            grad = np.einsum("ij,sjk->sik", w1, b) / s1 - np.einsum("sij,jk->sik", cc, w2) / s2
            gn = np.sqrt(np.sum(np.abs(grad) ** 2))
            if gn == 0:
                break
            while step > 1e-10:
                nb = b - step * grad / gn
                ncc = c - nb
                ng1 = np.einsum("sij,skj->ik", nb, nb.conj())
                ng2 = np.einsum("sji,sjk->ik", ncc.conj(), ncc)
                nsurr = (math.sqrt(max(_lse_grad(ng1, mu)[0], 0) + smooth_eps)
                         + math.sqrt(max(_lse_grad(ng2, mu)[0], 0) + smooth_eps))
                if nsurr < surr:
                    break
                step *= 0.5
            else:
                if mu > 1e-7:
                    mu *= 0.3
                    step = 0.5
                    continue
                break
            b = nb
            step = min(2 * step, 1.0)
            val = _rplusc_objective(b, c)
            hist.append(val)
            if val < best:
                best, best_b = val, b
                witness = (w1, w2, b, c - b, s1, s2)
            if best <= stop_at:
                return best, True, None
            if it % 50 == 49 and mu > 1e-7:
                mu *= 0.3
        if len(hist) >= 60 and hist[-60] - hist[-1] > 1e-6 * max(hist[-1], 1e-300):
            converged = False
    wit = None
    if witness is not None:
        w1, w2, bb, cc, s1, s2 = witness
        y1 = np.einsum("ij,sjk->sik", w1, bb) / s1
        y2 = np.einsum("sij,jk->sik", cc, w2) / s2
        wit = [y1.conj(), y2.conj(), (y1 + y2).conj()]
    return best, converged, wit


# -- dispatch -------------------------------------------------------------------

def _dual_upper_fn(space: SpaceSpec):
    kind = space.kind
    if kind is Kind.MAX_L2:
        return _min_upper
    if kind is Kind.R_PLUS_C:
        return lambda b: max(row_norm(b), column_norm(b))
    if kind is Kind.RC_INTERP:
        return lambda b: _interp_upper(b, 1.0 - space.theta)
    raise DomainError(f"no witness dual for {kind.value}")


def _interval(lower, upper, tags, tol, converged=True) -> NormCert:
    if lower > upper + tol:
        raise RuntimeError(f"certified bounds crossed: lower {lower} > upper {upper}")
    lower = min(lower, upper)
    tags = list(tags)
    if not converged:
        tags.append("non-converged")
    return NormCert(lower, upper, tuple(tags), tol)


def mn_norm(x: MatElem, *, seed: int = 0, tol: float = DEFAULT_TOL) -> NormCert:
    """Certified norm of ``x`` in M_n(X)."""
    c = x.coeffs
    sp = x.space
    kind = sp.kind
    if not c.any():
        return NormCert(0.0, 0.0, ("zero",), tol)
    if kind is Kind.ROW or (kind is Kind.RC_INTERP and sp.theta == 0.0):
        return _exact(row_norm(c), "exact-row", tol)
    if kind is Kind.COLUMN or (kind is Kind.RC_INTERP and sp.theta == 1.0):
        return _exact(column_norm(c), "exact-column", tol)
    if kind is Kind.OH or (kind is Kind.RC_INTERP and sp.theta == 0.5):
        return _exact(oh_norm(c), "exact-oh", tol)
    if kind is Kind.R_CAP_C:
        return _exact(max(row_norm(c), column_norm(c)), "exact-row-cap-column", tol)
    if kind is Kind.FERMIONIC:
        return _exact(fermion.fermi_mn_norm(c), "exact-fermionic", tol)

    rng = np.random.default_rng(seed)
    # Optimizers run on a normalized copy so certificates scale exactly.
    scale = max(row_norm(c), column_norm(c))
    cn = c / scale

    if kind is Kind.MIN_L2:
        upper = _min_upper(cn)
        lower, conv = min_norm_ascent(cn, rng, stop_at=upper - tol / scale)
        return _interval(scale * lower, scale * upper, ("sphere-ascent", "row-column-min"), tol, conv)

    triangle = float(sum(spectral_norm(a) for a in cn))
    if kind is Kind.MAX_L2:
        fact = max_factorization_upper(cn)
        upper = min(fact, triangle)
        tags = ["duality-pairing", "max-factorization" if fact <= triangle else "triangle-crude"]
        stop = upper - tol / scale
        lower, conv = min_norm_ascent(cn, rng, starts=8, stop_at=stop)
        if lower < stop:
            lower = max(lower, pairing_lower(cn, _dual_upper_fn(sp), rng, stop_at=stop))
        return _interval(scale * lower, scale * upper, tags, tol)

    if kind is Kind.RC_INTERP:
        upper = _interp_upper(cn, sp.theta)
        stop = upper - tol / scale
        lower = pairing_lower(cn, _dual_upper_fn(sp), rng, stop_at=stop)
        if lower < stop:
            lower = max(lower, min_norm_ascent(cn, rng, starts=8, stop_at=stop)[0])
        return _interval(scale * lower, scale * upper, ("interp-product", "duality-pairing"), tol)

    if kind is Kind.R_PLUS_C:
        lower, _ = min_norm_ascent(cn, rng, starts=8)
        upper, conv, wit = rplusc_upper(cn, rng, stop_at=lower + tol / scale)
        upper = min(upper, triangle)
        stop = upper - tol / scale
        if lower < stop:
            lower = max(lower, pairing_lower(cn, _dual_upper_fn(sp), rng, stop_at=stop, extra=wit or ()))
        return _interval(scale * lower, scale * upper, ("decomposition-opt", "duality-pairing"), tol, conv)

    raise DomainError(f"unsupported kind {kind}")


# -- kappa, duality, homogeneity ---------------------------------------------

def kappa_matrix(space: SpaceSpec, n: int) -> MatElem:
    """First-column matrix with e_1..e_n down column 1."""
    if n < 1:
        raise DomainError("n must be positive")
    if space.dim < n:
        raise DomainError(f"kappa_{n} needs dim >= {n}, space has dim {space.dim}")
    c = np.zeros((space.dim, n, n), dtype=np.complex128)
    for s in range(n):
        c[s, s, 0] = 1.0
    return MatElem(space, c)


def kappa(space: SpaceSpec, n: int, *, seed: int = 0, tol: float = DEFAULT_TOL) -> NormCert:
    return mn_norm(kappa_matrix(space, n), seed=seed, tol=tol)


_DUAL = {
    Kind.ROW: Kind.COLUMN,
    Kind.COLUMN: Kind.ROW,
    Kind.MIN_L2: Kind.MAX_L2,
    Kind.MAX_L2: Kind.MIN_L2,
    Kind.OH: Kind.OH,
    Kind.R_CAP_C: Kind.R_PLUS_C,
    Kind.R_PLUS_C: Kind.R_CAP_C,
}


def dual_space(space: SpaceSpec) -> SpaceSpec:
    if space.kind is Kind.FERMIONIC:
        raise DomainError("duality is not implemented for the fermionic space")
    if space.kind is Kind.RC_INTERP:
        return SpaceSpec(Kind.RC_INTERP, space.dim, round(1.0 - space.theta, 12))
    return SpaceSpec(_DUAL[space.kind], space.dim)


def pairing_norm(x: MatElem, y: MatElem) -> float:
    """Norm of the nm x nm matrix [<x_ij, y_kl>] for biorthogonal canonical bases."""
    if x.space.dim != y.space.dim:
        raise DomainError(f"dimension mismatch {x.space.dim} vs {y.space.dim}")
    return spectral_norm(pair_matrix(x.coeffs, y.coeffs))


def pairing_lower_check(space: SpaceSpec, n: int, *, tol: float = 1e-6, seed: int = 0) -> bool:
    """kappa_n(X) kappa_n(X*) >= sqrt(n), checked on both certificate ends."""
    kx = kappa(space, n, seed=seed)
    kd = kappa(dual_space(space), n, seed=seed)
    target = math.sqrt(n) - tol
    return kx.upper * kd.upper >= target and kx.lower * kd.lower >= target


def homogeneity_rotate(x: MatElem, u) -> MatElem:
    """Change of orthonormal basis: A'_s = sum_t U_ts A_t."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (x.space.dim, x.space.dim):
        raise DomainError(f"unitary must be {x.space.dim}x{x.space.dim}, got {u.shape}")
    if not is_unitary(u):
        raise DomainError("basis change matrix is not unitary")
    return MatElem(x.space, np.einsum("ts,tij->sij", u, x.coeffs))


def random_element(space: SpaceSpec, n: int, rng: np.random.Generator) -> MatElem:
    k = space.dim
    c = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
    return MatElem(space, c)
