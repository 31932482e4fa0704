"""Hadamard constructions, collapse and witness experiments, restricted invertibility.

The experiments are finite-level probes: each one evaluates an amplified map
on explicit matrices (Hadamard sign patterns or first-column witness pairs)
and reports certified distances next to the quantities they are compared
against.  Comparisons only flag when the certified intervals are separated
after tolerance inflation.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .maps import BallMap, _apply_entries, amplify, from_blocks, modulus_ss
from .matcore import DomainError, smallest_singular, spectral_norm
from .spaces import MatElem, NormCert, SpaceSpec, kappa, mn_norm

TOL = 1e-9
MAX_HADAMARD_LEVEL = 14
MAX_EXHAUSTIVE = 10


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


# -- Hadamard ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    k: int
    entries: np.ndarray

    @property
    def size(self) -> int:
        return 2 ** self.k

    def norm(self) -> float:
        return 2.0 ** (self.k / 2)

    def gram_defect(self) -> int:
        """max |A A^T - 2^k I| in exact integer arithmetic."""
        a = self.entries.astype(np.int64)
        return int(np.max(np.abs(a @ a.T - self.size * np.eye(self.size, dtype=np.int64))))


@lru_cache(maxsize=16)
def _sylvester(k: int) -> np.ndarray:
    if k == 0:
        a = np.ones((1, 1), dtype=np.int8)
    else:
        half = _sylvester(k - 1)
        a = np.block([[half, half], [half, -half]]).astype(np.int8)
    a.setflags(write=False)
    return a


def hadamard(k: int) -> HadamardMatrix:
    """Sylvester matrix A_{2^k}, built from A_2 = [[1, 1], [1, -1]]."""
    if not 1 <= k <= MAX_HADAMARD_LEVEL:
        raise DomainError(f"Hadamard level must be in [1, {MAX_HADAMARD_LEVEL}], got {k}")
    return HadamardMatrix(k, _sylvester(k))


# -- collapse ----------------------------------------------------------------

@dataclass
class CollapseLevel:
    k: int
    size: int
    input_dist: float
    output_dist: float
    output_lower: float
    ratio: float
    affine_const: float


@dataclass
class CollapseReport:
    map_label: str
    h_norm: float
    levels: list
    slope_fit: float
    growth: float
    verdict: str

    def rows(self) -> list[dict]:
        return [asdict(lv) for lv in self.levels]

    def to_dict(self) -> dict:
        return {"map": self.map_label, "h_norm": self.h_norm, "slope_fit": self.slope_fit,
                "growth": self.growth, "verdict": self.verdict, "levels": self.rows()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())


DIVERGENCE_FACTOR = 2.0


def _as_point(f: BallMap, v) -> np.ndarray:
    if f.on_algebra:
        d = f.domain
        a = np.asarray(v, dtype=np.complex128)
        if a.ndim == 0:
            return a * np.eye(d)
        if a.shape != (d, d):
            raise DomainError(f"point must be a scalar or a {d}x{d} matrix")
        return a
    a = np.asarray(v, dtype=np.complex128)
    if a.ndim == 0:
        a = a * np.eye(f.domain.dim)[0]
    if a.shape != (f.domain.dim,):
        raise DomainError(f"point must have {f.domain.dim} coefficients")
    return a


def _point_norm(f: BallMap, a: np.ndarray) -> float:
    return spectral_norm(a) if f.on_algebra else float(np.linalg.norm(a))


def _check_ball(f: BallMap, *pts) -> None:
    for p in pts:
        if _point_norm(f, p) > 1 + 1e-12:
            raise DomainError("point lies outside the unit ball of the domain")


def collapse_experiment(f: BallMap, x0=0.0, h=0.5, k_max: int = 8, *, seed: int = 0) -> CollapseReport:
    """Compare f at the ones-pattern x0 + (+-h) against the constant pattern x0.

    At level N = 2^k the input matrix is J (x) x0 + A_N (x) h (J the all-ones
    matrix, A_N Hadamard); its distance to J (x) x0 is ||h|| 2^{k/2}.  The
    verdict compares the minimal affine constant C_k = out_k / (in_k + 1) at
    the top level with the one two levels below.
    """
    if k_max < 3:
        raise DomainError("collapse needs k_max >= 3")
    x0, h = _as_point(f, x0), _as_point(f, h)
    _check_ball(f, x0 + h, x0 - h)
    hn = _point_norm(f, h)
    if hn == 0:
        raise DomainError("h must be nonzero")
    levels = []
    for k in range(1, k_max + 1):
        a = hadamard(k).entries.astype(float)
        size = a.shape[0]
        inp = hn * 2.0 ** (k / 2)
        if f.on_algebra:
            blocks = x0[None, None] + a[:, :, None, None] * h[None, None]
            fx = _apply_entries(f, blocks, h.shape)
            f0 = np.asarray(f.eval(x0), dtype=np.complex128)
            out = lo = spectral_norm(from_blocks(fx - f0[None, None]))
        else:
            ones = np.ones((size, size))
            c = x0[:, None, None] * ones + h[:, None, None] * a
            fx = amplify(f, MatElem(f.domain, c))
            f0 = np.asarray(f.eval(x0), dtype=np.complex128)
            base = MatElem(f.codomain, f0[:, None, None] * ones)
            cert = mn_norm(fx - base, seed=seed)
            out, lo = cert.upper, cert.lower
        levels.append(CollapseLevel(k, size, inp, out, lo, out / inp, out / (inp + 1)))
    ins = np.array([lv.input_dist for lv in levels])
    outs = np.array([lv.output_dist for lv in levels])
    slope = float(outs @ (ins + 1) / ((ins + 1) @ (ins + 1)))
    top, ref = levels[-1].affine_const, levels[-3].affine_const
    if ref > 0:
        growth = top / ref
    else:
        growth = math.inf if top > 0 else 1.0
    verdict = "diverges" if growth >= DIVERGENCE_FACTOR else "collapses"
    return CollapseReport(f.label, hn, levels, slope, growth, verdict)


def midpoint_defect(f: BallMap, x, z) -> float:
    """||f((x+z)/2) - (f(x)+f(z))/2||."""
    x, z = _as_point(f, x), _as_point(f, z)
    mid = (x + z) / 2
    _check_ball(f, x, z, mid)
    fx, fz, fm = (np.asarray(f.eval(p), dtype=np.complex128) for p in (x, z, mid))
    diff = fm - (fx + fz) / 2
    return spectral_norm(diff) if diff.ndim == 2 else float(np.linalg.norm(diff))


# -- witness pairs -----------------------------------------------------------

def _witness(space: SpaceSpec, n: int, seed: int = 0):
    if space.dim < 2 * n:
        raise DomainError(f"witness pair at level {n} needs dim >= {2 * n}, got {space.dim}")
    kap = kappa(space, n, seed=seed)
    c = np.zeros((space.dim, n, n), dtype=np.complex128)
    d = np.zeros_like(c)
    for j in range(n):
        c[2 * j, j, 0] = 1.0 / kap.upper
        d[2 * j + 1, j, 0] = 1.0 / kap.upper
    return MatElem(space, c), MatElem(space, d), kap


def witness_pair(space: SpaceSpec, n: int, *, seed: int = 0) -> tuple[MatElem, MatElem]:
    """First-column matrices with entries e_{2j-1}/kappa_n and e_{2j}/kappa_n."""
    c, d, _ = _witness(space, n, seed)
    return c, d


def _rel_gap(cert: NormCert) -> float:
    return (cert.upper - cert.lower) / cert.upper if cert.upper > 0 else 0.0


def _require_spaces(f: BallMap):
    if not isinstance(f.domain, SpaceSpec) or not isinstance(f.codomain, SpaceSpec):
        raise DomainError("witness experiments need a map between catalog spaces")


def level1_lipschitz(f: BallMap, *, seed: int = 0) -> tuple[float, bool]:
    """Lipschitz constant of f on the unit ball of X (level 1); flag is True if sampled."""
    if f.is_linear and isinstance(f.domain, SpaceSpec):
        basis = np.eye(f.domain.dim, dtype=np.complex128)
        return spectral_norm(np.asarray(f.eval(basis)).T), False
    if f.lipschitz_bound is not None:
        return f.lipschitz_bound, False
    curve = modulus_ss(f, t_grid=(0.05,), n_max=1, samples=400, seed=seed)
    return float(curve.slopes()[0]), True


def sup_norm_estimate(f: BallMap, *, n_max: int = 4, samples: int = 64, seed: int = 0) -> float:
    """Sampled sup of ||f_n(x)|| over the unit ball, n <= n_max (a lower estimate)."""
    _require_spaces(f)
    rng = np.random.default_rng(seed)
    best = 0.0
    k = f.domain.dim
    for n in range(1, n_max + 1):
        for _ in range(samples):
            c = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
            x = MatElem(f.domain, c)
            x = x.scaled(1.0 / mn_norm(x, seed=seed).upper)
            best = max(best, mn_norm(amplify(f, x), seed=seed).lower)
    return best


@dataclass
class WitnessReport:
    n: int
    c_norm: NormCert
    d_norm: NormCert
    domain_gap: NormCert
    image_gap: NormCert
    kappa_x: NormCert
    kappa_y: NormCert
    predicted_lower: float
    ss_bound: float
    alpha: float
    L: float
    M: float
    flagged: bool
    tags: tuple = ()

    def to_dict(self) -> dict:
        def iv(c):
            return {"lower": c.lower, "upper": c.upper}
        return {
            "n": self.n, "c_norm": iv(self.c_norm), "d_norm": iv(self.d_norm),
            "domain_gap": iv(self.domain_gap), "image_gap": iv(self.image_gap),
            "kappa_x": iv(self.kappa_x), "kappa_y": iv(self.kappa_y),
            "predicted_lower": self.predicted_lower, "ss_bound": self.ss_bound,
            "alpha": self.alpha, "L": self.L, "M": self.M, "flagged": self.flagged,
            "tags": list(self.tags),
        }

    def row(self) -> dict:
        return {
            "n": self.n,
            "image_gap_lower": self.image_gap.lower, "image_gap_upper": self.image_gap.upper,
            "domain_gap_lower": self.domain_gap.lower, "domain_gap_upper": self.domain_gap.upper,
            "kappa_x_upper": self.kappa_x.upper, "kappa_y_lower": self.kappa_y.lower,
            "predicted_lower": self.predicted_lower, "ss_bound": self.ss_bound,
            "flagged": self.flagged, "tags": ";".join(self.tags),
        }


def lower_bound_experiment(f: BallMap, n_list, M: float | None = None, L: float | None = None,
                           alpha: float = 1.0, *, seed: int = 0, tol: float = TOL) -> list[WitnessReport]:
    """Evaluate f_n on witness pairs and compare with kappa_n(Y) / (2 L kappa_n(X)^alpha)."""
    _require_spaces(f)
    X, Y = f.domain, f.codomain
    tags = []
    if L is None:
        L, sampled = level1_lipschitz(f, seed=seed)
        if sampled:
            tags.append("L-empirical")
    if M is None:
        M = sup_norm_estimate(f, seed=seed)
        tags.append("M-empirical")
    out = []
    for n in n_list:
        c, d, kx = _witness(X, n, seed)
        ky = kappa(Y, n, seed=seed)
        cn, dn = mn_norm(c, seed=seed), mn_norm(d, seed=seed)
        dom = mn_norm(c - d, seed=seed)
        img = mn_norm(amplify(f, c) - amplify(f, d), seed=seed)
        predicted = ky.lower / (2 * L * kx.upper ** alpha)
        bound = 2 * M
        row_tags = list(tags)
        if max(_rel_gap(kx), _rel_gap(ky)) > 0.1:
            row_tags.append("degraded")
        flagged = predicted > bound * (1 + tol) + tol
        out.append(WitnessReport(n, cn, dn, dom, img, kx, ky, predicted, bound, alpha, L, M,
                                 flagged, tuple(row_tags)))
    return out


@dataclass
class UncollapsedRow:
    n: int
    t: float
    domain_gap: NormCert
    image_gap: NormCert
    kappa_x: NormCert
    kappa_y: NormCert
    upper_squeeze: float
    almost_uncollapsed: bool
    squeeze_ok: bool
    implied_ratio_lower: float
    implied_ratio_upper: float

    def row(self) -> dict:
        return {
            "n": self.n, "t": self.t,
            "domain_gap_lower": self.domain_gap.lower, "domain_gap_upper": self.domain_gap.upper,
            "image_gap_lower": self.image_gap.lower, "image_gap_upper": self.image_gap.upper,
            "upper_squeeze": self.upper_squeeze, "almost_uncollapsed": self.almost_uncollapsed,
            "squeeze_ok": self.squeeze_ok,
            "implied_ratio_lower": self.implied_ratio_lower,
            "implied_ratio_upper": self.implied_ratio_upper,
        }


def uncollapsed_experiment(f: BallMap, t: float, eps: float, n_list, *, lip: float | None = None,
                           seed: int = 0) -> list[UncollapsedRow]:
    """Witness pairs rescaled by t/sqrt(2) sit at distance exactly t; check
    eps <= ||f_n(c) - f_n(d)|| <= 2 Lip kappa_n(Y) / kappa_n(X).

    The implied ratio is gap * kappa_n(X) / (t * kappa_n(Y)).
    """
    _require_spaces(f)
    if not 0 < t < 1:
        raise DomainError("t must lie in (0, 1)")
    if eps <= 0:
        raise DomainError("eps must be positive")
    if lip is None:
        lip, _ = level1_lipschitz(f, seed=seed)
    rows = []
    s = t / math.sqrt(2)
    for n in n_list:
        c, d, kx = _witness(f.domain, n, seed)
        c, d = c.scaled(s), d.scaled(s)
        ky = kappa(f.codomain, n, seed=seed)
        dom = mn_norm(c - d, seed=seed)
        img = mn_norm(amplify(f, c) - amplify(f, d), seed=seed)
        upper = 2 * lip * ky.upper / kx.lower
        rows.append(UncollapsedRow(
            n, t, dom, img, kx, ky, upper,
            almost_uncollapsed=img.lower >= eps,
            squeeze_ok=img.upper >= eps and img.lower <= upper * (1 + TOL) + TOL,
            implied_ratio_lower=img.lower * kx.lower / (t * ky.upper),
            implied_ratio_upper=img.upper * kx.upper / (t * ky.lower),
        ))
    return rows


# -- restricted invertibility ------------------------------------------------

@dataclass
class RISelection:
    sigma: tuple
    sigma_min_bound: float
    target_size: int
    T_norm: float
    barrier: float
    eps: float
    tags: tuple = ()

    def verify(self, T) -> bool:
        """Recompute the smallest singular value of the selected columns."""
        sub = np.asarray(T, dtype=np.complex128)[:, list(self.sigma)]
        return smallest_singular(sub) >= self.sigma_min_bound - 1e-12

    def to_dict(self) -> dict:
        return {"sigma": list(self.sigma), "sigma_min_bound": self.sigma_min_bound,
                "target_size": self.target_size, "T_norm": self.T_norm, "barrier": self.barrier,
                "eps": self.eps, "tags": list(self.tags)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _barrier_greedy(cols: np.ndarray, b: float) -> list[int]:
    """Add columns while the Gram matrix stays above b * I, each time taking
    the column that raises Tr((G - bI)^{-1}) the least."""
    n = cols.shape[1]
    gamma = np.einsum("ij,ij->j", cols.conj(), cols).real
    chosen: list[int] = []
    minv = np.zeros((0, 0), dtype=np.complex128)
    while True:
        rest = [j for j in range(n) if j not in chosen]
        if not rest:
            break
        sel = cols[:, chosen]
        g = sel.conj().T @ cols[:, rest]  # (|S|, |rest|)
        v = minv @ g
        schur = gamma[rest] - b - np.einsum("ij,ij->j", g.conj(), v).real
        feas = schur > 1e-12 * gamma[rest]
        if not feas.any():
            break
        score = np.where(feas, (1 + np.einsum("ij,ij->j", v.conj(), v).real) / np.where(feas, schur, 1), np.inf)
        pick = int(np.argmin(score))  # ties -> lowest index
        j = rest[pick]
        # bordered inverse update of (G - bI)^{-1}
        vj, sj = v[:, pick], schur[pick]
        m = len(chosen)
        new = np.empty((m + 1, m + 1), dtype=np.complex128)
        new[:m, :m] = minv + np.outer(vj, vj.conj()) / sj
        new[:m, m] = -vj / sj
        new[m, :m] = -vj.conj() / sj
        new[m, m] = 1 / sj
        minv = new
        chosen.append(j)
    return chosen


def restricted_invertibility(T, eps: float = 0.5) -> RISelection:
    """Deterministic barrier greedy column selection.

    Columns must have norm >= 1.  The barrier starts at (1 - eps)^2, so an
    unrelaxed run certifies sigma_min >= 1 - eps; the size target is
    ceil(eps^2 n / ||T||^2).  If the target is missed, the barrier is halved
    and the run is tagged.
    """
    t = np.asarray(T, dtype=np.complex128)
    if t.ndim != 2 or t.shape[1] == 0:
        raise DomainError("T must be a nonempty 2-d matrix")
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    norms = np.linalg.norm(t, axis=0)
    if np.any(norms < 1 - 1e-12):
        raise DomainError("every column of T must have norm >= 1")
    n = t.shape[1]
    tn = spectral_norm(t)
    target = math.ceil(eps * eps * n / tn ** 2 - 1e-12)
    b = (1 - eps) ** 2
    tags = []
    while True:
        chosen = _barrier_greedy(t, b)
        if len(chosen) >= target or b < 1e-8:
            break
        b /= 2
        if "barrier-relaxed" not in tags:
            tags.append("barrier-relaxed")
    if len(chosen) < target:
        tags.append("target-missed")
    sigma = tuple(sorted(chosen))
    smin = smallest_singular(t[:, list(sigma)]) if sigma else 0.0
    return RISelection(sigma, smin, target, tn, math.sqrt(b), eps, tuple(tags))


def exhaustive_ri_optimum(T, size: int) -> tuple[tuple, float]:
    """Best smallest singular value over all column subsets of a given size."""
    t = np.asarray(T, dtype=np.complex128)
    n = t.shape[1]
    if n > MAX_EXHAUSTIVE:
        raise DomainError(f"exhaustive search limited to n <= {MAX_EXHAUSTIVE}")
    if not 1 <= size <= n:
        raise DomainError("subset size out of range")
    best, arg = -1.0, ()
    for sub in itertools.combinations(range(n), size):
        s = np.linalg.svd(t[:, sub], compute_uv=False)
        v = float(s[-1]) if t.shape[0] >= size else 0.0
        if v > best:
            best, arg = v, sub
    return arg, best


@lru_cache(maxsize=1)
def ri_calibration() -> dict:
    text = resources.files("opspace_lab").joinpath("data/ri_calibration.json").read_text()
    return json.loads(text)


def calibrated_constant(eps: float) -> float:
    """Guaranteed sigma_min floor c(eps) of an unrelaxed run (1 - eps)."""
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    return 1.0 - eps


# -- localized experiment ----------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    """Linear map phi: Z -> host given on coefficients, with certified norm bounds."""

    host: SpaceSpec
    matrix: np.ndarray
    amp_norm: float
    inv_norm: float

    @property
    def A(self) -> float:
        return float(max(self.amp_norm, self.inv_norm))


@dataclass
class LocalizedReport:
    n: int
    c: float
    kappa_z: NormCert
    kappa_y: NormCert
    A: float
    y_norm: float
    bound_2M: float
    bound_ok: bool
    selection: RISelection
    chain_lhs: float
    chain_rhs: float
    alpha: float
    alpha_implied: float
    m_pred: float
    tags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "n": self.n, "c": self.c,
            "kappa_z": {"lower": self.kappa_z.lower, "upper": self.kappa_z.upper},
            "kappa_y": {"lower": self.kappa_y.lower, "upper": self.kappa_y.upper},
            "A": self.A, "y_norm": self.y_norm, "bound_2M": self.bound_2M, "bound_ok": self.bound_ok,
            "selection": self.selection.to_dict(), "chain_lhs": self.chain_lhs,
            "chain_rhs": self.chain_rhs, "alpha": self.alpha, "alpha_implied": self.alpha_implied,
            "m_pred": self.m_pred, "tags": list(self.tags),
        }


def localized_experiment(Z: SpaceSpec, embed: Embedding, Y: SpaceSpec, f: BallMap, n: int, c: float,
                         *, alpha: float = 1.0, M: float | None = None, L: float | None = None,
                         eps: float = 0.5, seed: int = 0, tol: float = 1e-6) -> LocalizedReport:
    """Push e_j/kappa_n(Z) through the host embedding and f, select an
    invertible block of the differences y_j, and compare n^{c/(1+2c)} with
    (kappa_n(Z) A)^alpha."""
    mat = np.asarray(embed.matrix, dtype=np.complex128)
    if mat.shape != (embed.host.dim, Z.dim):
        raise DomainError(f"embedding matrix must be {embed.host.dim}x{Z.dim}")
    if not isinstance(f.domain, SpaceSpec) or f.domain.dim != embed.host.dim or f.codomain.dim != Y.dim:
        raise DomainError("map must go from the host space to Y")
    if Z.dim < 2 * n:
        raise DomainError(f"Z needs dim >= {2 * n}")
    kz = kappa(Z, n, seed=seed)
    ky = kappa(Y, n, seed=seed)
    if ky.upper < n ** c * (1 - tol):
        raise DomainError(f"kappa_{n}(Y) = {ky.upper:.6g} is below n^c = {n ** c:.6g}")
    tags = []
    if L is None:
        L, sampled = level1_lipschitz(f, seed=seed)
        if sampled:
            tags.append("L-empirical")
    if M is None:
        M = L  # f(0) = 0 maps in scope: sup ||f|| on the ball <= Lip
        tags.append("M-from-L")
    pts = mat.T / kz.upper  # rows: phi(e_j) / kappa_n(Z)
    if np.any(np.linalg.norm(pts, axis=1) > 1 + 1e-12):
        raise DomainError("embedded basis vectors leave the unit ball of the host")
    img = np.asarray(f.eval(pts), dtype=np.complex128)
    ycols = (img[0::2][:n] - img[1::2][:n]).T  # (Y.dim, n)
    y_norm = spectral_norm(ycols)
    col = np.linalg.norm(ycols, axis=0)
    if col.min() <= 0:
        tags.append("degenerate-column")
        sel = RISelection((), 0.0, 0, y_norm, 0.0, eps, ("target-missed",))
    else:
        sel = restricted_invertibility(ycols / col.min(), eps)
    if "target-missed" in sel.tags:
        tags.append("degraded")
    lhs = n ** (c / (1 + 2 * c))
    base = kz.upper * embed.A
    rhs = base ** alpha
    if lhs <= 1 + tol:
        implied = 0.0
    elif base <= 1 + tol:
        implied = math.inf
    else:
        implied = math.log(lhs) / math.log(base)
    m_pred = eps * eps * n / (4 * M ** 2 * L ** 2 * kz.upper ** (2 * alpha) * embed.A ** (2 * alpha))
    return LocalizedReport(n, c, kz, ky, embed.A, y_norm, 2 * M, y_norm <= 2 * M * (1 + tol), sel,
                           lhs, rhs, alpha, implied, m_pred, tuple(tags))
