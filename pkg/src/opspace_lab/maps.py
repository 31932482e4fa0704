"""Amplified nonlinear maps, sampled small-scale moduli, multilinear bounds.

A :class:`BallMap` acts either on a matrix algebra ``M_d`` (``domain`` is the
int ``d``; ``d = 1`` is the scalar case) or on a catalog space (``domain`` is a
:class:`~opspace_lab.spaces.SpaceSpec`, elements are coefficient vectors).
Its n-amplification applies ``eval`` to every entry of an n x n matrix.

Sampled moduli are one-sided: ``modulus_ss`` is a lower bound for the small
scale modulus of continuity, ``compression_ss`` an upper bound for the small
scale compression modulus.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .matcore import DomainError, random_unitary, spectral_norm, spectral_norm_batch
from .spaces import MatElem, SpaceSpec, mn_norm

DEFAULT_T_GRID = (0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 2.0)
BALL_TOL = 1e-12


@dataclass(frozen=True)
class BallMap:
    eval: Callable
    domain: object = 1
    codomain: object = 1
    is_linear: bool = False
    label: str = ""
    vectorized: bool = False
    # certified small-scale Lipschitz constant over all amplification levels
    lipschitz_bound: float | None = None

    def __call__(self, x):
        return self.eval(x)

    @property
    def on_algebra(self) -> bool:
        return not isinstance(self.domain, SpaceSpec)


def _elem_shape(dom) -> tuple:
    return (dom.dim,) if isinstance(dom, SpaceSpec) else (dom, dom)


# -- block bookkeeping -------------------------------------------------------

def to_blocks(m: np.ndarray, d: int) -> np.ndarray:
    """(..., nd, nd) matrix -> (..., n, n, d, d) block array."""
    m = np.asarray(m)
    nd = m.shape[-1]
    if nd % d or m.shape[-2] != nd:
        raise DomainError(f"matrix side {m.shape[-2:]} is not a multiple of block size {d}")
    n = nd // d
    return m.reshape(m.shape[:-2] + (n, d, n, d)).swapaxes(-3, -2)


def from_blocks(b: np.ndarray) -> np.ndarray:
    b = np.asarray(b)
    n, _, d, _ = b.shape[-4:]
    return b.swapaxes(-3, -2).reshape(b.shape[:-4] + (n * d, n * d))


def _apply_entries(f: BallMap, blocks: np.ndarray, shape: tuple) -> np.ndarray:
    if f.vectorized:
        return np.asarray(f.eval(blocks), dtype=np.complex128)
    lead = blocks.shape[: blocks.ndim - len(shape)]
    flat = blocks.reshape((-1,) + shape)
    out = [np.asarray(f.eval(e), dtype=np.complex128) for e in flat]
    oshape = out[0].shape
    return np.stack(out).reshape(lead + oshape)


def amplify(f: BallMap, x):
    """Entrywise application f_n([x_ij]) = [f(x_ij)].

    ``x`` is an ``(nd, nd)`` matrix (or ``(n, n, d, d)`` blocks) for algebra
    maps and a :class:`MatElem` for maps on catalog spaces.
    """
    if f.on_algebra:
        d = f.domain
        arr = np.asarray(x, dtype=np.complex128)
        blocks = arr if arr.ndim == 4 else to_blocks(arr, d)
        if blocks.shape[-2:] != (d, d):
            raise DomainError(f"blocks must be {d}x{d}")
        norms = spectral_norm_batch(blocks)
        if np.any(norms > 1 + BALL_TOL):
            raise DomainError("an entry lies outside the unit ball of the domain")
        out = _apply_entries(f, blocks, (d, d))
        return out if arr.ndim == 4 else from_blocks(out)
    if not isinstance(x, MatElem):
        raise DomainError("maps on catalog spaces amplify MatElem inputs")
    if x.space.dim != f.domain.dim:
        raise DomainError("element dimension does not match the map's domain")
    ent = np.moveaxis(x.coeffs, 0, -1)  # (n, n, k)
    if np.any(np.linalg.norm(ent, axis=-1) > 1 + BALL_TOL):
        raise DomainError("an entry lies outside the unit ball of the domain")
    out = _apply_entries(f, ent, (f.domain.dim,))
    return MatElem(f.codomain, np.moveaxis(out, -1, 0))


def compose(g: BallMap, f: BallMap) -> BallMap:
    lip = (f.lipschitz_bound * g.lipschitz_bound
           if f.lipschitz_bound is not None and g.lipschitz_bound is not None else None)
    return BallMap(lambda x: g.eval(f.eval(x)), f.domain, g.codomain,
                   f.is_linear and g.is_linear, f"{g.label}∘{f.label}",
                   f.vectorized and g.vectorized, lip)


# -- concrete maps -----------------------------------------------------------

def _num(z: complex) -> str:
    return f"{z.real:g}" if z.imag == 0 else f"({z.real:g}{z.imag:+g}j)"


def polynomial_map(coeffs: Sequence[complex], d: int = 1) -> BallMap:
    """x -> sum_m c_m x^m on M_d (ascending coefficients)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1:
        raise DomainError("coefficients must be a flat list")
    bound = float(sum(m * abs(cm) for m, cm in enumerate(c)))
    linear = bool(np.all(np.delete(c, 1) == 0)) if c.size > 1 else not c.any()
    terms = " + ".join(f"{_num(cm)}x^{m}" for m, cm in enumerate(c) if cm != 0) or "0"
    return BallMap(lambda x: _kernels.block_poly(x, c), d, d, linear, f"poly[{terms}]",
                   vectorized=True, lipschitz_bound=bound)


def scalar_multiple(alpha: complex, d: int = 1) -> BallMap:
    return polynomial_map([0, alpha], d)


def constant_map(value, domain, codomain=None) -> BallMap:
    """x -> value (a fixed element of the codomain)."""
    codomain = domain if codomain is None else codomain
    v = np.asarray(value, dtype=np.complex128)
    if v.ndim == 0 and not isinstance(codomain, SpaceSpec):
        v = v * np.eye(codomain)
    if v.shape != _elem_shape(codomain):
        raise DomainError(f"constant must have shape {_elem_shape(codomain)}")
    shape = _elem_shape(domain)

    def ev(x):
        x = np.asarray(x)
        return np.broadcast_to(v, x.shape[: x.ndim - len(shape)] + v.shape).copy()
    return BallMap(ev, domain, codomain, not v.any(), "constant", vectorized=True, lipschitz_bound=0.0)


def linear_map(mat, domain: SpaceSpec, codomain: SpaceSpec, label: str = "linear") -> BallMap:
    """Linear map between catalog spaces given on coefficient vectors."""
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.shape != (codomain.dim, domain.dim):
        raise DomainError(f"matrix must be {codomain.dim}x{domain.dim}")
    return BallMap(lambda v: np.einsum("ab,...b->...a", mat, v), domain, codomain, True, label,
                   vectorized=True)


def identity_map(domain: SpaceSpec, codomain: SpaceSpec | None = None) -> BallMap:
    codomain = codomain or domain
    return linear_map(np.eye(codomain.dim, domain.dim), domain, codomain,
                      f"id:{domain.label}->{codomain.label}")


# -- sampled moduli ----------------------------------------------------------

@dataclass
class ModulusCurve:
    t_grid: np.ndarray
    values: np.ndarray
    direction: str
    n_max: int
    samples: int
    seed: int
    n_at_extremum: np.ndarray
    pairs_sampled: np.ndarray
    raw_values: np.ndarray = field(repr=False)
    certified_slope: float | None = None

    def slopes(self) -> np.ndarray:
        return self.values / self.t_grid

    def rows(self):
        for t, v, n, p in zip(self.t_grid, self.values, self.n_at_extremum, self.pairs_sampled):
            yield {"t": float(t), "value": float(v), "n_at_extremum": int(n), "pairs_sampled": int(p)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["t", "value", "n_at_extremum", "pairs_sampled"], lineterminator="\n")
        w.writeheader()
        for r in self.rows():
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "n_max": self.n_max,
            "samples": self.samples,
            "seed": self.seed,
            "certified_slope": self.certified_slope,
            "rows": list(self.rows()),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _ginibre(rng, s, n):
    return rng.standard_normal((s, n, n)) + 1j * rng.standard_normal((s, n, n))


def _unit(m):
    nrm = spectral_norm_batch(m)
    nrm[nrm == 0] = 1.0
    return m / nrm[:, None, None]


def _haar_stack(rng, s, n):
    q, r = np.linalg.qr(_ginibre(rng, s, n))
    dg = np.diagonal(r, axis1=1, axis2=2)
    return q * (dg / np.abs(dg))[:, None, :]


def _hadamard_like(rng, n):
    if n & (n - 1) == 0:
        h = np.ones((1, 1))
        while h.shape[0] < n:
            h = np.block([[h, h], [h, -h]])
        return h / math.sqrt(n)
    return random_unitary(n, rng)


def _pair_batch(rng, n: int, d: int, t: float, count: int):
    """Centers c with ||c|| <= 1 - t/2 and offsets ||h|| = t/2 drawn from
    several families; x = c + h and z = c - h lie in the unit ball with
    ||x - z|| = t exactly."""
    nd = n * d
    rc = 1.0 - t / 2.0
    fam = 5
    sizes = [count // fam] * fam
    sizes[0] += count - sum(sizes)
    cs, hs = [], []
    # generic Gaussian pairs, centers pushed toward the sphere
    s = sizes[0]
    radius = rc * rng.uniform(0.5, 1.0, s) ** 0.25
    cs.append(_unit(_ginibre(rng, s, nd)) * radius[:, None, None])
    hs.append(_unit(_ginibre(rng, s, nd)))
    # aligned unitaries: c = rc U, h along U D
    s = sizes[1]
    u = _haar_stack(rng, s, nd)
    dg = np.exp(1j * rng.uniform(-0.3, 0.3, (s, nd)))
    cs.append(rc * u)
    hs.append(u * dg[:, None, :])
    # rank one
    s = sizes[2]
    a, b, p, q = (rng.standard_normal((s, nd)) + 1j * rng.standard_normal((s, nd)) for _ in range(4))
    cs.append(_unit(np.einsum("si,sj->sij", a, b.conj())) * rc)
    hs.append(_unit(np.einsum("si,sj->sij", p, q.conj())))
    # Hadamard pattern over the matrix level, unitary blocks
    s = sizes[3]
    hn = _hadamard_like(rng, n)
    ones = np.ones((n, n)) / n
    w1 = _haar_stack(rng, s, d)
    w2 = _haar_stack(rng, s, d)
    cs.append(rc * np.einsum("ij,skl->sikjl", ones, w1).reshape(s, nd, nd))
    hs.append(np.einsum("ij,skl->sikjl", hn, w2).reshape(s, nd, nd))
    # antipodal pairs around the origin
    s = sizes[4]
    cs.append(np.zeros((s, nd, nd), dtype=np.complex128))
    hs.append(_unit(_ginibre(rng, s, nd)))
    c = np.concatenate(cs)
    h = _unit(np.concatenate(hs)) * (t / 2.0)
    return c + h, c - h


def _algebra_gaps(f: BallMap, x: np.ndarray, z: np.ndarray, d: int) -> np.ndarray:
    fx = _apply_entries(f, to_blocks(x, d), (d, d))
    fz = _apply_entries(f, to_blocks(z, d), (d, d))
    return spectral_norm_batch(from_blocks(fx - fz))


def _space_gaps(f: BallMap, x: np.ndarray, z: np.ndarray, direction: str, seed: int) -> np.ndarray:
    # x, z: (S, k, n, n) coefficient stacks, already inside the ball
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        fx = amplify(f, MatElem(f.domain, x[i]))
        fz = amplify(f, MatElem(f.domain, z[i]))
        cert = mn_norm(fx - fz, seed=seed)
        out[i] = cert.lower if direction == "omega" else cert.upper
    return out


def _space_pairs(f: BallMap, rng, n: int, t: float, count: int, direction: str, seed: int):
    k = f.domain.dim
    xs, zs = [], []
    for _ in range(count):
        c = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
        h = rng.standard_normal((k, n, n)) + 1j * rng.standard_normal((k, n, n))
        if rng.uniform() < 0.2:
            c[:] = 0
        cn = mn_norm(MatElem(f.domain, c), seed=seed) if c.any() else None
        hn = mn_norm(MatElem(f.domain, h), seed=seed)
        # omega needs ||x - z|| <= t: divide by the upper end; rho needs >= t
        hs = (hn.upper if direction == "omega" else hn.lower)
        c = c * ((1 - t / 2) * rng.uniform(0.5, 1.0) ** 0.25 / cn.upper) if cn else c
        h = h * (t / 2) / hs
        xs.append(c + h)
        zs.append(c - h)
    return np.stack(xs), np.stack(zs)


def _sampled_modulus(f: BallMap, t_grid, n_max: int, samples: int, seed: int, direction: str,
                     batch: int = 500) -> ModulusCurve:
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if t_grid.size == 0:
        raise DomainError("empty t grid")
    if t_grid[0] <= 0 or t_grid[-1] > 2:
        raise DomainError("grid distances must lie in (0, 2]")
    if n_max < 1 or samples < 1:
        raise DomainError("n_max and samples must be positive")
    better = np.greater if direction == "omega" else np.less
    raw = np.full(t_grid.size, -np.inf if direction == "omega" else np.inf)
    arg_n = np.zeros(t_grid.size, dtype=int)
    for ti, t in enumerate(t_grid):
        for n in range(1, n_max + 1):
            rng = np.random.default_rng([seed, ti, n])
            left = samples
            while left > 0:
                cnt = min(batch, left)
                left -= cnt
                if f.on_algebra:
                    x, z = _pair_batch(rng, n, f.domain, t, cnt)
                    gaps = _algebra_gaps(f, x, z, f.domain)
                else:
                    x, z = _space_pairs(f, rng, n, t, cnt, direction, seed)
                    gaps = _space_gaps(f, x, z, direction, seed)
                val = gaps.max() if direction == "omega" else gaps.min()
                if better(val, raw[ti]):
                    raw[ti], arg_n[ti] = val, n
    vals, env_n = raw.copy(), arg_n.copy()
    # sup over d(x,z) <= t is monotone in t; inf over d(x,z) >= t as well
    if direction == "omega":
        for i in range(1, vals.size):
            if vals[i - 1] > vals[i]:
                vals[i], env_n[i] = vals[i - 1], env_n[i - 1]
    else:
        for i in range(vals.size - 2, -1, -1):
            if vals[i + 1] < vals[i]:
                vals[i], env_n[i] = vals[i + 1], env_n[i + 1]
    pairs = np.full(t_grid.size, samples * n_max)
    cert = f.lipschitz_bound if direction == "omega" else None
    return ModulusCurve(t_grid, vals, direction, n_max, samples, seed, env_n, pairs, raw, cert)


def modulus_ss(f: BallMap, t_grid=DEFAULT_T_GRID, n_max: int = 8, samples: int = 2000,
               seed: int = 0) -> ModulusCurve:
    """Sampled lower bound on sup_n omega_{f_n restricted to the unit ball}(t)."""
    return _sampled_modulus(f, t_grid, n_max, samples, seed, "omega")


def compression_ss(f: BallMap, t_grid=DEFAULT_T_GRID, n_max: int = 8, samples: int = 2000,
                   seed: int = 0) -> ModulusCurve:
    """Sampled upper bound on inf_n rho_{f_n restricted to the unit ball}(t)."""
    return _sampled_modulus(f, t_grid, n_max, samples, seed, "rho")


# -- block Schur products and multilinear maps -------------------------------

def schur_block_product(x, z) -> np.ndarray:
    """[x_ij z_ij] for (n, n, d, d) block arrays."""
    x = np.asarray(x, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if x.shape != z.shape or x.ndim != 4 or x.shape[0] != x.shape[1] or x.shape[2] != x.shape[3]:
        raise DomainError(f"need equal (n, n, d, d) shapes, got {x.shape} and {z.shape}")
    return _kernels.block_matmul(x, z)


def block_norm(x) -> float:
    return spectral_norm(from_blocks(np.asarray(x)))


def _random_block_factor(rng, n, d, kind):
    nd = n * d
    if kind == 0:
        m = _ginibre(rng, 1, nd)[0]
    elif kind == 1:
        m = random_unitary(nd, rng)
    elif kind == 2:
        u = np.stack([random_unitary(d, rng) for _ in range(n * n)]).reshape(n, n, d, d)
        m = from_blocks(u)
    else:
        a = rng.standard_normal(nd) + 1j * rng.standard_normal(nd)
        b = rng.standard_normal(nd) + 1j * rng.standard_normal(nd)
        m = np.outer(a, b.conj()) + 0.1 * _ginibre(rng, 1, nd)[0]
    return to_blocks(m / spectral_norm(m), d)


def product_map_cc_check(m: int, d: int, samples: int, seed: int, n: int | None = None,
                         n_max: int = 6, tol: float = 1e-9) -> dict:
    """Sample ||P_n(x1..xm)|| against prod ||x_i|| for the block product map."""
    if m < 2:
        raise DomainError("product map check needs m >= 2")
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, 0
    for i in range(samples):
        nn = n if n is not None else int(rng.integers(1, n_max + 1))
        factors = [_random_block_factor(rng, nn, d, int(rng.integers(0, 4))) for _ in range(m)]
        prod = factors[0]
        for fct in factors[1:]:
            prod = schur_block_product(prod, fct)
        bound = float(np.prod([block_norm(fct) for fct in factors]))
        val = block_norm(prod)
        worst = max(worst, val / bound)
        violations += val > bound + tol
    return {"m": m, "d": d, "samples": samples, "seed": seed, "max_ratio": worst,
            "violations": int(violations), "tol": tol}


@dataclass(frozen=True)
class MLinearMap:
    """m-linear map on M_{d_1} x ... x M_{d_m}, with the l_inf-sum norm on inputs."""

    m: int
    eval: Callable
    factor_dims: tuple
    declared_cc: float | None = None
    label: str = ""

    def check_multilinear(self, rng: np.random.Generator, tol: float = 1e-9) -> float:
        """Largest relative deviation from linearity in each slot."""
        args = [_ginibre(rng, 1, dd)[0] for dd in self.factor_dims]
        worst = 0.0
        for slot, dd in enumerate(self.factor_dims):
            u, v = _ginibre(rng, 1, dd)[0], _ginibre(rng, 1, dd)[0]
            a, b = complex(rng.standard_normal(), rng.standard_normal()), complex(rng.standard_normal())
            mix = list(args)
            mix[slot] = a * u + b * v
            lhs = self.eval(*mix)
            mix[slot] = u
            qu = self.eval(*mix)
            mix[slot] = v
            qv = self.eval(*mix)
            err = np.max(np.abs(lhs - a * qu - b * qv))
            worst = max(worst, err / max(1.0, np.max(np.abs(lhs))))
        if worst > tol:
            raise DomainError(f"map is not multilinear (deviation {worst:.3g})")
        return worst


def product_mlinear(m: int, d: int) -> MLinearMap:
    def prod(*xs):
        out = xs[0]
        for x in xs[1:]:
            out = out @ x
        return out
    return MLinearMap(m, prod, (d,) * m, declared_cc=1.0, label=f"product^{m} on M_{d}")


def estimate_mlinear_norm(q: MLinearMap, starts: int = 64, steps: int = 20, seed: int = 0) -> float:
    """Multistart lower estimate of ||Q|| over tuples of unitaries (ball extreme points)."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(starts):
        xs = [random_unitary(dd, rng) for dd in q.factor_dims]
        val = spectral_norm(q.eval(*xs))
        for _ in range(steps):
            slot = int(rng.integers(q.m))
            trial = list(xs)
            trial[slot] = random_unitary(q.factor_dims[slot], rng)
            tv = spectral_norm(q.eval(*trial))
            if tv > val:
                xs, val = trial, tv
        best = max(best, val)
    return best


def mlinear_lip_bound(q: MLinearMap, norm: float | None = None, seed: int = 0) -> float:
    """m ||Q||: Lipschitz bound on the unit ball of the l_inf-sum.

    Uses ``norm`` when given, else the declared cc-norm (which dominates ||Q||),
    else a sampled estimate of ||Q||.
    """
    if norm is None:
        norm = q.declared_cc if q.declared_cc is not None else estimate_mlinear_norm(q, seed=seed)
    return q.m * float(norm)


def sampled_lip_ratio(q: MLinearMap, samples: int, seed: int) -> float:
    """max ||Q(x) - Q(z)|| / ||x - z||_inf over sampled pairs in the unit ball."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(samples):
        xs = []
        zs = []
        for dd in q.factor_dims:
            if i % 2:
                u = random_unitary(dd, rng)
                x = u
                z = u @ np.diag(np.exp(1j * rng.uniform(-0.1, 0.1, dd)))
            else:
                x = _ginibre(rng, 1, dd)[0]
                x = x / spectral_norm(x) * rng.uniform(0.5, 1.0)
                z = _ginibre(rng, 1, dd)[0]
                z = z / spectral_norm(z) * rng.uniform(0.5, 1.0)
            xs.append(x)
            zs.append(z)
        dist = max(spectral_norm(a - b) for a, b in zip(xs, zs))
        if dist == 0:
            continue
        worst = max(worst, spectral_norm(q.eval(*xs) - q.eval(*zs)) / dist)
    return worst


def qc_composition_bound(m: int, q_cc: float, t_cb: float) -> float:
    """Small-scale Lipschitz constant m ||Q||_cc ||T||_cb^(m+1) of Q∘T."""
    if m < 1 or q_cc < 0 or t_cb < 0:
        raise DomainError("need m >= 1 and nonnegative norms")
    return m * q_cc * t_cb ** (m + 1)
