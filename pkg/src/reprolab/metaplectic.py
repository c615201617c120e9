"""Metaplectic operators, the Schroedinger representation and their restrictions.

Elementary operators (global phases fixed by principal branches):

* ``dilation(A)``:  f -> det(A)^{-1/2} f(A^{-1} x)
* ``chirp(C)``:     f -> exp(-i pi <Cx, x>) f
* ``fourier(d)``:   f -> i^{d/2} F^{-1} f

Only moduli of inner products are contract-bearing; the sign ambiguity of the
double cover is never tracked.

Every operator also reports ``phase_space_matrix()``: the symplectic ``g``
with W_{op f} = W_f o g^{-1}.  For ``chirp(C)`` that is [[I, 0], [-C, I]]
and for ``fourier`` it is J^{-1}, which is why the restricted representation
on class-E groups is built from ``chirp(-sigma_q)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, SingularMatrixError
from .grid import SampledFunction, fourier_transform, phase_space_shift

_SYMPLECTIC_TOL = 1e-10


def standard_j(d: int) -> np.ndarray:
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValueError("a symplectic matrix is square of even size")
        res = symplectic_residual(g)
        if res > _SYMPLECTIC_TOL * max(1.0, np.max(np.abs(g)) ** 2):
            raise ValueError(f"matrix is not symplectic (residual {res:.3e})")
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    @property
    def d(self) -> int:
        return self.entries.shape[0] // 2

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries)

    def inverse(self) -> "SymplecticMatrix":
        # g^{-1} = -J g^T J for symplectic g
        j = standard_j(self.d)
        return SymplecticMatrix(-j @ self.entries.T @ j)


def symplectic_residual(g: np.ndarray) -> float:
    """max |g^T J g - J|."""
    g = np.asarray(g, dtype=float)
    j = standard_j(g.shape[0] // 2)
    return float(np.max(np.abs(g.T @ j @ g - j)))


@dataclass(frozen=True, eq=False)
class MetaplecticOp:
    kind: str
    matrix: np.ndarray | None = None
    parts: tuple["MetaplecticOp", ...] = field(default=())
    d: int = 1

    @classmethod
    def dilation(cls, a) -> "MetaplecticOp":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError("dilation matrix must be square")
        if abs(np.linalg.det(a)) <= 1e-12:
            raise SingularMatrixError("dilation matrix is singular")
        return cls("dilation", a, d=a.shape[0])

    @classmethod
    def chirp(cls, c) -> "MetaplecticOp":
        c = np.atleast_2d(np.asarray(c, dtype=float))
        if c.shape[0] != c.shape[1] or np.max(np.abs(c - c.T), initial=0.0) > 1e-12:
            raise ValueError("chirp matrix must be symmetric")
        return cls("chirp", c, d=c.shape[0])

    @classmethod
    def fourier(cls, d: int = 1) -> "MetaplecticOp":
        return cls("fourier", None, d=d)

    @classmethod
    def composite(cls, *ops: "MetaplecticOp") -> "MetaplecticOp":
        """Product ops[0] ops[1] ... (the last factor acts first)."""
        if not ops:
            raise ValueError("composite needs at least one factor")
        d = ops[0].d
        if any(op.d != d for op in ops):
            raise ValueError("all factors must act on the same dimension")
        return cls("composite", None, tuple(ops), d=d)

    def phase_space_matrix(self) -> np.ndarray:
        d = self.d
        eye = np.eye(d)
        zero = np.zeros((d, d))
        if self.kind == "dilation":
            return np.block([[self.matrix, zero], [zero, np.linalg.inv(self.matrix).T]])
        if self.kind == "chirp":
            return np.block([[eye, zero], [-self.matrix, eye]])
        if self.kind == "fourier":
            return standard_j(d).T
        g = np.eye(2 * d)
        for op in self.parts:
            g = g @ op.phase_space_matrix()
        return g


def _principal_inv_sqrt(det: float) -> complex:
    return complex(det) ** -0.5


def dilate(f: SampledFunction, a: np.ndarray, scale: complex | None = None) -> SampledFunction:
    """scale * f(a^{-1} x) by trigonometric interpolation; default scale det(a)^{-1/2}."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if scale is None:
        scale = _principal_inv_sqrt(np.linalg.det(a))
    mesh = f.grid.mesh()
    pts = mesh @ np.linalg.inv(a).T
    return f.with_values(scale * f.evaluate(pts, method="fourier"))


def chirp_frequency_limit(f: SampledFunction, c: np.ndarray, rel_tol: float = 1e-8) -> tuple[float, float]:
    """(peak instantaneous frequency of exp(-i pi <Cx,x>) on supp f, grid Nyquist)."""
    mag = np.abs(f.values)
    if not np.any(mag):
        return 0.0, 0.5 / max(f.grid.step)
    pts = f.grid.mesh()[mag > rel_tol * mag.max()]
    freq = np.max(np.abs(pts @ np.atleast_2d(c).T))
    return float(freq), 0.5 / max(f.grid.step)


def apply_metaplectic(op: MetaplecticOp, f: SampledFunction, *, check_aliasing: bool = True) -> SampledFunction:
    if op.d != f.dim:
        raise GridError(f"operator acts on R^{op.d}, function lives on R^{f.dim}")
    if op.kind == "dilation":
        return dilate(f, op.matrix)
    if op.kind == "chirp":
        if check_aliasing:
            peak, nyq = chirp_frequency_limit(f, op.matrix)
            if peak > nyq:
                warnings.warn(f"chirp frequency {peak:.3g} exceeds grid Nyquist {nyq:.3g}; result is aliased",
                              RuntimeWarning, stacklevel=2)
        mesh = f.grid.mesh()
        quad = np.einsum("...i,ij,...j->...", mesh, op.matrix, mesh)
        return f.with_values(np.exp(-1j * np.pi * quad) * f.values)
    if op.kind == "fourier":
        g = fourier_transform(f, inverse=True)
        return g.scaled(1j ** (f.dim / 2))
    out = f
    for part in reversed(op.parts):
        out = apply_metaplectic(part, out, check_aliasing=check_aliasing)
    return out


def schrodinger_action(q, p, f: SampledFunction) -> SampledFunction:
    """rho(q, p) f = exp(pi i <q, p>) T_q M_p f (center dropped)."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return phase_space_shift(f, q, p).scaled(np.exp(1j * np.pi * float(q @ p)))


def class_e_operator(group, element) -> MetaplecticOp:
    """mu(h(q, a)) = chirp(-sigma_q) dilation(a), i.e. exp(+i pi <sigma_q x, x>) det(a)^{-1/2} f(a^{-1} x)."""
    a = group.d_matrix(element.a_coords)
    sigma = group.sigma(element.q)
    return MetaplecticOp.composite(MetaplecticOp.chirp(-sigma), MetaplecticOp.dilation(a))


def class_e_action(group, element, f: SampledFunction, **kw) -> SampledFunction:
    group.validate_element(element)
    return apply_metaplectic(class_e_operator(group, element), f, **kw)


def wavelet_action(q, a, f: SampledFunction, frequency_side: bool = False) -> SampledFunction:
    """nu(q, a) f = T_q D_a f with D_a f(t) = |det a|^{-1/2} f(a^{-1} t).

    With ``frequency_side`` the same vector is returned in the frequency
    picture: M_{-q} D_{a^{-T}} applied to F f, which equals F(T_q D_a f).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    det = np.linalg.det(a)
    if abs(det) <= 1e-12:
        raise SingularMatrixError("dilation matrix is singular")
    if not frequency_side:
        g = dilate(f, a, scale=abs(det) ** -0.5)
        return phase_space_shift(g, q, np.zeros_like(q))
    return frequency_side_action(q, a, fourier_transform(f))


def frequency_side_action(q, a, g: SampledFunction) -> SampledFunction:
    """mu_e of the conjugated element: M_{-q} D_{a^{-T}} g."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    det = np.linalg.det(a)
    dil = dilate(g, np.linalg.inv(a).T, scale=abs(det) ** 0.5)
    mesh = g.grid.mesh()
    return dil.with_values(np.exp(-2j * np.pi * (mesh @ q)) * dil.values)
