"""Curl operator restricted to a single plane-wave subspace.

On ``V^w = {a * exp(i w.x)}`` the curl acts as ``a -> i (w x a)``. Its
eigenvalues are ``i*lam`` with ``lam in {0, i|w|, -i|w|}``; the eigenvectors
are given in closed form, with a separate formula on the isotropic line
``wx == wy == wz`` where the general one degenerates to zero.

Eigenvectors are kept unnormalized (``v_1 = w/|w|``, ``|v_2| = sqrt(2)|w|
gamma_w`` in the general branch) and an orthonormal real frame is exposed
alongside.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ZeroWaveVector

ISOTROPIC_RTOL = 1e-12

SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)
SQRT2 = math.sqrt(2.0)

# Scaled isotropic eigenvectors for w_hat > 0; v_3 is the conjugate.
_ISO_V1 = np.array([1.0, 1.0, 1.0]) / SQRT3
_ISO_V2 = np.array([(1 + 1j * SQRT3) / 2, (1 - 1j * SQRT3) / 2, -1.0])
_ISO_FRAME = np.array(
    [
        [1 / SQRT3, 1 / SQRT6, -1 / SQRT2],
        [1 / SQRT3, 1 / SQRT6, 1 / SQRT2],
        [1 / SQRT3, -2 / SQRT6, 0.0],
    ]
)


class Branch(enum.Enum):
    ZERO = "zero"
    ISOTROPIC = "isotropic"
    GENERAL = "general"


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class WaveVector:
    """Spatial frequency ``w = (wx, wy, wz)`` in radians per unit length."""

    wx: float
    wy: float
    wz: float
    # set by from_lattice; overrides the floating-point isotropy test
    lattice_branch: Branch | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_array(cls, w) -> "WaveVector":
        wx, wy, wz = (float(c) for c in w)
        return cls(wx, wy, wz)

    @classmethod
    def from_lattice(cls, j: int, k: int, l: int, periods) -> "WaveVector":
        """Lattice wavevector ``2*pi*(j/bx, k/by, l/bz)``.

        Isotropy is decided on the exact rationals ``j/bx == k/by == l/bz``
        so the classification cannot be flipped by rounding.
        """
        bx, by, bz = (float(b) for b in periods)
        ratios = [Fraction(int(j)) / Fraction(bx), Fraction(int(k)) / Fraction(by),
                  Fraction(int(l)) / Fraction(bz)]
        if all(x == 0 for x in ratios):
            return cls(0.0, 0.0, 0.0, Branch.ZERO)
        if ratios[0] == ratios[1] == ratios[2]:
            c = 2 * math.pi * int(j) / bx
            return cls(c, c, c, Branch.ISOTROPIC)
        return cls(2 * math.pi * int(j) / bx, 2 * math.pi * int(k) / by,
                   2 * math.pi * int(l) / bz, Branch.GENERAL)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.wx, self.wy, self.wz])

    @property
    def norm(self) -> float:
        return math.sqrt(self.wx**2 + self.wy**2 + self.wz**2)

    @property
    def s(self) -> float:
        return self.wx + self.wy + self.wz

    @property
    def r(self) -> np.ndarray:
        return np.array([self.wy - self.wz, self.wz - self.wx, self.wx - self.wy])

    @property
    def gamma(self) -> float:
        return float(np.linalg.norm(self.r))

    @property
    def branch(self) -> Branch:
        if self.lattice_branch is not None:
            return self.lattice_branch
        n = self.norm
        if n == 0.0:
            return Branch.ZERO
        if self.gamma <= ISOTROPIC_RTOL * n:
            return Branch.ISOTROPIC
        return Branch.GENERAL


@dataclass(frozen=True)
class EigenSystem:
    """Eigenpairs of the plane-wave curl.

    ``lam[d]`` and ``v[d]`` (row ``d``) satisfy ``i (w x v[d]) = i lam[d] v[d]``.
    ``frame`` is a real orthogonal matrix whose columns span the same
    subspaces: ``frame[:, 0]`` along ``w``, the other two transverse.
    """

    lam: np.ndarray
    v: np.ndarray
    frame: np.ndarray


@dataclass(frozen=True)
class ModalProjection:
    alpha: np.ndarray

    def reconstruct(self, eig: EigenSystem) -> np.ndarray:
        return self.alpha @ eig.v


def _as_wavevector(w) -> WaveVector:
    return w if isinstance(w, WaveVector) else WaveVector.from_array(w)


def curl_planewave(w, v) -> np.ndarray:
    """Amplitude of ``curl(v * exp(i w.x))`` divided by ``exp(i w.x)``."""
    w = _as_wavevector(w)
    v = np.asarray(v, dtype=complex)
    return 1j * np.cross(w.array, v)


def eigenvalues(w) -> np.ndarray:
    w = _as_wavevector(w)
    n = w.norm
    return np.array([0.0, 1j * n, -1j * n])


def eigenvectors(w) -> EigenSystem:
    w = _as_wavevector(w)
    branch = w.branch
    if branch is Branch.ZERO:
        raise ZeroWaveVector("eigenvectors need |w| > 0")
    lam = eigenvalues(w)
    if branch is Branch.ISOTROPIC:
        v2 = _ISO_V2
        # w_hat < 0 swaps the roles of v_2 and v_3
        if w.s < 0:
            v2 = v2.conj()
        v = np.stack([_ISO_V1.astype(complex), v2, v2.conj()])
        frame = _ISO_FRAME
    else:
        warr, r = w.array, w.r
        n, g = w.norm, w.gamma
        # -|w|^2 (1,1,1) + s_w w == w x r_w, without the cancellation
        wxr = np.cross(warr, r)
        v = np.stack([warr / n, wxr + lam[1] * r, wxr + lam[2] * r])
        frame = np.column_stack([warr / n, wxr / (n * g), r / g])
    return EigenSystem(_frozen(lam), _frozen(v), _frozen(frame))


def project(w, a) -> ModalProjection:
    """Coefficients of ``a`` in the eigenvector basis of ``eigenvectors(w)``."""
    w = _as_wavevector(w)
    a = np.asarray(a, dtype=complex)
    branch = w.branch
    if branch is Branch.ZERO:
        raise ZeroWaveVector("project needs |w| > 0")
    if branch is Branch.ISOTROPIC:
        ax, ay, az = a
        sa = ax + ay + az
        a1 = sa / SQRT3
        a2 = sa / 6 + 1j * SQRT3 / 6 * (ay - ax) - az / 2
        a3 = sa / 6 + 1j * SQRT3 / 6 * (ax - ay) - az / 2
        if w.s < 0:
            a2, a3 = a3, a2
        return ModalProjection(_frozen([a1, a2, a3]))
    warr, r = w.array, w.r
    n, g = w.norm, w.gamma
    # Same value as the closed form (w.a s_w - s_a |w|^2)/(2|w|^2 g^2) -/+ ...,
    # regrouped through w x r_w to stay accurate near the isotropic line.
    p = np.dot(np.cross(warr, r), a)
    q = np.dot(r, a)
    denom = 2 * n * n * g * g
    a1 = np.dot(warr, a) / n
    a2 = (p - 1j * n * q) / denom
    a3 = (p + 1j * n * q) / denom
    return ModalProjection(_frozen([a1, a2, a3]))


def decompose_mode(w, a) -> tuple[EigenSystem, ModalProjection]:
    """Eigen-decomposition plus projection; the DC mode is returned as stationary."""
    w = _as_wavevector(w)
    if w.branch is Branch.ZERO:
        eig = EigenSystem(
            _frozen(np.zeros(3, dtype=complex)),
            _frozen(np.eye(3, dtype=complex)),
            _frozen(np.eye(3)),
        )
        return eig, ModalProjection(_frozen(np.asarray(a, dtype=complex)))
    return eigenvectors(w), project(w, a)
