"""Two-qubit spin operators and the 15-parameter anisotropy decomposition.

All operators act on the product basis |uu>, |ud>, |du>, |dd> with hbar = 1
and spin operators S = sigma / 2.  A traceless Hermitian generator is split
into the isotropic term S1.S2 plus an anisotropy

    A = beta . (S1 x S2) + S1 . Gamma . S2
        + (alpha / 2) . (S1 - S2) + (mu / 2) . (S1 + S2)

with Gamma a symmetric 3x3 tensor, for 15 real parameters in total.  The
generator set is mutually trace-orthogonal; its normalisation constants are
computed from the matrices at import time rather than hard-coded.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    BranchAmbiguous,
    LambdaOutOfRange,
    NotHermitian,
    NotTraceless,
    NotUnitary,
)

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "S1",
    "S2",
    "HEISENBERG",
    "CROSS",
    "PAIR",
    "MINUS",
    "PLUS",
    "SWAP",
    "AnisotropyParams",
    "GateDistance",
    "build_spin_operators",
    "heisenberg_term",
    "assemble_anisotropy",
    "decompose_anisotropy",
    "matrix_exp",
    "matrix_log_branched",
    "gate_distance",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

SWAP = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)

_EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_a, _b, _c] = 1.0
    _EPS[_a, _c, _b] = -1.0


def build_spin_operators() -> tuple[np.ndarray, np.ndarray]:
    """Build the spin-1/2 operators of both qubits.

    Returns
    -------
    (S1, S2) : pair of (3, 4, 4) complex arrays
        Cartesian components of the first and second spin, formed from
        2x2 Pauli blocks via Kronecker products.
    """
    half = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z]) / 2.0
    eye = np.eye(2, dtype=complex)
    s1 = np.stack([np.kron(s, eye) for s in half])
    s2 = np.stack([np.kron(eye, s) for s in half])
    return s1, s2


S1, S2 = build_spin_operators()

#: isotropic exchange generator S1.S2
HEISENBERG = np.einsum("aij,ajk->ik", S1, S2)
#: (S1 x S2)_a, a = x, y, z
CROSS = np.einsum("abc,bij,cjk->aik", _EPS, S1, S2)
#: S1_a S2_b products, indexed [a, b]
PAIR = np.einsum("aij,bjk->abik", S1, S2)
#: (S1 - S2)_a and (S1 + S2)_a
MINUS = S1 - S2
PLUS = S1 + S2

# Trace normalisations of the generator set, computed rather than assumed.
_N_CROSS = np.einsum("aij,aji->a", CROSS, CROSS).real
_N_PAIR = np.einsum("abij,abji->ab", PAIR, PAIR).real
_N_MINUS = np.einsum("aij,aji->a", MINUS, MINUS).real
_N_PLUS = np.einsum("aij,aji->a", PLUS, PLUS).real
_N_HEISENBERG = np.einsum("ij,ji->", HEISENBERG, HEISENBERG).real


def heisenberg_term() -> np.ndarray:
    """Return a fresh copy of the isotropic exchange generator S1.S2."""
    return HEISENBERG.copy()


def _wrap_phase(x):
    """Wrap angles to (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(x, dtype=float)))


def _as_operator(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 operator, got shape {m.shape}")
    return m


def _check_hermitian(m: np.ndarray, tol: float, what: str) -> None:
    defect = np.linalg.norm(m - m.conj().T)
    if not defect <= tol:
        raise NotHermitian(f"{what}: Hermiticity defect {defect:.3e} > {tol:.1e}")


def _check_unitary(m: np.ndarray, tol: float, what: str) -> np.ndarray:
    m = _as_operator(m)
    if not np.all(np.isfinite(m)):
        raise NotUnitary(f"{what}: matrix has non-finite entries")
    defect = np.linalg.norm(m.conj().T @ m - np.eye(4))
    if not defect <= tol:
        raise NotUnitary(f"{what}: unitarity defect {defect:.3e} > {tol:.1e}")
    return m


def _vec3(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a real 3-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class AnisotropyParams:
    """Coefficients of the 15-parameter anisotropy decomposition.

    Attributes
    ----------
    alpha, beta, mu : (3,) float arrays
        Coefficients of (S1 - S2)/2, (S1 x S2) and (S1 + S2)/2.
    gamma : (3, 3) float array
        Symmetric two-spin tensor; symmetrised on construction so only six
        independent entries survive.
    """

    alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", _vec3(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _vec3(self.beta, "beta"))
        object.__setattr__(self, "mu", _vec3(self.mu, "mu"))
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (3, 3):
            raise ValueError(f"gamma must be a 3x3 tensor, got shape {g.shape}")
        object.__setattr__(self, "gamma", (g + g.T) / 2.0)

    @classmethod
    def zeros(cls) -> "AnisotropyParams":
        return cls(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros((3, 3)))

    def as_vector(self) -> np.ndarray:
        """Flatten to 15 entries: alpha, beta, mu, then gamma as
        (xx, yy, zz, xy, xz, yz)."""
        g = self.gamma
        return np.concatenate(
            [
                self.alpha,
                self.beta,
                self.mu,
                [g[0, 0], g[1, 1], g[2, 2], g[0, 1], g[0, 2], g[1, 2]],
            ]
        )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_vector())))

    def replace(self, **kwargs) -> "AnisotropyParams":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class GateDistance:
    """Phase-insensitive distances between two gates."""

    frobenius_phase_free: float
    fidelity: float


def assemble_anisotropy(params: AnisotropyParams) -> np.ndarray:
    """Assemble the 4x4 anisotropy operator from its 15 coefficients.

    The result is exactly Hermitian and traceless because every generator
    is and the coefficients are real.
    """
    return (
        np.einsum("a,aij->ij", params.beta, CROSS)
        + np.einsum("ab,abij->ij", params.gamma, PAIR)
        + 0.5 * np.einsum("a,aij->ij", params.alpha, MINUS)
        + 0.5 * np.einsum("a,aij->ij", params.mu, PLUS)
    )


def decompose_anisotropy(matrix, tol: float = 1e-12) -> AnisotropyParams:
    """Project a traceless Hermitian operator onto the generator set.

    Exact left-inverse of :func:`assemble_anisotropy`: any isotropic
    two-spin content ends up in the trace of gamma.

    Parameters
    ----------
    matrix : (4, 4) array-like
        Hermitian and traceless to within ``tol``.

    Raises
    ------
    NotHermitian, NotTraceless
    """
    m = _as_operator(matrix)
    _check_hermitian(m, tol, "decompose_anisotropy")
    trace = abs(complex(np.trace(m)))
    if not trace <= tol:
        raise NotTraceless(f"decompose_anisotropy: |Tr M| = {trace:.3e} > {tol:.1e}")

    beta = np.einsum("aij,ji->a", CROSS, m).real / _N_CROSS
    pair = np.einsum("abij,ji->ab", PAIR, m).real / _N_PAIR
    gamma = (pair + pair.T) / 2.0
    alpha = 2.0 * np.einsum("aij,ji->a", MINUS, m).real / _N_MINUS
    mu = 2.0 * np.einsum("aij,ji->a", PLUS, m).real / _N_PLUS
    return AnisotropyParams(alpha=alpha, beta=beta, mu=mu, gamma=gamma)


def matrix_exp(hermitian, scale: float = 1.0) -> np.ndarray:
    """Return exp(-1j * scale * H) for Hermitian H via eigendecomposition.

    Unitary to machine precision by construction.
    """
    h = _as_operator(hermitian)
    _check_hermitian(h, 1e-12, "matrix_exp")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def matrix_log_branched(unitary, lam: float, margin: float = 0.1) -> np.ndarray:
    """Invert exp(-1j * lam * H) = U for H near the isotropic exchange form.

    The eigenphases of a small perturbation of exp(-1j*lam*S1.S2) cluster
    around the unperturbed phases {-lam/4 (x3), +3*lam/4}.  Each eigenphase
    is assigned to an anchor under the multiplicity constraint (3, 1),
    choosing the assignment of least total wrapped distance, and unwrapped
    relative to its anchor.

    Parameters
    ----------
    unitary : (4, 4) array-like, unitary to 1e-12
    lam : float
        Pulse strength; must lie in (0, 2*pi) at least ``margin`` away
        from both endpoints, where the two anchors collide.
    margin : float
        Branch safety margin in radians.

    Raises
    ------
    NotUnitary, LambdaOutOfRange
    BranchAmbiguous
        If two anchor assignments explain the spectrum almost equally well
        (total cost within ``margin``), or an assigned eigenphase sits
        within ``margin`` of the branch cut opposite its anchor.
    """
    u = _check_unitary(unitary, 1e-12, "matrix_log_branched")
    if not (margin <= lam <= 2.0 * np.pi - margin):
        raise LambdaOutOfRange(
            f"matrix_log_branched: lambda = {lam:.6g} outside "
            f"({margin:.3g}, {2 * np.pi - margin:.6g})"
        )

    # Schur of a normal matrix: orthonormal eigenbasis even with degeneracy.
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))

    anchor_triplet = -lam / 4.0
    anchor_singlet = 3.0 * lam / 4.0
    res_triplet = _wrap_phase(phases - anchor_triplet)
    res_singlet = _wrap_phase(phases - anchor_singlet)
    cost_all_triplet = np.sum(np.abs(res_triplet))
    costs = cost_all_triplet - np.abs(res_triplet) + np.abs(res_singlet)

    order = np.argsort(costs, kind="stable")
    best, runner_up = order[0], order[1]
    if costs[runner_up] - costs[best] < margin:
        raise BranchAmbiguous(
            "matrix_log_branched: competing branch assignments differ by "
            f"{costs[runner_up] - costs[best]:.3e} < margin {margin:.3g}; "
            "the spectrum is far from the expected (3, 1) pattern"
        )

    residuals = res_triplet.copy()
    anchors = np.full(4, anchor_triplet)
    residuals[best] = res_singlet[best]
    anchors[best] = anchor_singlet
    worst = float(np.max(np.abs(residuals)))
    if worst > np.pi - margin:
        raise BranchAmbiguous(
            f"matrix_log_branched: eigenphase residual {worst:.3f} rad sits "
            f"within {margin:.3g} of the branch cut"
        )

    eigs = -(anchors + residuals) / lam
    h = (z * eigs) @ z.conj().T
    return (h + h.conj().T) / 2.0


def gate_distance(u, v) -> GateDistance:
    """Distances between two gates, insensitive to global phase.

    ``frobenius_phase_free`` is min over phi of ||U - exp(1j*phi) V||_F,
    evaluated by direct subtraction at the optimal phase so that small
    distances are not lost to cancellation.  ``fidelity`` is
    |Tr(U^dag V)|^2 / 16, equal to 1 iff the gates agree up to phase.
    """
    u = _check_unitary(u, 1e-12, "gate_distance")
    v = _check_unitary(v, 1e-12, "gate_distance")
    overlap = complex(np.trace(u.conj().T @ v))
    fidelity = abs(overlap) ** 2 / 16.0
    aligned = np.exp(-1j * np.angle(overlap)) * v
    frob = float(np.linalg.norm(u - aligned))
    return GateDistance(frobenius_phase_free=frob, fidelity=float(fidelity))
