"""Coherent-state ensembles: overlaps, Gram-Schmidt factorization and entropies.

All entropies are in bits.  States are represented in the orthonormal basis
obtained by Gram-Schmidt on the ensemble itself, so an N-state ensemble never
needs more than an N-dimensional matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstellationError, NumericalError

PROBABILITY_TOL = 1e-12
DUPLICATE_TOL = 1e-12
PIVOT_FLOOR = 1e-12
PIVOT_NEGATIVE_TOL = 1e-9
EIGENVALUE_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class Constellation:
    """Coherent-state amplitudes (shot-noise units) with a prior distribution."""

    amplitudes: np.ndarray
    probabilities: np.ndarray
    label: str = ""

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        probs = np.array(self.probabilities, dtype=float).reshape(-1)
        if amps.size == 0:
            raise ConstellationError("constellation must contain at least one state")
        if amps.shape != probs.shape:
            raise ConstellationError(
                f"{amps.size} amplitudes but {probs.size} probabilities"
            )
        if not (np.all(np.isfinite(amps)) and np.all(np.isfinite(probs))):
            raise ConstellationError("amplitudes and probabilities must be finite")
        if np.any(probs < 0):
            raise ConstellationError("probabilities must be nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ConstellationError(f"probabilities sum to {total!r}, not 1")
        if amps.size > 1:
            dist = np.abs(amps[:, None] - amps[None, :])
            iu = np.triu_indices(amps.size, k=1)
            close = dist[iu] <= DUPLICATE_TOL
            if np.any(close):
                i, j = iu[0][close][0], iu[1][close][0]
                raise ConstellationError(
                    f"states {i} and {j} coincide (amplitude {amps[i]!r})"
                )
        amps.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "probabilities", probs)

    @property
    def size(self) -> int:
        return self.amplitudes.size

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.amplitudes.imag == 0))

    def scaled(self, factor: float, label: str | None = None) -> "Constellation":
        return Constellation(
            self.amplitudes * factor, self.probabilities, self.label if label is None else label
        )

    def rotated(self, theta: float) -> "Constellation":
        """Apply a global phase rotation to every amplitude."""
        return Constellation(self.amplitudes * np.exp(1j * theta), self.probabilities, self.label)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "probabilities": [float(p) for p in self.probabilities],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Constellation":
        try:
            amps = [complex(re, im) for re, im in data["amplitudes"]]
            probs = [float(p) for p in data["probabilities"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConstellationError(f"malformed constellation object: {exc}") from exc
        return cls(amps, probs, str(data.get("label", "")))


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Lower-triangular coefficients of each state in the Gram-Schmidt basis.

    Row k holds the components of the k-th state; ``deficient`` lists the rows
    whose pivot fell below the floor and was clamped to zero.
    """

    entries: np.ndarray
    deficient: tuple[int, ...] = field(default=())

    @property
    def rank_deficient(self) -> bool:
        return bool(self.deficient)

    @property
    def effective_rank(self) -> int:
        return self.entries.shape[0] - len(self.deficient)


def overlap(a: complex, b: complex) -> complex:
    """Inner product <a|b> of two coherent states."""
    a = complex(a)
    b = complex(b)
    phase = 0.5 * (a.conjugate() * b - a * b.conjugate())
    return complex(np.exp(phase - 0.5 * abs(a - b) ** 2))


def gram_matrix(c: Constellation) -> np.ndarray:
    """Matrix of pairwise overlaps, ``V[i, j] = <alpha_i|alpha_j>``."""
    a = c.amplitudes
    ai = a[:, None]
    aj = a[None, :]
    v = np.exp(0.5 * (ai.conj() * aj - ai * aj.conj()) - 0.5 * np.abs(ai - aj) ** 2)
    np.fill_diagonal(v, 1.0)
    return v


def gram_schmidt(v: np.ndarray) -> ProjectionMatrix:
    """Factor an overlap matrix into projections onto an orthonormal basis.

    Rows are processed in increasing order and, within a row, columns in
    increasing order, so ``M @ M.conj().T`` reproduces ``v.T``.  A pivot below
    ``PIVOT_FLOOR`` is clamped to zero and its row recorded as deficient; every
    later row then has no component along that (missing) basis vector.
    """
    v = np.asarray(v)
    n = v.shape[0]
    real = not np.iscomplexobj(v) or not np.any(v.imag)
    m = np.zeros((n, n), dtype=float if real else complex)
    vv = v.real if real else v
    m[0, 0] = 1.0
    deficient = []
    for k in range(1, n):
        m[k, 0] = vv[0, k]
        for i in range(1, k):
            if m[i, i] == 0.0:
                continue
            m[k, i] = (vv[i, k] - np.dot(m[i, :i].conj(), m[k, :i])) / m[i, i]
        pivot = 1.0 - float(np.sum(np.abs(m[k, :k]) ** 2))
        if pivot < -PIVOT_NEGATIVE_TOL:
            raise NumericalError(
                f"pivot {pivot:.3e} at row {k}: overlap matrix is not positive semidefinite"
            )
        if pivot < PIVOT_FLOOR:
            deficient.append(k)
        else:
            m[k, k] = np.sqrt(pivot)
    m.flags.writeable = False
    return ProjectionMatrix(m, tuple(deficient))


def mixed_state(weights: np.ndarray, m: ProjectionMatrix) -> np.ndarray:
    """Density matrix of the ensemble mixed with ``weights``.

    ``weights`` may carry leading batch axes; the result has shape
    ``weights.shape[:-1] + (N, N)`` with ``rho[i, j] = sum_k w_k M_ki conj(M_kj)``.
    """
    w = np.asarray(weights, dtype=float)
    mt = m.entries.T
    return (mt * w[..., None, :]) @ m.entries.conj()


def density_matrix(c: Constellation, m: ProjectionMatrix) -> np.ndarray:
    return mixed_state(c.probabilities, m)


def shannon_entropy(p: np.ndarray) -> np.ndarray | float:
    """Shannon entropy in bits along the last axis; zero entries contribute 0."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    h = -np.sum(np.where(p > 0, p * np.log2(safe), 0.0), axis=-1)
    return float(h) if h.ndim == 0 else h


def _spectral_entropy(eigenvalues: np.ndarray) -> np.ndarray | float:
    lam = np.where(eigenvalues > EIGENVALUE_FLOOR, eigenvalues, 1.0)
    h = -np.sum(lam * np.log2(lam), axis=-1)
    return float(h) if h.ndim == 0 else h


def _eigvalsh(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(mat)))
        herm = float(np.max(np.abs(mat - np.swapaxes(mat, -1, -2).conj()))) if finite else np.nan
        raise NumericalError(
            f"eigendecomposition failed ({exc}); shape={mat.shape}, finite={finite}, "
            f"hermiticity defect={herm:.3e}, max |entry|={np.nanmax(np.abs(mat)):.3e}"
        ) from exc


def von_neumann_entropy(rho: np.ndarray) -> np.ndarray | float:
    """Entropy in bits of one density matrix or a stack of them."""
    rho = np.asarray(rho)
    if np.iscomplexobj(rho) and not np.any(rho.imag):
        rho = rho.real
    return _spectral_entropy(_eigvalsh(rho))


def mean_photon_number(c: Constellation) -> float:
    return float(np.dot(c.probabilities, np.abs(c.amplitudes) ** 2))


def ensemble_entropy(c: Constellation) -> float:
    """Entropy of the average state, via Gram-Schmidt."""
    m = gram_schmidt(gram_matrix(c))
    return von_neumann_entropy(density_matrix(c, m))


def entropy_via_weighted_gram(c: Constellation) -> float:
    # sqrt(p_i p_j) V_ij shares its nonzero spectrum with the average state
    s = np.sqrt(c.probabilities)
    w = s[:, None] * gram_matrix(c) * s[None, :]
    return von_neumann_entropy(w)
