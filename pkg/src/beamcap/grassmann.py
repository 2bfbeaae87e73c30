"""Beamforming codebooks on the Grassmann manifold.

Subspace quantization machinery: squared chordal distance, uniform frame
sampling, seeded max-min codebook design by random-restart repulsion,
chordal-distance feedback selection, Monte Carlo estimation of the power
efficiency factor mu, and the closed-form distortion / efficiency bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import _qr_orthonormalize, orthonormalize, sample_gaussian_matrix


@dataclass
class Codebook:
    """A set of ltx x rank matrices with orthonormal columns."""

    ltx: int
    rank: int
    matrices: list
    min_pairwise_dc: float
    measured_mean_dc2: float | None = None

    @property
    def size(self) -> int:
        return len(self.matrices)


@dataclass(frozen=True)
class DistortionBounds:
    """Bounds on the best achievable mean squared chordal distortion and on
    the corresponding power efficiency factor, for a given codebook size."""

    t: int  # complex dimension count s * (ltx - s) of the manifold
    eta: float
    lower: float
    upper: float
    mu_lower: float
    mu_upper: float


def chordal_distance_sq(q1: np.ndarray, q2: np.ndarray) -> float:
    """Squared chordal distance s - ||q1^H q2||_F^2 between the column
    spaces; equals 0.5 * ||q1 q1^H - q2 q2^H||_F^2."""
    q1 = np.asarray(q1)
    q2 = np.asarray(q2)
    if q1.shape != q2.shape:
        raise ValueError(f"shape mismatch: {q1.shape} vs {q2.shape}")
    s = q1.shape[1]
    g = q1.conj().T @ q2
    return max(0.0, s - float(np.sum(np.abs(g) ** 2)))


def sample_uniform_stiefel(ltx: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (invariant-measure) draw of an ltx x rank unitary frame."""
    if not 1 <= rank <= ltx:
        raise ValueError(f"need 1 <= rank <= ltx, got rank={rank}, ltx={ltx}")
    return orthonormalize(sample_gaussian_matrix(ltx, rank, rng))


def _sample_stiefel_batch(count: int, ltx: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    re = rng.standard_normal((count, ltx, rank))
    im = rng.standard_normal((count, ltx, rank))
    return _qr_orthonormalize((re + 1j * im) * math.sqrt(0.5))


def _pairwise_dc2(mats: np.ndarray) -> np.ndarray:
    """All pairwise squared chordal distances; diagonal set to +inf."""
    g = np.einsum("ixX,jxY->ijXY", mats.conj(), mats)
    d = mats.shape[2] - np.sum(np.abs(g) ** 2, axis=(2, 3))
    np.fill_diagonal(d, np.inf)
    return np.maximum(d, 0.0)


def design_codebook(ltx: int, rank: int, size: int, rng: np.random.Generator,
                    iterations: int = 2000, restarts: int = 8) -> Codebook:
    """Max-min codebook by repulsion with random restarts.

    Each restart starts from uniform samples; each refinement step replaces
    the more crowded endpoint of the current closest pair with a fresh
    uniform sample and keeps the replacement only if the minimum pairwise
    distance strictly improves.  Deterministic for a given generator state.
    """
    if size < 2:
        raise ValueError(f"codebook size must be >= 2, got {size}")
    if not 1 <= rank <= ltx:
        raise ValueError(f"need 1 <= rank <= ltx, got rank={rank}, ltx={ltx}")

    best_mats = None
    best_min = -np.inf
    for _ in range(restarts):
        mats = _sample_stiefel_batch(size, ltx, rank, rng)
        candidates = _sample_stiefel_batch(iterations, ltx, rank, rng)
        d = _pairwise_dc2(mats)
        current_min = float(d.min())
        for cand in candidates:
            i, j = np.unravel_index(int(np.argmin(d)), d.shape)
            # the endpoint whose next-nearest neighbor is closer is the
            # more crowded one; replace it
            k = i if np.partition(d[i], 1)[1] <= np.partition(d[j], 1)[1] else j
            g = np.einsum("xX,jxY->jXY", cand.conj(), mats)
            row = rank - np.sum(np.abs(g) ** 2, axis=(1, 2))
            row = np.maximum(row, 0.0)
            row[k] = np.inf
            d_trial = d.copy()
            d_trial[k, :] = row
            d_trial[:, k] = row
            trial_min = float(d_trial.min())
            if trial_min > current_min:
                mats[k] = cand
                d = d_trial
                current_min = trial_min
        if current_min > best_min:
            best_min = current_min
            best_mats = mats.copy()

    return Codebook(ltx=ltx, rank=rank, matrices=[m.copy() for m in best_mats],
                    min_pairwise_dc=best_min)


def select_beamforming(vs: np.ndarray, codebook: Codebook) -> int:
    """Index of the codebook entry closest in chordal distance to span(vs),
    computed in the cheaper trace form; ties go to the lowest index."""
    if codebook.size == 0:
        raise ValueError("codebook is empty")
    vs = np.asarray(vs)
    if vs.shape != (codebook.ltx, codebook.rank):
        raise ValueError(f"expected shape {(codebook.ltx, codebook.rank)}, got {vs.shape}")
    stack = np.stack(codebook.matrices)
    g = np.einsum("xX,kxY->kXY", vs.conj(), stack)
    scores = np.sum(np.abs(g) ** 2, axis=(1, 2))
    return int(np.argmax(scores))


def estimate_mu(codebook: Codebook, trials: int, rng: np.random.Generator,
                batch: int = 8192):
    """Monte Carlo estimate of the power efficiency factor of a codebook.

    Draws uniform frames, quantizes each to its nearest codebook entry, and
    returns (mu_hat, offdiag_max, diag_spread) where the last two are
    isotropy diagnostics of the sample mean of V^H Q Q^H V (which converges
    to mu * I).  Also records the measured mean squared distortion on the
    codebook (mu_hat = 1 - mean/rank holds by construction).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s = codebook.rank
    stack = np.stack(codebook.matrices)
    dc2_sum = 0.0
    mat_sum = np.zeros((s, s), dtype=complex)
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        vs = _sample_stiefel_batch(n, codebook.ltx, s, rng)
        g = np.einsum("nxX,kxY->nkXY", vs.conj(), stack)
        scores = np.sum(np.abs(g) ** 2, axis=(2, 3))
        sel = np.argmax(scores, axis=1)
        picked = g[np.arange(n), sel]  # V^H Q for the chosen entry
        dc2_sum += float(np.sum(np.maximum(s - scores[np.arange(n), sel], 0.0)))
        mat_sum += np.einsum("nXY,nZY->XZ", picked, picked.conj())
        done += n

    mean_dc2 = dc2_sum / trials
    mu_hat = 1.0 - mean_dc2 / s
    mean_mat = mat_sum / trials
    off = mean_mat - np.diag(np.diagonal(mean_mat))
    offdiag_max = float(np.max(np.abs(off))) if s > 1 else 0.0
    diag = np.diagonal(mean_mat).real
    diag_spread = float(diag.max() - diag.min()) if s > 1 else 0.0
    codebook.measured_mean_dc2 = mean_dc2
    return mu_hat, offdiag_max, diag_spread


def distortion_bounds(ltx: int, rank: int, feedback_bits: int) -> DistortionBounds:
    """Closed-form bounds on the best mean squared chordal distortion of a
    size-2^bits codebook and on the resulting power efficiency factor.
    Derived under a large-codebook assumption; reasonable already for
    sizes around 10 and up."""
    if not 1 <= rank < ltx:
        raise ValueError(f"need 1 <= rank < ltx (got rank={rank}, ltx={ltx}): "
                         "a full-rank codebook quantizes a single point")
    if feedback_bits < 1:
        raise ValueError("feedback_bits must be >= 1")
    s = rank
    t = s * (ltx - s)
    k = s if 2 * s <= ltx else ltx - s
    prod = 1.0
    for i in range(1, k + 1):
        prod *= math.factorial(ltx - i) / math.factorial(k - i)
    eta = prod / math.factorial(t)

    scale = eta ** (-1.0 / t) * 2.0 ** (-feedback_bits / t)
    lower = t / (t + 1.0) * scale
    upper = math.gamma(1.0 / t) / t * scale
    mu_lower = max(0.0, 1.0 - upper / s)
    mu_upper = min(1.0, 1.0 - lower / s)
    return DistortionBounds(t=t, eta=eta, lower=lower, upper=upper,
                            mu_lower=mu_lower, mu_upper=mu_upper)


_HEADER_PREFIX = "grassmann-codebook v1"


def save_codebook(codebook: Codebook, path) -> None:
    """Versioned text serialization; 17 significant digits round-trip floats
    exactly.  One matrix per blank-line-separated block, rows as
    space-separated re,im pairs."""
    lines = [f"{_HEADER_PREFIX} ltx={codebook.ltx} rank={codebook.rank} size={codebook.size}"]
    for mat in codebook.matrices:
        lines.append("")
        for row in mat:
            lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise ValueError(f"not a codebook file: {path}")
    fields = dict(part.split("=") for part in lines[0][len(_HEADER_PREFIX):].split())
    ltx, rank, size = int(fields["ltx"]), int(fields["rank"]), int(fields["size"])

    mats = []
    row_buf = []
    for ln in lines[1:] + [""]:
        if ln.strip() == "":
            if row_buf:
                mats.append(np.array(row_buf, dtype=complex))
                row_buf = []
            continue
        row = []
        for pair in ln.split():
            re_s, im_s = pair.split(",")
            row.append(complex(float(re_s), float(im_s)))
        row_buf.append(row)
    if len(mats) != size or any(m.shape != (ltx, rank) for m in mats):
        raise ValueError(f"codebook file {path} is inconsistent with its header")

    stack = np.stack(mats)
    d = _pairwise_dc2(stack) if size > 1 else np.array([[np.inf]])
    return Codebook(ltx=ltx, rank=rank, matrices=mats,
                    min_pairwise_dc=float(d.min()))
