"""Block entropy estimation.

Two estimators are provided: the plug-in (maximum-likelihood) entropy of a
block distribution and the NSB Bayesian estimator, which averages the
posterior mean entropy of a Dirichlet model over a prior on the
concentration parameter chosen to be flat in the prior expected entropy.
All results are in bits.
"""
import enum
import logging
import math
from typing import Dict, Optional, Union

import attr
import numpy as np
from scipy import integrate, optimize, special

from .conllu import Corpus
from .errors import InsufficientData
from .ngrams import BlockCounts, BlockDistribution, count_blocks, estimate_distribution
from .tags import L

__all__ = [
    "Estimator",
    "EntropyEstimate",
    "entropy_plugin",
    "entropy_nsb",
    "estimate_entropy",
    "block_entropies",
    "r_max",
]

log = logging.getLogger("syntaxdist.entropy")

_LOG2E = 1.0 / math.log(2.0)

# Integration runs over t = ln(beta). Beyond these bounds the prior mass is
# negligible and the trigamma difference in the prior loses precision.
_T_MIN = -40.0
_T_MAX = 20.0
_GRID_POINTS = 241
# Drop the tails of the posterior where the log weight is this far below its peak.
_LOG_WEIGHT_SPAN = 50.0


class Estimator(enum.Enum):
    PLUGIN = "plugin"
    NSB = "nsb"


@attr.s(frozen=True, slots=True, auto_attribs=True)
class EntropyEstimate:
    """An entropy estimate in bits.

    Attributes
    ----------
    value : float
    estimator : Estimator
    r : int
        Block size of the distribution the estimate is for; 0 for the
        empty block.
    posterior_std : Optional[float]
        Posterior standard deviation; NSB only.
    no_coincidences : bool
        Set by NSB when every observed block was seen exactly once.

    """

    value: float
    estimator: Estimator
    r: int
    posterior_std: Optional[float] = None
    no_coincidences: bool = False


def entropy_plugin(dist: BlockDistribution) -> EntropyEstimate:
    """Get ``-sum(p * log2(p))`` over the support of ``dist``."""
    probs = dist.probs[dist.probs > 0]
    value = float(-np.sum(probs * np.log2(probs)))
    return EntropyEstimate(max(value, 0.0), Estimator.PLUGIN, dist.r)


class _Histogram:
    """Counts grouped by value: ``multiplicity[i]`` bins hold ``values[i]`` counts.

    Unobserved bins of the alphabet appear as the value 0.
    """

    __slots__ = ("values", "multiplicity", "total", "alphabet_size")

    def __init__(self, counts: np.ndarray, alphabet_size: int):
        values, multiplicity = np.unique(counts, return_counts=True)
        unseen = alphabet_size - counts.size
        if unseen > 0:
            values = np.concatenate(([0], values))
            multiplicity = np.concatenate(([unseen], multiplicity))
        self.values = values.astype(np.float64)
        self.multiplicity = multiplicity.astype(np.float64)
        self.total = float(counts.sum())
        self.alphabet_size = float(alphabet_size)

    def log_weight(self, t: float) -> float:
        """Unnormalised log posterior density of ``t = ln(beta)``."""
        beta = math.exp(t)
        K, N = self.alphabet_size, self.total
        kappa = K * beta
        observed = self.values > 0
        x, k = self.values[observed], self.multiplicity[observed]
        log_rho = float(np.sum(k * (special.gammaln(x + beta) - special.gammaln(beta))))
        log_rho += special.gammaln(kappa) - special.gammaln(N + kappa)
        prior = K * special.polygamma(1, kappa + 1) - special.polygamma(1, beta + 1)
        if not prior > 0:
            return -math.inf
        return log_rho + math.log(prior) + t

    def moments(self, beta: float) -> np.ndarray:
        """Posterior ``[1, E[H], E[H**2]]`` in nats given ``beta``."""
        x, k = self.values, self.multiplicity
        a = x + beta
        A = self.total + self.alphabet_size * beta

        mean = special.digamma(A + 1) - np.sum(k * a * special.digamma(a + 1)) / A

        psi_a2 = special.digamma(A + 2)
        trigamma_a2 = special.polygamma(1, A + 2)
        d = special.digamma(a + 1) - psi_a2
        first = np.sum(k * a * d)
        cross = (first * first - np.sum(k * a * a * d * d)) - trigamma_a2 * (
            A * A - np.sum(k * a * a)
        )
        diag = np.sum(
            k
            * a
            * (a + 1)
            * ((special.digamma(a + 2) - psi_a2) ** 2 + special.polygamma(1, a + 2) - trigamma_a2)
        )
        second = (cross + diag) / (A * (A + 1))
        return np.array([1.0, mean, second])


def _integration_range(histogram: _Histogram):
    grid = np.linspace(_T_MIN, _T_MAX, _GRID_POINTS)
    weights = np.array([histogram.log_weight(t) for t in grid])
    best = int(np.argmax(weights))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    peak = optimize.minimize_scalar(
        lambda t: -histogram.log_weight(t), bounds=(lo, hi), method="bounded"
    )
    t_star = float(peak.x) if -peak.fun >= weights[best] else float(grid[best])
    log_peak = max(-float(peak.fun), float(weights[best]))

    inside = np.flatnonzero(weights >= log_peak - _LOG_WEIGHT_SPAN)
    a = grid[max(inside[0] - 1, 0)]
    b = grid[min(inside[-1] + 1, grid.size - 1)]
    return min(a, t_star), max(b, t_star), t_star, log_peak


def entropy_nsb(counts: BlockCounts, alphabet_size: Optional[int] = None) -> EntropyEstimate:
    """Estimate block entropy with the NSB estimator.

    The posterior over ``beta`` is integrated in ``t = ln(beta)`` with
    adaptive Gauss-Kronrod quadrature (relative tolerance 1e-8) over the
    region holding the posterior mass.

    Parameters
    ----------
    counts : BlockCounts
        At least 2 observations.
    alphabet_size : Optional[int]
        Number of possible blocks; defaults to ``L ** counts.r``.

    Returns
    -------
    EntropyEstimate
        Posterior mean and standard deviation in bits. When every block was
        observed only once the estimate is still returned, flagged with
        ``no_coincidences`` and a warning.

    Raises
    ------
    InsufficientData
        If fewer than 2 blocks were observed.

    """
    K = L ** counts.r if alphabet_size is None else int(alphabet_size)
    if counts.total < 2:
        raise InsufficientData(f"NSB needs at least 2 observations, got {counts.total}")
    if K < counts.distinct:
        raise ValueError(f"Alphabet size {K} is smaller than the {counts.distinct} observed blocks")
    if K == 1:
        return EntropyEstimate(0.0, Estimator.NSB, counts.r, 0.0)

    no_coincidences = bool(counts.counts.max() == 1)
    if no_coincidences:
        log.warning(
            "No coincidences among %s blocks of size %s (%s); the NSB estimate is prior-dominated",
            counts.total,
            counts.r,
            counts.language_id or "unnamed",
        )

    histogram = _Histogram(counts.counts, K)
    a, b, t_star, log_peak = _integration_range(histogram)

    def integrand(t):
        return math.exp(histogram.log_weight(t) - log_peak) * histogram.moments(math.exp(t))

    points = [t_star] if a < t_star < b else None
    totals, _ = integrate.quad_vec(
        integrand, a, b, epsrel=1e-8, limit=200, points=points, quadrature="gk21"
    )
    norm, first, second = totals
    mean = first / norm
    variance = max(second / norm - mean * mean, 0.0)

    upper = math.log(K)
    mean = min(max(mean, 0.0), upper)
    return EntropyEstimate(
        mean * _LOG2E, Estimator.NSB, counts.r, math.sqrt(variance) * _LOG2E, no_coincidences
    )


def estimate_entropy(
    counts: BlockCounts, estimator: Union[Estimator, str] = Estimator.NSB
) -> EntropyEstimate:
    """Estimate the entropy of the blocks behind ``counts`` with either estimator."""
    estimator = Estimator(estimator)
    if estimator is Estimator.PLUGIN:
        return entropy_plugin(estimate_distribution(counts))
    return entropy_nsb(counts)


def block_entropies(
    corpus: Corpus, max_size: int, estimator: Union[Estimator, str] = Estimator.NSB
) -> Dict[int, EntropyEstimate]:
    """Estimate ``H_r`` for r = 0..max_size.

    ``H_0`` is 0 by convention.
    """
    estimator = Estimator(estimator)
    entropies = {0: EntropyEstimate(0.0, estimator, 0, 0.0 if estimator is Estimator.NSB else None)}
    for r in range(1, max_size + 1):
        entropies[r] = estimate_entropy(count_blocks(corpus, r), estimator)
        log.debug("%s: H_%s = %.6f bits", corpus.language_id, r, entropies[r].value)
    return entropies


def r_max(counts: BlockCounts, alphabet_size: int = L) -> int:
    """Get the largest block size whose entropy can be estimated reliably.

    This is ``floor(log(N) / log(alphabet_size))`` for the number N of single
    tags, computed in integers, and never less than 2.

    Raises
    ------
    InsufficientData
        If N is smaller than the alphabet.

    """
    if counts.r != 1:
        raise ValueError("r_max is defined from single-tag counts")
    if alphabet_size < 2:
        raise ValueError("The alphabet needs at least 2 symbols")
    total = counts.total
    if total < alphabet_size:
        raise InsufficientData(
            f"{total} tags are fewer than the {alphabet_size} symbols of the alphabet"
        )
    size = 1
    while alphabet_size ** (size + 1) <= total:
        size += 1
    return max(size, 2)
