"""Vote records, the latent embedding, and the probability kernels.

``z`` is an instance's K-dimensional embedded ground truth; ``exp(z)`` is the
parameter vector of a Dirichlet over class probabilities, and the observed
votes are a multinomial draw from those probabilities. The kernels here give
the marginal probability of the votes, the Gaussian-prior posterior used by
the sampler, and the moments of the class probabilities implied by ``z``.
"""
from .schemas import (
    AnnotationDataset, ClassLabels, DirichletMoments, Embedding, GaussianPrior,
    Instance, VoteCounts,
)
from .kernels import (
    BetaMoments, ClampCounter, beta_moments, clamp_events, counting_clamps, dirichlet_moments,
    log_beta_binomial_marginal, log_dirichlet_multinomial_marginal,
    log_dirichlet_multinomial_rows, log_posterior, log_posterior_rows,
    reset_clamp_events,
)
from .surface import GridRange, MomentSurface, SurfaceRow, moment_surface

__all__ = [
    "AnnotationDataset", "ClassLabels", "DirichletMoments", "Embedding",
    "GaussianPrior", "Instance", "VoteCounts",
    "BetaMoments", "ClampCounter", "beta_moments", "clamp_events", "counting_clamps",
    "dirichlet_moments",
    "log_beta_binomial_marginal", "log_dirichlet_multinomial_marginal",
    "log_dirichlet_multinomial_rows", "log_posterior", "log_posterior_rows",
    "reset_clamp_events",
    "GridRange", "MomentSurface", "SurfaceRow", "moment_surface",
]
