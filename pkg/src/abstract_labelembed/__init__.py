"""Label embeddings: a Dirichlet-Multinomial vote model with an empirical-Bayes
Gaussian prior, fitted by stochastic EM with random-walk Metropolis E-steps."""
from .imports import *
from .model_core import *
from .sampler import *
from .em_driver import *
from .analysis import *
from .simulate import *
from .io_cli import RunConfig, load_dataset, load_fit, write_dataset, write_outputs

__version__ = "0.1.0"
