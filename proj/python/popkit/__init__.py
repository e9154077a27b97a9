"""Anticoncentration of noisy random quantum circuits.

Permutation-space replica calculus: Weingarten matrices, universal
scaling-limit moments and XEB, exact noisy-MPS transfer matrices,
brickwall replica contraction, Monte Carlo samplers, and Gram-Charlier
reconstruction of the probability-of-probabilities density.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
