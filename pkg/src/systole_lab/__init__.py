"""Computational systolic geometry: exact homology, flat-torus minima,
discrete systoles, and the explicit systolically free metric families."""

from .exactlin import IntMatrix, smith_normal_form, rank_rational, rank_mod2
from .homology import ChainComplex, Chain, validate_complex, relative_complex, catalog
from .lattice import FlatTorus, successive_minima, loewner_ratio, gromov_torus_ratio
from .discsys import WeightedComplex, systole, norm_of_class, stable_norm_estimate

__version__ = "0.1.0"
