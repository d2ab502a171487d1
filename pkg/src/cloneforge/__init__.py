"""Clones, centralizers and double centralizers of finite algebras."""

from .centralizer import (
    CentralizerReport,
    centralizer_brute,
    centralizer_fast,
    check_charn_equivalence,
    double_centralizer_hom,
    double_centralizer_sandwich,
    pairwise_equalizer_slice,
    verify_dc,
)
from .clone import DerivationCertificate, clone_membership, derived_clone, generate_clone_slice
from .core import Algebra, OpSet, Operation, Signature, compose, constant, projection, pushforward
from .homsearch import Homomorphism, enumerate_homs, find_generating_set, is_hom, is_regular, regularize
from .kronecker import Matrix, commutes, evaluation_matrix, kron_first, kron_second, pushforward_encoding, u_map

__version__ = "0.1.0"
