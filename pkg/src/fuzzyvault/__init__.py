"""Fingerprint fuzzy vaults over GF(2^16): the classic minutiae vault, a
descriptor-hardened variant and a cross-matching resistant grid vault, with
the attacks and statistics used to evaluate them."""
from .errors import (ChaffPlacementFailure, DatasetError, FailureToCapture, FuzzyVaultError,
                     GenerationError, VaultFormatError)
from .field import Polynomial, interpolate, poly_hash
from .minutiae import Minutia, MinutiaeTemplate, RigidTransform, synthesize_finger, synthesize_impression
from .classic import ClassicVault, ClassicVaultParams, enroll_classic, unlock_classic
from .descriptor import DescriptorVault, enroll_descriptor, unlock_hardened
from .grid import GridParams, GridVault, build_grid, grid_enroll, grid_unlock
from .security import bf_log2, bf_security, expected_bf_iterations
from .stats import TrialRecord, clopper_pearson, median_trials, rule_of_three

__version__ = "0.1.0"
