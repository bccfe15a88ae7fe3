__all__ = (
    "Base",
    "ActivationFamily",
    "ActivationSpec",
    "QuadratureRule",
    "Grid",
    "Box",
    "AtomIndex",
    "Dictionary",
    "ExpansionTerm",
    "WaveletExpansion",
    "CoefficientLaw",
    "OgaStep",
    "OgaTrace",
    "RateVerdict",
    "WBNetParams",
    "VecWeightParams",
    "WBNetwork",
    "DaggerCombo",
    "KernelCondition",
    "HomogeneousConstants",
    "KernelEntry",
    "DecayCertificate",
    "KernelReport",
    "KernelSamples",
)

from .base import Base
from .activations import ActivationFamily, ActivationSpec
from .grid import QuadratureRule, Grid
from .frame import Box, AtomIndex, Dictionary, ExpansionTerm, WaveletExpansion
from .greedy import CoefficientLaw, OgaStep, OgaTrace, RateVerdict
from .network import WBNetParams, VecWeightParams, WBNetwork, DaggerCombo
from .kernel import (
    KernelCondition,
    HomogeneousConstants,
    KernelEntry,
    DecayCertificate,
    KernelReport,
    KernelSamples,
)
