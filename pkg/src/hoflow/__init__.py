"""Gradient flow of high-order curvature energies for curves in space forms."""

from .spaces import ChartError, SpaceForm
from .curves import DiscreteCurve, circle, ellipse, perturbed_circle, reparametrize
from .frenet import (DiffPoly, FrenetVector, check_initial_condition, energy, frenet_nu,
                     frenet_phi, grad_norm_sq, threshold, threshold_sup)

__version__ = "0.1.0"
