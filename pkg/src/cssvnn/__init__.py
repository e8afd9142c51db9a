"""Frame-indifferent, isotropic, polyconvex hyperelastic energies from
convex networks on signed singular values."""

from .cssv import CssvModel
from .models import EnergyModel, load_model
from .pann import PannModel
from .refmodels import RefEnergy

__all__ = ["CssvModel", "EnergyModel", "PannModel", "RefEnergy", "load_model"]
__version__ = "0.1.0"
