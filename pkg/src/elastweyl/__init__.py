"""Two-term Weyl asymptotics for the planar Lame operator, measured on the unit disk."""
from .material import ElasticMaterial, make_material, rayleigh_roots, sextic
from .predictions import (assemble_predictions, beta_dirichlet, beta_free, tauberian,
                          PredictionSet, WeylCoefficients, Absent)
from .spectrum import (DomainDescriptor, Spectrum, unit_disk, rectangle, scalar_disk_spectrum,
                       rectangle_scalar_spectrum, elastic_disk_determinant, elastic_disk_spectrum,
                       verify_eigenpair)
from .asymptotics import (counting_function, heat_trace, fit_heat_second_coeff,
                          fit_counting_second_coeff, adjudicate, check_sum_rule)

__version__ = "0.1.0"
