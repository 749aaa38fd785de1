"""Dipole emission, excitation and collection in planar layer stacks."""

from .materials import (Material, MaterialRangeError, NkParseError, builtin,
                        eval_index, load_nk_table)
from .tmm import (Layer, PlaneWaveResult, Stack, axial_wavenumber, fresnel,
                  field_profile, stack_rt)
from .quadrature import QuadratureError, adaptive_gauss_kronrod
from .dipole import (EmissionResult, EmitterSpec, FarField, QuadratureSpec,
                     UnsupportedConfigurationError, collection_efficiency,
                     emission, far_field, half_stack_reflection, purcell,
                     purcell_factor)
from .enhance import (EMISSION_BAND_NM, EnhancementReport, SpectrumWeight,
                      band_average, calibrate_eta0,
                      effective_quantum_efficiency, excitation_gain,
                      lifetime_ratio, pl_enhancement)
from .fit import (DecayFit, DecayTrace, FitError, OdmrParams, decay_model,
                  fit_exp_decay, fit_odmr, odmr_model)
from .sweep import (BoundaryOptimumError, SweepResult, SweepRow, SweepSpec,
                    refine_optimum, run_sweep)
from .config import (RunConfig, cavity_stack, default_emitter,
                     reference_stack, set_parameter)

__version__ = "0.1.0"
