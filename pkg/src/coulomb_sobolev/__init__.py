"""Radial fractional Coulomb-Sobolev energies, exponents, rate sweeps and optimizer search."""
from .exponents import (ExponentBundle, Interval, ParamSet, ParameterError, Regime,
                        classify_regime, endpoint_exponent, exponent_bundle, gn_exponents,
                        p_rad, quotient_exponents, refined_sobolev_exponents, schedule_params,
                        sobolev_exponent)
from .radial import BumpParams, Grid, MultibumpParams, RadialGridFunction, make_grid, superposition
from .kernels import KernelMatrix, KernelSpec, assemble, kernel_bound_check, kernel_values
from .functionals import (EnergyReport, GridEnergies, coulomb_energy, evaluate, lp_norm,
                          lp_power, quotient, seminorm_sq)
from .experiments import (CorpusSpec, SweepConfig, SweepResult, Verdict, run_boundedness,
                          run_bump_law, run_multibump, run_refined_sobolev, run_schedule,
                          run_weighted_checks)
from .optimize import AscentConfig, OptimizerState, Status, ascend, gradients, multi_start
from .estimators import EnergyEvaluator, QuotientMaximizer

__version__ = "0.1.0"
