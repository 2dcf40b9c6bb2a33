"""Real initial-value problem for y'' = 6y^2 + t on the negative axis."""
from .classify import SolutionClass, classify, oscillation_check, pole_spacing_model
from .connection import (ConnectionParams, fit_oscillation, fit_pole_train, oscillation_model,
                         pole_phase_model, predict)
from .constants import constants, log_gamma, verify_constants
from .errors import PainleveError, RegimeWarning
from .ode_core import InitialData, IntegratorOptions, PIState, PoleRecord, Trajectory, integrate
from .separatrix import SeparatrixSequence, find_sequence, predict_sequence
from .stokes import StokesMultipliers, kapaev, lemma_multipliers

__version__ = "0.1.0"
