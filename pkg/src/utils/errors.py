"""Exception hierarchy shared by the toolkit.

Every error carries an ``exit_code`` that the command line front end returns
unchanged, so the codes below are part of the public contract.
"""
from typing import Optional


class MtmError(Exception):
    """Base class for all toolkit errors"""
    exit_code: int = 1


class ConfigError(MtmError):
    """Run configuration could not be parsed or is inconsistent"""
    exit_code = 2


class UnknownSystemError(MtmError):
    """System label not present in the registry"""
    exit_code = 3


class OutputError(MtmError):
    """Output directory or artifact could not be written"""
    exit_code = 4


class InputError(MtmError, ValueError):
    """Shape, index or finiteness violation at an operation boundary"""
    exit_code = 5


class PolicyError(MtmError, ValueError):
    """Step size outside the admissible window (0, delta_star] of a policy"""
    exit_code = 6


class NoSolutionError(MtmError):
    """Radius inversion could not bracket the target step size"""
    exit_code = 7


class NonCommutativeError(MtmError):
    """Diffusion fails the commutativity guard of the Milstein schemes"""
    exit_code = 8


class DivergenceError(MtmError):
    """Iterate became non-finite"""
    exit_code = 9

    def __init__(self, message: str, step_index: Optional[int] = None):
        super().__init__(message)
        self.step_index = step_index


class ExperimentError(MtmError):
    """Monte Carlo experiment produced no usable estimate"""
    exit_code = 10


class FitError(MtmError, ValueError):
    """Log-log regression is undefined for the given errors"""
    exit_code = 11
