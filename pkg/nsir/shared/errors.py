"""
Exception hierarchy shared by every solver module.

Check operations report failures through their report models; the classes
below are raised only when a computation cannot produce a result.
"""

from typing import Optional


class NsirError(Exception):
    """Base class for all solver and harness errors"""


# ============================================================================
# Configuration / inputs
# ============================================================================

class ConfigInvalid(NsirError, ValueError):
    """A configuration value violates a precondition"""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class InvalidGrid(ConfigInvalid):
    """Grid bounds or node count are not admissible"""


class PreconditionViolated(NsirError, ValueError):
    """An argument passed to a solver operation is outside its domain"""


# ============================================================================
# kernel
# ============================================================================

class KernelError(NsirError):
    pass


class SinkhornNonConvergence(KernelError):
    """Symmetric scaling did not reach tolerance within the sweep cap"""


class DimensionMismatch(KernelError, ValueError):
    """A grid function does not match the kernel grid"""


# ============================================================================
# spectral
# ============================================================================

class SpectralError(NsirError):
    pass


class NonConvergence(SpectralError):
    """Eigen iteration hit its cap before the residual tolerance"""


class NonPositiveEigenfunction(SpectralError):
    """The discrete operator lost its Perron structure"""


class ZeroFunction(SpectralError, ValueError):
    """Trial function has zero discrete L2 norm"""


class InconsistentThreshold(SpectralError):
    """sign(1 - R02) disagrees with sign(lambda1)"""


class BracketFailure(SpectralError):
    """lambda1 does not change sign on the searched length range"""


class UnsupportedKernel(SpectralError, ConfigInvalid):
    """Kernel family/normalization is not translation invariant"""


# ============================================================================
# kinetics
# ============================================================================

class KineticsError(NsirError):
    pass


class StepSizeTooLarge(KineticsError):
    """Positivity lost even after repeated step halving"""


class NonpositiveI(KineticsError, ValueError):
    """Lyapunov functional needs strictly positive infected components"""


# ============================================================================
# ibvp
# ============================================================================

class IbvpError(NsirError):
    pass


class CFLViolation(IbvpError):
    """Explicit diffusion step exceeds the stability bound"""


class PositivityLoss(IbvpError):
    """A density became negative during time stepping"""


class NewtonStall(IbvpError):
    """Newton and the time-marching fallback both failed"""


# ============================================================================
# stefan
# ============================================================================

class StefanError(NsirError):
    pass


class FrontCollision(StefanError):
    """Infected interval is narrower than three grid cells"""


class DomainOverrun(StefanError):
    """A front came within one kernel reach of the truncated line boundary"""


class BracketInvalid(StefanError):
    """mu bracket endpoints do not classify Vanishing / Spreading"""


class UndecidedProbe(StefanError):
    """A bisection probe stayed Undecided after all horizon doublings"""

    def __init__(self, mu: float, message: Optional[str] = None):
        self.mu = mu
        super().__init__(message or f"probe at mu={mu:.6g} is Undecided")


class EigenvaluePositivityFailure(StefanError):
    """lambda_eps <= 0, the small-mu upper solution cannot be built"""


# ============================================================================
# harness
# ============================================================================

class MissingArtifact(NsirError, FileNotFoundError):
    """No report artifacts found where they were expected"""
