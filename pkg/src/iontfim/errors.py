"""Error types shared across the simulation pipeline."""


class SolverFailure(RuntimeError):
    """An iterative solver (Newton, Krylov, linear) failed to converge."""


class ChainInstabilityError(RuntimeError):
    """Transverse Hessian has a negative eigenvalue (zig-zag regime)."""


class ResonanceError(ValueError):
    """Laser detuning collides with a transverse normal mode."""


class FitUndefinedError(ValueError):
    """Power-law fit has fewer than two usable distance shells."""


class ConfigError(ValueError):
    """Invalid run configuration (schema violation or resource cap)."""
