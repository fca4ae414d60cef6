"""Exception types raised across the package."""


class DegenwaveError(Exception):
    """Base class for package errors."""


class ParameterError(DegenwaveError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(DegenwaveError, ValueError):
    """A point or object lies outside the computational domain."""


class AssemblyDefectError(DegenwaveError, RuntimeError):
    """An assembled operator lost a structural property (definiteness, shape)."""
