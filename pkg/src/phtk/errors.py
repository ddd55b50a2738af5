"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class PhtkError(Exception):
    """Base class for every error raised by phtk."""


# ── Input shapes ──


class ShapeMismatch(PhtkError):
    """Operands have incompatible dimensions."""


class NonSquare(ShapeMismatch):
    """A square matrix was required."""


# ── Spectra ──


class NotDiagonalizable(PhtkError):
    """The eigenvector matrix is too ill-conditioned to be trusted."""

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition


class UnpairedSpectrum(PhtkError):
    """A nonreal eigenvalue has no conjugate partner of equal multiplicity."""

    def __init__(self, message: str, witness: complex | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class ComplexSpectrum(PhtkError):
    """An operation that needs a real spectrum got nonreal eigenvalues."""


class SignDomainMismatch(PhtkError):
    """A sign sequence does not cover exactly the real-eigenvalue slots."""


# ── Metric and antilinear decompositions ──


class NotAMetric(PhtkError):
    """The operator is not a Hermitian invertible metric for the Hamiltonian."""


class BlockNotHermitian(PhtkError):
    """A degeneracy block of the metric's symmetry generator is not Hermitian."""


class BlockNotSymmetric(PhtkError):
    """A degeneracy block of the antilinear symmetry generator is not symmetric."""


class NotInvertible(PhtkError):
    """An operator that must be invertible is (numerically) singular."""


# ── Symmetries ──


class UnrecognizedAction(PhtkError):
    """A symmetry maps an eigenvector to something outside its expected span."""


class PreconditionUnmet(PhtkError):
    """A check was requested outside the regime where it is defined."""


class NotASymmetry(PhtkError):
    """An operator that should commute with the Hamiltonian does not."""


# ── Models ──


class NuOutOfRange(PhtkError):
    """The exponent nu lies outside [0, 2)."""


class QuadratureTooCoarse(PhtkError):
    """Fewer quadrature nodes than twice the basis size."""


class PTPhaseNotFound(PhtkError):
    """An eigenvector cannot be made PT-invariant by a phase."""


# ── CLI ──


class ParseError(PhtkError):
    """A matrix or bundle file is malformed."""


class RangeError(PhtkError):
    """A command-line range or size is invalid."""


class ConfigError(PhtkError):
    """Configuration value is invalid."""


class InvalidEigenbasis(PhtkError):
    """Supplied columns are not eigenvectors of the Hamiltonian."""
