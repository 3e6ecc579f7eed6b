"""
Exception hierarchy shared by the core and lab layers.

All errors derive from ``ValueError`` so callers that only know about bad
arguments still catch them.
"""


class TreequipartError(ValueError):
    """Base class for every error raised by this package."""


class InvalidSiteError(TreequipartError):
    """A word or boundary prefix is not reduced, or uses an unknown letter."""


class CapExceededError(TreequipartError):
    """An enumeration or exact evaluation would exceed a configured cap."""


class DepthError(TreequipartError):
    """A boundary prefix is too short for the requested construction."""


class GroupElementError(TreequipartError):
    """A group element or rank is outside its valid range."""


class OutsideRadiusError(TreequipartError):
    """A site lies outside the ball on which an automorphism table is defined."""


class ConstructionError(TreequipartError):
    """A constructive step (flip rearrangement, Folner shift) found no valid choice."""


class ZeroProbabilityAtomError(TreequipartError):
    """A psi-coefficient ratio hit an atom of probability zero."""


class DegenerateFitError(TreequipartError):
    """A decay fit has too few usable points or no spread in distance."""
