"""Exception hierarchy shared by every module of the toolkit."""


class NprError(Exception):
    """Base class for all toolkit errors."""


# mesh core
class MeshError(NprError, ValueError):
    pass


class NonManifoldEdge(MeshError):
    pass


class DegenerateTriangle(MeshError):
    pass


class IndexOutOfRange(MeshError, IndexError):
    pass


class InvalidVertex(MeshError, IndexError):
    pass


class EmptyMesh(MeshError):
    pass


class DuplicateName(NprError, KeyError):
    pass


class UnknownProperty(NprError, KeyError):
    pass


# asset io
class ParseError(NprError, ValueError):
    def __init__(self, reason, line=None):
        self.line = line
        self.reason = reason
        msg = reason if line is None else f"line {line}: {reason}"
        super().__init__(msg)


class BadMagic(ParseError):
    pass


class UnsupportedVersion(ParseError):
    pass


class TruncatedFile(ParseError):
    pass


class UnsupportedMaxval(ParseError):
    pass


class CyclicSkeleton(ParseError):
    pass


class BadWeight(ParseError):
    pass


class NoLoader(NprError, ValueError):
    pass


# animation
class UnknownAnimation(NprError, KeyError):
    pass


class TimeOutOfRange(NprError, ValueError):
    pass


class BadPose(NprError, ValueError):
    pass


# algorithms
class MissingCurvature(NprError, ValueError):
    pass


class FieldLengthMismatch(NprError, ValueError):
    pass


class MissingAttributes(NprError, ValueError):
    pass


class InvalidSeed(NprError, IndexError):
    pass


class SingularSystem(NprError, ArithmeticError):
    pass


# rendering
class DimensionMismatch(NprError, ValueError):
    pass


class UnboundTexture(NprError, KeyError):
    pass


class TooFewPoints(NprError, ValueError):
    pass
