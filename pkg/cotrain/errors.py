"""Exception hierarchy. Every named failure mode gets its own class."""


class CotrainError(Exception):
    """Base class for all workbench errors."""


class ConfigError(CotrainError, ValueError):
    pass


# trajectory-core
class DimensionMismatch(CotrainError):
    pass


class CorruptManifest(CotrainError):
    pass


class CorruptTrajectory(CotrainError):
    pass


class MissingTrajectory(CotrainError):
    pass


class SourceMismatch(CotrainError, ValueError):
    pass


# toyworld
class PlacementFailure(CotrainError):
    pass


class TaskStateMismatch(CotrainError):
    pass


class ExpertFailure(CotrainError):
    pass


# mimicgen-lite
class UnsegmentableDemo(CotrainError):
    pass


class OutOfWorkspace(CotrainError):
    pass


# cotrain-sampler / policy
class EmptyPool(CotrainError):
    pass


class TrainingDiverged(CotrainError):
    pass


class CorruptCheckpoint(CotrainError):
    pass
