"""Exception hierarchy shared by all scorecast modules.

Every error carries an ``exit_code`` so the CLI can map failures onto its
exit-code contract: 2 for bad input (files, schemas, configs, infeasible
scenario requests), 3 for runtime failures (diverged training and the like).
"""


class ScorecastError(Exception):
    exit_code = 3


class InputError(ScorecastError):
    """Problems the user can fix by changing inputs or configuration."""

    exit_code = 2


class ParseError(InputError):
    pass


class SchemaError(InputError):
    pass


class ValidationError(InputError):
    pass


class LinkageError(InputError):
    pass


class RangeError(InputError):
    pass


class ScenarioError(InputError):
    pass


class ConfigError(InputError):
    pass


class TrainingError(ScorecastError):
    pass


class FitError(ScorecastError):
    pass


class DegenerateDataError(FitError):
    pass


class CoverageError(ScorecastError):
    pass


class DomainError(ScorecastError):
    pass


class CheckpointError(InputError):
    pass


class BudgetError(InputError):
    pass
