"""Exception hierarchy with stable short codes.

Every failure surfaced by the CLI carries one of these codes so test
suites and scripts can assert on failure modes without parsing prose.
"""


class ToolkitError(Exception):
    """Base class; ``code`` is a stable machine-parsable identifier."""

    code = "E_INTERNAL"


class InputError(ToolkitError):
    """Rejected input values (non-finite data, bad sizes, bad parameters)."""

    code = "E_INPUT"


class MetricError(ToolkitError):
    """Supervised metric requested on a set without usable labels."""

    code = "E_METRIC"


class UndefinedStatError(ToolkitError):
    """Correlation undefined (constant input); never silently zero."""

    code = "E_UNDEFINED"


class ConfigError(ToolkitError):
    """Incompatible configuration (method/distance pairing, missing val)."""

    code = "E_CONFIG"


class IllConditionedError(ToolkitError):
    """Regression cannot be fit (all feature values identical)."""

    code = "E_ILLCOND"


class DegenerateError(ToolkitError):
    """Tuning failed: every scanned setting produced degenerate fits."""

    code = "E_DEGENERATE"


class LeakageError(ToolkitError):
    """Train/test id overlap detected during evaluation."""

    code = "E_LEAKAGE"


class ParseError(ToolkitError):
    """Malformed input file; message names the offending line."""

    code = "E_PARSE"

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}: "
        if line is not None:
            loc = f"{loc}line {line}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class FormatVersionError(ToolkitError):
    """File declares a format_version this build does not understand."""

    code = "E_FORMAT"


class GenerationError(ToolkitError):
    """Synthetic suite request cannot be satisfied."""

    code = "E_GEN"
