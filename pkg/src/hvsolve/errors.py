"""Exception types shared across the package."""


class ProblemSyntaxError(ValueError):
    """Raised when a problem file cannot be parsed.

    Carries the 1-based line and column of the offending token.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class SystemInvariantError(ValueError):
    """A polynomial system violates a structural invariant."""


class GenerationError(RuntimeError):
    """No viable solver template could be produced.

    ``rejections`` lists (candidate description, reason) pairs for the
    candidates that were enumerated and turned down.
    """

    def __init__(self, message, rejections=()):
        self.rejections = list(rejections)
        super().__init__(message)

    def diagnostics(self, limit=50):
        lines = [str(self)]
        for desc, reason in self.rejections[:limit]:
            lines.append(f"  {desc}: {reason}")
        if len(self.rejections) > limit:
            lines.append(f"  ... {len(self.rejections) - limit} more")
        return "\n".join(lines)


class TemplateError(ValueError):
    """A template file is malformed, truncated, or has the wrong version."""


class InstanceError(ValueError):
    """A coefficient instance is incomplete or carries non-finite values."""


class EigenSolveError(RuntimeError):
    """The generalized eigenvalue kernel failed to converge."""


class DegenerateMatrixError(RuntimeError):
    """A matrix expected to be generically regular is numerically singular."""
