"""Exception types shared across the framework."""


class BayesvisError(Exception):
    """Base class for all framework errors."""

    code = "error"


class MalformedBlob(BayesvisError):
    code = "malformed-blob"


class InvalidSample(BayesvisError):
    code = "invalid-sample"


class UnknownVariable(BayesvisError):
    code = "unknown-variable"


class EmptyConditionalSupport(BayesvisError):
    code = "empty-conditional-support"


class InvalidParameters(BayesvisError):
    code = "invalid-parameters"


class SchemaMismatch(BayesvisError):
    code = "schema-mismatch"


class EmptyResponse(BayesvisError):
    code = "empty-response"


class InvalidUtility(BayesvisError):
    code = "invalid-utility"


class InvalidResponse(BayesvisError):
    code = "invalid-response"


class TemplateError(BayesvisError):
    code = "template-error"

    def __init__(self, message, path=()):
        super().__init__(f"{'/'.join(map(str, path)) or '<root>'}: {message}")
        self.path = tuple(path)


class NotFound(BayesvisError):
    code = "not-found"


class SequenceViolation(BayesvisError):
    code = "sequence-violation"


class AlreadyAnswered(BayesvisError):
    code = "already-answered"


class InsufficientData(BayesvisError):
    code = "insufficient-data"


class UndefinedEffect(BayesvisError):
    code = "undefined-effect"
