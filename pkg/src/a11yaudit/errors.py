"""Exception hierarchy shared by all modules."""


class A11yAuditError(Exception):
    """Base class for every error raised by this package."""


class InputError(A11yAuditError):
    """Raised for malformed user-supplied files; the CLI maps it to exit code 2."""


class MalformedXml(InputError):
    pass


class MalformedBounds(InputError):
    pass


class MalformedIR(InputError):
    pass


class MalformedModel(InputError):
    pass


class DuplicateActivity(InputError):
    pass


class UnknownActivity(A11yAuditError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotAnActivity(A11yAuditError):
    pass


class MismatchedApp(A11yAuditError):
    pass


class MissingScreenshot(A11yAuditError):
    pass


class DegenerateRegion(A11yAuditError):
    """The sampled region has fewer than four on-screen pixels."""


class UniformRegion(A11yAuditError):
    """Foreground and background cannot be separated.

    Carries the colour estimate so callers can still report it.
    """

    def __init__(self, foreground, background=None):
        self.foreground = foreground
        self.background = foreground if background is None else background
        super().__init__(f"uniform region {self.foreground.hex}")
