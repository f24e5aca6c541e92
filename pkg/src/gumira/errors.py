"""Exception hierarchy. Every error carries a short machine-readable ``code``."""


class GumiraError(Exception):
    code = "error"


class DivergedOrbit(GumiraError):
    """An orbit left the divergence guard box or became non-finite.

    ``orbit`` holds the finite prefix that was computed before the guard fired.
    """

    code = "diverged"

    def __init__(self, last_step, orbit=None):
        super().__init__(f"orbit diverged after step {last_step}")
        self.last_step = last_step
        self.orbit = orbit


class EmptyLevel(GumiraError):
    code = "empty_level"


class BranchMismatch(GumiraError):
    code = "branch_mismatch"


class WrongTopology(GumiraError):
    code = "wrong_topology"


class IntegrationFailure(GumiraError):
    code = "integration_failure"


class NoReturn(GumiraError):
    code = "no_return"


class DomainError(GumiraError, ValueError):
    code = "domain"


class NoBracket(GumiraError):
    code = "no_bracket"


class MaxIterations(GumiraError):
    code = "max_iterations"


class NonPositiveBeta(GumiraError, ValueError):
    code = "non_positive_beta"


class DegenerateSequence(GumiraError):
    code = "degenerate_sequence"
