"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Two models (or a model and a dataset) disagree structurally."""


class ConfigError(ValueError):
    """An experiment configuration is invalid.

    ``problems`` holds every offending field so they can be reported at once.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class FederationError(RuntimeError):
    """A federated run failed mid-flight; ``round_index`` says where."""

    def __init__(self, message, round_index=None):
        self.round_index = round_index
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)
