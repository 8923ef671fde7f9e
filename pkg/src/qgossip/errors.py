"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """An argument violates a documented precondition."""


class CapacityError(RuntimeError):
    """Exhaustive computation requested above its size cap."""


class DisconnectedGraph(ValueError):
    """A metric or plan that needs a connected graph got a disconnected one."""


class ResourceExhausted(RuntimeError):
    """A Bell-pair slot was asked for more teleports than it holds."""

    def __init__(self, pair, message=None):
        self.pair = pair
        super().__init__(message or f"no Bell pairs left on pair {pair}")
