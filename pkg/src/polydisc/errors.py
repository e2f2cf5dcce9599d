"""Exception types shared across the package."""


class DomainError(ValueError):
    """An evaluation point or radius lies outside the open unit disc."""


class CapacityError(ValueError):
    """A construction needs more dimensions than the truncation provides."""


class PreconditionError(ValueError):
    """An input violates a stated precondition (shape, tolerance, invariance)."""


class UnsupportedError(ValueError):
    """The requested computation is not defined for this kernel family."""


class NotFactorizable(Exception):
    """A tensor-factorization gate failed.

    ``gate`` names the failing test, ``slot`` the slot being peeled (or
    ``None``), and ``measured`` the offending quantity.
    """

    def __init__(self, gate, measured, slot=None, message=None):
        self.gate = gate
        self.measured = float(measured)
        self.slot = slot
        if message is None:
            where = "" if slot is None else f" at slot {slot}"
            message = f"{gate} gate failed{where}: measured {self.measured:.3e}"
        super().__init__(message)
