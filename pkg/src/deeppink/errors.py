"""Exception hierarchy shared by every stage of the pipeline."""


class DeepPinkError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(DeepPinkError, ValueError):
    pass


class ZeroVarianceColumn(DeepPinkError, ValueError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} is constant and cannot be scaled")

    def __reduce__(self):
        return type(self), (self.column,)


class NumericalFailure(DeepPinkError, ArithmeticError):
    pass


class NotPositiveDefinite(NumericalFailure):
    def __init__(self, what, min_eigenvalue=None):
        self.what = what
        self.min_eigenvalue = min_eigenvalue
        msg = f"{what} is not positive definite"
        if min_eigenvalue is not None:
            msg += f" (minimum eigenvalue {min_eigenvalue:.3e})"
        super().__init__(msg)

    def __reduce__(self):
        return type(self), (self.what, self.min_eigenvalue)


class SingularSigma(NumericalFailure):
    pass


class DivergedTraining(DeepPinkError, RuntimeError):
    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")

    # keep the structured fields when crossing a process boundary
    def __reduce__(self):
        return type(self), (self.epoch, self.loss)
