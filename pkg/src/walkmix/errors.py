"""Exception hierarchy for walkmix."""


class WalkmixError(Exception):
    """Base class for every error raised by the package."""


class ChainValidationError(WalkmixError, ValueError):
    """The input matrix is not a valid row-stochastic transition matrix."""


class NotSquare(ChainValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"NotSquare: matrix has shape {self.shape}")


class NegativeEntry(ChainValidationError):
    def __init__(self, x, y, value):
        self.x, self.y, self.value = x, y, value
        super().__init__(f"NegativeEntry: p[{x}][{y}] = {value!r} < 0")


class RowSumViolation(ChainValidationError):
    def __init__(self, x, actual_sum):
        self.x, self.actual_sum = x, actual_sum
        super().__init__(f"RowSumViolation: row {x} sums to {actual_sum!r}")


class HypothesisError(WalkmixError, ValueError):
    """A chain does not satisfy the hypothesis an operation needs."""


class NotReversible(HypothesisError):
    pass


class NotErgodic(HypothesisError):
    pass


class MinusOneEigenvalue(HypothesisError):
    pass


class NotSymmetric(WalkmixError, ValueError):
    def __init__(self, asymmetry):
        self.asymmetry = asymmetry
        super().__init__(f"NotSymmetric: max |M - M^T| = {asymmetry:.3e}")


class SpectrumOutOfRange(WalkmixError, ValueError):
    """An eigenvalue of a discriminant overshoots [-1, 1] by more than rounding."""


class SizeExceeded(WalkmixError, ValueError):
    def __init__(self, n, budget):
        self.n, self.budget = n, budget
        super().__init__(f"SizeExceeded: n = {n} exceeds dense budget {budget}")


class DegenerateAngle(WalkmixError, ArithmeticError):
    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(
            f"DegenerateAngle: sin^2(arccos {eigenvalue!r}) is below 1e-14; "
            "the eigenvalue should have been grouped to +1 or -1"
        )


class NotUnit(WalkmixError, ValueError):
    def __init__(self, norm):
        self.norm = norm
        super().__init__(f"NotUnit: state has norm {norm!r}")


class IncompleteIdempotents(WalkmixError, ArithmeticError):
    def __init__(self, residual):
        self.residual = residual
        super().__init__(f"IncompleteIdempotents: |(sum F) S - S|_max = {residual:.3e}")


class OutOfRange(WalkmixError, ValueError):
    pass


class NotSymmetricFactor(WalkmixError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"NotSymmetricFactor: factor {index} is not a symmetric chain")


class NotOddPrime(WalkmixError, ValueError):
    def __init__(self, q):
        self.q = q
        super().__init__(f"NotOddPrime: {q!r}")


class DuplicatePrime(WalkmixError, ValueError):
    def __init__(self, q):
        self.q = q
        super().__init__(f"DuplicatePrime: {q!r}")


class BudgetExceeded(WalkmixError, ValueError):
    def __init__(self, n, budget):
        self.n, self.budget = n, budget
        super().__init__(f"BudgetExceeded: exhaustive search over {n}! permutations (budget n <= {budget})")


class NotAutomorphism(WalkmixError, ValueError):
    def __init__(self, x, y, sigma=None):
        self.x, self.y, self.sigma = x, y, sigma
        where = "" if sigma is None else f" for sigma = {list(sigma)}"
        super().__init__(f"NotAutomorphism: p[sigma({x})][sigma({y})] != p[{x}][{y}]{where}")


AutomorphismInvalid = NotAutomorphism


class ConsistencyError(WalkmixError, ArithmeticError):
    """A numerical result violates an identity it is guaranteed to satisfy."""
