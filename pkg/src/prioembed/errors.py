"""Exception hierarchy.

Validation problems raise subclasses of ``ValidationError``; a broken internal
guarantee raises ``InvariantError`` (the CLI maps these to exit codes 2 and 3).
"""


class PrioEmbedError(Exception):
    pass


class ValidationError(PrioEmbedError, ValueError):
    pass


class InvariantError(PrioEmbedError, AssertionError):
    pass


class NotSquare(ValidationError):
    pass


class Asymmetric(ValidationError):
    def __init__(self, i, j, a, b):
        self.witness = (i, j)
        super().__init__(f"dist[{i}][{j}] = {a} but dist[{j}][{i}] = {b}")


class NonzeroDiagonal(ValidationError):
    def __init__(self, i, a):
        self.witness = (i, i)
        super().__init__(f"dist[{i}][{i}] = {a} != 0")


class NonpositiveOffDiagonal(ValidationError):
    def __init__(self, i, j, a):
        self.witness = (i, j)
        super().__init__(f"dist[{i}][{j}] = {a} is not positive")


class TriangleViolation(ValidationError):
    def __init__(self, i, j, k, a, b, c):
        self.witness = (i, j, k)
        super().__init__(
            f"d({i},{k}) = {c} > d({i},{j}) + d({j},{k}) = {a} + {b}")


class Disconnected(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class OrderingMismatch(ValidationError):
    pass


class NotMonotone(ValidationError):
    def __init__(self, j, a, b):
        self.witness = j
        super().__init__(f"alpha({j}) = {a} > alpha({j + 1}) = {b}")


class SumAtLeastOne(ValidationError):
    def __init__(self, partial_sum, n):
        self.partial_sum = partial_sum
        super().__init__(
            f"sum of 1/alpha(j) for j=1..{n} is {partial_sum} (~{float(partial_sum):.6g}), need < 1")


class NonPositiveAlpha(ValidationError):
    pass


class SameVertex(ValidationError):
    pass


class EmptyTerminalSet(ValidationError):
    pass


class DegenerateDiameter(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass
