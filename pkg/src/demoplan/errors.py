"""Exception hierarchy shared by all demoplan modules."""


class DemoplanError(Exception):
    pass


class DegenerateAxisError(DemoplanError, ValueError):
    pass


class InvalidPoseError(DemoplanError, ValueError):
    pass


class DimensionMismatchError(DemoplanError, ValueError):
    pass


class SchemaError(DemoplanError, ValueError):
    pass


class DuplicateNameError(DemoplanError, ValueError):
    pass


class MappingError(DemoplanError, ValueError):
    pass


class SingularityError(DemoplanError, ArithmeticError):
    pass


class NoConvergenceError(DemoplanError, RuntimeError):
    pass
