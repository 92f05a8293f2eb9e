from django.core.exceptions import ValidationError


class NumericalError(ArithmeticError):
    """A computation produced a result outside its numerical guarantees."""


class ShapeError(ValidationError):
    pass


class SchemaError(ValueError):
    """A CSV artifact is missing its version line or carries an unknown one."""
