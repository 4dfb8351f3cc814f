from typing import Any


def format_callable_call(callable_name: str, /, **kwargs: Any) -> str:
    """Format a keyword-only call as it could be written in source code.

    E.g. ("VariableLayout", horizon_n=1, n_total=20) ->
        'VariableLayout(horizon_n=1, n_total=20)'.
    """
    kwargs_str = ", ".join(f"{name}={value!r}" for name, value in kwargs.items())
    return f"{callable_name}({kwargs_str})"


def format_float(value: float, significant_digits: int) -> str:
    """Format a float with a fixed number of significant digits.

    Negative zero is written as "0" so identical trajectories always serialise to
    identical bytes.
    """
    if value == 0.0:
        return "0"
    return f"{value:.{significant_digits}g}"


def format_round_trip(value: float) -> str:
    """17 significant digits, enough for any double to parse back bit-exactly."""
    return format_float(value, 17)
