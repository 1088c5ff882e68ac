"""Small helpers for the plain-text interchange formats."""


def float_repr(x) -> str:
    """Shortest round-trip decimal for a float (plain Python repr)."""
    return repr(float(x))
