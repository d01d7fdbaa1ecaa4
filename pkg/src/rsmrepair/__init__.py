"""rsmrepair: trace-driven parameter repair for robot state machines.

Record execution traces of a parameterized transition function, collect a
handful of user corrections, partially evaluate the transition function
into per-correction residuals, and solve a weighted MaxSMT problem for the
smallest parameter adjustments that satisfy the most corrections.
"""
from importlib import resources

from .lang import TransitionFn, Vec2, angle_mod, eval_transition, parse_transition

__version__ = "0.1.0"


def load_corpus(name: str) -> TransitionFn:
    """Parse one of the bundled transition functions (e.g. ``attacker``)."""
    source = resources.files("rsmrepair").joinpath(f"corpus/{name}.rsm").read_text()
    return parse_transition(source, name=name)


__all__ = [
    "TransitionFn", "Vec2", "angle_mod", "eval_transition", "parse_transition",
    "load_corpus", "__version__",
]
