"""Singular surfaces in three-space: jets, classification, normal forms and foliations."""

__version__ = "0.1.0"

from .errors import AnalysisError, FrontalError, InputError, ParseError  # noqa: E402
from .expr import GeneratorDef, SurfaceDef, parse_file  # noqa: E402

__all__ = [
    "__version__",
    "AnalysisError",
    "FrontalError",
    "InputError",
    "ParseError",
    "GeneratorDef",
    "SurfaceDef",
    "parse_file",
]
