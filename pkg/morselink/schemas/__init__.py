from .circle import CircleComponent, CircleConfig, MarkedPoint
from .complex import ComplexDocument, GeneratorSchema
from .plchain import CellSchema, ChainDocument
from .report import BetaRow, IdentityReport

__all__ = [
    "CircleComponent",
    "CircleConfig",
    "MarkedPoint",
    "ComplexDocument",
    "GeneratorSchema",
    "CellSchema",
    "ChainDocument",
    "BetaRow",
    "IdentityReport",
]
