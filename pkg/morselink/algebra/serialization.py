"""
复形的 JSON 序列化（无损往返）
"""

from fractions import Fraction

from ..schemas.complex import ComplexDocument, GeneratorSchema
from . import linalg
from .complex import FilteredComplex, Generator, make_complex
from .ring import CoefficientRing


def complex_to_document(cx: FilteredComplex) -> ComplexDocument:
    boundary = {
        str(k): [(row, col, cx.ring.format(value)) for row, col, value in entries]
        for k, entries in cx.boundary_entries().items()
    }
    return ComplexDocument(
        dimension=cx.dimension,
        ring=cx.ring.label,
        orientation=cx.orientation,
        generators=[GeneratorSchema(**g.to_dict()) for g in cx.generators],
        boundary=boundary,
    )


def complex_from_document(doc: ComplexDocument) -> FilteredComplex:
    """由文档重建复形，经 make_complex 完整校验"""
    ring = CoefficientRing.parse(doc.ring)
    gens = [Generator(g.id, g.degree, g.level) for g in doc.generators]
    ids = {k: [g.id for g in gens if g.degree == k] for k in range(doc.dimension + 1)}
    boundary = {}
    for key, entries in doc.boundary.items():
        k = int(key)
        matrix = linalg.zeros(len(ids.get(k - 1, [])), len(ids.get(k, [])))
        for row, col, value in entries:
            matrix[ids[k - 1].index(row)][ids[k].index(col)] = ring.normalize(Fraction(value))
        boundary[k] = matrix
    return make_complex(doc.dimension, ring, gens, boundary, orientation=doc.orientation)


def dump_complex(cx: FilteredComplex) -> str:
    return complex_to_document(cx).model_dump_json(indent=2)


def load_complex(text: str) -> FilteredComplex:
    return complex_from_document(ComplexDocument.model_validate_json(text))
