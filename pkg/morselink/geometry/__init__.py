"""
模型流形与临界点

使用示例：
    >>> from morselink.geometry import builtin_model, locate_critical_points
    >>> model = builtin_model("CIRCLE-A")
    >>> [p.name for p in locate_critical_points(model)]
    ['M1', 'M2', 'm1', 'm2']
"""

from .builtin import BuiltinModels, builtin_model
from .critical import (
    CriticalPoint,
    by_name,
    census_csv,
    euler_characteristic,
    locate_critical_points,
    normal_form_residual,
)
from .models import (
    TWO_PI,
    CircleModel,
    FlatModel,
    HeightSphere,
    ManifoldModel,
    ModelKind,
    RemappedSphere,
    SphereModel,
    TorusModel,
)

__all__ = [
    "BuiltinModels",
    "builtin_model",
    "CriticalPoint",
    "by_name",
    "census_csv",
    "euler_characteristic",
    "locate_critical_points",
    "normal_form_residual",
    "TWO_PI",
    "CircleModel",
    "FlatModel",
    "HeightSphere",
    "ManifoldModel",
    "ModelKind",
    "RemappedSphere",
    "SphereModel",
    "TorusModel",
]
