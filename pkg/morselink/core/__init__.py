from .config import Settings, settings
from .errors import ErrorCode, MorseLinkError, NonTransverseError

__all__ = ["Settings", "settings", "ErrorCode", "MorseLinkError", "NonTransverseError"]
