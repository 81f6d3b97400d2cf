# src/models/__init__.py
from .errors import CtlabError, ValidationError, ComputationError

__all__ = ['CtlabError', 'ValidationError', 'ComputationError']
