# src/ensembles/__init__.py
from .families import FAMILIES, FamilySpec, generate, model_orders
from .offspring import OffspringSpec, survival_probability

__all__ = ['FAMILIES', 'FamilySpec', 'generate', 'model_orders', 'OffspringSpec',
           'survival_probability']
