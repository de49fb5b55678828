from .render import FIGURES, SchemaError, render

__all__ = ["FIGURES", "SchemaError", "render"]
