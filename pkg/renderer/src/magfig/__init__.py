"""Figure panels from magcav simulation CSV/JSON output."""

from .panels import PanelSpec, SchemaError, read_csv_columns, render

__version__ = "0.1.0"
