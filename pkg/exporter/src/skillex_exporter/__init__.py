from skillex_exporter.encode import (
    Encoder,
    ExportError,
    ExportJob,
    ExportReport,
    WINDOW_OVERLAP,
    assign_windows,
    export_contextual,
    export_phrases,
    plan_windows,
)

__version__ = "0.1.0"

__all__ = [
    "Encoder",
    "ExportError",
    "ExportJob",
    "ExportReport",
    "WINDOW_OVERLAP",
    "assign_windows",
    "export_contextual",
    "export_phrases",
    "plan_windows",
    "__version__",
]
