"""Bridge from torch image classifiers to the OOD evaluation toolkit's
logit/score file formats, including full ODIN (temperature scaling plus
gradient-based input perturbation, which needs model access)."""

from .export import (
    ExportError,
    ExportJob,
    export_logits,
    export_odin_scores,
    list_images,
    load_model,
)

__version__ = "0.1.0"
