from typing import Optional, Tuple

from flask import current_app

from ..models.sampling import SamplingModel
from ..models.tree import DegreeModel
from ..services.enumeration_service import EnumerationService
from ..utils.validators import validate_degree_model

LABELED = "labeled"


def resolve_model(name: Optional[str], degrees: Optional[str], weights: Optional[str]) -> Tuple[str, DegreeModel]:
    """Nombre visible y modelo de grados; los árboles etiquetados son el modelo de Poisson."""
    if (name or "").strip().lower() == LABELED and degrees is None and weights is None:
        return LABELED, DegreeModel.poisson()
    model = validate_degree_model(name, degrees, weights)
    return model.name, model


def enumeration_ceiling(model: DegreeModel) -> int:
    if EnumerationService.ceiling_for(model) == EnumerationService.RESTRICTED_ENUMERATION_CEILING:
        return current_app.config["RESTRICTED_ENUMERATION_CEILING"]
    return current_app.config["ENUMERATION_CEILING"]


def sampling_model_for(label: str, model: DegreeModel, polya: bool = False) -> SamplingModel:
    if polya:
        return SamplingModel.polya(None if label in ("plane", LABELED) else model)
    if label == LABELED:
        return SamplingModel.labeled()
    if label == "plane":
        return SamplingModel.plane()
    return SamplingModel.cgw(model)
