"""
LangGraph lab state definition.

The state flows through the graph and is updated by each node.
"""

from typing import Any, TypedDict

from core.boundary import BoundaryGroup
from core.processes import ProcessModel
from schemas.experiment import ExperimentSpec


class LabState(TypedDict, total=False):
    """State schema for the experiment graph.

    Attributes
    ----------
    spec : ExperimentSpec
        The experiment to run.
    kind : str
        Which experiment the graph routes to: smb / psi / maximal.
    base_dir : str | None
        Directory that relative ``model_path`` entries are resolved against.
    model : ProcessModel
        Resolved process model.
    group : BoundaryGroup
        Boundary group bound to the spec's alphabet.
    xi : tuple[int, ...]
        Boundary prefix used by the horospherical and Folner families.
    report : Any
        ConvergenceReport, PsiDecayReport or MaximalReport.
    steps : list[dict]
        Pipeline trace, copied into the report metadata.
    """
    spec: ExperimentSpec
    kind: str
    base_dir: str | None
    model: ProcessModel
    group: BoundaryGroup
    xi: tuple[int, ...]
    report: Any
    steps: list[dict]
