"""
LangGraph experiment graph construction.

Builds the state machine that orchestrates:
- Model resolution and boundary prefix selection
- Equipartition runs along metric spheres, horoballs, horoshells and Folner sets
- psi-mixing decay measurements
- Maximal-inequality tail checks
- Report summarization
"""

from __future__ import annotations

import time
from pathlib import Path

from langgraph.graph import END, StateGraph

from lab.nodes import (
    prepare,
    run_maximal_node,
    run_psi_node,
    run_smb_node,
    summarize,
    # Conditional edge function
    route_by_kind,
)
from lab.state import LabState
from schemas.experiment import ExperimentSpec
from schemas.report import ConvergenceReport, MaximalReport, PsiDecayReport


def build_graph() -> StateGraph:
    """Construct the experiment state graph.

    Returns
    -------
    StateGraph
        The LangGraph graph (not yet compiled; call .compile()).
    """
    workflow = StateGraph(LabState)

    # ─── Add Nodes ───────────────────────────────────────────────────────
    workflow.add_node("prepare", prepare)
    workflow.add_node("run_smb_node", run_smb_node)
    workflow.add_node("run_psi_node", run_psi_node)
    workflow.add_node("run_maximal_node", run_maximal_node)
    workflow.add_node("summarize", summarize)

    # ─── Entry Point ─────────────────────────────────────────────────────
    workflow.set_entry_point("prepare")

    # ─── Conditional Edge: After preparation ────────────────────────────
    workflow.add_conditional_edges(
        "prepare",
        route_by_kind,
        {
            "run_smb_node": "run_smb_node",
            "run_psi_node": "run_psi_node",
            "run_maximal_node": "run_maximal_node",
        },
    )

    # ─── Every experiment → summarize → end ─────────────────────────────
    workflow.add_edge("run_smb_node", "summarize")
    workflow.add_edge("run_psi_node", "summarize")
    workflow.add_edge("run_maximal_node", "summarize")
    workflow.add_edge("summarize", END)

    return workflow


def create_app():
    """Build and compile the graph."""
    return build_graph().compile()


def invoke_lab(
    spec: ExperimentSpec,
    kind: str,
    base_dir: str | Path | None = None,
    app=None,
) -> LabState:
    """Run one experiment through the pipeline.

    Parameters
    ----------
    spec : ExperimentSpec
        The experiment.
    kind : str
        One of ``"smb"``, ``"psi"``, ``"maximal"``.
    base_dir : str or Path, optional
        Directory for resolving a relative ``model_path``.
    app : optional
        Pre-compiled graph. If None, creates a new one.

    Returns
    -------
    LabState
        The final state; the report sits under ``"report"``.
    """
    if app is None:
        app = create_app()
    started = time.perf_counter()
    final = app.invoke({
        "spec": spec,
        "kind": kind,
        "base_dir": None if base_dir is None else str(base_dir),
        "steps": [],
    })
    final["report"].metadata.wall_time = time.perf_counter() - started
    return final


def run_smb(spec: ExperimentSpec, base_dir: str | Path | None = None) -> ConvergenceReport:
    return invoke_lab(spec, "smb", base_dir)["report"]


def run_psi_decay(spec: ExperimentSpec, base_dir: str | Path | None = None) -> PsiDecayReport:
    return invoke_lab(spec, "psi", base_dir)["report"]


def run_maximal(spec: ExperimentSpec, base_dir: str | Path | None = None) -> MaximalReport:
    return invoke_lab(spec, "maximal", base_dir)["report"]
