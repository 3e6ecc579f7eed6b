"""Lab layer: LangGraph experiment pipeline, report emission, verification suites."""
