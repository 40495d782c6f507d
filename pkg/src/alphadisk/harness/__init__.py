"""Experiment orchestration: configs, run records, CSV/SVG output, CLI."""
