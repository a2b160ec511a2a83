"""Offline accessibility audit engine for captured Android screens.

Detects ten accessibility issue types on UI hierarchy dumps and screenshots,
extracts activity launch parameters from manifests and a program IR,
simulates activity launching, and aggregates issue datasets.
"""
from .checks import CheckConfig, Issue, IssueType, audit_screen
from .color import Color, contrast_ratio, relative_luminance
from .kernels import BACKEND
from .ui_model import Bounds, PixelGrid, Screen, ViewNode, parse_hierarchy, px_to_dp

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Bounds", "CheckConfig", "Color", "Issue", "IssueType", "PixelGrid", "Screen",
    "ViewNode", "audit_screen", "contrast_ratio", "parse_hierarchy", "px_to_dp",
    "relative_luminance",
]
