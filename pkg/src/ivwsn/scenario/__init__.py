"""
Scenario files: format, templates and validation.
"""

from .loader import (
    TEMPLATE_DIR,
    apply_override,
    build_scenario,
    list_templates,
    load_scenario,
    parse_document,
    parse_override_value,
    resolve_reference,
)
from .model import (
    AfhSettings,
    ChannelSettings,
    ExplicitEntry,
    LinkSpec,
    LossRule,
    NodeSpec,
    PiconetSpec,
    PkeKeySpec,
    PkeSettings,
    RunSettings,
    Scenario,
    ScheduleSettings,
    SensorConfig,
    ms_to_us,
)

__all__ = [
    "AfhSettings",
    "ChannelSettings",
    "ExplicitEntry",
    "LinkSpec",
    "LossRule",
    "NodeSpec",
    "PiconetSpec",
    "PkeKeySpec",
    "PkeSettings",
    "RunSettings",
    "Scenario",
    "ScheduleSettings",
    "SensorConfig",
    "TEMPLATE_DIR",
    "apply_override",
    "build_scenario",
    "list_templates",
    "load_scenario",
    "ms_to_us",
    "parse_document",
    "parse_override_value",
    "resolve_reference",
]
