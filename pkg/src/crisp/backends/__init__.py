from .base import (
    Backend,
    BackendConfig,
    BackendError,
    GenerationRequest,
    ResponseDecodeError,
    TransportError,
    build_backend,
    prefix_for_index,
)
from .prompts import build_prompt, render_options
from .remote import RemoteBackend
from .simulator import SCENARIOS, SimulatorBackend, SimulatorScenario

__all__ = [
    "Backend",
    "BackendConfig",
    "BackendError",
    "GenerationRequest",
    "RemoteBackend",
    "ResponseDecodeError",
    "SCENARIOS",
    "SimulatorBackend",
    "SimulatorScenario",
    "TransportError",
    "build_backend",
    "build_prompt",
    "prefix_for_index",
    "render_options",
]
