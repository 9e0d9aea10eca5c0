from __future__ import annotations

from vacqrng.core.logging.setup import bind_context, clear_context, configure_logging, unbind_context

__all__ = ["bind_context", "clear_context", "configure_logging", "unbind_context"]
