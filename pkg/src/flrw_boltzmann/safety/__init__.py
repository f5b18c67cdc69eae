"""Run guardrails for flrw-boltzmann."""

from __future__ import annotations

from .guardrails import GuardrailResult, Guardrails

__all__ = [
    "Guardrails",
    "GuardrailResult",
]
