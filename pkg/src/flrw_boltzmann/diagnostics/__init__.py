"""Observables, weighted norms, CSV records and the property audits."""

from .audits import (
    AUDIT_NAMES,
    AuditReport,
    audit_jacobian,
    audit_kinematics,
    audit_lemma42,
    audit_lemma43,
    check_conservation,
    fit_growth_constant,
    jacobian_scan,
    lemma42_limit,
    run_audit,
    run_conservation_audit,
    run_jacobian_audit,
    run_kinematics_audit,
    run_lemma42_audit,
    run_lemma43_audit,
)
from .moments import (
    EnergyConditionReport,
    energy_conditions,
    energy_density,
    number_integral,
    pressure,
)
from .norms import (
    NormSpec,
    decay_envelope,
    multi_indices,
    radial_moments_oracle,
    radial_norm_oracle,
    weighted_norm,
)
from .records import DiagnosticsRecord, RecordWriter, csv_header, format_float, read_records

__all__ = [
    "AUDIT_NAMES",
    "AuditReport",
    "DiagnosticsRecord",
    "EnergyConditionReport",
    "NormSpec",
    "RecordWriter",
    "audit_jacobian",
    "audit_kinematics",
    "audit_lemma42",
    "audit_lemma43",
    "check_conservation",
    "csv_header",
    "decay_envelope",
    "energy_conditions",
    "energy_density",
    "fit_growth_constant",
    "format_float",
    "jacobian_scan",
    "lemma42_limit",
    "multi_indices",
    "number_integral",
    "pressure",
    "radial_moments_oracle",
    "radial_norm_oracle",
    "read_records",
    "run_audit",
    "run_conservation_audit",
    "run_jacobian_audit",
    "run_kinematics_audit",
    "run_lemma42_audit",
    "run_lemma43_audit",
    "weighted_norm",
]
