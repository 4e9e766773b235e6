"""Cross-field validation of run configurations; every helper returns a list of messages."""

from vpconfine.models import COMPATIBLE_FIELDS


def validate_species(species):
    """Unique labels and at least one species."""
    errors = []
    if not species:
        errors.append("species: at least one species is required.")
    labels = [sp.label for sp in species]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        errors.append(f"species: duplicate labels {', '.join(duplicates)}.")
    return errors


def validate_geometry_field(geometry, field):
    errors = []
    expected = COMPATIBLE_FIELDS.get(geometry.kind)
    if expected != field.kind:
        errors.append(
            f"field: '{field.kind}' does not match geometry '{geometry.kind}' "
            f"(expected '{expected}')."
        )
        return errors
    if field.kind == "mirror_profile" and not field.min_strength(geometry.l) > 0:
        errors.append("field: mirror profile a(x3) must stay positive on [-l, l].")
    if field.kind in ("axial_constant", "poloidal_torus") and not field.b > 0:
        errors.append("field: b must be positive.")
    if field.kind == "poloidal_torus" and not geometry.contains(field.r0, field.z0):
        errors.append("field: the magnetic axis must lie inside the cross-section.")
    return errors


def validate_family(species, family, *, required=True):
    """Family workflows need the base cutoff and exactly one species of each sign."""
    errors = []
    if family is None:
        if required:
            errors.append("family: a family block is required for this workflow.")
        return errors
    positive = [sp for sp in species if sp.charge > 0]
    negative = [sp for sp in species if sp.charge < 0]
    if len(positive) != 1 or len(negative) != 1 or len(species) != 2:
        errors.append("family: needs exactly one positive and one negative species.")
    if not (family.E0 > 0 and family.I0 > 0):
        errors.append("family: base cutoff needs E0 > 0 and I0 > 0.")
    return errors


def validate_cutoffs(species, family):
    """Species without their own cutoff take it from the family block."""
    errors = []
    missing = [sp["label"] for sp in species if sp.get("cutoff") is None]
    if missing and family is None:
        errors.append(
            f"species {', '.join(missing)}: cutoff block missing and no family block given."
        )
    return errors
