"""RunConfig ingestion: marshmallow schemas, cross validation and line-referenced errors."""

import hashlib
import json
import re
from dataclasses import dataclass

from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields,
    post_load,
    validate,
    validates_schema,
)

from vpconfine.equilibrium.family import family_cutoff
from vpconfine.errors import ConfigurationError
from vpconfine.models import (
    AxialConstant,
    CutoffSpec,
    DiscSection,
    MirrorCylinder,
    MirrorProfile,
    PoloidalTorus,
    Problem,
    QuadratureSpec,
    RadialDisc,
    RectSection,
    SolverSettings,
    Species,
    ToroidalCrossSection,
)
from vpconfine.utils.validators import (
    validate_cutoffs,
    validate_family,
    validate_geometry_field,
    validate_species,
)

POSITIVE = validate.Range(min=0, min_inclusive=False)


class StrictSchema(Schema):
    class Meta:
        unknown = RAISE


class VariantField(fields.Field):
    """Dispatch a nested object to a schema chosen by its ``kind`` key."""

    def __init__(self, variants, **kwargs):
        super().__init__(**kwargs)
        self.variants = variants

    def _deserialize(self, value, attr, data, **kwargs):
        if not isinstance(value, dict):
            raise ValidationError("must be an object.")
        kind = value.get("kind")
        if kind not in self.variants:
            raise ValidationError(
                {"kind": [f"must be one of: {', '.join(sorted(self.variants))}."]}
            )
        return self.variants[kind]().load(value)


def _kind(name):
    return fields.String(required=True, validate=validate.Equal(name))


# Cutoffs and species ---------------------------------------------------------

class CutoffSchema(StrictSchema):
    E0 = fields.Float(required=True)
    I0 = fields.Float(required=True)
    amplitude = fields.Float(load_default=1.0, validate=validate.Range(min=0))
    wE = fields.Float(load_default=1.0, validate=POSITIVE)
    wI = fields.Float(load_default=1.0, validate=POSITIVE)

    @post_load
    def make_cutoff(self, data, **kwargs):
        return CutoffSpec(**data)


class SpeciesSchema(StrictSchema):
    label = fields.String(required=True, validate=validate.Length(min=1))
    charge = fields.Float(required=True)
    mass = fields.Float(required=True)
    cutoff = fields.Nested(CutoffSchema, load_default=None, allow_none=True)

    @validates_schema
    def validate_charge_mass(self, data, **kwargs):
        label = data.get("label", "?")
        errors = {}
        if data.get("charge") == 0:
            errors["charge"] = [f"species '{label}': charge must be nonzero."]
        mass = data.get("mass")
        if mass is not None and not mass > 0:
            errors["mass"] = [f"species '{label}': mass must be positive."]
        if errors:
            raise ValidationError(errors)


# Geometries -------------------------------------------------------------------

class RadialDiscSchema(StrictSchema):
    kind = _kind(RadialDisc.kind)
    r0 = fields.Float(required=True, validate=POSITIVE)

    @post_load
    def make_geometry(self, data, **kwargs):
        return RadialDisc(r0=data["r0"])


class RectSchema(StrictSchema):
    kind = _kind(RectSection.kind)
    r_min = fields.Float(required=True, validate=POSITIVE)
    r_max = fields.Float(required=True)
    z_min = fields.Float(required=True)
    z_max = fields.Float(required=True)

    @validates_schema
    def validate_box(self, data, **kwargs):
        errors = {}
        if data["r_max"] <= data["r_min"]:
            errors["r_max"] = ["must exceed r_min."]
        if data["z_max"] <= data["z_min"]:
            errors["z_max"] = ["must exceed z_min."]
        if errors:
            raise ValidationError(errors)

    @post_load
    def make_shape(self, data, **kwargs):
        data.pop("kind")
        return RectSection(**data)


class DiscShapeSchema(StrictSchema):
    kind = _kind(DiscSection.kind)
    r_c = fields.Float(required=True)
    z_c = fields.Float(required=True)
    radius = fields.Float(required=True, validate=POSITIVE)

    @validates_schema
    def validate_clearance(self, data, **kwargs):
        if data["r_c"] - data["radius"] <= 0:
            raise ValidationError({"radius": ["cross-section must stay in r > 0."]})

    @post_load
    def make_shape(self, data, **kwargs):
        data.pop("kind")
        return DiscSection(**data)


class ToroidalSchema(StrictSchema):
    kind = _kind(ToroidalCrossSection.kind)
    shape = VariantField({RectSection.kind: RectSchema, DiscSection.kind: DiscShapeSchema},
                         required=True)

    @post_load
    def make_geometry(self, data, **kwargs):
        return ToroidalCrossSection(shape=data["shape"])


class MirrorSchema(StrictSchema):
    kind = _kind(MirrorCylinder.kind)
    r0 = fields.Float(required=True, validate=POSITIVE)
    l = fields.Float(required=True, validate=POSITIVE)  # noqa: E741

    @post_load
    def make_geometry(self, data, **kwargs):
        return MirrorCylinder(r0=data["r0"], l=data["l"])


GEOMETRIES = {
    RadialDisc.kind: RadialDiscSchema,
    ToroidalCrossSection.kind: ToroidalSchema,
    MirrorCylinder.kind: MirrorSchema,
}


# Fields -----------------------------------------------------------------------

class AxialConstantSchema(StrictSchema):
    kind = _kind(AxialConstant.kind)
    b = fields.Float(required=True)


class PoloidalTorusSchema(StrictSchema):
    kind = _kind(PoloidalTorus.kind)
    b = fields.Float(required=True)
    center = fields.List(fields.Float(), required=True, validate=validate.Length(equal=2))
    toroidal = fields.Float(load_default=0.0)


class MirrorProfileSchema(StrictSchema):
    kind = _kind(MirrorProfile.kind)
    a0 = fields.Float(required=True)
    a2 = fields.Float(load_default=0.0)


FIELDS = {
    AxialConstant.kind: AxialConstantSchema,
    PoloidalTorus.kind: PoloidalTorusSchema,
    MirrorProfile.kind: MirrorProfileSchema,
}


def make_field(data, c_light):
    kind = data["kind"]
    if kind == AxialConstant.kind:
        return AxialConstant(b=data["b"], c_light=c_light)
    if kind == PoloidalTorus.kind:
        r0, z0 = data["center"]
        return PoloidalTorus(b=data["b"], r0=r0, z0=z0, toroidal=data["toroidal"],
                             c_light=c_light)
    return MirrorProfile(a0=data["a0"], a2=data["a2"], c_light=c_light)


# Solver and run config ----------------------------------------------------------

class QuadratureSchema(StrictSchema):
    order = fields.Integer(load_default=None, validate=validate.Range(min=4))
    subdivisions = fields.Integer(load_default=None, validate=validate.Range(min=2))


class SolverSchema(StrictSchema):
    nx = fields.Integer(load_default=None, validate=validate.Range(min=8))
    nz = fields.Integer(load_default=None, validate=validate.Range(min=8))
    tol = fields.Float(load_default=None, validate=POSITIVE)
    max_iter = fields.Integer(load_default=None, validate=validate.Range(min=1))
    K_safety = fields.Float(load_default=None, validate=validate.Range(min=1))
    quadrature = fields.Nested(QuadratureSchema, load_default=dict)
    workers = fields.Integer(load_default=None, validate=validate.Range(min=1))


class UnitsSchema(StrictSchema):
    c_light = fields.Float(load_default=1.0, validate=POSITIVE)


class RunConfigSchema(StrictSchema):
    geometry = VariantField(GEOMETRIES, required=True)
    field = VariantField(FIELDS, required=True)
    species = fields.List(fields.Nested(SpeciesSchema), required=True,
                          validate=validate.Length(min=1))
    solver = fields.Nested(SolverSchema, load_default=dict)
    units = fields.Nested(UnitsSchema, load_default=dict)
    boundary = fields.Float(load_default=0.0)
    family = fields.Nested(CutoffSchema, load_default=None, allow_none=True)
    output = fields.String(load_default=None, allow_none=True)


@dataclass(frozen=True)
class RunConfig:
    problem: Problem
    output: str
    source: str
    config_hash: str


# Diagnostics --------------------------------------------------------------------

def flatten_messages(messages, prefix=()):
    """Yield (path, message) pairs from a nested marshmallow error dict."""
    if isinstance(messages, dict):
        for key, value in messages.items():
            path = prefix if key == "_schema" else prefix + (key,)
            yield from flatten_messages(value, path)
    elif isinstance(messages, (list, tuple)):
        for value in messages:
            yield from flatten_messages(value, prefix)
    else:
        yield prefix, str(messages)


def _key_pattern(key):
    return re.compile(r'"' + re.escape(str(key)) + r'"\s*:')


def locate(text, path):
    """1-based line of the last key of ``path`` in the JSON source (1 if unknown).

    An integer index k selects the (k + 1)-th occurrence of the key that
    follows it; a trailing index points at its list key.
    """
    offset = 0
    steps = list(path)
    position = 0
    for n, key in enumerate(steps):
        if isinstance(key, int):
            following = next((k for k in steps[n + 1:] if not isinstance(k, int)), None)
            if following is None:
                continue
            matches = list(_key_pattern(following).finditer(text, offset))
            if key < len(matches):
                offset = matches[key].start()
            continue
        match = _key_pattern(key).search(text, offset)
        if match is None:
            break
        position = offset = match.start()
    return text.count("\n", 0, position) + 1


def _dotted(path):
    return ".".join(str(part) for part in path) or "<root>"


def diagnostics(source, text, messages):
    return [
        f"{source}:{locate(text, path)}: {_dotted(path)}: {message}"
        for path, message in flatten_messages(messages)
    ]


# Loading ------------------------------------------------------------------------

def config_hash(raw):
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _solver_settings(block, settings):
    quad = block.get("quadrature") or {}

    def pick(value, key):
        return settings[key] if value is None else value

    return SolverSettings(
        nx=pick(block.get("nx"), "GRID_NX"),
        nz=pick(block.get("nz"), "GRID_NZ"),
        tol=pick(block.get("tol"), "SOLVER_TOL"),
        max_iter=pick(block.get("max_iter"), "SOLVER_MAX_ITER"),
        k_safety=pick(block.get("K_safety"), "K_SAFETY"),
        quadrature=QuadratureSpec(
            order=pick(quad.get("order"), "QUAD_ORDER"),
            subdivisions=pick(quad.get("subdivisions"), "QUAD_SUBDIVISIONS"),
        ),
        workers=pick(block.get("workers"), "MAX_WORKERS"),
        direct_limit=settings["DIRECT_SOLVER_LIMIT"],
        krylov_maxiter=settings["KRYLOV_MAXITER"],
    )


def _prefixed(source, text, errors):
    """Attach the line of the leading top-level key to validator messages."""
    out = []
    for message in errors:
        key = message.split(":", 1)[0].split()[0]
        out.append(f"{source}:{locate(text, (key,))}: {message}")
    return out


def build_problem(data, settings, source="<config>", text=""):
    """Problem from schema-loaded data; raises ConfigurationError with diagnostics."""
    errors = validate_cutoffs(data["species"], data["family"])
    if errors:
        raise ConfigurationError(_prefixed(source, text, errors))
    geometry = data["geometry"]
    field = make_field(data["field"], data["units"].get("c_light", 1.0))
    family = data["family"]
    species = []
    for block in data["species"]:
        cutoff = block["cutoff"]
        draft = Species(block["label"], block["charge"], block["mass"],
                        cutoff or family)
        if cutoff is None:
            # species without their own cutoff start at the family midpoint
            draft = draft.with_cutoff(
                family_cutoff(family, draft, 0.5, geometry.velocity_dim)
            )
        species.append(draft)

    errors = validate_species(species) + validate_geometry_field(geometry, field)
    errors += validate_family(species, family, required=False)
    if errors:
        raise ConfigurationError(_prefixed(source, text, errors))
    return Problem(
        geometry=geometry,
        field=field,
        species=tuple(species),
        solver=_solver_settings(data["solver"], settings),
        boundary=data["boundary"],
        family=family,
    )


def load_config(path, settings):
    """Parse, validate and build the RunConfig stored at ``path``."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config ({exc.strerror}).") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg}).") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}:1: config must be a JSON object.")
    try:
        data = RunConfigSchema().load(raw)
    except ValidationError as exc:
        raise ConfigurationError(diagnostics(path, text, exc.messages)) from exc
    try:
        problem = build_problem(data, settings, source=path, text=text)
    except ConfigurationError as exc:
        if all(message.startswith(f"{path}:") for message in exc.errors):
            raise
        raise ConfigurationError([f"{path}:1: {m}" for m in exc.errors]) from exc
    return RunConfig(
        problem=problem,
        output=data["output"] or settings["OUTPUT_DIR"],
        source=path,
        config_hash=config_hash(raw),
    )
