"""Build domain objects from plain JSON-style dictionaries.

Descriptors keep CLI configs and test fixtures declarative: each one is
a {"family": ..., "params": {...}} record (interfaces and densities add
"n"), and a problem descriptor bundles ball, interface, density and
optional quadrature settings.  Malformed input raises DescriptorError
naming the offending field so the CLI can map it to its schema exit
code.
"""

from __future__ import annotations

from .geometry import SphereInterface, make_density, make_interface
from .greens import BallContext
from .modulus import Modulus
from .potential import LayerProblem
from .quadrature import QuadratureSpec

__all__ = [
    "DescriptorError",
    "density_from_descriptor",
    "interface_from_descriptor",
    "modulus_from_descriptor",
    "problem_from_descriptor",
    "quadrature_spec_from_descriptor",
]

_MODULUS_FAMILIES = ("power", "inverse_log", "log_power", "table", "max_of", "zero")


class DescriptorError(ValueError):
    """A descriptor dictionary is malformed or references unknowns."""


def _require(mapping, key, context):
    if not isinstance(mapping, dict):
        raise DescriptorError(f"{context} must be an object, got {type(mapping).__name__}")
    if key not in mapping:
        raise DescriptorError(f"{context} is missing required field '{key}'")
    return mapping[key]


def modulus_from_descriptor(desc) -> Modulus:
    family = _require(desc, "family", "modulus descriptor")
    params = dict(desc.get("params", {}))
    try:
        if family == "power":
            return Modulus.power(float(params.pop("alpha")))
        if family == "inverse_log":
            return Modulus.inverse_log()
        if family == "log_power":
            return Modulus.log_power(float(params.pop("beta")))
        if family == "table":
            return Modulus.from_table(
                params.pop("radii"),
                params.pop("values"),
                value_at_zero=float(params.pop("value_at_zero", 0.0)),
            )
        if family == "max_of":
            return Modulus.max_of(
                modulus_from_descriptor(params.pop("first")),
                modulus_from_descriptor(params.pop("second")),
            )
        if family == "zero":
            return Modulus.zero()
    except DescriptorError:
        raise
    except KeyError as exc:
        raise DescriptorError(f"modulus family '{family}' needs parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"bad modulus parameters: {exc}") from exc
    raise DescriptorError(
        f"unknown modulus family '{family}'; expected one of {_MODULUS_FAMILIES}"
    )


def _table_params(params):
    # table interfaces/densities carry their modulus as a sub-descriptor
    if "omega" in params:
        params = dict(params)
        params["omega"] = modulus_from_descriptor(params["omega"])
    return params


def interface_from_descriptor(desc):
    family = _require(desc, "family", "interface descriptor")
    params = dict(desc.get("params", {}))
    if family == "sphere":
        try:
            return SphereInterface(radius=float(params.pop("radius")))
        except KeyError as exc:
            raise DescriptorError(f"sphere interface needs parameter {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise DescriptorError(f"bad sphere parameters: {exc}") from exc
    n = int(_require(desc, "n", "interface descriptor"))
    try:
        return make_interface(family, n=n, **_table_params(params))
    except DescriptorError:
        raise
    except KeyError as exc:
        raise DescriptorError(f"interface family '{family}' needs parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"bad interface descriptor: {exc}") from exc


def density_from_descriptor(desc):
    family = _require(desc, "family", "density descriptor")
    n = int(_require(desc, "n", "density descriptor"))
    params = dict(desc.get("params", {}))
    try:
        return make_density(family, n=n, **_table_params(params))
    except DescriptorError:
        raise
    except KeyError as exc:
        raise DescriptorError(f"density family '{family}' needs parameter {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"bad density descriptor: {exc}") from exc


def quadrature_spec_from_descriptor(desc=None, tol=None) -> QuadratureSpec:
    """Spec from optional overrides; tol (CLI --tol) wins over the dict."""
    desc = dict(desc or {})
    known = {"target_tol", "max_depth", "base_order", "singular_split_radius"}
    extra = set(desc) - known
    if extra:
        raise DescriptorError(f"unknown quadrature fields {sorted(extra)}")
    if tol is not None:
        desc["target_tol"] = tol
    base = QuadratureSpec()
    try:
        return QuadratureSpec(
            target_tol=float(desc.get("target_tol", base.target_tol)),
            max_depth=int(desc.get("max_depth", base.max_depth)),
            base_order=int(desc.get("base_order", base.base_order)),
            singular_split_radius=float(
                desc.get("singular_split_radius", base.singular_split_radius)
            ),
        )
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"bad quadrature spec: {exc}") from exc


def problem_from_descriptor(desc, tol=None) -> LayerProblem:
    ball = _require(desc, "ball", "problem descriptor")
    n = int(_require(ball, "n", "ball descriptor"))
    radius = float(_require(ball, "radius", "ball descriptor"))
    try:
        ctx = BallContext(n, radius)
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"bad ball descriptor: {exc}") from exc
    interface = interface_from_descriptor(_require(desc, "interface", "problem descriptor"))
    density = density_from_descriptor(_require(desc, "density", "problem descriptor"))
    spec = quadrature_spec_from_descriptor(desc.get("quadrature"), tol=tol)
    try:
        return LayerProblem(ctx, interface, density, spec)
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"inconsistent problem descriptor: {exc}") from exc
