"""Projective flows: representation, verification, catalog, conjugation and extrusion."""

from projflow.flows.algebraic import AlgebraicEquation, BranchEvaluator
from projflow.flows.catalog import catalog, catalog_list, rational_catalog_flows
from projflow.flows.conjugation import (
    BirMap,
    BirMap1H,
    LinMap,
    TupleBirMap,
    apply_bir,
    conjugate_flow,
    conjugate_vf,
    conjugate_vf_linear,
    involution_i,
    l0_map,
    swap_map,
)
from projflow.flows.core import (
    FlowMap,
    SeriesFlow,
    VectorField,
    level0_detect,
    level0_flow,
    series_flow,
    time_shift,
    vector_field,
    verify_boundary,
    verify_pde,
    verify_translation,
)
from projflow.flows.extrude import (
    AffineSection,
    Integral3,
    extrude_flow,
    level0_ndim,
    section_affine,
    vf3_from_integral,
)
from projflow.flows.series import Series, expand_series

__all__ = [
    # Flows and fields
    "FlowMap",
    "VectorField",
    "SeriesFlow",
    "time_shift",
    "vector_field",
    "verify_boundary",
    "verify_translation",
    "verify_pde",
    "series_flow",
    "level0_detect",
    "level0_flow",
    # Series
    "Series",
    "expand_series",
    # Implicit flows
    "AlgebraicEquation",
    "BranchEvaluator",
    # Catalog
    "catalog",
    "catalog_list",
    "rational_catalog_flows",
    # Conjugation
    "BirMap",
    "BirMap1H",
    "LinMap",
    "TupleBirMap",
    "apply_bir",
    "conjugate_flow",
    "conjugate_vf",
    "conjugate_vf_linear",
    "involution_i",
    "l0_map",
    "swap_map",
    # Extrusion
    "AffineSection",
    "Integral3",
    "extrude_flow",
    "level0_ndim",
    "section_affine",
    "vf3_from_integral",
]
