"""Semipositive curvature, tautological bundles and Hopf surfaces: exact class
computations and numerical curvature checks."""

from .bundle_expr import EvaluationError, ParseError, run_query
from .class_ring import BasePresentation, BundleClass, GradedClass, projectivize, tangent_bundle
from .curvature import CurvatureTensor, DiffConfig, MetricField, chern_curvature, griffiths_min
from .hopf import HopfParams, gauduchon_metric, solve_phi

__version__ = "0.1.0"
