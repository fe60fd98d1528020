"""Identifiability of linear structural equation models with latent factors."""

from .graph import (
    GraphFormatError,
    LatentFactorGraph,
    MixedGraph,
    bidirected_expansion,
    canonical_form,
    htr,
    latent_projection,
    pa_latent,
    pa_observed,
    parse_graph,
    parse_mixed_graph,
)
from .criterion import (
    Certificate,
    HalfTrek,
    HtcTriple,
    MalformedTripleError,
    build_flow_graph,
    check_triple,
    find_triple,
    htc_identifiable,
    lfhtc_identifiable,
)
from .flow import FlowNetwork, max_flow

__version__ = "0.1.0"
