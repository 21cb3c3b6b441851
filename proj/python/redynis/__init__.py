"""Traffic-aware dynamic repartitioning for a distributed key-value store.

The compiled extension carries the domain model (ownership math, placement
planning, metadata JSON codec) and a one-call benchmark runner over the
simulated cluster.
"""

import json as _json

from ._redynis import (
    KeyMetadata,
    KeyPlacement,
    OwnershipPolicy,
    PlacementPlan,
    Request,
    eligible_owners,
    generate_workload,
    metadata_from_json,
    metadata_to_json,
    ownership_fraction,
    placement_pass,
    run_bench,
    validate_policy,
)

__all__ = [
    "KeyMetadata",
    "KeyPlacement",
    "OwnershipPolicy",
    "PlacementPlan",
    "Request",
    "bench",
    "eligible_owners",
    "generate_workload",
    "metadata_from_json",
    "metadata_to_json",
    "ownership_fraction",
    "placement_pass",
    "run_bench",
    "validate_policy",
]


def bench(scenario, **kwargs):
    """run_bench, with the report parsed into a dict."""
    return _json.loads(run_bench(scenario, **kwargs))
