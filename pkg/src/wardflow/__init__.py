"""Transfer-network analysis for patient location event logs."""

__version__ = "0.1.0"

from .eventlog import (
    AdmissionJourney,
    CategoryMap,
    IngestStats,
    LocationEvent,
    LogSchema,
    apply_category_map,
    parse_event_log,
    read_category_map,
    reconstruct_journeys,
)
from .network import (
    TransferNetwork,
    as_symmetric_directed,
    build_network,
    export_network,
    import_network,
    undirected_projection,
)

__all__ = [
    "__version__",
    "AdmissionJourney",
    "CategoryMap",
    "IngestStats",
    "LocationEvent",
    "LogSchema",
    "TransferNetwork",
    "apply_category_map",
    "as_symmetric_directed",
    "build_network",
    "export_network",
    "import_network",
    "parse_event_log",
    "read_category_map",
    "reconstruct_journeys",
    "undirected_projection",
]
