"""Online streaming feature selection.

Selectors for features that arrive one at a time (Alpha-investing, OSFS,
Fast-OSFS, SAOLA) or in groups (group-SAOLA), the independence measures they
rely on, and tools to evaluate and statistically compare selectors.
"""

from .dataset import (
    END_OF_STREAM,
    Arrival,
    Dataset,
    FeatureStream,
    Group,
    load_arff,
    load_csv,
    load_dataset,
    load_groups,
    load_libsvm,
    make_stream,
    write_csv,
)
from .estimators import GroupSAOLASelector, OnlineStreamingSelector
from .exceptions import (
    ConfigurationError,
    DataError,
    LofsError,
    ParseError,
    StreamingViolation,
    ValidationError,
)
from .lfi import SelectionState, SelectorConfig, run_selector
from .lgf import GroupSelectionState, run_group_selector
from .measures import CLASS, chi2_test, fisher_z_test, g2_test, mutual_information
from .sc import compare, evaluate, friedman_test, nemenyi_cd

__version__ = "0.1.0"

__all__ = [
    "CLASS",
    "END_OF_STREAM",
    "Arrival",
    "ConfigurationError",
    "DataError",
    "Dataset",
    "FeatureStream",
    "Group",
    "GroupSAOLASelector",
    "GroupSelectionState",
    "LofsError",
    "OnlineStreamingSelector",
    "ParseError",
    "SelectionState",
    "SelectorConfig",
    "StreamingViolation",
    "ValidationError",
    "chi2_test",
    "compare",
    "evaluate",
    "fisher_z_test",
    "friedman_test",
    "g2_test",
    "load_arff",
    "load_csv",
    "load_dataset",
    "load_groups",
    "load_libsvm",
    "make_stream",
    "mutual_information",
    "nemenyi_cd",
    "run_group_selector",
    "run_selector",
    "write_csv",
]
