from .aggregate import AggregateTable, aggregate, winner_census, TABLE_COLUMNS
from .bootstrap import BootstrapResult, paired_bootstrap, unpaired_bootstrap
from .correlation import pearson_r, pearson_r_p, pearson_matrix
from .lengthbin import length_bin_compare, LengthBinReport

__all__ = [
    "AggregateTable",
    "aggregate",
    "winner_census",
    "TABLE_COLUMNS",
    "BootstrapResult",
    "paired_bootstrap",
    "unpaired_bootstrap",
    "pearson_r",
    "pearson_r_p",
    "pearson_matrix",
    "length_bin_compare",
    "LengthBinReport",
]
