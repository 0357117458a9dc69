from .responses import RawResponses, ResponseMatrix, aggregate, infer_categories, from_patterns
from .io import (
    read_responses_csv,
    write_responses_csv,
    read_json,
    write_json,
    read_response_matrix_json,
)

__all__ = [
    "RawResponses",
    "ResponseMatrix",
    "aggregate",
    "infer_categories",
    "from_patterns",
    "read_responses_csv",
    "write_responses_csv",
    "read_json",
    "write_json",
    "read_response_matrix_json",
]
