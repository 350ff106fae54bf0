"""
File formats: kernel spec JSON, point-set CSV and Gram matrix files.
"""
from .gram_file import GRAM_FILE_VERSION, read_gram_file, write_gram_file
from .points import read_points, write_points
from .specs import (
    KernelSpecFile,
    ResolvedSpec,
    load_spec,
    resolve_spec,
    spec_hash,
    validity_suite,
)

__all__ = [
    # Spec files
    'KernelSpecFile',
    'ResolvedSpec',
    'load_spec',
    'resolve_spec',
    'spec_hash',
    'validity_suite',

    # Points
    'read_points',
    'write_points',

    # Gram files
    'GRAM_FILE_VERSION',
    'read_gram_file',
    'write_gram_file'
]
