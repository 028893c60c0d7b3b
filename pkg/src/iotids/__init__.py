"""Imbalanced IoT intrusion-detection pipeline.

Ingestion, z-score filtering, standardization, recursive feature
elimination, hybrid resampling, from-scratch classifiers and an
evaluation suite, wired together by :func:`iotids.pipeline.run_pipeline`.
"""

__version__ = "0.1.0"
