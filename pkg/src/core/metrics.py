"""Prometheus metrics exported by the evaluation server."""

from prometheus_client import Counter, Gauge, Histogram

EVALUATIONS = Counter(
    "morphoneat_evaluations_total",
    "Evaluation requests completed, by outcome",
    ["status"],
)
REJECTIONS = Counter(
    "morphoneat_rejections_total",
    "Evaluation requests refused, by reason",
    ["reason"],
)
COMPUTE_SECONDS = Histogram(
    "morphoneat_compute_seconds",
    "Wall time spent simulating one request",
    buckets=(0.01, 0.1, 0.5, 1, 2, 5, 10, 30, 60, 120, 300),
)
QUEUE_DEPTH = Gauge("morphoneat_queue_depth", "Accepted requests waiting for a worker")
IN_FLIGHT = Gauge("morphoneat_in_flight", "Simulations currently executing")
