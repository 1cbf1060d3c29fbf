"""HyperNEAT substrate and weight painting."""
