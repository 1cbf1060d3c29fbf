"""CPPN genomes and the NEAT genetic operators."""
