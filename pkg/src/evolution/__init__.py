"""NEAT and AFPO evolutionary loops."""
