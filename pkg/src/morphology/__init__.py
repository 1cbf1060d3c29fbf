"""Voxel morphologies decoded from CPPNs and substrates."""
