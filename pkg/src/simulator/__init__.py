"""Mass-spring voxel soft-body simulator."""
