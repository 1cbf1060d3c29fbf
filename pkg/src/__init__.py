"""morphoneat - neuroevolution of voxel soft-actuator morphologies."""

__version__ = "0.1.0"
__author__ = "morphoneat contributors"
