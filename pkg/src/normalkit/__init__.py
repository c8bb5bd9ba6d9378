"""normalkit - Normal preconditioning for nonsymmetric systems from convection-diffusion discretizations."""

__version__ = "0.1.0"
