"""Special-relativistic collision kinematics in orthonormal and covariant variables."""

from .collision_map import (
    CollisionBatch,
    CollisionGeometry,
    boost_omega,
    collision_geometry,
    covariant_batch,
    covariant_post_collision_direct,
    invariants_h_s,
    involution_defect,
    mass_shell_energy,
    moller_velocity,
    pair_invariants,
    post_collision,
    post_collision_batch,
    post_collision_covariant,
    scattering_angle,
)
from .derivatives import (
    JacobianEstimate,
    central_difference_jacobian,
    deriv_inv_p0,
    jacobian_determinant_6x6,
    postcollision_jacobian,
)
from .vectors import (
    CovariantMomentum,
    FourVector,
    energies,
    minkowski_dot,
    random_momenta,
    random_unit_vectors,
    unit_vector,
)

__all__ = [
    # Types
    "CollisionBatch",
    "CollisionGeometry",
    "CovariantMomentum",
    "FourVector",
    "JacobianEstimate",
    # Collision map
    "boost_omega",
    "collision_geometry",
    "covariant_batch",
    "covariant_post_collision_direct",
    "invariants_h_s",
    "involution_defect",
    "mass_shell_energy",
    "moller_velocity",
    "pair_invariants",
    "post_collision",
    "post_collision_batch",
    "post_collision_covariant",
    "scattering_angle",
    # Derivatives
    "central_difference_jacobian",
    "deriv_inv_p0",
    "jacobian_determinant_6x6",
    "postcollision_jacobian",
    # Vectors
    "energies",
    "minkowski_dot",
    "random_momenta",
    "random_unit_vectors",
    "unit_vector",
]
