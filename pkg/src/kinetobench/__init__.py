"""Kinetostatic workbench for planar parallel and generic serial mechanisms.

Library layout:

- :mod:`kinetobench.model`        mechanism descriptions + config loading
- :mod:`kinetobench.fivebar`      five-bar kinematics and velocity matrices
- :mod:`kinetobench.serialchain`  twist Jacobians and characteristic length
- :mod:`kinetobench.conditioning` singular values, condition numbers, classification
- :mod:`kinetobench.forcefield`   force-feedback laws and envelope clamping
- :mod:`kinetobench.atlas`        field grids, iso-curves, workspace boundary, exports
- :mod:`kinetobench.session`      real-time tick engine and deterministic replay
- :mod:`kinetobench.server`       websocket service speaking protocol v1
- :mod:`kinetobench.cli`          command-line surface
"""

from kinetobench.model import (
    FiveBarModel,
    JointLimits,
    SerialChainModel,
    joint_domain_contains,
    load_model,
)
from kinetobench.fivebar import (
    PostureState,
    WorkingMode,
    forward_kinematics,
    inverse_kinematics,
    velocity_matrices,
    workspace_contains,
)
from kinetobench.conditioning import condition_number, fivebar_indices, classify_posture

__version__ = "0.1.0"

__all__ = [
    "FiveBarModel",
    "JointLimits",
    "SerialChainModel",
    "joint_domain_contains",
    "load_model",
    "PostureState",
    "WorkingMode",
    "forward_kinematics",
    "inverse_kinematics",
    "velocity_matrices",
    "workspace_contains",
    "condition_number",
    "fivebar_indices",
    "classify_posture",
    "__version__",
]
