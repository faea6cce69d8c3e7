"""Remote-environment client for the vtb wire protocol."""

from .checker import ComplianceError, check_remote_env
from .client import RemoteEnv, RemoteError, SessionClosed, WireConnection, remote_make, remote_reset, remote_step
from .spaces import Box, Discrete

__version__ = "0.1.0"
