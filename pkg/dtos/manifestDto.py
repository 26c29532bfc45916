from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class RunStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


class OutputFile(BaseModel):
    path: str            # relative to the run directory
    sha256: str


# -----------------------------
# Run manifest
# -----------------------------

class RunManifest(BaseModel):
    """Written as manifest.json by every CLI run, including failed ones."""
    command: str
    params: Dict[str, Any]
    tool_version: str
    started: datetime
    finished: Optional[datetime] = None
    status: RunStatus = RunStatus.OK
    exit_code: int = 0
    error: Optional[str] = None
    outputs: List[OutputFile] = []
