import os

from dotenv import load_dotenv

load_dotenv()


class Settings:
    OUT_DIR: str = os.getenv("HYPGJMS_OUT_DIR", "./runs")
    THREADS: int = int(os.getenv("HYPGJMS_THREADS", "1"))
    LOG_LEVEL: str = os.getenv("HYPGJMS_LOG_LEVEL", "INFO")
    THETA_ORDER: int = int(os.getenv("HYPGJMS_THETA_ORDER", "32"))
    GRADING_LEVELS: int = int(os.getenv("HYPGJMS_GRADING_LEVELS", "8"))
    BLOW_CAP: float = float(os.getenv("HYPGJMS_BLOW_CAP", "1e8"))
    TOL: float = float(os.getenv("HYPGJMS_TOL", "1e-10"))

settings = Settings()
