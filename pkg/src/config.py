import os
import logging
from typing import Any, Dict, List
from dataclasses import dataclass, field
from dotenv import load_dotenv

load_dotenv()

import yaml

logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

JOB_KINDS = (
    "verify", "random_sweep", "gap_escape", "interior_gap_escape", "graded_escape", "sine_kings",
)

@dataclass
class Job:
    name: str
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

class Config:
    DB_NAME = os.getenv("KINGS_DB", "data/kings.db")
    PLAN_FILE = os.getenv("KINGS_PLAN", "experiments.yml")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

    # Exhaustive enumeration stops at 2**15 tournaments per size
    ENUMERATION_LIMIT = 6
    MAX_WITNESSES = 64
    DOCUMENT_FORMAT_VERSION = 1

    JOBS: List[Job] = []

    @classmethod
    def load_plan(cls, path: str = None) -> List[Job]:
        path = path or cls.PLAN_FILE
        cls.JOBS = []
        if not os.path.exists(path):
            logger.warning(f"{path} not found!")
            return cls.JOBS

        try:
            with open(path, 'r') as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Failed to load plan from {path}: {e}")
            return cls.JOBS

        if not data:
            logger.warning("Plan file is empty")
            return cls.JOBS

        for item in data:
            try:
                kind = str(item["kind"])
                if kind not in JOB_KINDS:
                    logger.error(f"Unknown job kind '{kind}' in plan, skipping")
                    continue
                name = str(item.get("name", kind))
                params = item.get("params") or {}
                if not isinstance(params, dict):
                    logger.error(f"Params of job '{name}' must be a mapping, skipping")
                    continue
                if any(job.name == name for job in cls.JOBS):
                    logger.error(f"Duplicate job name '{name}' in plan, skipping")
                    continue
                cls.JOBS.append(Job(
                    name=name,
                    kind=kind,
                    params=dict(params)
                ))
            except (KeyError, TypeError) as e:
                logger.error(f"Missing required field in plan entry: {e}")
        return cls.JOBS
